use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Column-wise zero-mean / unit-variance scaling fitted on training rows.
///
/// Columns whose training variance is zero keep scale 1 and are flagged;
/// readouts give flagged columns zero weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub flagged: Vec<bool>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::InvalidParameter("cannot standardize an empty matrix".into()));
        }
        let n = x.nrows() as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        let mut flagged = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            // relative cutoff: a constant column can pick up rounding noise in the mean
            let constant = sd <= 1e-12 * mean.abs().max(f64::MIN_POSITIVE) || sd == 0.0;
            means.push(mean);
            scales.push(if constant { 1.0 } else { sd });
            flagged.push(constant);
        }
        Ok(Self {
            means,
            scales,
            flagged,
        })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Indices of non-flagged columns.
    pub fn active(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&c| !self.flagged[c]).collect()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, standardizer was fitted on {}",
                x.ncols(),
                self.dim()
            )));
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
            if self.flagged[c] {
                0.0
            } else {
                (x[(r, c)] - self.means[c]) / self.scales[c]
            }
        }))
    }
}

pub(crate) fn check_finite(x: &DMatrix<f64>, what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_unit_variance_and_flags() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.flagged, vec![false, true]);
        assert_eq!(s.scales[1], 1.0);
        assert_eq!(s.active(), vec![0]);
        let z = s.transform(&x).unwrap();
        let col: Vec<f64> = z.column(0).iter().copied().collect();
        assert!(col.iter().sum::<f64>().abs() < 1e-12);
        assert!((col.iter().map(|v| v * v).sum::<f64>() / 4.0 - 1.0).abs() < 1e-12);
        assert!(z.column(1).iter().all(|&v| v == 0.0));
        assert!(s.transform(&DMatrix::zeros(1, 3)).is_err());
    }
}
