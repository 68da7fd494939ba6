//! Digital next-generation reservoir features: tapped-delay embedding of the
//! input series and the constant ⊕ linear ⊕ quadratic feature vector.
//!
//! This is the reference the photonic simulation is checked against.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::textfmt::fmt_f64;

/// Rows are time steps (or samples), columns are features.
pub type FeatureMatrix = DMatrix<f64>;

/// One entry of the flat input vector: `series[channel][t - lag]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tap {
    pub channel: usize,
    pub lag: usize,
}

/// Ordered list of delay taps that make up the flat input vector `X(t)`.
///
/// Taps are listed channel by channel, each channel with strictly
/// increasing lags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingSpec {
    taps: Vec<Tap>,
}

impl EmbeddingSpec {
    pub fn from_taps(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParameter("embedding needs at least one tap".into()));
        }
        let mut last_lag: std::collections::HashMap<usize, usize> = Default::default();
        for tap in &taps {
            if let Some(&prev) = last_lag.get(&tap.channel) {
                if tap.lag <= prev {
                    return Err(Error::InvalidParameter(format!(
                        "lags for channel {} must be strictly increasing (got {} after {})",
                        tap.channel, tap.lag, prev
                    )));
                }
            }
            last_lag.insert(tap.channel, tap.lag);
        }
        Ok(Self { taps })
    }

    /// Same lag set on every listed channel, channel-major ordering.
    pub fn uniform(channels: &[usize], lags: &[usize]) -> Result<Self> {
        let taps = channels
            .iter()
            .flat_map(|&channel| lags.iter().map(move |&lag| Tap { channel, lag }))
            .collect();
        Self::from_taps(taps)
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn dim(&self) -> usize {
        self.taps.len()
    }

    pub fn max_lag(&self) -> usize {
        self.taps.iter().map(|t| t.lag).max().unwrap_or(0)
    }
}

/// Lag-embeds `series`. Row `r` holds `X(t)` for `t = r + max_lag`; warm-up
/// rows whose taps would reach before the start are dropped.
pub fn embed(series: &TimeSeries, spec: &EmbeddingSpec) -> Result<FeatureMatrix> {
    let max_lag = spec.max_lag();
    if series.len() < max_lag + 1 {
        return Err(Error::InsufficientHistory {
            len: series.len(),
            needed: max_lag + 1,
        });
    }
    if let Some(bad) = spec.taps().iter().find(|t| t.channel >= series.channels()) {
        return Err(Error::DimensionMismatch(format!(
            "tap refers to channel {} but the series has {}",
            bad.channel,
            series.channels()
        )));
    }
    let rows = series.len() - max_lag;
    Ok(DMatrix::from_fn(rows, spec.dim(), |r, c| {
        let tap = spec.taps()[c];
        series.channel(tap.channel)[r + max_lag - tap.lag]
    }))
}

/// Identity of one feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Monomial {
    Constant,
    Linear(usize),
    /// `x_p * x_q` with `p <= q`.
    Quadratic(usize, usize),
}

/// Column layout of `C ⊕ x ⊕ (x ⊗ x)_{p<=q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVectorLayout {
    pub constant: f64,
    pub n: usize,
}

impl FeatureVectorLayout {
    pub fn new(n: usize) -> Self {
        Self { constant: 1.0, n }
    }

    pub fn with_constant(n: usize, constant: f64) -> Self {
        Self { constant, n }
    }

    pub fn quadratic_dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn total_dim(&self) -> usize {
        1 + self.n + self.quadratic_dim()
    }

    pub fn index_of(&self, m: Monomial) -> usize {
        match m {
            Monomial::Constant => 0,
            Monomial::Linear(k) => {
                assert!(k < self.n);
                1 + k
            }
            Monomial::Quadratic(p, q) => {
                assert!(p <= q && q < self.n);
                // rows above p of the upper triangle hold n + (n-1) + ... + (n-p+1) entries
                1 + self.n + p * (2 * self.n - p + 1) / 2 + (q - p)
            }
        }
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        let mut out = Vec::with_capacity(self.total_dim());
        out.push(Monomial::Constant);
        out.extend((0..self.n).map(Monomial::Linear));
        for p in 0..self.n {
            for q in p..self.n {
                out.push(Monomial::Quadratic(p, q));
            }
        }
        out
    }

    /// Column names: `1`, `x1`, ..., `x1*x1`, `x1*x2`, ... (1-based).
    pub fn names(&self) -> Vec<String> {
        self.monomials()
            .into_iter()
            .map(|m| match m {
                Monomial::Constant => "1".to_string(),
                Monomial::Linear(k) => format!("x{}", k + 1),
                Monomial::Quadratic(p, q) => format!("x{}*x{}", p + 1, q + 1),
            })
            .collect()
    }

    /// Writes the feature row for input `x` into `out`.
    pub fn fill_row(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.total_dim());
        out[0] = self.constant;
        out[1..=self.n].copy_from_slice(x);
        let mut idx = 1 + self.n;
        for p in 0..self.n {
            for q in p..self.n {
                out[idx] = x[p] * x[q];
                idx += 1;
            }
        }
    }
}

/// Expands each input row into `[C, x_1..x_n, x_1², x_1x_2, .., x_n²]`.
pub fn ngrc_features(x: &FeatureMatrix, layout: &FeatureVectorLayout) -> Result<FeatureMatrix> {
    if x.ncols() != layout.n {
        return Err(Error::DimensionMismatch(format!(
            "input has {} columns, layout expects {}",
            x.ncols(),
            layout.n
        )));
    }
    let dim = layout.total_dim();
    let mut out = DMatrix::zeros(x.nrows(), dim);
    let mut xrow = vec![0.0; layout.n];
    let mut frow = vec![0.0; dim];
    for r in 0..x.nrows() {
        for (c, v) in xrow.iter_mut().enumerate() {
            *v = x[(r, c)];
        }
        layout.fill_row(&xrow, &mut frow);
        for (c, v) in frow.iter().enumerate() {
            out[(r, c)] = *v;
        }
    }
    Ok(out)
}

/// CSV with a header row naming each column.
pub fn matrix_to_csv(m: &FeatureMatrix, names: &[String]) -> Result<String> {
    if names.len() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} columns",
            names.len(),
            m.ncols()
        )));
    }
    let mut out = names.join(",");
    out.push('\n');
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lag_embedding_drops_warm_up() {
        let s = TimeSeries::single("x", vec![1.0, 2.0, 3.0, 4.0]);
        let spec = EmbeddingSpec::uniform(&[0], &[0, 1]).unwrap();
        let x = embed(&s, &spec).unwrap();
        assert_eq!(x, DMatrix::from_row_slice(3, 2, &[2.0, 1.0, 3.0, 2.0, 4.0, 3.0]));
    }

    #[test]
    fn short_series_is_insufficient_history() {
        let s = TimeSeries::single("x", vec![1.0, 2.0]);
        let spec = EmbeddingSpec::uniform(&[0], &[0, 2]).unwrap();
        assert!(matches!(
            embed(&s, &spec),
            Err(Error::InsufficientHistory { len: 2, needed: 3 })
        ));
    }

    #[test]
    fn invalid_specs() {
        assert!(EmbeddingSpec::uniform(&[0], &[]).is_err());
        assert!(EmbeddingSpec::uniform(&[0], &[0, 0]).is_err());
        assert!(EmbeddingSpec::uniform(&[0], &[3, 1]).is_err());
        let dup = vec![Tap { channel: 0, lag: 1 }, Tap { channel: 1, lag: 0 }, Tap { channel: 0, lag: 1 }];
        assert!(EmbeddingSpec::from_taps(dup).is_err());
    }

    #[test]
    fn benchmark_embeddings_have_eight_inputs() {
        let lorenz = EmbeddingSpec::uniform(&[0, 1], &[0, 5, 10, 15]).unwrap();
        assert_eq!(lorenz.dim(), 8);
        assert_eq!(lorenz.max_lag(), 15);
        let narma = EmbeddingSpec::uniform(&[0], &[0, 1, 2, 3, 9, 10, 11, 12]).unwrap();
        assert_eq!(narma.dim(), 8);
        assert_eq!(FeatureVectorLayout::new(8).total_dim(), 45);
    }

    #[test]
    fn hand_expanded_rows() {
        let layout = FeatureVectorLayout::new(2);
        let f = ngrc_features(&DMatrix::from_row_slice(1, 2, &[1.0, 2.0]), &layout).unwrap();
        assert_eq!(f.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 2.0, 1.0, 2.0, 4.0]);

        let layout = FeatureVectorLayout::new(8);
        let f = ngrc_features(&DMatrix::zeros(1, 8), &layout).unwrap();
        assert_eq!(f[(0, 0)], 1.0);
        assert!(f.row(0).iter().skip(1).all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let layout = FeatureVectorLayout::new(3);
        assert!(ngrc_features(&DMatrix::zeros(2, 2), &layout).is_err());
    }

    #[test]
    fn index_map_matches_enumeration() {
        for n in 1..10 {
            let layout = FeatureVectorLayout::new(n);
            let ms = layout.monomials();
            assert_eq!(ms.len(), layout.total_dim());
            for (i, m) in ms.iter().enumerate() {
                assert_eq!(layout.index_of(*m), i, "n={n} {m:?}");
            }
        }
    }

    #[test]
    fn csv_header_names_monomials() {
        let layout = FeatureVectorLayout::new(2);
        let f = ngrc_features(&DMatrix::from_row_slice(1, 2, &[1.0, 2.0]), &layout).unwrap();
        let csv = matrix_to_csv(&f, &layout.names()).unwrap();
        assert!(csv.starts_with("1,x1,x2,x1*x1,x1*x2,x2*x2\n"));
    }

    fn brute_force(x: &[f64], c: f64) -> Vec<f64> {
        let n = x.len();
        let mut v = vec![c];
        v.extend_from_slice(x);
        for p in 0..n {
            for q in 0..n {
                if p <= q {
                    v.push(x[p] * x[q]);
                }
            }
        }
        v
    }

    proptest! {
        #[test]
        fn width_invariant(n in 1usize..20) {
            let layout = FeatureVectorLayout::new(n);
            let f = ngrc_features(&DMatrix::zeros(1, n), &layout).unwrap();
            prop_assert_eq!(f.ncols(), 1 + n + n * (n + 1) / 2);
        }

        #[test]
        fn matches_double_loop_oracle(x in prop::collection::vec(-3.0f64..3.0, 1..=4), c in -2.0f64..2.0) {
            let n = x.len();
            let layout = FeatureVectorLayout::with_constant(n, c);
            let f = ngrc_features(&DMatrix::from_row_slice(1, n, &x), &layout).unwrap();
            let expect = brute_force(&x, c);
            prop_assert_eq!(f.row(0).iter().copied().collect::<Vec<_>>(), expect);
        }

        #[test]
        fn scaling_law(x in prop::collection::vec(-2.0f64..2.0, 1..=6), alpha in -3.0f64..3.0) {
            let n = x.len();
            let layout = FeatureVectorLayout::new(n);
            let base = ngrc_features(&DMatrix::from_row_slice(1, n, &x), &layout).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let f = ngrc_features(&DMatrix::from_row_slice(1, n, &scaled), &layout).unwrap();
            prop_assert_eq!(f[(0, 0)], base[(0, 0)]);
            for k in 1..=n {
                prop_assert!((f[(0, k)] - alpha * base[(0, k)]).abs() <= 1e-12 * (1.0 + base[(0, k)].abs()));
            }
            for k in n + 1..layout.total_dim() {
                prop_assert!((f[(0, k)] - alpha * alpha * base[(0, k)]).abs() <= 1e-12 * (1.0 + base[(0, k)].abs()));
            }
        }

        #[test]
        fn swapping_inputs_permutes_columns(x in prop::collection::vec(-2.0f64..2.0, 2..=6), i in 0usize..6, j in 0usize..6) {
            let n = x.len();
            let (i, j) = (i % n, j % n);
            let layout = FeatureVectorLayout::new(n);
            let mut swapped = x.clone();
            swapped.swap(i, j);
            let a = ngrc_features(&DMatrix::from_row_slice(1, n, &x), &layout).unwrap();
            let b = ngrc_features(&DMatrix::from_row_slice(1, n, &swapped), &layout).unwrap();
            let perm = |k: usize| if k == i { j } else if k == j { i } else { k };
            for m in layout.monomials() {
                let moved = match m {
                    Monomial::Constant => Monomial::Constant,
                    Monomial::Linear(k) => Monomial::Linear(perm(k)),
                    Monomial::Quadratic(p, q) => {
                        let (p, q) = (perm(p), perm(q));
                        Monomial::Quadratic(p.min(q), p.max(q))
                    }
                };
                prop_assert_eq!(a[(0, layout.index_of(m))], b[(0, layout.index_of(moved))]);
            }
            let mut va: Vec<f64> = a.iter().copied().collect();
            let mut vb: Vec<f64> = b.iter().copied().collect();
            va.sort_by(f64::total_cmp);
            vb.sort_by(f64::total_cmp);
            prop_assert_eq!(va, vb);
        }
    }
}
