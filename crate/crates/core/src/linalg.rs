use nalgebra::DMatrix;

/// Singular values count as nonzero above this fraction of the largest one.
pub const RANK_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `σ_max / σ_min` over the `min(rows, cols)` singular values; infinite
    /// when the matrix is rank deficient to working precision.
    pub condition: f64,
}

impl RankReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.singular_values.len()
    }
}

pub fn numerical_rank(m: &DMatrix<f64>) -> RankReport {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv.first().copied().unwrap_or(0.0);
    let rank = if max > 0.0 {
        sv.iter().filter(|&&s| s > RANK_RTOL * max).count()
    } else {
        0
    };
    let min = sv.last().copied().unwrap_or(0.0);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    RankReport {
        rank,
        singular_values: sv,
        condition,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        let id = DMatrix::<f64>::identity(4, 4);
        let r = numerical_rank(&id);
        assert_eq!(r.rank, 4);
        assert!((r.condition - 1.0).abs() < 1e-12);

        let deficient = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let r = numerical_rank(&deficient);
        assert_eq!(r.rank, 1);
        assert!(!r.full_rank());

        assert_eq!(numerical_rank(&DMatrix::zeros(2, 3)).rank, 0);
    }
}
