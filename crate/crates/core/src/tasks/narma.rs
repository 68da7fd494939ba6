//! NARMA10 benchmark series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INPUT_LOW: f64 = 0.0;
pub const INPUT_HIGH: f64 = 0.5;
pub const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Narma10Config {
    /// Total samples; when absent, `train + test + max_lag + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    pub seed: u64,
    pub train_points: usize,
    pub test_points: usize,
    pub lags: Vec<usize>,
}

impl Default for Narma10Config {
    fn default() -> Self {
        Self {
            length: None,
            seed: 0,
            train_points: 1000,
            test_points: 1000,
            lags: vec![0, 1, 2, 3, 9, 10, 11, 12],
        }
    }
}

impl Narma10Config {
    pub fn resolved_length(&self) -> usize {
        let max_lag = self.lags.iter().copied().max().unwrap_or(0);
        self.length
            .unwrap_or(self.train_points + self.test_points + max_lag + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NarmaSeries {
    /// `μ(n)`, uniform on [0, 0.5].
    pub inputs: Vec<f64>,
    /// `y(n)`, with `y(0) = 0`.
    pub outputs: Vec<f64>,
    /// Seed of the accepted input draw.
    pub seed_used: u64,
    pub attempts: usize,
}

/// Runs the tenth-order recurrence with zero initial history:
/// `y(n+1) = 0.3μ(n) + 0.05y(n)Σ_{i=0..9} y(n−i) + 1.5μ(n−9)μ(n) + 0.1`.
pub fn narma10_response(inputs: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; inputs.len()];
    for n in 0..inputs.len().saturating_sub(1) {
        let window: f64 = y[n.saturating_sub(9)..=n].iter().sum();
        let mu_lag9 = if n >= 9 { inputs[n - 9] } else { 0.0 };
        y[n + 1] = 0.3 * inputs[n] + 0.05 * y[n] * window + 1.5 * mu_lag9 * inputs[n] + 0.1;
    }
    y
}

/// Draws inputs and runs the recurrence. If any `|y| > 1` the inputs are
/// redrawn with `seed + 1`, up to [`MAX_ATTEMPTS`] draws in total.
pub fn gen_narma10(cfg: &Narma10Config) -> Result<NarmaSeries> {
    let len = cfg.resolved_length();
    if len < 2 {
        return Err(Error::InvalidParameter(format!("narma10 length must be >= 2, got {len}")));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let seed = cfg.seed.wrapping_add(attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<f64> = (0..len).map(|_| rng.random_range(INPUT_LOW..=INPUT_HIGH)).collect();
        let outputs = narma10_response(&inputs);
        if outputs.iter().all(|v| v.abs() <= 1.0) {
            return Ok(NarmaSeries {
                inputs,
                outputs,
                seed_used: seed,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::Divergence(format!(
        "narma10 exceeded |y| > 1 on all {MAX_ATTEMPTS} input draws starting at seed {}",
        cfg.seed
    )))
}
