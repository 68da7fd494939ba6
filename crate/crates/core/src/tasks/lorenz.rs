//! Lorenz63 data for next-step inference of `z` from delayed `x` and `y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzConfig {
    pub dt: f64,
    pub transient_steps: usize,
    pub train_points: usize,
    pub test_points: usize,
    pub initial_state: [f64; 3],
    /// Sample lags applied to both `x` and `y`.
    pub lags: Vec<usize>,
}

impl Default for LorenzConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            transient_steps: 1000,
            train_points: 400,
            test_points: 600,
            initial_state: [1.0, 1.0, 1.0],
            lags: vec![0, 5, 10, 15],
        }
    }
}

impl LorenzConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("lorenz dt must be > 0, got {}", self.dt)));
        }
        if self.train_points < 2 || self.test_points < 2 {
            return Err(Error::InvalidParameter("lorenz needs at least 2 train and 2 test points".into()));
        }
        if self.initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lorenz initial state".into()));
        }
        Ok(())
    }
}

/// Right-hand side with the classic coefficients (10, 28, 8/3).
pub fn derivative(s: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = s;
    [10.0 * (y - x), x * (28.0 - z) - y, x * y - 8.0 * z / 3.0]
}

fn axpy(s: [f64; 3], a: f64, k: [f64; 3]) -> [f64; 3] {
    [s[0] + a * k[0], s[1] + a * k[1], s[2] + a * k[2]]
}

/// One classic fourth-order Runge–Kutta step.
pub fn rk4_step(s: [f64; 3], dt: f64) -> [f64; 3] {
    let k1 = derivative(s);
    let k2 = derivative(axpy(s, dt / 2.0, k1));
    let k3 = derivative(axpy(s, dt / 2.0, k2));
    let k4 = derivative(axpy(s, dt, k3));
    let w = dt / 6.0;
    std::array::from_fn(|i| s[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// States after each of `steps` RK4 steps (the initial state is not included).
pub fn integrate(initial: [f64; 3], dt: f64, steps: usize) -> Result<Vec<[f64; 3]>> {
    let mut s = initial;
    let mut out = Vec::with_capacity(steps);
    for step in 0..steps {
        s = rk4_step(s, dt);
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("lorenz state at step {}", step + 1)));
        }
        out.push(s);
    }
    Ok(out)
}

/// Three standardized channels `x, y, z`.
///
/// Returns `train + test + max_lag + 1` samples after the transient so that
/// embedding warm-up and the one-step-ahead target do not eat into the
/// split sizes. Mean and variance come from the training segment (the first
/// `max_lag + 1 + train` samples) only.
pub fn gen_lorenz(cfg: &LorenzConfig, max_lag: usize) -> Result<TimeSeries> {
    cfg.validate()?;
    let keep = cfg.train_points + cfg.test_points + max_lag + 1;
    let mut s = cfg.initial_state;
    for state in integrate(s, cfg.dt, cfg.transient_steps)? {
        s = state;
    }
    let states = integrate(s, cfg.dt, keep)?;
    let train_len = max_lag + 1 + cfg.train_points;
    let mut channels: Vec<Vec<f64>> = (0..3).map(|c| states.iter().map(|st| st[c]).collect()).collect();
    for ch in &mut channels {
        let seg = &ch[..train_len];
        let mean = seg.iter().sum::<f64>() / train_len as f64;
        let var = seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / train_len as f64;
        if var == 0.0 {
            return Err(Error::ZeroVariance("lorenz training segment".into()));
        }
        let sd = var.sqrt();
        for v in ch.iter_mut() {
            *v = (*v - mean) / sd;
        }
    }
    TimeSeries::new(vec!["x".into(), "y".into(), "z".into()], channels)
}
