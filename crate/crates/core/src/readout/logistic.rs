//! L2-regularized logistic readout trained by full-batch gradient descent.

use nalgebra::{DMatrix, DVector};

use super::standardize::{check_finite, Standardizer};
use crate::error::{Error, Result};
use crate::textfmt::NumericDoc;

pub const DEFAULT_MAX_ITERS: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Regularized mean negative log-likelihood over a standardized design.
///
/// Parameters are laid out as `[w_0, .., w_{k-1}, bias]`; the bias is not
/// penalized.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    design: DMatrix<f64>,
    labels: DVector<f64>,
    l2: f64,
}

impl LogisticObjective {
    pub fn new(design: DMatrix<f64>, labels: &[bool], l2: f64) -> Self {
        let labels = DVector::from_iterator(labels.len(), labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));
        Self { design, labels, l2 }
    }

    pub fn dim(&self) -> usize {
        self.design.ncols() + 1
    }

    fn logits(&self, params: &DVector<f64>) -> DVector<f64> {
        let k = self.design.ncols();
        let mut z = &self.design * params.rows(0, k);
        z.add_scalar_mut(params[k]);
        z
    }

    pub fn loss(&self, params: &DVector<f64>) -> f64 {
        let k = self.design.ncols();
        let z = self.logits(params);
        let n = self.labels.len() as f64;
        let nll: f64 = z.iter().zip(self.labels.iter()).map(|(&z, &y)| softplus(z) - y * z).sum();
        nll / n + 0.5 * self.l2 * params.rows(0, k).norm_squared()
    }

    pub fn gradient(&self, params: &DVector<f64>) -> DVector<f64> {
        let k = self.design.ncols();
        let n = self.labels.len() as f64;
        let z = self.logits(params);
        let resid = DVector::from_iterator(
            z.len(),
            z.iter().zip(self.labels.iter()).map(|(&z, &y)| (sigmoid(z) - y) / n),
        );
        let mut g = DVector::zeros(k + 1);
        g.rows_mut(0, k).copy_from(&(self.design.tr_mul(&resid) + params.rows(0, k) * self.l2));
        g[k] = resid.sum();
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// Per-feature weights in standardized units; flagged columns are 0.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
    pub threshold: f64,
    pub standardizer: Standardizer,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub loss_trace: Vec<f64>,
}

/// Minimizes the regularized logistic loss from zero initialization.
///
/// Each step starts from a Barzilai-Borwein step length and halves it until
/// the Armijo condition holds, so the recorded loss never increases.
/// Stops when `‖∇‖∞ < tol` or after `max_iters`; hitting the iteration cap
/// returns the model with `converged = false`.
pub fn fit_logistic(
    features: &DMatrix<f64>,
    labels: &[bool],
    l2_lambda: f64,
    max_iters: usize,
    tol: f64,
) -> Result<LogisticModel> {
    if features.nrows() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
        return Err(Error::SingleClass);
    }
    if !(l2_lambda >= 0.0 && l2_lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("l2_lambda must be >= 0, got {l2_lambda}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    check_finite(features, "logistic features")?;

    let standardizer = Standardizer::fit(features)?;
    let active = standardizer.active();
    let z = standardizer.transform(features)?;
    let design = DMatrix::from_fn(z.nrows(), active.len(), |r, c| z[(r, active[c])]);
    let objective = LogisticObjective::new(design, labels, l2_lambda);

    let mut params = DVector::zeros(objective.dim());
    let mut loss = objective.loss(&params);
    let mut grad = objective.gradient(&params);
    let mut trace = vec![loss];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = grad.amax() < tol;

    while !converged && iterations < max_iters {
        let gnorm2 = grad.norm_squared();
        let mut accepted = None;
        let mut trial = step;
        for _ in 0..MAX_HALVINGS {
            let candidate = &params - &grad * trial;
            let cand_loss = objective.loss(&candidate);
            if cand_loss <= loss - ARMIJO_C * trial * gnorm2 {
                accepted = Some((candidate, cand_loss));
                break;
            }
            trial *= 0.5;
        }
        let Some((next, next_loss)) = accepted else {
            // no descent possible at working precision
            break;
        };
        let next_grad = objective.gradient(&next);
        let s = &next - &params;
        let yv = &next_grad - &grad;
        let sy = s.dot(&yv);
        step = if sy > 0.0 {
            (s.norm_squared() / sy).clamp(1e-10, 1e10)
        } else {
            (trial * 2.0).min(1e10)
        };
        params = next;
        loss = next_loss;
        grad = next_grad;
        trace.push(loss);
        iterations += 1;
        converged = grad.amax() < tol;
    }

    let k = active.len();
    let mut weights = vec![0.0; features.ncols()];
    for (c, &col) in active.iter().enumerate() {
        weights[col] = params[c];
    }
    Ok(LogisticModel {
        weights,
        bias: params[k],
        l2_lambda,
        threshold: DEFAULT_THRESHOLD,
        standardizer,
        iterations,
        final_grad_norm: grad.amax(),
        converged,
        loss_trace: trace,
    })
}

impl LogisticModel {
    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParameter(format!("threshold must be in (0, 1), got {threshold}")));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn decision_function(&self, features: &DMatrix<f64>) -> Result<Vec<f64>> {
        let z = self.standardizer.transform(features)?;
        Ok(z.row_iter()
            .map(|row| row.iter().zip(self.weights.iter()).map(|(x, w)| x * w).sum::<f64>() + self.bias)
            .collect())
    }

    /// Probabilities, kept strictly inside (0, 1).
    pub fn predict_proba(&self, features: &DMatrix<f64>) -> Result<Vec<f64>> {
        const HI: f64 = 1.0 - f64::EPSILON / 2.0;
        Ok(self
            .decision_function(features)?
            .into_iter()
            .map(|z| sigmoid(z).clamp(f64::MIN_POSITIVE, HI))
            .collect())
    }

    /// Positive when the probability reaches the threshold (ties are positive).
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<bool>> {
        Ok(self
            .predict_proba(features)?
            .into_iter()
            .map(|p| p >= self.threshold)
            .collect())
    }

    pub fn to_doc(&self) -> NumericDoc {
        let mut doc = NumericDoc::new("photonic-ngrc logistic readout");
        doc.push("features", self.weights.len());
        doc.push_f64("l2_lambda", self.l2_lambda);
        doc.push_f64("threshold", self.threshold);
        doc.push("iterations", self.iterations);
        doc.push("converged", self.converged);
        doc.push_f64("final_grad_norm", self.final_grad_norm);
        let s = &self.standardizer;
        doc.push_block("means", vec![s.means.clone()]);
        doc.push_block("scales", vec![s.scales.clone()]);
        doc.push_block(
            "flagged",
            vec![s.flagged.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect()],
        );
        doc.push_block("weights", vec![self.weights.clone()]);
        doc.push_block("bias", vec![vec![self.bias]]);
        doc
    }
}
