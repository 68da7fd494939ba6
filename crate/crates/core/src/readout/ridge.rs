//! Tikhonov-regularized linear readout.

use nalgebra::{Cholesky, DMatrix};

use super::standardize::{check_finite, Standardizer};
use crate::error::{Error, Result};
use crate::textfmt::NumericDoc;

/// Default regularization grid searched on a tail-held-out validation split.
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [1e-9, 1e-7, 1e-5, 1e-3, 1e-1];

/// Fraction of training rows (taken from the end) used to pick lambda.
pub const VALIDATION_FRACTION: f64 = 0.2;

/// Linear map from standardized features (plus an unpenalized bias) to
/// targets.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    /// targets × features, in standardized feature units. Flagged columns are 0.
    pub weights: DMatrix<f64>,
    pub bias: Vec<f64>,
    pub lambda: f64,
    pub standardizer: Standardizer,
    /// Sum of squared training residuals per target.
    pub train_sse: Vec<f64>,
}

pub fn fit_ridge(features: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> Result<RidgeModel> {
    if features.nrows() != targets.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} target rows",
            features.nrows(),
            targets.nrows()
        )));
    }
    if features.nrows() < 2 {
        return Err(Error::InvalidParameter("ridge needs at least 2 rows".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    check_finite(features, "ridge features")?;
    check_finite(targets, "ridge targets")?;

    let standardizer = Standardizer::fit(features)?;
    let active = standardizer.active();
    let z = standardizer.transform(features)?;
    let rows = features.nrows();
    let k = active.len();

    // design = [z_active | 1]
    let design = DMatrix::from_fn(rows, k + 1, |r, c| if c < k { z[(r, active[c])] } else { 1.0 });
    let mut gram = design.tr_mul(&design);
    for c in 0..k {
        gram[(c, c)] += lambda;
    }
    let rhs = design.tr_mul(targets);
    let gram_diag_max = (0..=k).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::Numeric(format!(
            "normal equations are not positive definite (lambda = {lambda}); features are collinear"
        ))
    })?;
    // a pivot at rounding level means the factorization only succeeded by accident
    let l = chol.l_dirty();
    let max_diag = gram_diag_max;
    let min_pivot = (0..=k).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot <= f64::EPSILON * (k + 1) as f64 * max_diag {
        return Err(Error::Numeric(format!(
            "normal equations are singular to working precision (lambda = {lambda}); features are collinear"
        )));
    }
    let solution = chol.solve(&rhs);

    let mut weights = DMatrix::zeros(targets.ncols(), features.ncols());
    for (c, &col) in active.iter().enumerate() {
        for t in 0..targets.ncols() {
            weights[(t, col)] = solution[(c, t)];
        }
    }
    let bias: Vec<f64> = (0..targets.ncols()).map(|t| solution[(k, t)]).collect();
    if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ridge weights".into()));
    }

    let mut model = RidgeModel {
        weights,
        bias,
        lambda,
        standardizer,
        train_sse: Vec::new(),
    };
    let pred = model.predict(features)?;
    model.train_sse = sse_per_target(&pred, targets);
    Ok(model)
}

fn sse_per_target(pred: &DMatrix<f64>, truth: &DMatrix<f64>) -> Vec<f64> {
    (0..truth.ncols())
        .map(|t| {
            pred.column(t)
                .iter()
                .zip(truth.column(t).iter())
                .map(|(p, y)| (p - y) * (p - y))
                .sum()
        })
        .collect()
}

/// Validation score of each lambda and the winner.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSelection {
    pub lambda: f64,
    /// (lambda, validation sum of squared errors over all targets)
    pub scores: Vec<(f64, f64)>,
}

/// Fits on the leading 80% of rows and scores on the trailing 20% for each
/// lambda; the smallest validation error wins, earlier grid entries on ties.
/// A lambda whose fit fails numerically scores as infinite.
pub fn select_lambda(features: &DMatrix<f64>, targets: &DMatrix<f64>, grid: &[f64]) -> Result<LambdaSelection> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    let rows = features.nrows();
    let fit_rows = ((1.0 - VALIDATION_FRACTION) * rows as f64).floor() as usize;
    if fit_rows < 2 || fit_rows >= rows {
        return Err(Error::InvalidParameter(format!(
            "{rows} rows are too few for a validation split"
        )));
    }
    let head_x = features.rows(0, fit_rows).into_owned();
    let head_y = targets.rows(0, fit_rows).into_owned();
    let tail_x = features.rows(fit_rows, rows - fit_rows).into_owned();
    let tail_y = targets.rows(fit_rows, rows - fit_rows).into_owned();

    let mut scores = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let score = match fit_ridge(&head_x, &head_y, lambda) {
            Ok(model) => sse_per_target(&model.predict(&tail_x)?, &tail_y).iter().sum(),
            Err(Error::Numeric(_)) | Err(Error::NonFinite(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        scores.push((lambda, score));
    }
    let (lambda, best) = scores
        .iter()
        .copied()
        .fold((grid[0], f64::INFINITY), |acc, (l, s)| if s < acc.1 { (l, s) } else { acc });
    if !best.is_finite() {
        return Err(Error::Numeric("no lambda in the grid produced a finite fit".into()));
    }
    Ok(LambdaSelection { lambda, scores })
}

impl RidgeModel {
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let z = self.standardizer.transform(features)?;
        let mut out = z * self.weights.transpose();
        for mut row in out.row_iter_mut() {
            for (v, b) in row.iter_mut().zip(self.bias.iter()) {
                *v += b;
            }
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> NumericDoc {
        let mut doc = NumericDoc::new("photonic-ngrc ridge readout");
        doc.push("features", self.weights.ncols());
        doc.push("targets", self.weights.nrows());
        doc.push_f64("lambda", self.lambda);
        let s = &self.standardizer;
        doc.push_block("means", vec![s.means.clone()]);
        doc.push_block("scales", vec![s.scales.clone()]);
        doc.push_block(
            "flagged",
            vec![s.flagged.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect()],
        );
        doc.push_block(
            "weights",
            self.weights.row_iter().map(|r| r.iter().copied().collect()).collect(),
        );
        doc.push_block("bias", vec![self.bias.clone()]);
        doc.push_block("train_sse", vec![self.train_sse.clone()]);
        doc
    }

    pub fn from_doc(doc: &NumericDoc) -> Result<Self> {
        let nf = doc.get_usize("features")?;
        let nt = doc.get_usize("targets")?;
        let one_row = |name: &str, len: usize| -> Result<Vec<f64>> {
            let b = doc.block(name)?;
            match b {
                [row] if row.len() == len => Ok(row.clone()),
                _ => Err(Error::Parse {
                    what: "ridge model".into(),
                    reason: format!("block `{name}` must be one row of {len} values"),
                }),
            }
        };
        let w = doc.block("weights")?;
        if w.len() != nt || w.iter().any(|r| r.len() != nf) {
            return Err(Error::Parse {
                what: "ridge model".into(),
                reason: format!("weights must be {nt} x {nf}"),
            });
        }
        Ok(Self {
            weights: DMatrix::from_fn(nt, nf, |t, f| w[t][f]),
            bias: one_row("bias", nt)?,
            lambda: doc.get_f64("lambda")?,
            standardizer: Standardizer {
                means: one_row("means", nf)?,
                scales: one_row("scales", nf)?,
                flagged: one_row("flagged", nf)?.iter().map(|&v| v != 0.0).collect(),
            },
            train_sse: one_row("train_sse", nt)?,
        })
    }
}
