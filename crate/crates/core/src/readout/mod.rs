//! Trained readout layers and evaluation metrics.

mod logistic;
mod metrics;
mod ridge;
mod standardize;

pub use logistic::{
    fit_logistic, sigmoid, LogisticModel, LogisticObjective, DEFAULT_MAX_ITERS, DEFAULT_THRESHOLD, DEFAULT_TOL,
};
pub use metrics::{nmse, roc_auc, trapezoid, Confusion, RocCurve};
pub use ridge::{fit_ridge, select_lambda, LambdaSelection, RidgeModel, DEFAULT_LAMBDA_GRID, VALIDATION_FRACTION};
pub use standardize::Standardizer;
