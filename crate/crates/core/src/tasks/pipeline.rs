//! End-to-end task execution: generate, embed, normalize, featurize, fit
//! the readout and score it.

use nalgebra::DMatrix;

use super::images::{load_class_dirs, preprocess_images, synthetic_images};
use super::lorenz::gen_lorenz;
use super::narma::gen_narma10;
use crate::config::{ExperimentConfig, FeatureRoute, TaskKind};
use crate::error::{Error, Result, StageExt};
use crate::ngrc::{embed, ngrc_features, EmbeddingSpec, FeatureMatrix, FeatureVectorLayout};
use crate::photonic::{build_chip, simulate_forward, ChipModel};
use crate::readout::{
    fit_logistic, fit_ridge, nmse, roc_auc, select_lambda, Confusion, LogisticModel, RidgeModel, RocCurve,
};
use crate::series::TimeSeries;

/// Affine map of each input column onto `[-1, 1]`, fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct InputNormalizer {
    pub centers: Vec<f64>,
    pub half_widths: Vec<f64>,
}

impl InputNormalizer {
    /// Fraction by which the training range is widened on each side.
    pub const HEADROOM: f64 = 0.05;

    pub fn fit(train: &DMatrix<f64>) -> Result<Self> {
        if train.nrows() == 0 {
            return Err(Error::InvalidParameter("cannot normalize without training rows".into()));
        }
        let mut centers = Vec::with_capacity(train.ncols());
        let mut half_widths = Vec::with_capacity(train.ncols());
        for col in train.column_iter() {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite("training inputs".into()));
            }
            let half = (hi - lo) / 2.0 * (1.0 + Self::HEADROOM);
            centers.push((lo + hi) / 2.0);
            half_widths.push(if half > 0.0 { half } else { 1.0 });
        }
        Ok(Self { centers, half_widths })
    }

    /// Normalized copy and the number of entries that had to be clipped.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
        if x.ncols() != self.centers.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} input columns, normalizer fitted on {}",
                x.ncols(),
                self.centers.len()
            )));
        }
        let mut clipped = 0;
        let out = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
            let v = (x[(r, c)] - self.centers[c]) / self.half_widths[c];
            if v.abs() > 1.0 {
                clipped += 1;
            }
            v.clamp(-1.0, 1.0)
        });
        Ok((out, clipped))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    Ridge(RidgeModel),
    Logistic(LogisticModel),
}

/// Test-set predictions. For classification `truth` is 0/1 and `predicted`
/// holds probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    /// Sample index (time step after the warm-up, or image index after shuffling).
    pub index: Vec<usize>,
    pub truth: Vec<f64>,
    pub predicted: Vec<f64>,
    pub labels: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub test_nmse: Option<f64>,
    pub train_nmse: Option<f64>,
    pub lambda: Option<f64>,
    /// (lambda, validation SSE) when lambda was selected from the grid.
    pub lambda_scores: Vec<(f64, f64)>,
    pub accuracy: Option<f64>,
    pub train_accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub confusion: Option<Confusion>,
    pub clipped_train: usize,
    pub clipped_test: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub feature_columns: usize,
}

/// Published hardware figures each task is compared against.
pub fn reference_values(task: TaskKind) -> &'static [(&'static str, f64)] {
    match task {
        TaskKind::Lorenz => &[("reference_nmse", 1.43e-2)],
        TaskKind::Narma10 => &[("reference_nmse", 0.107), ("linear_baseline_nmse", 0.16)],
        TaskKind::Classify => &[("reference_accuracy", 0.921), ("reference_auc", 0.93)],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub metrics: Metrics,
    pub predictions: Predictions,
    /// Present on the photonic route.
    pub chip: Option<ChipModel>,
    pub readout: Readout,
    /// Generated series (forecasting tasks).
    pub series: Option<TimeSeries>,
    pub roc: Option<RocCurve>,
    /// Seed that produced the accepted NARMA10 input draw.
    pub narma_seed_used: Option<u64>,
}

/// Runs the configured task end to end. Errors carry the failing stage.
pub fn run_task(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.task {
        TaskKind::Lorenz | TaskKind::Narma10 => run_forecast(cfg),
        TaskKind::Classify => run_classify(cfg),
    }
}

struct ForecastData {
    inputs: DMatrix<f64>,
    targets: Vec<f64>,
    train: usize,
    warmup: usize,
    series: TimeSeries,
    seed_used: Option<u64>,
}

/// Embedded inputs and one-step-ahead targets for the forecasting tasks.
/// Row `r` holds the taps at time `t = r + max_lag`; its target is the
/// target channel at `t + 1`.
fn forecast_data(cfg: &ExperimentConfig) -> Result<ForecastData> {
    let (series, spec, target_channel, train, test, seed_used) = match cfg.task {
        TaskKind::Lorenz => {
            let l = cfg.lorenz()?;
            let spec = EmbeddingSpec::uniform(&[0, 1], &l.lags).stage("embed")?;
            let series = gen_lorenz(l, spec.max_lag()).stage("generate")?;
            (series, spec, 2, l.train_points, l.test_points, None)
        }
        TaskKind::Narma10 => {
            let c = cfg.narma10()?;
            let spec = EmbeddingSpec::uniform(&[0], &c.lags).stage("embed")?;
            let s = gen_narma10(c).stage("generate")?;
            let series = TimeSeries::new(vec!["mu".into(), "y".into()], vec![s.inputs, s.outputs])?;
            (series, spec, 1, c.train_points, c.test_points, Some(s.seed_used))
        }
        TaskKind::Classify => unreachable!("classification has no series"),
    };
    if train < 2 || test < 2 {
        return Err(Error::InvalidParameter("need at least 2 train and 2 test points".into())).stage("embed");
    }
    let warmup = spec.max_lag();
    let needed = train + test + warmup + 1;
    if series.len() < needed {
        return Err(Error::InsufficientHistory {
            len: series.len(),
            needed,
        })
        .stage("embed");
    }
    let embedded = embed(&series, &spec).stage("embed")?;
    let rows = train + test;
    let inputs = embedded.rows(0, rows).into_owned();
    let z = series.channel(target_channel);
    let targets = (0..rows).map(|r| z[r + warmup + 1]).collect();
    Ok(ForecastData {
        inputs,
        targets,
        train,
        warmup,
        series,
        seed_used,
    })
}

/// Chip (photonic route only) and readout features for normalized inputs.
fn featurize(cfg: &ExperimentConfig, x: &FeatureMatrix) -> Result<(Option<ChipModel>, FeatureMatrix)> {
    match cfg.readout.features {
        FeatureRoute::Digital => {
            let f = ngrc_features(x, &FeatureVectorLayout::new(x.ncols())).stage("features")?;
            Ok((None, f))
        }
        FeatureRoute::Photonic => {
            let c = &cfg.chip;
            if c.n != x.ncols() {
                return Err(Error::Config(format!(
                    "chip.n = {} but the task provides {} delayed inputs",
                    c.n,
                    x.ncols()
                )));
            }
            let chip = build_chip(c.n, c.m, c.kind, c.seed)
                .and_then(|chip| chip.with_carrier_amplitude(c.carrier_amplitude))
                .and_then(|chip| chip.with_timing(c.delta_t_ps, c.baud_rate_gbd, c.fractional_delay))
                .stage("chip")?;
            let modulator = cfg.modulator.model().stage("chip")?;
            let noise = cfg.noise.model().stage("chip")?;
            let y = simulate_forward(&chip, &modulator, &noise, x).stage("simulate")?;
            Ok((Some(chip), y))
        }
    }
}

fn split(x: &DMatrix<f64>, train: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        x.rows(0, train).into_owned(),
        x.rows(train, x.nrows() - train).into_owned(),
    )
}

fn run_forecast(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = forecast_data(cfg)?;
    let (x_train, x_test) = split(&data.inputs, data.train);
    let normalizer = InputNormalizer::fit(&x_train).stage("normalize")?;
    let (n_train, clipped_train) = normalizer.apply(&x_train).stage("normalize")?;
    let (n_test, clipped_test) = normalizer.apply(&x_test).stage("normalize")?;

    // one batch so noise power is referenced to the whole record
    let all = stack(&n_train, &n_test);
    let (chip, features) = featurize(cfg, &all)?;
    let (f_train, f_test) = split(&features, data.train);
    let test_rows = f_test.nrows();

    let y_train = DMatrix::from_column_slice(data.train, 1, &data.targets[..data.train]);
    let truth_test = data.targets[data.train..].to_vec();
    let (lambda, lambda_scores) = match cfg.readout.lambda {
        Some(l) => (l, Vec::new()),
        None => {
            let sel = select_lambda(&f_train, &y_train, &cfg.readout.lambda_grid).stage("readout")?;
            (sel.lambda, sel.scores)
        }
    };
    let model = fit_ridge(&f_train, &y_train, lambda).stage("readout")?;
    let pred_train: Vec<f64> = model.predict(&f_train).stage("evaluate")?.column(0).iter().copied().collect();
    let pred_test: Vec<f64> = model.predict(&f_test).stage("evaluate")?.column(0).iter().copied().collect();
    let train_nmse = nmse(&pred_train, &data.targets[..data.train]).stage("evaluate")?;
    let test_nmse = nmse(&pred_test, &truth_test).stage("evaluate")?;

    let metrics = Metrics {
        test_nmse: Some(test_nmse),
        train_nmse: Some(train_nmse),
        lambda: Some(lambda),
        lambda_scores,
        clipped_train,
        clipped_test,
        train_rows: data.train,
        test_rows,
        feature_columns: features.ncols(),
        ..Metrics::default()
    };
    // time index of each target sample within the generated series
    let first = data.warmup + 1 + data.train;
    Ok(ExperimentReport {
        config: cfg.clone(),
        metrics,
        predictions: Predictions {
            index: (first..first + test_rows).collect(),
            truth: truth_test,
            predicted: pred_test,
            labels: None,
        },
        chip,
        readout: Readout::Ridge(model),
        series: Some(data.series),
        roc: None,
        narma_seed_used: data.seed_used,
    })
}

fn stack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows() + b.nrows(), a.ncols(), |r, c| {
        if r < a.nrows() {
            a[(r, c)]
        } else {
            b[(r - a.nrows(), c)]
        }
    })
}

fn run_classify(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = cfg.classify()?;
    let images = match &c.image_dir {
        Some(dir) => load_class_dirs(dir),
        None => synthetic_images(&c.synthetic),
    }
    .stage("generate")?;
    let ds = preprocess_images(&images, &c.pipeline).stage("preprocess")?;
    let normalizer = InputNormalizer::fit(&ds.train_x).stage("normalize")?;
    let (n_train, clipped_train) = normalizer.apply(&ds.train_x).stage("normalize")?;
    let (n_test, clipped_test) = normalizer.apply(&ds.test_x).stage("normalize")?;
    let train = n_train.nrows();

    let all = stack(&n_train, &n_test);
    let (chip, features) = featurize(cfg, &all)?;
    let (f_train, f_test) = split(&features, train);

    let r = &cfg.readout;
    let model = fit_logistic(&f_train, &ds.train_y, r.logistic_l2, r.max_iters, r.tol)
        .and_then(|m| m.with_threshold(r.threshold))
        .stage("readout")?;
    let train_pred = model.predict(&f_train).stage("evaluate")?;
    let train_accuracy = Confusion::from_predictions(&train_pred, &ds.train_y)
        .stage("evaluate")?
        .accuracy();
    let proba = model.predict_proba(&f_test).stage("evaluate")?;
    let predicted = model.predict(&f_test).stage("evaluate")?;
    let confusion = Confusion::from_predictions(&predicted, &ds.test_y).stage("evaluate")?;
    let scores = model.decision_function(&f_test).stage("evaluate")?;
    let roc = roc_auc(&scores, &ds.test_y).stage("evaluate")?;

    let metrics = Metrics {
        accuracy: Some(confusion.accuracy()),
        train_accuracy: Some(train_accuracy),
        auc: Some(roc.auc),
        confusion: Some(confusion),
        clipped_train,
        clipped_test,
        train_rows: train,
        test_rows: f_test.nrows(),
        feature_columns: features.ncols(),
        ..Metrics::default()
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        metrics,
        predictions: Predictions {
            index: (train..train + f_test.nrows()).collect(),
            truth: ds.test_y.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect(),
            predicted: proba,
            labels: Some(predicted),
        },
        chip,
        readout: Readout::Logistic(model),
        series: None,
        roc: Some(roc),
        narma_seed_used: None,
    })
}
