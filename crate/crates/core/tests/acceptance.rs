//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photonic_ngrc::config::{ExperimentConfig, TaskKind};
use photonic_ngrc::density::density;
use photonic_ngrc::experiment::write_artifacts;
use photonic_ngrc::ngrc::{ngrc_features, FeatureVectorLayout};
use photonic_ngrc::photonic::{
    build_chip, coupler_matrix, coupler_rank, monomial_map, simulate_forward, CouplerKind, ModulatorModel,
    NoiseModel,
};
use photonic_ngrc::readout::{fit_logistic, fit_ridge, nmse, roc_auc, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use photonic_ngrc::tasks::run_task;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn narma_nmse(chip_seed: u64) -> f64 {
    let mut cfg = ExperimentConfig::for_task(TaskKind::Narma10);
    cfg.chip.seed = chip_seed;
    run_task(&cfg).unwrap().metrics.test_nmse.unwrap()
}

fn criterion_1() -> Outcome {
    let cfg = ExperimentConfig::for_task(TaskKind::Narma10);
    let (report, elapsed) = timed(|| run_task(&cfg));
    let report = report.unwrap();
    let chip = report.chip.as_ref().unwrap();
    let v = report.metrics.test_nmse.unwrap();
    let setup = chip.n() == 8
        && chip.m() == 45
        && chip.kind() == CouplerKind::GaussianRandom
        && cfg.noise.snr_db.is_none()
        && report.metrics.train_rows == 1000
        && report.metrics.test_rows == 1000;
    outcome(
        setup && v <= 0.16 && elapsed < Duration::from_secs(10),
        format!(
            "NARMA10 test NMSE {v:.4e} (gate 0.16, expected <= 0.12: {}, hardware 0.107), {:.2?}",
            v <= 0.12,
            elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let cfg = ExperimentConfig::for_task(TaskKind::Lorenz);
    let (report, elapsed) = timed(|| run_task(&cfg));
    let report = report.unwrap();
    let v = report.metrics.test_nmse.unwrap();
    let setup = report.metrics.train_rows == 400 && report.metrics.test_rows == 600 && cfg.noise.snr_db.is_none();
    outcome(
        setup && v <= 1.43e-2 && elapsed < Duration::from_secs(10),
        format!("Lorenz z test NMSE {v:.4e} (gate 1.43e-2), {:.2?}", elapsed),
    )
}

fn criterion_3() -> Outcome {
    let (worst, elapsed) = timed(|| {
        let chip = build_chip(8, 45, CouplerKind::GaussianRandom, 0).unwrap();
        let modulator = ModulatorModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let x = DMatrix::from_fn(1000, 8, |_, _| rng.random_range(-1.0..=1.0));
        let y = simulate_forward(&chip, &modulator, &NoiseModel::none(), &x).unwrap();
        let map = monomial_map(&chip, &modulator).unwrap();
        let phi = ngrc_features(&x, &FeatureVectorLayout::new(8)).unwrap();
        let expected = &phi * map.transpose();
        y.iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0, f64::max)
    });
    outcome(
        worst < 1e-10 && elapsed < Duration::from_secs(5),
        format!("1000 rows, worst relative error {worst:.3e} (limit 1e-10), {:.2?}", elapsed),
    )
}

fn criterion_4() -> Outcome {
    let full = (0..100u64)
        .filter(|&s| {
            let w = coupler_matrix(8, 45, CouplerKind::GaussianRandom, s).unwrap();
            coupler_rank(&w).unwrap().rank == 45
        })
        .count();
    let values: Vec<f64> = (0..10).map(narma_nmse).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    outcome(
        full == 100 && spread < 0.10,
        format!("rank 45 in {full}/100 draws; NARMA10 NMSE over 10 seeds in [{lo:.4e}, {hi:.4e}], spread {spread:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let r = density(9, 45, 60.0, 2.0).unwrap();
    outcome(
        r.ops_per_symbol == 3420 && r.tops == 205.2 && r.tops_per_mm2 == 102.6,
        format!("{} ops/symbol, {} TOPS, {} TOPS/mm^2", r.ops_per_symbol, r.tops, r.tops_per_mm2),
    )
}

/// Dense Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn standardize_columns(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = x.len();
    let cols = x[0].len();
    let mut out = vec![vec![0.0; cols]; rows];
    for c in 0..cols {
        let mean = x.iter().map(|r| r[c]).sum::<f64>() / rows as f64;
        let sd = (x.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / rows as f64).sqrt();
        for r in 0..rows {
            out[r][c] = (x[r][c] - mean) / sd;
        }
    }
    out
}

fn ridge_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let raw: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..10).map(|c| rng.random_range(-1.0..1.0) * (c + 1) as f64 + c as f64).collect())
        .collect();
    let y: Vec<f64> = (0..50).map(|_| rng.random_range(-2.0..2.0)).collect();
    let lambda = 0.1;
    // [z | 1] with the penalty on the ten feature weights only
    let design: Vec<Vec<f64>> = standardize_columns(&raw)
        .into_iter()
        .map(|mut r| {
            r.push(1.0);
            r
        })
        .collect();
    let k = 11;
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for r in 0..50 {
        for i in 0..k {
            rhs[i] += design[r][i] * y[r];
            for j in 0..k {
                gram[i][j] += design[r][i] * design[r][j];
            }
        }
    }
    for (i, row) in gram.iter_mut().enumerate().take(10) {
        row[i] += lambda;
    }
    let expected = gauss_solve(gram, rhs);

    let x = DMatrix::from_fn(50, 10, |r, c| raw[r][c]);
    let t = DMatrix::from_column_slice(50, 1, &y);
    let model = fit_ridge(&x, &t, lambda).unwrap();
    let mut err: f64 = (0..10).map(|c| (model.weights[(0, c)] - expected[c]).abs()).fold(0.0, f64::max);
    err = err.max((model.bias[0] - expected[10]).abs());
    (err < 1e-9, format!("ridge vs elimination {err:.2e}"))
}

/// Regularized mean negative log-likelihood written out directly.
fn logistic_loss(z: &[Vec<f64>], labels: &[bool], l2: f64, params: &[f64]) -> f64 {
    let k = params.len() - 1;
    let mut total = 0.0;
    for (row, &label) in z.iter().zip(labels) {
        let s: f64 = row.iter().zip(params).map(|(x, w)| x * w).sum::<f64>() + params[k];
        let p = 1.0 / (1.0 + (-s).exp());
        total -= if label { p.ln() } else { (1.0 - p).ln() };
    }
    total / z.len() as f64 + 0.5 * l2 * params[..k].iter().map(|w| w * w).sum::<f64>()
}

fn fd_gradient(z: &[Vec<f64>], labels: &[bool], l2: f64, params: &[f64]) -> Vec<f64> {
    let h = 1e-5;
    (0..params.len())
        .map(|i| {
            let mut up = params.to_vec();
            let mut down = params.to_vec();
            up[i] += h;
            down[i] -= h;
            (logistic_loss(z, labels, l2, &up) - logistic_loss(z, labels, l2, &down)) / (2.0 * h)
        })
        .collect()
}

fn logistic_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let raw: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..5).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let labels: Vec<bool> = raw
        .iter()
        .map(|r| r[0] - 0.5 * r[1] + 0.3 * r[4] + rng.random_range(-1.5..1.5) > 0.0)
        .collect();
    let l2 = 0.01;
    let x = DMatrix::from_fn(200, 5, |r, c| raw[r][c]);
    let model = fit_logistic(&x, &labels, l2, DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap();
    let z = standardize_columns(&raw);
    let mut params = model.weights.clone();
    params.push(model.bias);
    let fd_at_fit = fd_gradient(&z, &labels, l2, &params);
    let grad_norm = fd_at_fit.iter().fold(0.0f64, |m, g| m.max(g.abs()));

    // analytic gradient against finite differences away from the optimum
    let objective = photonic_ngrc::readout::LogisticObjective::new(
        DMatrix::from_fn(200, 5, |r, c| z[r][c]),
        &labels,
        l2,
    );
    let mut worst_rel: f64 = 0.0;
    for trial in 0..5 {
        let mut prng = ChaCha8Rng::seed_from_u64(300 + trial);
        let p: Vec<f64> = (0..6).map(|_| prng.random_range(-1.0..1.0)).collect();
        let analytic = objective.gradient(&DVector::from_vec(p.clone()));
        let fd = fd_gradient(&z, &labels, l2, &p);
        let scale = fd.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let diff = fd.iter().zip(analytic.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_rel = worst_rel.max(diff / scale);
    }
    (
        model.converged && grad_norm < 1e-6 && worst_rel < 1e-4,
        format!("logistic |grad|inf at fit {grad_norm:.2e}, gradient vs finite differences {worst_rel:.2e}"),
    )
}

fn auc_oracle() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // coarse scores so that ties occur
        let scores: Vec<f64> = (0..20).map(|_| (rng.random_range(0.0..1.0f64) * 6.0).floor()).collect();
        let mut labels: Vec<bool> = (0..20).map(|_| rng.random_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        let auc = roc_auc(&scores, &labels).unwrap().auc;
        worst = worst.max((auc - wins / pairs).abs());
    }
    (worst < 1e-12, format!("AUC vs Mann-Whitney {worst:.1e}"))
}

fn nmse_oracle() -> (bool, String) {
    let truth = [1.0, 2.0, 4.0];
    let mean = (1.0 + 2.0 + 4.0) / 3.0;
    let expected = 1.0 / ((1.0 - mean) * (1.0 - mean) + (2.0 - mean) * (2.0 - mean) + (4.0 - mean) * (4.0 - mean));
    let v = nmse(&[1.0, 2.0, 3.0], &truth).unwrap();
    let err = (v - expected).abs();
    (err < 1e-15 && (v - 3.0 / 14.0).abs() < 1e-15, format!("NMSE {v:.6} vs {expected:.6}"))
}

fn criterion_6() -> Outcome {
    let checks = [nmse_oracle(), auc_oracle(), ridge_oracle(), logistic_oracle()];
    let pass = checks.iter().all(|c| c.0);
    let detail = checks.iter().map(|c| c.1.as_str()).collect::<Vec<_>>().join("; ");
    outcome(pass, detail)
}

fn criterion_7() -> Outcome {
    let cfg = ExperimentConfig::for_task(TaskKind::Classify);
    let (report, elapsed) = timed(|| run_task(&cfg));
    let report = report.unwrap();
    let m = &report.metrics;
    let acc = m.accuracy.unwrap();
    let auc = m.auc.unwrap();
    outcome(
        m.train_rows == 3200 && m.test_rows == 800 && acc >= 0.95 && auc >= 0.97,
        format!("synthetic images accuracy {acc:.4}, AUC {auc:.4} (gates 0.95 / 0.97), {:.2?}", elapsed),
    )
}

fn read_all(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut count = 0;
    for task in [TaskKind::Narma10, TaskKind::Lorenz, TaskKind::Classify] {
        let mut cfg = ExperimentConfig::for_task(task);
        cfg.set_seed(1);
        cfg.noise.snr_db = Some(30.0);
        if let Some(c) = &mut cfg.classify {
            c.synthetic.per_class = 300;
            c.pipeline.image_size = [64, 64];
            c.pipeline.train_count = 480;
            c.pipeline.test_count = 120;
        }
        let a = tmp.path().join(format!("{}-a", task.name()));
        let b = tmp.path().join(format!("{}-b", task.name()));
        write_artifacts(&run_task(&cfg).unwrap(), &a).unwrap();
        write_artifacts(&run_task(&cfg).unwrap(), &b).unwrap();
        let (fa, fb) = (read_all(&a), read_all(&b));
        count += fa.len();
        identical &= fa == fb;
    }
    outcome(identical, format!("{count} artifacts compared byte for byte across repeated runs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 NARMA10 noise-free NMSE", criterion_1),
        ("2 Lorenz63 noise-free NMSE", criterion_2),
        ("3 exact NG-RC equivalence", criterion_3),
        ("4 fabrication tolerance", criterion_4),
        ("5 density arithmetic", criterion_5),
        ("6 metric oracles", criterion_6),
        ("7 image classification", criterion_7),
        ("8 determinism", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
