use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photonic_ngrc::config::{ExperimentConfig, FeatureRoute, TaskKind};
use photonic_ngrc::ngrc::{ngrc_features, FeatureVectorLayout};
use photonic_ngrc::photonic::{build_chip, simulate_forward, CouplerKind, ModulatorModel, NoiseModel};
use photonic_ngrc::readout::fit_ridge;
use photonic_ngrc::tasks::{run_task, ClassifyConfig, LorenzConfig, Narma10Config};

fn with_route(mut cfg: ExperimentConfig, route: FeatureRoute) -> ExperimentConfig {
    cfg.readout.features = route;
    cfg
}

#[test]
fn photonic_and_digital_forecasts_agree() {
    for task in [TaskKind::Narma10, TaskKind::Lorenz] {
        let mut cfg = ExperimentConfig::for_task(task);
        cfg.readout.lambda = Some(1e-9);
        let p = run_task(&with_route(cfg.clone(), FeatureRoute::Photonic)).unwrap();
        let d = run_task(&with_route(cfg, FeatureRoute::Digital)).unwrap();
        let (np, nd) = (p.metrics.test_nmse.unwrap(), d.metrics.test_nmse.unwrap());
        assert!((np - nd).abs() < 1e-6, "{task:?}: photonic {np} vs digital {nd}");
    }
}

#[test]
fn photonic_and_digital_classifiers_agree() {
    let mut cfg = ExperimentConfig::for_task(TaskKind::Classify);
    let mut c = ClassifyConfig::default();
    c.synthetic.per_class = 500;
    c.pipeline.image_size = [32, 32];
    c.pipeline.train_count = 800;
    c.pipeline.test_count = 200;
    cfg.classify = Some(c);
    let p = run_task(&with_route(cfg.clone(), FeatureRoute::Photonic)).unwrap();
    let d = run_task(&with_route(cfg, FeatureRoute::Digital)).unwrap();
    let (ap, ad) = (p.metrics.accuracy.unwrap(), d.metrics.accuracy.unwrap());
    assert!((ap - ad).abs() < 1e-6, "photonic {ap} vs digital {ad}");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn median_error_grows_as_snr_drops() {
    let levels = [None, Some(40.0), Some(30.0), Some(20.0)];
    let medians: Vec<f64> = levels
        .iter()
        .map(|&snr| {
            let runs = (0..11u64)
                .map(|seed| {
                    let mut cfg = ExperimentConfig::for_task(TaskKind::Lorenz);
                    cfg.noise.snr_db = snr;
                    cfg.noise.seed = seed;
                    run_task(&cfg).unwrap().metrics.test_nmse.unwrap()
                })
                .collect();
            median(runs)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[0] <= w[1]), "{medians:?}");
}

#[test]
fn quadratic_targets_are_reachable_from_photodiodes() {
    let chip = build_chip(3, 10, CouplerKind::GaussianRandom, 1).unwrap();
    let modulator = ModulatorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = DMatrix::from_fn(200, 3, |_, _| rng.random_range(-1.0..1.0));
    let y = simulate_forward(&chip, &modulator, &NoiseModel::none(), &x).unwrap();
    let target = DMatrix::from_fn(200, 1, |r, _| 0.3 - x[(r, 0)] + 2.0 * x[(r, 1)] * x[(r, 2)] - x[(r, 2)].powi(2));
    let model = fit_ridge(&y, &target, 0.0).unwrap();
    let worst = (model.predict(&y).unwrap() - &target).amax();
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn under_complete_chip_cannot_reach_every_quadratic() {
    let chip = build_chip(3, 6, CouplerKind::GaussianRandom, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = DMatrix::from_fn(200, 3, |_, _| rng.random_range(-1.0..1.0));
    let y = simulate_forward(&chip, &ModulatorModel::default(), &NoiseModel::none(), &x).unwrap();
    let phi = ngrc_features(&x, &FeatureVectorLayout::new(3)).unwrap();
    // every monomial column cannot lie in a 6-dimensional span
    let misses = (1..phi.ncols())
        .filter(|&c| {
            let t = phi.columns(c, 1).into_owned();
            let m = fit_ridge(&y, &t, 1e-12).unwrap();
            (m.predict(&y).unwrap() - &t).amax() > 1e-6
        })
        .count();
    assert!(misses > 0);
}

#[test]
fn noise_free_runs_ignore_noise_seed() {
    let mut a = ExperimentConfig::for_task(TaskKind::Narma10);
    a.narma10 = Some(Narma10Config {
        train_points: 200,
        test_points: 100,
        ..Narma10Config::default()
    });
    let mut b = a.clone();
    b.noise.seed = 99;
    assert_eq!(run_task(&a).unwrap().predictions, run_task(&b).unwrap().predictions);
}

#[test]
fn lorenz_noise_changes_predictions() {
    let mut cfg = ExperimentConfig::for_task(TaskKind::Lorenz);
    cfg.lorenz = Some(LorenzConfig {
        train_points: 200,
        test_points: 100,
        ..LorenzConfig::default()
    });
    let clean = run_task(&cfg).unwrap();
    cfg.noise.snr_db = Some(20.0);
    let noisy = run_task(&cfg).unwrap();
    assert_ne!(clean.predictions.predicted, noisy.predictions.predicted);
    assert!(noisy.metrics.test_nmse.unwrap() > clean.metrics.test_nmse.unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ridge_predictions_survive_affine_column_rescaling(
        seed in 0u64..1000,
        col in 0usize..4,
        scale in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0],
        shift in -100.0f64..100.0,
        lambda in prop_oneof![Just(0.0), 1e-6f64..1.0],
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(40, 4, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(40, 1, |_, _| rng.random_range(-1.0..1.0));
        let mut x2 = x.clone();
        for v in x2.column_mut(col).iter_mut() {
            *v = scale * *v + shift;
        }
        let p1 = fit_ridge(&x, &y, lambda).unwrap().predict(&x).unwrap();
        let p2 = fit_ridge(&x2, &y, lambda).unwrap().predict(&x2).unwrap();
        prop_assert!((p1 - p2).amax() < 1e-9);
    }
}
