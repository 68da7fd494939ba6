//! Forward model of the signal chain and its exact polynomial expansion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::chip::ChipModel;
use super::modulator::{ModulatorModel, ModulatorRegime};
use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::ngrc::{FeatureMatrix, FeatureVectorLayout};

/// Inputs may exceed `[-1, 1]` by at most this much.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Photodiode outputs for every input row.
///
/// Column `k` of `x` is the `k`-th delayed tap; the embedding has already
/// aligned the taps, so no resampling happens here. Each row builds the
/// field vector `(C, f(x_1), .., f(x_n))`, passes it through the coupler
/// and detects `|W e|²` per port. Noise is applied last.
pub fn simulate_forward(
    chip: &ChipModel,
    modulator: &ModulatorModel,
    noise: &NoiseModel,
    x: &FeatureMatrix,
) -> Result<FeatureMatrix> {
    if x.ncols() != chip.n() {
        return Err(Error::DimensionMismatch(format!(
            "input has {} columns, chip has {} delayed inputs",
            x.ncols(),
            chip.n()
        )));
    }
    chip.check_alignment()?;
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            let v = x[(r, c)];
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("simulator input row {r}, column {c}")));
            }
            if v.abs() > 1.0 + NORMALIZATION_TOL {
                return Err(Error::Unnormalized { row: r, col: c, value: v });
            }
        }
    }

    let w = chip.weights();
    let (n, m) = (chip.n(), chip.m());
    let rows: Vec<Vec<f64>> = (0..x.nrows())
        .into_par_iter()
        .map(|r| {
            let mut field = Vec::with_capacity(n + 1);
            field.push(chip.carrier_amplitude());
            field.extend((0..n).map(|k| modulator.field(x[(r, k)])));
            (0..m)
                .map(|i| {
                    let y_star: Complex64 = field
                        .iter()
                        .enumerate()
                        .map(|(k, &e)| w[(i, k)] * e)
                        .sum();
                    y_star.norm_sqr()
                })
                .collect()
        })
        .collect();

    let mut out = DMatrix::from_fn(x.nrows(), m, |r, i| rows[r][i]);
    noise.apply(&mut out)?;
    Ok(out)
}

/// Coefficients `(c_i, a_{i,k}, b_{i,p,q})` expressing each photodiode
/// output as a quadratic polynomial of the raw inputs.
///
/// Row `i` pairs with the columns of `ngrc_features` under a unit-constant
/// layout, so that `simulate_forward(x) = ngrc_features(x) · mapᵀ` exactly
/// (noise-free). Carrier amplitude and drive scale are folded in.
pub fn monomial_map(chip: &ChipModel, modulator: &ModulatorModel) -> Result<DMatrix<f64>> {
    if modulator.regime != ModulatorRegime::IdealLinear {
        return Err(Error::ExpansionNotExact);
    }
    let n = chip.n();
    let layout = FeatureVectorLayout::new(n);
    let w = chip.weights();
    // field = scale[k] * (1, x_1, .., x_n)[k]
    let scale: Vec<f64> = std::iter::once(chip.carrier_amplitude())
        .chain(std::iter::repeat_n(modulator.drive_scale, n))
        .collect();

    let mut map = DMatrix::zeros(chip.m(), layout.total_dim());
    for i in 0..chip.m() {
        // A_i[p][q] = Re(w_p conj(w_q)), symmetric
        let a = |p: usize, q: usize| (w[(i, p)] * w[(i, q)].conj()).re * scale[p] * scale[q];
        let mut col = 0;
        map[(i, col)] = a(0, 0);
        col += 1;
        for k in 1..=n {
            map[(i, col)] = 2.0 * a(0, k);
            col += 1;
        }
        for p in 1..=n {
            for q in p..=n {
                map[(i, col)] = if p == q { a(p, p) } else { 2.0 * a(p, q) };
                col += 1;
            }
        }
    }
    Ok(map)
}
