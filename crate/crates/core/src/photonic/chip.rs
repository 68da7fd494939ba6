//! Star-coupler chip model and its plain-text serialization.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::forward::monomial_map;
use super::modulator::ModulatorModel;
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, RankReport};
use crate::ngrc::FeatureVectorLayout;
use crate::textfmt::NumericDoc;

/// Construction retries (seed+1, seed+2, ...) after the first attempt.
pub const MAX_RETRIES: usize = 8;

/// Tolerance on `delta_t_ps * baud_rate_gbd / 1000 == 1`.
pub const ALIGNMENT_TOL: f64 = 5e-3;

pub const DEFAULT_DELTA_T_PS: f64 = 16.7;
pub const DEFAULT_BAUD_GBD: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CouplerKind {
    #[default]
    GaussianRandom,
    DftStar,
    /// Hand-supplied matrix, e.g. loaded from a measurement.
    Custom,
}

impl fmt::Display for CouplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplerKind::GaussianRandom => "gaussian-random",
            CouplerKind::DftStar => "dft-star",
            CouplerKind::Custom => "custom",
        })
    }
}

impl FromStr for CouplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-random" | "gaussian" => Ok(CouplerKind::GaussianRandom),
            "dft-star" | "dft" => Ok(CouplerKind::DftStar),
            "custom" => Ok(CouplerKind::Custom),
            other => Err(Error::InvalidParameter(format!("unknown coupler kind `{other}`"))),
        }
    }
}

/// Simulated hardware: the complex `m × (n+1)` star-coupler transfer
/// matrix (column 0 is the unmodulated carrier) plus timing and carrier
/// parameters. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipModel {
    weights: DMatrix<Complex64>,
    kind: CouplerKind,
    seed: u64,
    effective_seed: u64,
    carrier_amplitude: f64,
    delta_t_ps: f64,
    baud_rate_gbd: f64,
    fractional_delay: bool,
}

/// Draws the raw coupler matrix without any rank check.
pub fn coupler_matrix(n: usize, m: usize, kind: CouplerKind, seed: u64) -> Result<DMatrix<Complex64>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    let cols = n + 1;
    match kind {
        CouplerKind::GaussianRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = 1.0 / (cols as f64).sqrt();
            // row-major draw order so the matrix does not depend on storage layout
            let mut w = DMatrix::zeros(m, cols);
            for j in 0..m {
                for k in 0..cols {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    w[(j, k)] = Complex64::new(re * scale, im * scale);
                }
            }
            Ok(w)
        }
        CouplerKind::DftStar => {
            let l = m.max(cols);
            let norm = 1.0 / (m as f64).sqrt();
            Ok(DMatrix::from_fn(m, cols, |j, k| {
                // reduce j*k mod L first so the phase stays exact for large ports
                let phase = 2.0 * PI * ((j * k) % l) as f64 / l as f64;
                Complex64::from_polar(norm, phase)
            }))
        }
        CouplerKind::Custom => Err(Error::InvalidParameter(
            "custom couplers are built with ChipModel::from_weights".into(),
        )),
    }
}

/// Rank of the unit-carrier, unit-drive monomial map of `w`.
pub fn coupler_rank(w: &DMatrix<Complex64>) -> Result<RankReport> {
    let chip = ChipModel::from_weights(w.clone())?;
    let map = monomial_map(&chip, &ModulatorModel::unit())?;
    Ok(numerical_rank(&map))
}

/// Builds a chip with default timing (16.7 ps, 60 Gbaud) and unit carrier.
///
/// The monomial-to-photodiode map must reach rank `min(m, 1 + n + n(n+1)/2)`;
/// otherwise construction retries with `seed + 1`, up to [`MAX_RETRIES`] times.
pub fn build_chip(n: usize, m: usize, kind: CouplerKind, seed: u64) -> Result<ChipModel> {
    let required = m.min(FeatureVectorLayout::new(n).total_dim());
    let mut best_rank = 0;
    for attempt in 0..=MAX_RETRIES {
        let effective_seed = seed.wrapping_add(attempt as u64);
        let w = coupler_matrix(n, m, kind, effective_seed)?;
        let report = coupler_rank(&w)?;
        if report.rank == required {
            let mut chip = ChipModel::from_weights(w)?;
            chip.kind = kind;
            chip.seed = seed;
            chip.effective_seed = effective_seed;
            return Ok(chip);
        }
        best_rank = best_rank.max(report.rank);
    }
    Err(Error::DegenerateCoupler {
        rank: best_rank,
        required,
        attempts: MAX_RETRIES + 1,
    })
}

impl ChipModel {
    pub fn from_weights(weights: DMatrix<Complex64>) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() < 2 {
            return Err(Error::InvalidParameter(format!(
                "coupler matrix must be m x (n+1) with m >= 1, n >= 1; got {} x {}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        if weights.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("coupler matrix".into()));
        }
        Ok(Self {
            weights,
            kind: CouplerKind::Custom,
            seed: 0,
            effective_seed: 0,
            carrier_amplitude: 1.0,
            delta_t_ps: DEFAULT_DELTA_T_PS,
            baud_rate_gbd: DEFAULT_BAUD_GBD,
            fractional_delay: false,
        })
    }

    pub fn with_carrier_amplitude(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("carrier_amplitude must be >= 0, got {c}")));
        }
        self.carrier_amplitude = c;
        Ok(self)
    }

    /// Sets the per-neighbor delay and symbol rate. Unless `fractional_delay`
    /// is set, the delay must equal one symbol period.
    pub fn with_timing(mut self, delta_t_ps: f64, baud_rate_gbd: f64, fractional_delay: bool) -> Result<Self> {
        if !(delta_t_ps > 0.0 && baud_rate_gbd > 0.0) || !delta_t_ps.is_finite() || !baud_rate_gbd.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delay and baud rate must be positive, got {delta_t_ps} ps, {baud_rate_gbd} GBd"
            )));
        }
        self.delta_t_ps = delta_t_ps;
        self.baud_rate_gbd = baud_rate_gbd;
        self.fractional_delay = fractional_delay;
        self.check_alignment()?;
        Ok(self)
    }

    /// Delay in symbol periods: `Δt · baud`.
    pub fn symbols_per_delay(&self) -> f64 {
        self.delta_t_ps * self.baud_rate_gbd / 1000.0
    }

    pub fn check_alignment(&self) -> Result<()> {
        let s = self.symbols_per_delay();
        if !self.fractional_delay && (s - 1.0).abs() > ALIGNMENT_TOL {
            return Err(Error::InvalidParameter(format!(
                "delay of {} ps at {} GBd spans {s:.4} symbols; taps must be one symbol apart",
                self.delta_t_ps, self.baud_rate_gbd
            )));
        }
        Ok(())
    }

    pub fn weights(&self) -> &DMatrix<Complex64> {
        &self.weights
    }

    /// Number of delayed signal inputs.
    pub fn n(&self) -> usize {
        self.weights.ncols() - 1
    }

    /// Number of output ports.
    pub fn m(&self) -> usize {
        self.weights.nrows()
    }

    pub fn kind(&self) -> CouplerKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed that produced the accepted matrix after any rank retries.
    pub fn effective_seed(&self) -> u64 {
        self.effective_seed
    }

    pub fn carrier_amplitude(&self) -> f64 {
        self.carrier_amplitude
    }

    pub fn delta_t_ps(&self) -> f64 {
        self.delta_t_ps
    }

    pub fn baud_rate_gbd(&self) -> f64 {
        self.baud_rate_gbd
    }

    pub fn fractional_delay(&self) -> bool {
        self.fractional_delay
    }

    pub fn to_doc(&self) -> NumericDoc {
        let mut doc = NumericDoc::new("photonic-ngrc chip");
        doc.push("n", self.n());
        doc.push("m", self.m());
        doc.push("kind", self.kind);
        doc.push("seed", self.seed);
        doc.push("effective_seed", self.effective_seed);
        doc.push_f64("carrier_amplitude", self.carrier_amplitude);
        doc.push_f64("delta_t_ps", self.delta_t_ps);
        doc.push_f64("baud_rate_gbd", self.baud_rate_gbd);
        doc.push("fractional_delay", self.fractional_delay);
        let rows = (0..self.m())
            .flat_map(|j| (0..=self.n()).map(move |k| (j, k)))
            .map(|(j, k)| {
                let z = self.weights[(j, k)];
                vec![z.re, z.im]
            })
            .collect();
        doc.push_block("weights", rows);
        doc
    }

    pub fn from_doc(doc: &NumericDoc) -> Result<Self> {
        let n = doc.get_usize("n")?;
        let m = doc.get_usize("m")?;
        let pairs = doc.block("weights")?;
        if pairs.len() != m * (n + 1) || pairs.iter().any(|p| p.len() != 2) {
            return Err(Error::Parse {
                what: "chip file".into(),
                reason: format!("expected {} `re,im` rows for a {m} x {} coupler", m * (n + 1), n + 1),
            });
        }
        let weights = DMatrix::from_fn(m, n + 1, |j, k| {
            let p = &pairs[j * (n + 1) + k];
            Complex64::new(p[0], p[1])
        });
        let fractional = match doc.get("fractional_delay")? {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse {
                    what: "fractional_delay".into(),
                    reason: format!("`{other}` is not a boolean"),
                })
            }
        };
        let mut chip = ChipModel::from_weights(weights)?
            .with_carrier_amplitude(doc.get_f64("carrier_amplitude")?)?
            .with_timing(doc.get_f64("delta_t_ps")?, doc.get_f64("baud_rate_gbd")?, fractional)?;
        chip.kind = doc.get("kind")?.parse()?;
        chip.seed = doc.get_u64("seed")?;
        chip.effective_seed = doc.get_u64("effective_seed")?;
        Ok(chip)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_doc().render()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_doc(&NumericDoc::parse(&text)?)
    }
}
