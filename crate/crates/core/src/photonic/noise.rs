//! Lumped detector impairments applied to photodiode outputs.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Additive white Gaussian noise, referenced to each port's mean signal power.
    pub snr_db: Option<f64>,
    /// Uniform quantizer over each port's observed range.
    pub adc_bits: Option<u32>,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_noise_free(&self) -> bool {
        self.snr_db.is_none() && self.adc_bits.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                return Err(Error::InvalidParameter(format!("snr_db must be finite, got {s}")));
            }
        }
        if let Some(b) = self.adc_bits {
            if !(1..=52).contains(&b) {
                return Err(Error::InvalidParameter(format!(
                    "adc_bits must be in 1..=52, got {b}"
                )));
            }
        }
        Ok(())
    }

    /// Applies noise in place to a rows × ports matrix.
    ///
    /// Each row draws from its own ChaCha stream (`stream = row index`), so
    /// the result does not depend on how rows are scheduled.
    pub fn apply(&self, y: &mut DMatrix<f64>) -> Result<()> {
        self.validate()?;
        let rows = y.nrows();
        if rows == 0 {
            return Ok(());
        }
        if let Some(snr_db) = self.snr_db {
            let ratio = 10f64.powf(snr_db / 10.0);
            let sigma: Vec<f64> = y
                .column_iter()
                .map(|c| (c.iter().map(|v| v * v).sum::<f64>() / rows as f64 / ratio).sqrt())
                .collect();
            for r in 0..rows {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(r as u64);
                for (c, s) in sigma.iter().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    y[(r, c)] += s * z;
                }
            }
        }
        if let Some(bits) = self.adc_bits {
            let levels = (1u64 << bits) - 1;
            for mut col in y.column_iter_mut() {
                let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let step = (hi - lo) / levels as f64;
                if step > 0.0 {
                    for v in col.iter_mut() {
                        *v = lo + ((*v - lo) / step).round() * step;
                    }
                }
            }
        }
        Ok(())
    }
}
