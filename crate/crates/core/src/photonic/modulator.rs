use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModulatorRegime {
    /// Field amplitude exactly proportional to the datum.
    #[default]
    IdealLinear,
    /// Null-biased push-pull Mach-Zehnder: `sin(π V / (2 V_π))`.
    MzmSin,
}

/// Amplitude modulator driven by normalized data in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorModel {
    pub regime: ModulatorRegime,
    pub v_pi: f64,
    /// Volts per unit of normalized datum.
    pub drive_scale: f64,
}

impl Default for ModulatorModel {
    fn default() -> Self {
        // full-scale drive stays inside |V| <= V_pi / 4
        let v_pi = 3.0;
        Self {
            regime: ModulatorRegime::IdealLinear,
            v_pi,
            drive_scale: v_pi / 4.0,
        }
    }
}

impl ModulatorModel {
    pub fn new(regime: ModulatorRegime, v_pi: f64, drive_scale: f64) -> Result<Self> {
        if !(v_pi > 0.0 && v_pi.is_finite()) {
            return Err(Error::InvalidParameter(format!("v_pi must be > 0, got {v_pi}")));
        }
        if !(drive_scale > 0.0 && drive_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "drive_scale must be > 0, got {drive_scale}"
            )));
        }
        Ok(Self {
            regime,
            v_pi,
            drive_scale,
        })
    }

    /// Unit-drive ideal modulator; the monomial map is then in data units.
    pub fn unit() -> Self {
        Self {
            regime: ModulatorRegime::IdealLinear,
            v_pi: 1.0,
            drive_scale: 1.0,
        }
    }

    pub fn drive_voltage(&self, x: f64) -> f64 {
        x * self.drive_scale
    }

    /// Optical field amplitude for normalized datum `x`.
    pub fn field(&self, x: f64) -> f64 {
        match self.regime {
            ModulatorRegime::IdealLinear => self.drive_voltage(x),
            ModulatorRegime::MzmSin => {
                (std::f64::consts::PI * self.drive_voltage(x) / (2.0 * self.v_pi)).sin()
            }
        }
    }
}
