//! Experiment configuration: a TOML file with one section per stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::photonic::{
    CouplerKind, ModulatorModel, ModulatorRegime, NoiseModel, DEFAULT_BAUD_GBD, DEFAULT_DELTA_T_PS,
};
use crate::readout::{DEFAULT_LAMBDA_GRID, DEFAULT_MAX_ITERS, DEFAULT_THRESHOLD, DEFAULT_TOL};
use crate::tasks::{ImagePipelineConfig, LorenzConfig, Narma10Config, SyntheticImageConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Lorenz,
    Narma10,
    Classify,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Lorenz => "lorenz",
            TaskKind::Narma10 => "narma10",
            TaskKind::Classify => "classify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChipConfig {
    pub n: usize,
    pub m: usize,
    pub kind: CouplerKind,
    pub seed: u64,
    pub carrier_amplitude: f64,
    pub delta_t_ps: f64,
    pub baud_rate_gbd: f64,
    pub fractional_delay: bool,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            n: 8,
            m: 45,
            kind: CouplerKind::GaussianRandom,
            seed: 0,
            carrier_amplitude: 1.0,
            delta_t_ps: DEFAULT_DELTA_T_PS,
            baud_rate_gbd: DEFAULT_BAUD_GBD,
            fractional_delay: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulatorConfig {
    pub regime: ModulatorRegime,
    pub v_pi: f64,
    pub drive_scale: f64,
}

impl Default for ModulatorConfig {
    fn default() -> Self {
        let m = ModulatorModel::default();
        Self {
            regime: m.regime,
            v_pi: m.v_pi,
            drive_scale: m.drive_scale,
        }
    }
}

impl ModulatorConfig {
    pub fn model(&self) -> Result<ModulatorModel> {
        ModulatorModel::new(self.regime, self.v_pi, self.drive_scale)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adc_bits: Option<u32>,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn model(&self) -> Result<NoiseModel> {
        let m = NoiseModel {
            snr_db: self.snr_db,
            adc_bits: self.adc_bits,
            seed: self.seed,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Which features feed the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureRoute {
    /// Simulated photodiode outputs.
    #[default]
    Photonic,
    /// Digital NG-RC monomials.
    Digital,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutConfig {
    pub features: FeatureRoute,
    /// Fixed ridge strength; when absent it is chosen from `lambda_grid`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub logistic_l2: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub threshold: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            features: FeatureRoute::Photonic,
            lambda: None,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            logistic_l2: 1e-4,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Two-class image tree; when absent the synthetic set is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_dir: Option<PathBuf>,
    pub pipeline: ImagePipelineConfig,
    pub synthetic: SyntheticImageConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    #[serde(default)]
    pub chip: ChipConfig,
    #[serde(default)]
    pub modulator: ModulatorConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub readout: ReadoutConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorenz: Option<LorenzConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narma10: Option<Narma10Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyConfig>,
    /// Where artifacts go; not part of the hashed configuration.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Default configuration for `task` with its task section filled in.
    pub fn for_task(task: TaskKind) -> Self {
        let mut cfg = Self {
            task,
            chip: ChipConfig::default(),
            modulator: ModulatorConfig::default(),
            noise: NoiseConfig::default(),
            readout: ReadoutConfig::default(),
            lorenz: None,
            narma10: None,
            classify: None,
            output_dir: None,
        };
        match task {
            TaskKind::Lorenz => cfg.lorenz = Some(LorenzConfig::default()),
            TaskKind::Narma10 => cfg.narma10 = Some(Narma10Config::default()),
            TaskKind::Classify => cfg.classify = Some(ClassifyConfig::default()),
        }
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if crate::experiment::has_embedded_config(&text) {
            crate::experiment::embedded_config(&text)
        } else {
            Self::from_toml(&text)
        };
        parsed.map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks that the section for the selected task is present and that
    /// sections for other tasks are not.
    pub fn validate(&self) -> Result<()> {
        let present = [
            (TaskKind::Lorenz, self.lorenz.is_some()),
            (TaskKind::Narma10, self.narma10.is_some()),
            (TaskKind::Classify, self.classify.is_some()),
        ];
        for (kind, is_present) in present {
            if kind == self.task && !is_present {
                return Err(Error::Config(format!(
                    "missing key `{}`: task \"{}\" needs a [{}] section",
                    kind.name(),
                    kind.name(),
                    kind.name()
                )));
            }
            if kind != self.task && is_present {
                return Err(Error::Config(format!(
                    "section [{}] does not apply to task \"{}\"",
                    kind.name(),
                    self.task.name()
                )));
            }
        }
        if self.readout.lambda_grid.is_empty() && self.readout.lambda.is_none() {
            return Err(Error::Config("readout.lambda_grid is empty and no readout.lambda is set".into()));
        }
        Ok(())
    }

    pub fn lorenz(&self) -> Result<&LorenzConfig> {
        self.lorenz.as_ref().ok_or_else(|| Error::Config("missing key `lorenz`".into()))
    }

    pub fn narma10(&self) -> Result<&Narma10Config> {
        self.narma10.as_ref().ok_or_else(|| Error::Config("missing key `narma10`".into()))
    }

    pub fn classify(&self) -> Result<&ClassifyConfig> {
        self.classify.as_ref().ok_or_else(|| Error::Config("missing key `classify`".into()))
    }

    /// Sets every seed in the configuration.
    pub fn set_seed(&mut self, seed: u64) {
        self.chip.seed = seed;
        self.noise.seed = seed;
        if let Some(n) = &mut self.narma10 {
            n.seed = seed;
        }
        if let Some(c) = &mut self.classify {
            c.pipeline.shuffle_seed = seed;
            c.synthetic.seed = seed;
        }
    }

    /// Fully resolved configuration as TOML (without `output_dir`).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    /// SHA-256 of [`Self::to_toml`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_resolves_defaults() {
        let cfg = ExperimentConfig::from_toml("task = \"narma10\"\n[narma10]\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::for_task(TaskKind::Narma10));
        assert_eq!(cfg.chip.m, 45);
        assert_eq!(cfg.readout.lambda_grid, DEFAULT_LAMBDA_GRID.to_vec());
    }

    #[test]
    fn resolved_config_round_trips() {
        for task in [TaskKind::Lorenz, TaskKind::Narma10, TaskKind::Classify] {
            let mut cfg = ExperimentConfig::for_task(task);
            cfg.noise.snr_db = Some(30.0);
            cfg.readout.lambda = Some(1e-6);
            let text = cfg.to_toml();
            let back = ExperimentConfig::from_toml(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn missing_task_section_names_the_key() {
        let err = ExperimentConfig::from_toml("task = \"lorenz\"\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("`lorenz`"), "{err}");
        let err = ExperimentConfig::from_toml("[lorenz]\n").unwrap_err();
        assert!(err.to_string().contains("task"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("task = \"lorenz\"\n[lorenz]\nstep = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("step"), "{err}");
        let err = ExperimentConfig::from_toml("task = \"lorenz\"\ncolour = 1\n[lorenz]\n").unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        assert!(ExperimentConfig::from_toml("task = \"lorenz\"\n[lorenz]\n[narma10]\n").is_err());
    }

    #[test]
    fn seed_override_and_hash() {
        let mut cfg = ExperimentConfig::for_task(TaskKind::Classify);
        let before = cfg.hash();
        cfg.set_seed(5);
        assert_ne!(cfg.hash(), before);
        let c = cfg.classify().unwrap();
        assert_eq!((cfg.chip.seed, cfg.noise.seed, c.synthetic.seed, c.pipeline.shuffle_seed), (5, 5, 5, 5));
        cfg.output_dir = Some("/tmp/x".into());
        let mut other = cfg.clone();
        other.output_dir = Some("/tmp/y".into());
        assert_eq!(cfg.hash(), other.hash());
        assert_eq!(cfg.hash().len(), 64);
    }
}
