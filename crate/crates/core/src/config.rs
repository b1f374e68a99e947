//! Single configuration document holding every tunable of the pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ao_detect::AoDetectParams;
use crate::error::{Error, Result};
use crate::fsio::read_to_string;
use crate::pac_detect::PacParams;
use crate::peak_correct::CorrectionParams;
use crate::synth::SynthConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Leading fraction of beats used to fit each model.
    pub train_frac: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { train_frac: 0.7 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub synth: SynthConfig,
    pub ao_detect: AoDetectParams,
    pub peak_correct: CorrectionParams,
    pub pac_detect: PacParams,
    pub calibration: CalibrationConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every block, prefixing errors with the block name.
    pub fn validate(&self) -> Result<()> {
        let scoped = |block: &str, r: Result<()>| {
            r.map_err(|e| match e {
                Error::InvalidParameter { name, reason } if name.starts_with(block) => {
                    Error::Config(format!("{name}: {reason}"))
                }
                Error::InvalidParameter { name, reason } => {
                    Error::Config(format!("{block}.{name}: {reason}"))
                }
                other => Error::Config(format!("{block}: {other}")),
            })
        };
        scoped("synth", self.synth.validate())?;
        scoped("ao_detect", self.ao_detect.validate())?;
        scoped("peak_correct", self.peak_correct.validate())?;
        scoped("pac_detect", self.pac_detect.validate())?;
        let f = self.calibration.train_frac;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!(
                "calibration.train_frac: must lie in (0, 1), got {f}"
            )));
        }
        Ok(())
    }
}
