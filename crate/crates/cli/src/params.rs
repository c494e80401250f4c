//! TOML parameter documents.

use std::path::Path;

use msarch_core::{ModelParams, Theta, VolatilityMixture};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::files::{read_text, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Complete,
    Null,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDoc {
    #[serde(rename = "D")]
    pub d: [f64; 2],
    pub nu: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub value: f64,
    pub orders: Vec<f64>,
    pub eps: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub bounds: BoundsDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualDoc {
    pub kind: String,
    pub q: f64,
    pub rms: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsDoc {
    /// Length of the calibrated series.
    pub len: usize,
    pub residuals: Vec<ResidualDoc>,
}

/// Parameter document written by `calibrate` and read by the other commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub model: ModelName,
    #[serde(rename = "D")]
    pub d: f64,
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(rename = "M")]
    pub memory: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsDoc>,
}

impl ParamsDoc {
    pub fn from_params(params: &ModelParams) -> Self {
        let (model, alpha, beta, sigma0) = match params.mixture {
            VolatilityMixture::InverseGamma { alpha, beta } => (ModelName::Complete, Some(alpha), Some(beta), None),
            VolatilityMixture::Point { sigma0 } => (ModelName::Null, None, None, Some(sigma0)),
        };
        ParamsDoc {
            model,
            d: params.d,
            nu: params.nu,
            alpha,
            beta,
            sigma0,
            memory: params.memory,
            objective: None,
            diagnostics: None,
        }
    }

    /// Shape parameters; the null model has an infinite tail index.
    pub fn theta(&self) -> Result<Theta> {
        Ok(match self.model {
            ModelName::Complete => {
                let alpha = self.alpha.ok_or_else(|| CliError::invalid("complete model needs alpha"))?;
                Theta::new(self.d, self.nu, alpha)?
            }
            ModelName::Null => Theta::null(self.d, self.nu)?,
        })
    }

    /// Full parameters; fails when the scale is missing.
    pub fn model_params(&self) -> Result<ModelParams> {
        let mixture = match self.model {
            ModelName::Complete => VolatilityMixture::InverseGamma {
                alpha: self.alpha.ok_or_else(|| CliError::invalid("complete model needs alpha"))?,
                beta: self.beta.ok_or_else(|| CliError::invalid("complete model needs beta"))?,
            },
            ModelName::Null => VolatilityMixture::Point {
                sigma0: self.sigma0.ok_or_else(|| CliError::invalid("null model needs sigma0"))?,
            },
        };
        Ok(ModelParams::new(self.d, self.nu, mixture, self.memory)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::invalid(format!("cannot encode parameters: {e}")))
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1) as u64).unwrap_or(0);
            CliError::Parse { path: path.to_path_buf(), line, message: e.message().to_string() }
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_toml()?.as_bytes())
    }
}
