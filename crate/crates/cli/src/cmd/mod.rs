//! Command implementations. Each `*Args` struct is the validated run
//! configuration of one verb.

pub mod analyze;
pub mod calibrate;
pub mod ingest;
pub mod restarts;
pub mod simulate;

use std::path::PathBuf;

use clap::Args;
use msarch_core::{ModelParams, VolatilityMixture};

use crate::error::{CliError, Result};
use crate::params::ParamsDoc;

/// Model given either as a parameter document or as explicit values.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Parameter document (TOML) as written by `calibrate`.
    #[arg(long, conflicts_with_all = ["d", "nu", "alpha", "beta", "sigma0", "memory"])]
    pub params: Option<PathBuf>,
    /// Scaling exponent D.
    #[arg(long)]
    pub d: Option<f64>,
    /// Restart probability per step.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Tail index of the inverse-gamma mixture.
    #[arg(long, requires = "beta", conflicts_with = "sigma0")]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    /// Fixed volatility of the null model.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Memory order M.
    #[arg(long)]
    pub memory: Option<usize>,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<ModelParams> {
        if let Some(path) = &self.params {
            return ParamsDoc::read(path)?.model_params();
        }
        let need =
            |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::invalid(format!("missing --{name} (or --params)")));
        let mixture = match (self.alpha, self.beta, self.sigma0) {
            (Some(alpha), Some(beta), None) => VolatilityMixture::InverseGamma { alpha, beta },
            (None, None, Some(sigma0)) => VolatilityMixture::Point { sigma0 },
            _ => return Err(CliError::invalid("give either --alpha and --beta or --sigma0")),
        };
        let memory = self.memory.ok_or_else(|| CliError::invalid("missing --memory (or --params)"))?;
        Ok(ModelParams::new(need(self.d, "d")?, need(self.nu, "nu")?, mixture, memory)?)
    }
}
