use std::path::PathBuf;

use clap::Args;
use msarch_core::calibrate::{calibrate_beta, CalibrationResult, Calibrator, CurveKind, ModelKind, ObjectiveSpec};
use msarch_core::empirics::ReturnSeries;

use crate::error::{CliError, Result};
use crate::files::read_returns;
use crate::params::{BoundsDoc, DiagnosticsDoc, ModelName, ObjectiveDoc, ParamsDoc, ResidualDoc};

#[derive(Args, Debug, Clone)]
pub struct CalibrateArgs {
    /// Returns file (column `x`); the sample mean is removed before fitting.
    #[arg(long)]
    pub returns: PathBuf,
    /// Memory order M, also the largest horizon of the fitted curves.
    #[arg(long)]
    pub memory: usize,
    /// Moment orders Q.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub orders: Vec<f64>,
    /// Fit the null model (normal endogenous process).
    #[arg(long)]
    pub null: bool,
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    pub d_bounds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    pub nu_bounds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    pub alpha_bounds: Option<Vec<f64>>,
    /// Truncation tolerance of the theoretical curves.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Parameter document to write.
    #[arg(long)]
    pub out: PathBuf,
}

fn pair(v: &[f64], name: &str) -> Result<(f64, f64)> {
    match v {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(CliError::invalid(format!("--{name}-bounds takes two values, LO,HI"))),
    }
}

impl CalibrateArgs {
    pub fn objective_spec(&self) -> Result<ObjectiveSpec> {
        let mut spec = ObjectiveSpec::with_orders(self.memory, self.orders.clone());
        if self.null {
            spec.model = ModelKind::Null;
        }
        if let Some(b) = &self.d_bounds {
            spec.bounds.d = pair(b, "d")?;
        }
        if let Some(b) = &self.nu_bounds {
            spec.bounds.nu = pair(b, "nu")?;
        }
        if let Some(b) = &self.alpha_bounds {
            if self.null {
                return Err(CliError::invalid("--alpha-bounds does not apply to the null model"));
            }
            spec.bounds.alpha = pair(b, "alpha")?;
        }
        if let Some(eps) = self.eps {
            spec.eps = eps;
        }
        spec.validate()?;
        Ok(spec)
    }
}

pub fn document(spec: &ObjectiveSpec, fit: &CalibrationResult, scale: f64, len: usize) -> ParamsDoc {
    let complete = spec.model == ModelKind::Complete;
    let b = spec.bounds;
    let residuals = fit
        .residuals
        .iter()
        .map(|r| ResidualDoc {
            kind: match r.kind {
                CurveKind::Moment => "moment".into(),
                CurveKind::Acf => "acf".into(),
            },
            q: r.q,
            rms: (r.values.iter().map(|v| v * v).sum::<f64>() / r.values.len().max(1) as f64).sqrt(),
            values: r.values.clone(),
        })
        .collect();
    ParamsDoc {
        model: if complete { ModelName::Complete } else { ModelName::Null },
        d: fit.theta_hat.d,
        nu: fit.theta_hat.nu,
        alpha: complete.then_some(fit.theta_hat.alpha),
        beta: complete.then_some(scale),
        sigma0: (!complete).then_some(scale),
        memory: spec.memory,
        objective: Some(ObjectiveDoc {
            value: fit.objective_value,
            orders: spec.orders.clone(),
            eps: spec.eps,
            evaluations: fit.evaluations,
            converged: fit.converged,
            bounds: BoundsDoc {
                d: [b.d.0, b.d.1],
                nu: [b.nu.0, b.nu.1],
                alpha: complete.then_some([b.alpha.0, b.alpha.1]),
            },
        }),
        diagnostics: Some(DiagnosticsDoc { len, residuals }),
    }
}

pub fn run(args: &CalibrateArgs) -> Result<ParamsDoc> {
    let spec = args.objective_spec()?;
    let x = ReturnSeries::demeaned(read_returns(&args.returns)?);
    let fit = Calibrator::new(spec.clone())?.calibrate(&x)?;
    let scale = calibrate_beta(&x, &fit.theta_hat, &spec.orders)?;
    let doc = document(&spec, &fit, scale, x.len());
    doc.write(&args.out)?;
    Ok(doc)
}
