use std::path::PathBuf;

use clap::Args;
use msarch_core::empirics::{Histogram, ReturnSeries};
use msarch_core::restarts::{detect_restarts, expected_restart_count, longmem_vol_samples, DEFAULT_TAU};
use msarch_core::theory::longmem_vol_cdf;
use msarch_core::VolatilityMixture;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::files::{ensure_dir, fmt_f64, read_returns, read_truth, write_atomic, Table};
use crate::params::ParamsDoc;

#[derive(Args, Debug, Clone)]
pub struct RestartsArgs {
    /// Returns file (column `x`), used as is.
    #[arg(long)]
    pub returns: PathBuf,
    /// Parameter document with a scale (beta or sigma0).
    #[arg(long)]
    pub params: PathBuf,
    /// Half-width of the posterior window.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: usize,
    /// Simulated path file (column `i`) with the true restarts.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Number of bins of the long-memory volatility table.
    #[arg(long, default_value_t = 60)]
    pub bins: usize,
    /// Output directory for posterior.csv, restart_times.csv, endogenous.csv,
    /// longmem.csv and summary.toml.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub true_restarts: usize,
    pub exact: f64,
    pub within_two: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartsSummary {
    pub len: usize,
    pub tau: usize,
    pub selected: usize,
    /// Smallest selected posterior; absent when nothing is selected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<Recovery>,
}

/// Fractions of true restarts found exactly and within two steps.
pub fn recovery(truth: &[usize], found: &[usize]) -> Recovery {
    let exact = truth.iter().filter(|t| found.binary_search(t).is_ok()).count();
    let near = truth.iter().filter(|&&t| found.iter().any(|&s| s.abs_diff(t) <= 2)).count();
    let n = truth.len().max(1) as f64;
    Recovery { true_restarts: truth.len(), exact: exact as f64 / n, within_two: near as f64 / n }
}

pub fn run(args: &RestartsArgs) -> Result<(RestartsSummary, Vec<String>)> {
    let params = ParamsDoc::read(&args.params)?.model_params()?;
    let x = ReturnSeries::new(read_returns(&args.returns)?);
    let mut warnings = Vec::new();
    if expected_restart_count(params.nu, x.len()) == 0 {
        warnings.push(format!("nu * T = {} < 1: no restarts selected", params.nu * x.len() as f64));
    }
    let diag = detect_restarts(&x, &params, args.tau)?;
    ensure_dir(&args.out_dir)?;

    let mut table = Table::new(&["t", "posterior"]);
    for (t, p) in diag.posterior.iter().enumerate() {
        table.push(vec![(t + 1).to_string(), fmt_f64(*p)]);
    }
    table.write(&args.out_dir.join("posterior.csv"))?;

    let mut table = Table::new(&["t"]);
    for t in &diag.restart_times {
        table.push(vec![t.to_string()]);
    }
    table.write(&args.out_dir.join("restart_times.csv"))?;

    let mut table = Table::new(&["t", "i", "y"]);
    for (t, (i, y)) in diag.i_path.iter().zip(&diag.y_path).enumerate() {
        table.push(vec![(t + 1).to_string(), i.to_string(), fmt_f64(*y)]);
    }
    table.write(&args.out_dir.join("endogenous.csv"))?;

    let width = params.memory;
    let mut table = Table::new(&["series", "s", "value"]);
    if width <= diag.y_path.len() {
        let samples = longmem_vol_samples(&diag.y_path, &diag.restart_times, width)?.samples;
        let hi = samples.iter().copied().fold(0.0, f64::max) * (1.0 + 1e-12);
        // Bins over [0, hi]: shift to the symmetric helper's range.
        let shifted: Vec<f64> = samples.iter().map(|s| s - 0.5 * hi).collect();
        let hist = Histogram::symmetric(&shifted, 0.5 * hi, args.bins.max(1));
        let edges: Vec<f64> = hist.edges.iter().map(|e| e + 0.5 * hi).collect();
        for (k, v) in hist.density().iter().enumerate() {
            table.push(vec!["empirical".into(), fmt_f64(0.5 * (edges[k] + edges[k + 1])), fmt_f64(*v)]);
        }
        if let VolatilityMixture::InverseGamma { alpha, beta } = params.mixture {
            for k in 0..edges.len() - 1 {
                let (a, b) = (edges[k], edges[k + 1]);
                let v = (longmem_vol_cdf(b, width, alpha, beta) - longmem_vol_cdf(a, width, alpha, beta)) / (b - a);
                table.push(vec!["theory".into(), fmt_f64(0.5 * (a + b)), fmt_f64(v)]);
            }
        }
    } else {
        warnings.push("series shorter than M: no long-memory volatility table".into());
    }
    table.write(&args.out_dir.join("longmem.csv"))?;

    let recovery = match &args.truth {
        Some(path) => {
            let truth = read_truth(path)?;
            if truth.last().is_some_and(|&t| t > x.len()) {
                return Err(CliError::invalid("truth file is longer than the returns"));
            }
            Some(recovery(&truth, &diag.restart_times))
        }
        None => None,
    };
    let summary = RestartsSummary {
        len: x.len(),
        tau: args.tau,
        selected: diag.restart_times.len(),
        threshold: diag.threshold.is_finite().then_some(diag.threshold),
        recovery,
    };
    let text = toml::to_string(&summary).map_err(|e| CliError::invalid(e.to_string()))?;
    write_atomic(&args.out_dir.join("summary.toml"), text.as_bytes())?;
    Ok((summary, warnings))
}
