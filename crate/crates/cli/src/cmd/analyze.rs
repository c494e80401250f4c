use std::path::PathBuf;

use clap::Args;
use msarch_core::empirics::{empirical_acf_curve, empirical_moment_curve, mug_shot, Histogram, ReturnSeries};
use msarch_core::theory::{acf_returns_curve, hurst_fit, moment_ratio_curve, MarginalDensity};
use msarch_core::Error as ModelError;

use crate::error::{CliError, Result};
use crate::files::{ensure_dir, fmt_f64, read_returns, Table};
use crate::params::ParamsDoc;

const THEORY_EPS: f64 = 1e-8;

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// Returns file (column `x`); the sample mean is removed first.
    #[arg(long)]
    pub returns: PathBuf,
    /// Parameter document; adds theory rows to every table that has one.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Largest horizon of the moment and autocorrelation curves
    /// (default: M of the parameter document, otherwise 30).
    #[arg(long)]
    pub window: Option<usize>,
    /// Orders of the moment curves and scaling exponents.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3,3.5,4")]
    pub orders: Vec<f64>,
    /// Orders of the autocorrelation curves.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub acf_orders: Vec<f64>,
    /// Horizons of the mug-shot grid, used for both axes.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,50,100")]
    pub mug_grid: Vec<usize>,
    /// Upper limit on the number of histogram bins.
    #[arg(long, default_value_t = 200)]
    pub max_bins: usize,
    /// Output directory for moments.csv, acf.csv, hurst.csv, histogram.csv and mugshot.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Theory rows are skipped (with a warning) where the moment diverges;
/// other failures are errors.
fn optional<T>(r: std::result::Result<T, ModelError>, warnings: &mut Vec<String>, what: String) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ ModelError::MomentDiverges { .. }) => {
            warnings.push(format!("no theory for {what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Writes the tables and returns the warnings.
pub fn run(args: &AnalyzeArgs) -> Result<Vec<String>> {
    let doc = args.params.as_ref().map(|p| ParamsDoc::read(p)).transpose()?;
    let x = ReturnSeries::demeaned(read_returns(&args.returns)?);
    let window = args.window.or(doc.as_ref().map(|d| d.memory)).unwrap_or(30);
    if window < 2 || window * 10 > x.len() {
        return Err(CliError::invalid(format!("window {window} needs 2 <= W <= T/10 = {}", x.len() / 10)));
    }
    let theta = doc.as_ref().map(|d| d.theta()).transpose()?;
    let params = doc.as_ref().and_then(|d| d.model_params().ok());
    let mut warnings = Vec::new();
    if doc.is_some() && params.is_none() {
        warnings.push("parameter document has no scale: no theory for autocorrelations and the histogram".into());
    }
    ensure_dir(&args.out_dir)?;

    let mut moments = Table::new(&["series", "q", "t", "value"]);
    let mut hurst = Table::new(&["series", "q", "h", "eps"]);
    for &q in &args.orders {
        let emp = empirical_moment_curve(&x, q, window)?;
        let mut curves = vec![("empirical", emp)];
        if let Some(theta) = &theta {
            curves.push(("theory", moment_ratio_curve(q, window, theta, THEORY_EPS)?));
        }
        for (series, curve) in &curves {
            for (t, v) in curve.ts.iter().zip(&curve.values) {
                moments.push(vec![series.to_string(), fmt_f64(q), t.to_string(), fmt_f64(*v)]);
            }
            let fit = hurst_fit(curve, window)?;
            hurst.push(vec![series.to_string(), fmt_f64(q), fmt_f64(fit.h), fmt_f64(fit.eps)]);
        }
    }
    moments.write(&args.out_dir.join("moments.csv"))?;
    hurst.write(&args.out_dir.join("hurst.csv"))?;

    let mut acf = Table::new(&["series", "q", "t", "value"]);
    for &q in &args.acf_orders {
        let emp = empirical_acf_curve(&x, q, window)?;
        for (t, v) in emp.ts.iter().zip(&emp.values) {
            acf.push(vec!["empirical".into(), fmt_f64(q), t.to_string(), fmt_f64(*v)]);
        }
        if let Some(params) = &params {
            if let Some(curve) =
                optional(acf_returns_curve(q, params, THEORY_EPS), &mut warnings, format!("acf q = {q}"))?
            {
                for (t, v) in curve.ts.iter().zip(&curve.values).filter(|(t, _)| **t <= window) {
                    acf.push(vec!["theory".into(), fmt_f64(q), t.to_string(), fmt_f64(*v)]);
                }
            }
        }
    }
    acf.write(&args.out_dir.join("acf.csv"))?;

    let hist = Histogram::freedman_diaconis(x.values(), args.max_bins.max(2))?;
    let mut table = Table::new(&["series", "x", "value"]);
    let centers: Vec<f64> = hist.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
    for (c, v) in centers.iter().zip(hist.density()) {
        table.push(vec!["empirical".into(), fmt_f64(*c), fmt_f64(v)]);
    }
    if let Some(params) = &params {
        let f = MarginalDensity::new(params, 1e-10)?;
        for (k, c) in centers.iter().enumerate() {
            let v = (f.cdf(hist.edges[k + 1]) - f.cdf(hist.edges[k])) / hist.bin_width(k);
            table.push(vec!["theory".into(), fmt_f64(*c), fmt_f64(v)]);
        }
    }
    table.write(&args.out_dir.join("histogram.csv"))?;

    let grid: Vec<usize> = args.mug_grid.iter().copied().filter(|&t| t >= 1 && 2 * t < x.len()).collect();
    let mut table = Table::new(&["t_h", "t_r", "value"]);
    if grid.len() < args.mug_grid.len() {
        warnings.push("mug-shot horizons longer than half the series were dropped".into());
    }
    if !grid.is_empty() {
        let shot = mug_shot(&x, &grid, &grid)?;
        for &a in &grid {
            for &b in &grid {
                let v = shot.get(a, b).map(fmt_f64).unwrap_or_else(|| "NA".into());
                table.push(vec![a.to_string(), b.to_string(), v]);
            }
        }
    }
    table.write(&args.out_dir.join("mugshot.csv"))?;
    Ok(warnings)
}
