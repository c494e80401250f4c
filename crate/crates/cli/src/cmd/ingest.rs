use std::path::PathBuf;

use clap::Args;
use msarch_core::empirics::log_returns;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::files::{fmt_f64, read_prices, write_atomic, Table};

#[derive(Args, Debug, Clone)]
pub struct IngestArgs {
    /// Price file: header row, then ISO date and close per line.
    #[arg(long)]
    pub prices: PathBuf,
    /// Returns file (column `x`). The summary goes next to it as `<out>.summary.toml`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct IngestSummary {
    pub len: usize,
    pub mean_removed: f64,
    pub std: f64,
}

pub fn summary_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.toml");
    PathBuf::from(s)
}

pub fn run(args: &IngestArgs) -> Result<IngestSummary> {
    let prices = read_prices(&args.prices)?;
    let x = log_returns(&prices)?;
    let len = x.len();
    let summary =
        IngestSummary { len, mean_removed: (prices[len].ln() - prices[0].ln()) / len as f64, std: x.std_dev() };
    let mut table = Table::new(&["x"]);
    for &v in x.values() {
        table.push(vec![fmt_f64(v)]);
    }
    table.write(&args.out)?;
    let text = toml::to_string(&summary).map_err(|e| CliError::invalid(e.to_string()))?;
    write_atomic(&summary_path(&args.out), text.as_bytes())?;
    Ok(summary)
}
