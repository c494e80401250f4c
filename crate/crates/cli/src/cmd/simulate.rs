use std::path::PathBuf;

use clap::Args;
use msarch_core::simulate::{sample_returns, SeedSpec};

use super::ModelArgs;
use crate::error::{CliError, Result};
use crate::files::{fmt_f64, Table};

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of returns.
    #[arg(long)]
    pub len: usize,
    #[arg(long)]
    pub seed: u64,
    /// Independent stream under the same seed.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Path file with columns t, i, y, x.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<usize> {
    let params = args.model.resolve()?;
    if args.len == 0 {
        return Err(CliError::invalid("--len must be positive"));
    }
    let path = sample_returns(&params, args.len, SeedSpec::new(args.seed, args.stream))?;
    let mut table = Table::new(&["t", "i", "y", "x"]);
    for t in 0..path.len() {
        table.push(vec![(t + 1).to_string(), path.i[t].to_string(), fmt_f64(path.y[t]), fmt_f64(path.x[t])]);
    }
    table.write(&args.out)?;
    Ok(path.restart_times().len())
}
