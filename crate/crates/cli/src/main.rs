use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msarch::cmd::{analyze, calibrate, ingest, restarts, simulate};
use msarch::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "msarch",
    version,
    about = "Scaling-symmetric Markov-switching ARCH model: simulate, calibrate, analyze"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, env = "MSARCH_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn a date,close price file into zero-mean log returns.
    Ingest(ingest::IngestArgs),
    /// Sample a path of the model.
    Simulate(simulate::SimulateArgs),
    /// Fit (D, nu, alpha) and the scale to a returns file.
    Calibrate(calibrate::CalibrateArgs),
    /// Moment, autocorrelation, scaling, histogram and mug-shot tables.
    Analyze(analyze::AnalyzeArgs),
    /// Restart posteriors, selected restarts and the reconstructed endogenous path.
    Restarts(restarts::RestartsArgs),
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::invalid("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::invalid(e.to_string()))?;
    }
    match cli.command {
        Command::Ingest(args) => {
            let s = ingest::run(&args)?;
            println!("{} returns, mean removed {:e}, std {:e}", s.len, s.mean_removed, s.std);
        }
        Command::Simulate(args) => {
            let restarts = simulate::run(&args)?;
            println!("{} steps, {restarts} restarts", args.len);
        }
        Command::Calibrate(args) => {
            let doc = calibrate::run(&args)?;
            let obj = doc.objective.as_ref().map(|o| o.value).unwrap_or(f64::NAN);
            let scale = doc.beta.or(doc.sigma0).unwrap_or(f64::NAN);
            match doc.alpha {
                Some(alpha) => println!("D {} nu {} alpha {alpha} beta {scale} objective {obj:e}", doc.d, doc.nu),
                None => println!("D {} nu {} sigma0 {scale} objective {obj:e}", doc.d, doc.nu),
            }
        }
        Command::Analyze(args) => warn(&analyze::run(&args)?),
        Command::Restarts(args) => {
            let (summary, warnings) = restarts::run(&args)?;
            warn(&warnings);
            println!("{} restarts selected", summary.selected);
            if let Some(r) = summary.recovery {
                println!(
                    "recovery of {} true restarts: exact {:.1}%, within 2 steps {:.1}%",
                    r.true_restarts,
                    100.0 * r.exact,
                    100.0 * r.within_two
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
