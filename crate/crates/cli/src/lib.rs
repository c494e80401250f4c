//! File formats and commands of the `msarch` tool.
//!
//! Series and tables are CSV (comma separated, header row, shortest
//! round-trip decimals, `NA` for undefined cells). Parameter documents are
//! TOML, see [`params::ParamsDoc`].

pub mod cmd;
pub mod error;
pub mod files;
pub mod params;

pub use error::{CliError, Result};
