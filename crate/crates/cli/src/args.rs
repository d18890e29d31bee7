use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "regge", version, about = "Regge trajectories from ℏ-expansions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Significant digits in table and CSV output
    #[arg(long, global = true)]
    pub precision: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Flat `key = value` file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Run everything on the calling thread
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expansion coefficients and the truncated series at each energy
    Trajectory {
        #[command(flatten)]
        physics: PhysicsArgs,
        /// Expansion order
        #[arg(long = "N")]
        order: Option<usize>,
    },
    /// Renormalized fourth-order trajectories
    Renorm {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long, value_enum)]
        scheme: Option<SchemeChoice>,
    },
    /// The Martin-potential table: oracle, unrenormalized and both schemes
    Table1 {
        /// Keep only rows with this radial number, e.g. `n=1`
        #[arg(long, value_parser = parse_rows)]
        rows: Option<u32>,
        /// Print the table without checking it against the published values
        #[arg(long)]
        no_check: bool,
    },
}

#[derive(Args, Debug, Default)]
pub struct PhysicsArgs {
    #[arg(long, value_enum)]
    pub potential: Option<PotentialKind>,
    /// Coupling of `A r^v`
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Exponent of `A r^v`
    #[arg(long, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Mass
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Radial quantum number used in the expansion (defaults to the state's)
    #[arg(long)]
    pub n: Option<u32>,
    /// Energies, comma separated or repeated
    #[arg(long = "E", value_delimiter = ',', allow_negative_numbers = true)]
    pub energies: Vec<f64>,
    /// Evenly spaced energies `START:STOP:COUNT`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Bound state `n=..,l=..` whose oracle energy is used
    #[arg(long)]
    pub state: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    Powerlaw,
    Martin,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeChoice {
    None,
    Pms,
    Fc,
    Both,
}

fn parse_rows(s: &str) -> Result<u32, String> {
    let value = s.strip_prefix("n=").ok_or("expected n=<radial number>")?;
    value.trim().parse().map_err(|e| format!("bad radial number: {e}"))
}
