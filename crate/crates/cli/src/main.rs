//! `genrob`: batch front end for generalized robustness, witness families
//! and channel-discrimination checks.

mod commands;
mod plot;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Failure;

#[derive(Parser, Debug)]
#[command(name = "genrob", version, about = "Generalized robustness against unions of convex free sets")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override. Bisection tolerance for `robustness`; replaces
    /// every pinned tolerance for `verify`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory for reports, CSV and SVG files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Largest multi-copy operator dimension `d^m`.
    #[arg(long = "cap-dim", global = true, default_value_t = genrob_core::qcore::DEFAULT_DIM_CAP)]
    pub cap_dim: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Robustness of a state against each subset and the union.
    Robustness {
        state: PathBuf,
        freeset: PathBuf,
    },
    /// Shifted witness family and its sampled validity report.
    Witness {
        state: PathBuf,
        freeset: PathBuf,
        /// Shift parameter, or `auto` for 0.9 R.
        #[arg(long, default_value = "auto")]
        s: String,
        /// Normalization constant of the shifted family.
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        /// Free samples for the margin estimate and the validity check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Multi-copy (qualitative) or single-copy worst-case advantage.
    Discriminate {
        state: PathBuf,
        freeset: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Number of channels in the achieving ensemble.
        #[arg(long = "N", default_value_t = 10_000)]
        n: usize,
        /// Free samples for the qualitative check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Ensemble sizes for the advantage-vs-N sweep.
        #[arg(long, value_delimiter = ',', default_value = "2,10,100,1000,10000")]
        sweep: Vec<usize>,
        /// Also render the sweep as an SVG line chart.
        #[arg(long)]
        svg: bool,
    },
    /// Run the built-in verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Qualitative,
    WorstCase,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Qualitative => "qualitative",
            Mode::WorstCase => "worst-case",
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Robustness { state, freeset } => commands::robustness(g, &state, &freeset),
        Command::Witness {
            state,
            freeset,
            s,
            c,
            samples,
        } => commands::witness(g, &state, &freeset, &s, c, samples),
        Command::Discriminate {
            state,
            freeset,
            mode,
            n,
            samples,
            sweep,
            svg,
        } => commands::discriminate(g, &state, &freeset, mode, n, samples, &sweep, svg),
        Command::Verify { suite } => verify::run(g, &suite),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
