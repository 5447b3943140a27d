use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpec_core::ErrorClass;

/// `println!` that stops quietly when stdout is closed.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod format;
mod presets;

/// Quasiprobability costs, bounds and PEC simulations for noisy gates.
#[derive(Parser, Debug)]
#[command(name = "qpec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    /// Noise preset such as `dephasing:eps=0.25`, or a JSON spec.
    #[arg(long)]
    noise: Option<String>,
    /// JSON file holding a noise spec, including the general form.
    #[arg(long, value_name = "FILE")]
    noise_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower and upper bounds on the optimal cost of undoing the noise.
    Bounds {
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        json: bool,
    },
    /// Decompose a gate into noisy implementable operations.
    Decompose {
        #[command(flatten)]
        noise: NoiseArgs,
        /// Operation set: b16, b13 or tq241.
        #[arg(long, default_value = "b16")]
        basis: String,
        #[arg(long, value_enum, default_value_t = DecomposeMode::L1)]
        mode: DecomposeMode,
        /// Target gate: id, x, y, z, h, s, t (one qubit), id, cx, cs, swap, iswap (two qubits),
        /// or a unitary as JSON `{"rows":2,"cols":2,"data":[[re,im],...]}` in row-major order.
        #[arg(long, default_value = "id")]
        target: String,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo PEC estimate of a circuit's expectation value.
    Simulate {
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, value_enum, default_value_t = SimulateMode::Theorem)]
        mode: SimulateMode,
        /// Operation set for `--mode lp`; defaults to b13 or tq241 by dimension.
        #[arg(long)]
        basis: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, env = "QPEC_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Score each sample by Tr[Aρ] instead of a simulated measurement.
        /// Lower variance, not physically realizable.
        #[arg(long)]
        shots_exact: bool,
        #[arg(long)]
        json: bool,
    },
    /// List or check an operation set.
    Basis {
        #[arg(long)]
        set: String,
        /// Report the numerical rank.
        #[arg(long)]
        check: bool,
        /// Compose every element with this noise before checking.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// CSV of bounds (and optionally the LP cost) over a range of rates.
    Sweep {
        /// Noise preset; its eps is replaced by each value of the range.
        #[arg(long)]
        noise: String,
        /// `start:stop:step`, stop inclusive.
        #[arg(long)]
        eps: String,
        /// Operation set for the lp_gamma column, or `none`.
        #[arg(long)]
        lp_basis: Option<String>,
        /// Write here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecomposeMode {
    L1,
    Exact,
    Theorem,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimulateMode {
    Theorem,
    General,
    Lp,
}

/// A message and the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<qpec_core::Error> for Failure {
    fn from(e: qpec_core::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Usage => 1,
            ErrorClass::Domain => 2,
            ErrorClass::Numerical => 3,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
