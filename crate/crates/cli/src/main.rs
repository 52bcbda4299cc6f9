//! `oneshot`: compute smooth quantities and run coding experiments from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oneshot_core::ErrorKind;

#[derive(Parser, Debug)]
#[command(name = "oneshot", version, about = "Exact one-shot information quantities and coding experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed; trial `t` uses seed `seed + t`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Rescale input tables that do not sum to 1.
    #[arg(long, global = true)]
    pub renormalize: bool,

    /// Worker threads for trial sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one smooth quantity and print it as JSON.
    Smooth(SmoothArgs),
    /// Random binning for two correlated sources.
    SwSim(SwArgs),
    /// Lossless coding of X with a rate-limited helper observing Y.
    HelperSim(HelperArgs),
    /// Random codebooks under the maximum-distortion criterion.
    RdSim(RdArgs),
    /// Normalized smooth quantities of i.i.d. products for n = 1..nmax.
    Converge(ConvergeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    H0,
    H0cond,
    Dinf,
    Iinf,
    Quantile,
}

#[derive(Args, Debug)]
pub struct SmoothArgs {
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    #[arg(long)]
    pub input: PathBuf,
    /// Reference distribution for `dinf`.
    #[arg(long)]
    pub input2: Option<PathBuf>,
    /// Distortion table for `quantile`.
    #[arg(long)]
    pub distortion: Option<PathBuf>,
    #[arg(long)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct SwArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long = "ellA")]
    pub ell_a: Option<u32>,
    #[arg(long = "ellB")]
    pub ell_b: Option<u32>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    A,
    B,
}

#[derive(Args, Debug)]
pub struct HelperArgs {
    #[arg(long)]
    pub joint: PathBuf,
    /// Channel from Y to the auxiliary U, one row per y.
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long, value_enum, ignore_case = true)]
    pub scheme: Scheme,
    #[arg(long = "epsA")]
    pub eps_a: f64,
    #[arg(long = "epsB")]
    pub eps_b: f64,
    /// Smoothing of the information term in scheme A.
    #[arg(long = "epsBbar")]
    pub eps_b_bar: Option<f64>,
    /// Target error; defaults to epsA + epsB (A) or 2 epsA + 4 epsB (B).
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "ellA")]
    pub ell_a: Option<u32>,
    #[arg(long = "ellB")]
    pub ell_b: Option<u32>,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct RdArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub distortion: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub eps1: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sequence {
    H0cond,
    Dinf,
    Spectrum,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    /// Single-letter joint, or `P` when `--base2` is given.
    #[arg(long)]
    pub base: PathBuf,
    /// Single-letter `Q`.
    #[arg(long)]
    pub base2: Option<PathBuf>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub nmax: usize,
    #[arg(long, value_enum)]
    pub quantity: Sequence,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 2,
        ErrorKind::Resource => 3,
        ErrorKind::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let text = match commands::run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(e.kind()));
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}
