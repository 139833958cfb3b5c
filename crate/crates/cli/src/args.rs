use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hidden-shift", version, about = "Classical simulation of the hidden shift algorithm over Z_{2^t}^n")]
pub struct Cli {
    /// Worker threads for parallel trials.
    #[arg(long, global = true, value_parser = clap::value_parser!(usize))]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file.
    Gen(GenArgs),
    /// Recover the hidden shift of an instance.
    Solve(SolveArgs),
    /// Same as `solve --mode coset`.
    SolveCoset(SolveArgs),
    /// Run the validation suite.
    Validate(ValidateArgs),
    /// Query and state counts over a grid of sizes.
    Bench(BenchArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SizeArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub n: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=63))]
    pub t: Option<u32>,
    /// Codeword length in bits; defaults to n*t.
    #[arg(long)]
    pub l: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Store the secret shift in the file.
    #[arg(long)]
    pub with_secret: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Standard,
    Coset,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file written by `gen`. Without it an instance is generated
    /// from --n, --t, --l and --seed.
    #[arg(long, conflicts_with_all = ["n", "t", "l"])]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Seed for the simulated measurements (and the instance when generated).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Standard)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Base sample count for histogram and sign checks.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Single attempts per success-rate check.
    #[arg(long, default_value_t = 1000)]
    pub attempts: u64,
    /// Instances per brute-force comparison.
    #[arg(long, default_value_t = 50)]
    pub instances: u64,
    /// Run one group or one check by name.
    #[arg(long)]
    pub only: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Attempts per grid cell.
    #[arg(long, default_value_t = 20)]
    pub trials: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub n_max: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=6))]
    pub t_max: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Standard)]
    pub mode: ModeArg,
    /// Print an aligned text table instead of JSON.
    #[arg(long)]
    pub table: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
