//! `peps-sim`: generate random circuits, compute amplitudes, estimate
//! contraction costs, sample, and verify against a state-vector simulator.
//!
//! Exit codes: 0 success, 2 parse or configuration error, 3 memory budget
//! refusal, 4 numerical or verification failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "peps-sim", version, about = "PEPS quantum circuit simulator")]
struct Cli {
    /// Memory budget for tensor contractions, e.g. `8GiB`, `512M` or a byte count.
    #[arg(
        long,
        global = true,
        env = "PEPS_MEMORY_BUDGET",
        default_value = "8GiB"
    )]
    memory_budget: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random circuit in the text format.
    Generate(GenerateArgs),
    /// Compute amplitudes <tau|psi> as CSV.
    Amplitude(AmplitudeArgs),
    /// Print predicted contraction costs and the chosen plan.
    Estimate(EstimateArgs),
    /// Porter-Thomas statistics or sequential measurement shots.
    Sample(SampleArgs),
    /// Compare PEPS amplitudes with the state-vector simulator over a grid.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Number of CZ cycles between the two Hadamard layers.
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Where the circuit comes from: a file or generator parameters.
#[derive(Debug, Args)]
struct CircuitSource {
    /// Circuit file in the text format.
    #[arg(long, conflicts_with_all = ["rows", "cols", "depth", "seed"])]
    circuit: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyChoice {
    Auto,
    Generic,
    SquareEven,
    SquareOdd,
}

#[derive(Debug, Args)]
struct AmplitudeArgs {
    #[command(flatten)]
    source: CircuitSource,
    /// Configurations to evaluate, row-major bits (repeatable).
    #[arg(long = "tau")]
    taus: Vec<String>,
    /// Number of uniformly random configurations to evaluate.
    #[arg(long)]
    random_amplitudes: Option<usize>,
    /// Seed for random configuration selection.
    #[arg(long, default_value_t = 0)]
    tau_seed: u64,
    #[arg(long, value_enum, default_value_t = StrategyChoice::Auto)]
    strategy: StrategyChoice,
    /// Also run the state-vector simulator and report the largest deviation.
    #[arg(long)]
    verify_oracle: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepAxis {
    /// Square lattices from `--from` to `--to` at the given depth.
    Side,
    /// Depths from `--from` to `--to` on the given lattice.
    Depth,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(required_unless_present = "bristlecone")]
    rows: Option<usize>,
    #[arg(required_unless_present = "bristlecone")]
    cols: Option<usize>,
    #[arg(required_unless_present = "bristlecone")]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = StrategyChoice::Auto)]
    strategy: StrategyChoice,
    /// Cost of the fixed rank-11 contraction of the 72-qubit lattice at this depth.
    #[arg(long, conflicts_with_all = ["rows", "sweep"])]
    bristlecone: Option<usize>,
    /// Emit a CSV table over a range of sides or depths.
    #[arg(long, value_enum, requires_all = ["from", "to"])]
    sweep: Option<SweepAxis>,
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: Option<usize>,
    #[arg(long, default_value_t = 1)]
    step: usize,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    source: CircuitSource,
    /// Compute this many random-configuration probabilities and compare
    /// them with the Porter-Thomas law.
    #[arg(
        long,
        conflicts_with = "measure_all",
        required_unless_present = "measure_all"
    )]
    porter_thomas: Option<usize>,
    #[arg(long, default_value_t = 0)]
    tau_seed: u64,
    /// Also write the sampled `tau,prob` pairs here.
    #[arg(long)]
    probabilities: Option<PathBuf>,
    /// Measure every qubit in sequence, `--shots` times.
    #[arg(long)]
    measure_all: bool,
    #[arg(long, default_value_t = 1)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    measure_seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random configurations per circuit.
    #[arg(long, default_value_t = 100)]
    amplitudes: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// Largest lattice, as rows x cols, included in the grid.
    #[arg(long, default_value_t = 20)]
    max_qubits: usize,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
