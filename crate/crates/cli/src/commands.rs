use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use peps_core::circuit::{generate_rqc, parse_circuit, serialize_circuit, Circuit};
use peps_core::contraction::{
    amplitude_record, applicable_strategies, estimate_bristlecone, estimate_cost, parse_byte_size,
    plan_contraction, plan_for_state, MemoryBudget, SequentialSampler, Strategy,
};
use peps_core::oracle::simulate_statevector;
use peps_core::peps::chi_bound;
use peps_core::stats::porter_thomas_report;
use peps_core::{evolve, Bitstring, PepsState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::{
    AmplitudeArgs, CircuitSource, Cli, Command, EstimateArgs, GenerateArgs, SampleArgs,
    StrategyChoice, SweepAxis, VerifyArgs,
};

/// ChaCha8 stream for configuration selection; circuit generation uses
/// streams `0..N`, one per qubit.
const TAU_STREAM: u64 = 1 << 32;
const MEASURE_STREAM: u64 = (1 << 32) + 1;

const VERIFY_SHAPES: [(usize, usize); 6] = [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (4, 5)];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] peps_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use peps_core::Error as E;
        match self {
            CliError::Core(E::BudgetExceeded { .. } | E::ElementGuard { .. }) => 3,
            CliError::Core(E::Numerical(_)) | CliError::Verification(_) => 4,
            CliError::Core(_) | CliError::Io { .. } | CliError::Config(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<output>"),
        source: e,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let budget = MemoryBudget::new(parse_byte_size(&cli.memory_budget)?);
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Amplitude(args) => amplitudes(args, &budget),
        Command::Estimate(args) => estimate(args, &budget),
        Command::Sample(args) => sample(args, &budget),
        Command::Verify(args) => verify(args, &budget),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let c = generate_rqc(args.rows, args.cols, args.depth, args.seed)?;
    let mut out = open_output(args.output.as_deref())?;
    out.write_all(serialize_circuit(&c).as_bytes())
        .map_err(stdout_err)?;
    out.flush().map_err(stdout_err)
}

fn load_circuit(source: &CircuitSource) -> Result<Circuit> {
    if let Some(path) = &source.circuit {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        return Ok(parse_circuit(&text)?);
    }
    match (source.rows, source.cols, source.depth) {
        (Some(r), Some(c), Some(d)) => Ok(generate_rqc(r, c, d, source.seed.unwrap_or(0))?),
        _ => Err(CliError::Config(
            "give either --circuit FILE or all of --rows, --cols and --depth".into(),
        )),
    }
}

fn forced_strategy(choice: StrategyChoice) -> Option<Strategy> {
    match choice {
        StrategyChoice::Auto => None,
        StrategyChoice::Generic => Some(Strategy::GenericRows),
        StrategyChoice::SquareEven => Some(Strategy::SquareEven),
        StrategyChoice::SquareOdd => Some(Strategy::SquareOdd),
    }
}

/// For generated random circuits the bond dimension is known in advance,
/// so a contraction that cannot fit is refused before evolving.
fn precheck(circuit: &Circuit, choice: StrategyChoice, budget: &MemoryBudget) -> Result<()> {
    if circuit.generator.is_none() {
        return Ok(());
    }
    let (rows, cols, depth) = (circuit.rows(), circuit.cols(), circuit.depth());
    match forced_strategy(choice) {
        None => {
            plan_contraction(rows, cols, depth, budget.limit())?;
        }
        Some(s) => {
            let report = estimate_cost(rows, cols, depth, s)?;
            drop(budget.reserve(&report)?);
        }
    }
    Ok(())
}

fn choose_strategy(
    state: &PepsState,
    choice: StrategyChoice,
    budget: &MemoryBudget,
) -> Result<Strategy> {
    match forced_strategy(choice) {
        Some(s) if s.is_applicable(state.rows(), state.cols()) => Ok(s),
        Some(s) => Err(CliError::Config(format!(
            "strategy {} does not apply to a {}x{} lattice",
            s.name(),
            state.rows(),
            state.cols()
        ))),
        None => Ok(plan_for_state(state, budget)?.strategy),
    }
}

fn random_taus(n: usize, count: usize, seed: u64) -> Vec<Bitstring> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TAU_STREAM);
    (0..count)
        .map(|_| {
            Bitstring::from_bits((0..n).map(|_| u8::from(rng.random::<bool>())).collect())
                .expect("bits are 0 or 1")
        })
        .collect()
}

/// Relative deviation; amplitudes that vanish in the reference are measured
/// against the typical magnitude `2^(-N/2)` instead.
fn deviation(got: C64, want: C64, n: usize) -> f64 {
    let typical = 2f64.powf(-(n as f64) / 2.0);
    if want.norm() < 1e-13 {
        got.norm() / typical
    } else {
        (got - want).norm() / want.norm()
    }
}

fn amplitudes(args: AmplitudeArgs, budget: &MemoryBudget) -> Result<()> {
    let circuit = load_circuit(&args.source)?;
    let n = circuit.n_qubits();
    let mut taus = args
        .taus
        .iter()
        .map(|s| s.parse::<Bitstring>())
        .collect::<peps_core::Result<Vec<_>>>()?;
    if let Some(k) = args.random_amplitudes {
        taus.extend(random_taus(n, k, args.tau_seed));
    }
    if taus.is_empty() {
        return Err(CliError::Config(
            "no configurations: use --tau or --random-amplitudes".into(),
        ));
    }
    if let Some(t) = taus.iter().find(|t| t.len() != n) {
        return Err(CliError::Config(format!(
            "configuration {t} has {} bits, lattice has {n}",
            t.len()
        )));
    }
    precheck(&circuit, args.strategy, budget)?;
    let state = evolve(&circuit)?;
    let strategy = choose_strategy(&state, args.strategy, budget)?;

    let records = taus
        .iter()
        .map(|t| amplitude_record(&state, t, strategy, budget))
        .collect::<peps_core::Result<Vec<_>>>()?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "tau, re, im, prob").map_err(stdout_err)?;
    for r in &records {
        writeln!(
            out,
            "{}, {:?}, {:?}, {:?}",
            r.tau, r.amplitude.re, r.amplitude.im, r.probability
        )
        .map_err(stdout_err)?;
    }
    out.flush().map_err(stdout_err)?;

    if args.verify_oracle {
        let sv = simulate_statevector(&circuit)?;
        let mut worst = 0.0f64;
        for r in &records {
            worst = worst.max(deviation(r.amplitude, sv.amplitude(&r.tau)?, n));
        }
        eprintln!(
            "max relative deviation from state vector: {worst:.3e} over {} amplitudes",
            records.len()
        );
        if worst > 1e-10 {
            return Err(CliError::Verification(format!(
                "deviation {worst:e} above 1e-10"
            )));
        }
    }
    Ok(())
}

fn estimate(args: EstimateArgs, budget: &MemoryBudget) -> Result<()> {
    let mut out = open_output(None)?;
    if let Some(depth) = args.bristlecone {
        writeln!(out, "bristlecone, depth {depth}").map_err(stdout_err)?;
        writeln!(out, "{}", estimate_bristlecone(depth)).map_err(stdout_err)?;
        return out.flush().map_err(stdout_err);
    }
    let (rows, cols, depth) = match (args.rows, args.cols, args.depth) {
        (Some(r), Some(c), Some(d)) => (r, c, d),
        _ => return Err(CliError::Config("estimate needs ROWS COLS DEPTH".into())),
    };
    let forced = forced_strategy(args.strategy);

    if let Some(axis) = args.sweep {
        let (from, to) = (args.from.unwrap_or(0), args.to.unwrap_or(0));
        if args.step == 0 || from > to {
            return Err(CliError::Config(
                "sweep needs --from <= --to and a positive --step".into(),
            ));
        }
        writeln!(
            out,
            "rows,cols,depth,strategy,space_elements,space_bytes,time_ops,fits_budget"
        )
        .map_err(stdout_err)?;
        for v in (from..=to).step_by(args.step) {
            let (r, c, d) = match axis {
                SweepAxis::Side => (v, v, depth),
                SweepAxis::Depth => (rows, cols, v),
            };
            let strategies = match forced {
                Some(s) if s.is_applicable(r, c) => vec![s],
                Some(_) => continue,
                None => applicable_strategies(r, c),
            };
            for s in strategies {
                let rep = estimate_cost(r, c, d, s)?;
                let time = rep
                    .time_ops
                    .as_ref()
                    .map(|t| t.to_string())
                    .unwrap_or_default();
                let fits = rep.space_bytes <= budget.limit().into();
                writeln!(
                    out,
                    "{r},{c},{d},{},{},{},{time},{fits}",
                    s.name(),
                    rep.space_elements,
                    rep.space_bytes
                )
                .map_err(stdout_err)?;
            }
        }
        return out.flush().map_err(stdout_err);
    }

    writeln!(
        out,
        "lattice {rows}x{cols}, depth {depth}, bond dimension {}",
        chi_bound(depth)
    )
    .map_err(stdout_err)?;
    match forced {
        Some(s) => {
            writeln!(out, "{}", estimate_cost(rows, cols, depth, s)?).map_err(stdout_err)?;
        }
        None => {
            for s in applicable_strategies(rows, cols) {
                writeln!(out, "{}", estimate_cost(rows, cols, depth, s)?).map_err(stdout_err)?;
            }
            match plan_contraction(rows, cols, depth, budget.limit()) {
                Ok(plan) => writeln!(
                    out,
                    "plan: {} ({:?} orientation) within a budget of {} bytes",
                    plan.strategy.name(),
                    plan.orientation,
                    budget.limit()
                ),
                Err(_) => writeln!(
                    out,
                    "plan: no strategy fits a budget of {} bytes",
                    budget.limit()
                ),
            }
            .map_err(stdout_err)?;
        }
    }
    out.flush().map_err(stdout_err)
}

fn sample(args: SampleArgs, budget: &MemoryBudget) -> Result<()> {
    let circuit = load_circuit(&args.source)?;
    let n = circuit.n_qubits();
    if args.measure_all {
        let state = evolve(&circuit)?;
        let mut sampler = SequentialSampler::new(&state, budget);
        let mut rng = ChaCha8Rng::seed_from_u64(args.measure_seed);
        rng.set_stream(MEASURE_STREAM);
        let mut out = open_output(args.output.as_deref())?;
        writeln!(out, "shot,bits,probability").map_err(stdout_err)?;
        for shot in 0..args.shots {
            let (bits, p) = sampler.shot(&mut rng)?;
            writeln!(out, "{shot},{bits},{p:?}").map_err(stdout_err)?;
        }
        return out.flush().map_err(stdout_err);
    }

    let k = args.porter_thomas.unwrap_or(0);
    if n >= 1024 {
        return Err(CliError::Config(format!(
            "{n} qubits: 2^N does not fit in a float"
        )));
    }
    precheck(&circuit, StrategyChoice::Auto, budget)?;
    let state = evolve(&circuit)?;
    let strategy = choose_strategy(&state, StrategyChoice::Auto, budget)?;
    let taus = random_taus(n, k, args.tau_seed);
    let mut probs = Vec::with_capacity(k);
    for t in &taus {
        probs.push(amplitude_record(&state, t, strategy, budget)?.probability);
    }
    if let Some(path) = &args.probabilities {
        let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
        writeln!(f, "tau,prob").map_err(io_err(path))?;
        for (t, p) in taus.iter().zip(&probs) {
            writeln!(f, "{t},{p:?}").map_err(io_err(path))?;
        }
        f.flush().map_err(io_err(path))?;
    }
    let report = porter_thomas_report(&probs, 2f64.powi(n as i32))?;
    let mut out = open_output(args.output.as_deref())?;
    report.write_csv(&mut out).map_err(stdout_err)?;
    out.flush().map_err(stdout_err)?;
    eprintln!(
        "samples {k}, ks_distance {:.5}, porter_thomas {}",
        report.ks_distance,
        if report.chaotic { "yes" } else { "no" }
    );
    Ok(())
}

fn verify(args: VerifyArgs, budget: &MemoryBudget) -> Result<()> {
    let mut out = open_output(None)?;
    writeln!(out, "lattice,depth,seed,amplitudes,max_deviation,result").map_err(stdout_err)?;
    let mut failures = 0usize;
    let mut total = 0usize;
    for (rows, cols) in VERIFY_SHAPES
        .into_iter()
        .filter(|(r, c)| r * c <= args.max_qubits)
    {
        for &depth in &args.depths {
            for seed in 0..args.seeds {
                let circuit = generate_rqc(rows, cols, depth, seed)?;
                let n = circuit.n_qubits();
                let state = evolve(&circuit)?;
                let sv = simulate_statevector(&circuit)?;
                let strategy = choose_strategy(&state, StrategyChoice::Auto, budget)?;
                let mut worst = 0.0f64;
                for t in random_taus(n, args.amplitudes, seed) {
                    let r = amplitude_record(&state, &t, strategy, budget)?;
                    worst = worst.max(deviation(r.amplitude, sv.amplitude(&t)?, n));
                }
                let ok = worst <= args.tolerance;
                failures += usize::from(!ok);
                total += 1;
                writeln!(
                    out,
                    "{rows}x{cols},{depth},{seed},{},{worst:.3e},{}",
                    args.amplitudes,
                    if ok { "pass" } else { "FAIL" }
                )
                .map_err(stdout_err)?;
            }
        }
    }
    out.flush().map_err(stdout_err)?;
    if failures > 0 {
        return Err(CliError::Verification(format!(
            "{failures} of {total} circuits"
        )));
    }
    eprintln!("all {total} circuits agree within {:e}", args.tolerance);
    Ok(())
}
