use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use num_bigint::{BigInt, BigUint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use xorcomm::engine::{self, ProtocolReport, SweepSpec};
use xorcomm::exec::derive_seed;
use xorcomm::oracle::{self, TrialStats, TruthTable};
use xorcomm::protocols::{self, ham_decide, ham_sketch, HamConfig, ProtocolKind, ProtocolOptions};
use xorcomm::spectral::{self, DeterministicBounds, LemmaWindow};
use xorcomm::{BitString, Execution, InputPair, SymmetricProfile, TrivialClass};

#[derive(Parser, Debug)]
#[command(name = "xorcomm", version, about = "Symmetric XOR function analysis and protocol simulation")]
struct Cli {
    /// Run every batch on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum, rank, gap parameters and bounds of one profile (JSON).
    Analyze {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        profile: String,
    },
    /// Cross-check closed forms against brute-force oracles.
    Verify(VerifyArgs),
    /// Run a protocol on random pairs at a fixed distance, or on a given pair (JSON lines).
    Simulate(SimulateArgs),
    /// Monte-Carlo statistics over a family of profiles and input lengths (CSV).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Fourier,
    Rank,
    Lemma,
    HamOnesided,
}

#[derive(Args, Debug)]
struct SeedArg {
    #[arg(long, env = "XORCOMM_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Single input length (lemma, ham-onesided).
    #[arg(long)]
    n: Option<usize>,
    /// Largest input length checked (fourier, rank).
    #[arg(long)]
    n_max: Option<usize>,
    /// lemma: random profiles to draw; rank: random non-symmetric tables per n.
    #[arg(long)]
    samples: Option<u64>,
    /// lemma: enumerate every profile instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    /// ham-onesided: trials per (d, m) class.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct ProtocolFlags {
    #[arg(long)]
    protocol: ProtocolKind,
    /// HAM threshold; defaults to d of a threshold:<d> profile.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    region_reps: Option<usize>,
    #[arg(long)]
    search_rep_factor: Option<usize>,
}

impl ProtocolFlags {
    fn options(&self) -> ProtocolOptions {
        let mut options = ProtocolOptions {
            d: self.d,
            buckets: self.buckets,
            repetitions: self.reps,
            ..ProtocolOptions::default()
        };
        if let Some(r) = self.region_reps {
            options.xor.region_reps = r;
        }
        if let Some(f) = self.search_rep_factor {
            options.xor.search_rep_factor = f;
        }
        options
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    protocol: ProtocolFlags,
    /// Defaults to `parity` for the parity protocol.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with_all = ["x", "y"])]
    weight: Option<usize>,
    #[arg(long, requires = "y")]
    x: Option<BitString>,
    #[arg(long, requires = "x")]
    y: Option<BitString>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    aggregate: bool,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    protocol: ProtocolFlags,
    /// Profile family, instantiated at every n.
    #[arg(long, alias = "profile")]
    family: String,
    /// Comma-separated input lengths; may be empty.
    #[arg(long)]
    n: String,
    /// Comma-separated weights; every weight 0..=n when absent.
    #[arg(long)]
    weight: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug)]
enum Failure {
    Mismatch,
    Usage(String),
}

impl From<xorcomm::Error> for Failure {
    fn from(e: xorcomm::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Serialize)]
struct SpectrumReport {
    coeffs: Vec<String>,
    support: Vec<usize>,
    rank: String,
}

#[derive(Serialize)]
struct AnalysisReport {
    profile: String,
    n: usize,
    trivial_class: TrivialClass,
    r0: usize,
    r1: usize,
    r: usize,
    saturated: bool,
    conjectured_unbounded_measure: usize,
    spectrum: SpectrumReport,
    lemma_window: LemmaWindow,
    bounds: DeterministicBounds,
}

fn analyze(n: usize, spec: &str) -> Result<AnalysisReport, Failure> {
    let profile = SymmetricProfile::parse(spec, n)?;
    let gap = profile.gap_params();
    let spectrum = spectral::weight_spectrum(&profile);
    Ok(AnalysisReport {
        profile: spec.to_string(),
        n,
        trivial_class: gap.trivial_class,
        r0: gap.r0,
        r1: gap.r1,
        r: gap.r,
        saturated: gap.saturated,
        conjectured_unbounded_measure: profile.conjectured_unbounded_measure(),
        lemma_window: spectrum.lemma_window_check(),
        bounds: spectral::deterministic_bounds_from(&profile, &spectrum),
        spectrum: SpectrumReport {
            coeffs: spectrum.coeffs.iter().map(ToString::to_string).collect(),
            support: spectrum.support.clone(),
            rank: spectrum.rank.to_string(),
        },
    })
}

#[derive(Serialize)]
struct VerifySummary {
    suite: &'static str,
    checked: u64,
    mismatches: u64,
    pass: bool,
    /// First few offending cases.
    examples: Vec<String>,
}

const MAX_EXAMPLES: usize = 10;

impl VerifySummary {
    fn new(suite: &'static str) -> Self {
        Self {
            suite,
            checked: 0,
            mismatches: 0,
            pass: true,
            examples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.mismatches += 1;
            self.pass = false;
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(what());
            }
        }
    }
}

fn profiles(n: usize) -> impl Iterator<Item = SymmetricProfile> {
    (0..1u64 << (n + 1)).map(move |i| SymmetricProfile::from_index(n, i).expect("n >= 1"))
}

fn check_range(what: &'static str, value: usize, max: usize) -> Result<(), Failure> {
    if value == 0 || value > max {
        return Err(Failure::Usage(format!("{what} = {value} must be in 1..={max}")));
    }
    Ok(())
}

/// Exhaustive over profiles, so capped well below the table limit.
const MAX_FOURIER_N: usize = 12;

fn verify_fourier(n_max: usize) -> Result<VerifySummary, Failure> {
    check_range("n-max", n_max, MAX_FOURIER_N)?;
    let mut summary = VerifySummary::new("fourier");
    for n in 1..=n_max {
        for profile in profiles(n) {
            let table = TruthTable::from_profile(&profile)?;
            let spectrum = spectral::weight_spectrum(&profile);
            for k in 0..=n {
                let brute = oracle::brute_fourier(&table, &BitString::prefix_ones(n, k))?;
                summary.record(spectrum.coeffs[k] == BigInt::from(brute), || {
                    format!("{profile} k={k}: closed form {} brute {brute}", spectrum.coeffs[k])
                });
            }
        }
    }
    Ok(summary)
}

fn verify_rank(n_max: usize, samples: u64, seed: u64) -> Result<VerifySummary, Failure> {
    check_range("n-max", n_max, oracle::MAX_RANK_N)?;
    let mut summary = VerifySummary::new("rank");
    for n in 1..=n_max {
        for profile in profiles(n) {
            let formula = spectral::weight_spectrum(&profile).rank;
            let brute = oracle::brute_rank(&TruthTable::from_profile(&profile)?)?;
            summary.record(formula == BigUint::from(brute), || {
                format!("{profile}: formula {formula} brute {brute}")
            });
        }
        for i in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64, i));
            let table = TruthTable::random(n, &mut rng)?;
            let support = oracle::fourier_support_size(&table);
            let brute = oracle::brute_rank(&table)?;
            summary.record(support == brute, || {
                format!("random table n={n} sample={i}: support {support} rank {brute}")
            });
        }
    }
    Ok(summary)
}

fn verify_lemma(
    n: usize,
    exhaustive: bool,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<VerifySummary, Failure> {
    let scan = if exhaustive {
        oracle::exhaustive_lemma_scan(n, exec)?
    } else {
        oracle::sampled_lemma_scan(n, samples, seed, exec)?
    };
    let mut summary = VerifySummary::new("lemma");
    summary.checked = scan.checked;
    summary.mismatches = scan.violations.len() as u64;
    summary.pass = scan.violations.is_empty();
    summary.examples = scan.violations.into_iter().take(MAX_EXAMPLES).collect();
    Ok(summary)
}

/// Zero ">d" answers on pairs at distance `m <= d`, for every `d <= n`.
fn verify_ham_onesided(
    n: usize,
    trials: u64,
    buckets: Option<usize>,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<VerifySummary, Failure> {
    let mut summary = VerifySummary::new("ham-onesided");
    for d in 0..=n {
        let mut config = HamConfig::new(n, d, reps);
        if let Some(b) = buckets {
            config = config.with_buckets(b);
        }
        for m in 0..=d {
            let class_seed = derive_seed(derive_seed(seed, d as u64, 5), m as u64, 6);
            let outcomes = exec.map(trials, |i| -> xorcomm::Result<bool> {
                let (pair, tape_seed) = oracle::trial_inputs(n, m, class_seed, i)?;
                let mut alice = engine::RandomTape::new(tape_seed);
                let mut bob = engine::RandomTape::new(tape_seed);
                let sketch = ham_sketch(pair.x(), &config, &mut alice);
                Ok(ham_decide(pair.y(), &config, &mut bob, sketch.as_slice()))
            });
            for (i, far) in outcomes.into_iter().enumerate() {
                let far = far?;
                summary.record(!far, || format!("d={d} m={m} trial={i}: answered >d"));
            }
        }
    }
    Ok(summary)
}

fn verify(args: &VerifyArgs, exec: Execution, out: &mut impl Write) -> CmdResult {
    let seed = args.seed.seed;
    let need_n = || {
        args.n
            .ok_or_else(|| Failure::Usage("this suite needs --n".into()))
    };
    let summary = match args.suite {
        Suite::Fourier => verify_fourier(args.n_max.unwrap_or(10))?,
        Suite::Rank => verify_rank(args.n_max.unwrap_or(8), args.samples.unwrap_or(0), seed)?,
        Suite::Lemma => verify_lemma(
            need_n()?,
            args.exhaustive,
            args.samples.unwrap_or(10_000),
            seed,
            exec,
        )?,
        Suite::HamOnesided => {
            verify_ham_onesided(need_n()?, args.trials, args.buckets, args.reps, seed, exec)?
        }
    };
    serde_json::to_writer(&mut *out, &summary)?;
    writeln!(out)?;
    if summary.pass {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

#[derive(Serialize)]
struct TrialLine {
    trial: u64,
    #[serde(flatten)]
    report: ProtocolReport,
}

#[derive(Serialize)]
struct AggregateLine<'a> {
    protocol: &'static str,
    profile: &'a str,
    n: usize,
    weight: Option<usize>,
    #[serde(flatten)]
    stats: TrialStats,
}

fn simulate(args: &SimulateArgs, exec: Execution, out: &mut impl Write) -> CmdResult {
    let kind = args.protocol.protocol;
    let spec = match (&args.profile, kind) {
        (Some(spec), _) => spec.as_str(),
        (None, ProtocolKind::Parity) => "parity",
        (None, _) => return Err(Failure::Usage("--profile is required for this protocol".into())),
    };
    let profile = SymmetricProfile::parse(spec, args.n)?;
    let protocol = protocols::build(kind, &profile, &args.protocol.options())?;
    let seed = args.seed.seed;
    let fixed = match (&args.x, &args.y) {
        (Some(x), Some(y)) => Some(InputPair::new(x.clone(), y.clone())?),
        _ => None,
    };
    if fixed.is_none() && args.weight.is_none() {
        return Err(Failure::Usage("pass --weight or both --x and --y".into()));
    }
    if let Some(pair) = &fixed {
        if pair.n() != args.n {
            return Err(xorcomm::Error::LengthMismatch {
                expected: args.n,
                actual: pair.n(),
            }
            .into());
        }
    }
    if args.aggregate {
        let stats = match &fixed {
            None => oracle::mc_error_estimate(
                protocol.as_ref(),
                &profile,
                args.weight.unwrap_or_default(),
                args.trials,
                seed,
                exec,
            )?,
            Some(pair) => fixed_pair_stats(protocol.as_ref(), &profile, pair, args.trials, seed, exec)?,
        };
        let line = AggregateLine {
            protocol: kind.name(),
            profile: spec,
            n: args.n,
            weight: fixed.as_ref().map(InputPair::distance).or(args.weight),
            stats,
        };
        serde_json::to_writer(&mut *out, &line)?;
        writeln!(out)?;
        return Ok(());
    }
    let reports = exec.map(args.trials, |i| -> xorcomm::Result<ProtocolReport> {
        let (pair, tape_seed) = match &fixed {
            Some(pair) => (pair.clone(), derive_seed(seed, i, 1)),
            None => oracle::trial_inputs(args.n, args.weight.unwrap_or_default(), seed, i)?,
        };
        let truth = profile.evaluate(&pair)?;
        engine::score(protocol.as_ref(), &pair, truth, tape_seed)
    });
    for (trial, report) in (0u64..).zip(reports) {
        serde_json::to_writer(&mut *out, &TrialLine { trial, report: report? })?;
        writeln!(out)?;
    }
    Ok(())
}

fn fixed_pair_stats(
    protocol: &dyn engine::Protocol,
    profile: &SymmetricProfile,
    pair: &InputPair,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> xorcomm::Result<TrialStats> {
    let truth = profile.evaluate(pair)?;
    let counts = exec.map_reduce(
        trials,
        Ok(oracle::TrialCounts::default()),
        |i| {
            let run = engine::run_protocol(protocol, pair, derive_seed(seed, i, 1))?;
            let bits = run.transcript.content_bits() as u64;
            Ok(oracle::TrialCounts {
                trials: 1,
                successes: u64::from(run.output == truth),
                content_bits: bits,
                max_bits: bits,
                rounds: run.transcript.rounds() as u64,
            })
        },
        |a: xorcomm::Result<oracle::TrialCounts>, b| Ok(a?.merge(b?)),
    )?;
    Ok(counts.stats())
}

fn parse_list(flag: &str, raw: &str) -> Result<Vec<usize>, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Usage(format!("invalid value '{t}' in --{flag}")))
        })
        .collect()
}

fn sweep(args: &SweepArgs, exec: Execution, out: &mut impl Write) -> CmdResult {
    let ns = parse_list("n", &args.n)?;
    let weights = args.weight.as_deref().map(|w| parse_list("weight", w)).transpose()?;
    let spec = SweepSpec {
        protocol: args.protocol.protocol,
        options: args.protocol.options(),
        family: &args.family,
        ns: &ns,
        weights: weights.as_deref(),
        trials: args.trials,
        seed: args.seed.seed,
    };
    // Open the destination first so an unwritable path fails before any work.
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::Usage(format!("cannot write {}: {e}", path.display()))
        })?)),
        None => Box::new(&mut *out),
    };
    let rows = engine::sweep(&spec, exec)?;
    let mut writer = csv::Writer::from_writer(sink);
    if rows.is_empty() {
        writer.write_record([
            "n",
            "family",
            "r0",
            "r1",
            "r",
            "protocol",
            "weight",
            "trials",
            "success_rate",
            "mean_bits",
            "max_bits",
            "rounds_mean",
        ])?;
    }
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn run(cli: &Cli, out: &mut impl Write) -> CmdResult {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match &cli.command {
        Command::Analyze { n, profile } => {
            serde_json::to_writer_pretty(&mut *out, &analyze(*n, profile)?)?;
            writeln!(out)?;
            Ok(())
        }
        Command::Verify(args) => verify(args, exec, out),
        Command::Simulate(args) => simulate(args, exec, out),
        Command::Sweep(args) => sweep(args, exec, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(Failure::Mismatch), _) => ExitCode::from(1),
        (Err(Failure::Usage(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
