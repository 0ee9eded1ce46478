use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use dyntc::instance::{self, ErParams, Instance, InstanceError, Mix};
use dyntc::{AdjustPeriod, SsrKind, SsrParams, StaticAlgo};
use dyntc_bench::{emit_csv, emit_trace, run_benchmark, verify_run, AlgoChoice, AlgoName, BenchError, RunOptions};

const EXIT_DIVERGENCE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "dyntc", version, about = "Dynamic transitive closure benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random dynamic instance.
    Generate(GenerateArgs),
    /// Time one algorithm on an instance.
    Run(RunArgs),
    /// Check one algorithm against a BFS oracle on every query.
    Verify(VerifyArgs),
    /// Permute the updates of an instance, keeping queries in place.
    Shuffle(ShuffleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "er")]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    density: f64,
    #[arg(long)]
    ops: usize,
    /// Percentages of insertions, deletions and queries, e.g. 33:33:34.
    #[arg(long, default_value = "33:33:34")]
    mix: String,
    #[arg(long, default_value_t = 10)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long)]
    instance: PathBuf,
    /// bfs, dfs, dbfs, bibfs, sv, sva or svc.
    #[arg(long)]
    algo: String,
    /// Number of supportive vertices for sv and sva.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Updates between re-selections for sva and svc; `inf` never re-selects.
    #[arg(long, default_value = "inf")]
    c: String,
    /// Minimum component size for svc; defaults by graph size.
    #[arg(long)]
    z: Option<usize>,
    #[arg(long, default_value = "ses")]
    ssr: String,
    #[arg(long, default_value_t = SsrParams::DEFAULT_RATIO)]
    ratio: f64,
    #[arg(long, default_value_t = SsrParams::DEFAULT_BETA)]
    beta: u32,
    #[arg(long, default_value = "bibfs")]
    fallback: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    algo: AlgoArgs,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Append a result row here; the header is written for new files.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print a per-operation log to stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args)]
struct ShuffleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Divergence(String),
    Io(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(msg) => Failure::Config(msg),
            BenchError::Replay(d) => Failure::Divergence(format!("replay defect: {d}")),
        }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::Replay(d) => Failure::Divergence(format!("replay defect: {d}")),
            InstanceError::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn parse_period(s: &str) -> Result<AdjustPeriod, Failure> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(AdjustPeriod::Never);
    }
    s.parse::<u64>()
        .map(AdjustPeriod::Every)
        .map_err(|_| Failure::Config(format!("invalid value `{s}` for --c")))
}

impl AlgoArgs {
    fn choice(&self) -> Result<AlgoChoice, Failure> {
        let name: AlgoName = self.algo.parse()?;
        let ssr: SsrKind = self.ssr.parse().map_err(Failure::Config)?;
        let fallback: StaticAlgo = self.fallback.parse().map_err(Failure::Config)?;
        let ssr_params = SsrParams::new(self.ratio, self.beta).map_err(Failure::Config)?;
        Ok(AlgoChoice {
            name,
            k: self.k,
            c: parse_period(&self.c)?,
            z: self.z,
            ssr,
            ssr_params,
            fallback,
            seed: self.seed,
        })
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let inst = instance::read_instance_file(path)?;
    instance::validate_replay(&inst)?;
    Ok(inst)
}

fn write_file(path: &Path, inst: &Instance) -> Result<(), Failure> {
    let mut out = BufWriter::new(File::create(path)?);
    instance::write_instance(inst, &mut out)?;
    out.flush()?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<u8, Failure> {
    if args.model != "er" {
        return Err(Failure::Config(format!("unknown model `{}`", args.model)));
    }
    let mix: Mix = args.mix.parse()?;
    let params = ErParams {
        n: args.n,
        density: args.density,
        ops: args.ops,
        mix,
        batch: args.batch,
        seed: args.seed,
    };
    let inst = instance::generate_er(&params)?;
    write_file(&args.out, &inst)?;
    eprintln!(
        "wrote {}: n={} m={} ops={}",
        args.out.display(),
        inst.n,
        inst.initial_edges.len(),
        inst.ops.len()
    );
    Ok(0)
}

fn append_csv(path: &Path, metrics: &dyntc_bench::RunMetrics) -> Result<(), Failure> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    emit_csv(std::slice::from_ref(metrics), file, fresh)?;
    Ok(())
}

fn run(args: RunArgs) -> Result<u8, Failure> {
    let choice = args.algo.choice()?;
    let inst = load(&args.algo.instance)?;
    let timeout = match args.timeout {
        Some(secs) if secs.is_finite() && secs > 0.0 => Some(Duration::from_secs_f64(secs)),
        Some(secs) => return Err(Failure::Config(format!("invalid timeout {secs}"))),
        None => None,
    };
    let metrics = run_benchmark(&inst, &choice, RunOptions { timeout, trace: args.trace })?;
    if let Some(trace) = &metrics.trace {
        emit_trace(trace, io::stderr().lock())?;
    }
    match &args.csv {
        Some(path) => append_csv(path, &metrics)?,
        None => emit_csv(std::slice::from_ref(&metrics), io::stdout().lock(), true)?,
    }
    Ok(if metrics.timed_out { EXIT_TIMEOUT } else { 0 })
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let choice = args.algo.choice()?;
    let inst = load(&args.algo.instance)?;
    let report = verify_run(&inst, &choice)?;
    println!("{report}");
    Ok(if report.is_success() { 0 } else { EXIT_DIVERGENCE })
}

fn shuffle(args: ShuffleArgs) -> Result<u8, Failure> {
    let inst = load(&args.instance)?;
    let shuffled = instance::shuffle_updates(&inst, args.seed);
    write_file(&args.out, &shuffled.instance)?;
    eprintln!("wrote {}: {} repairs", args.out.display(), shuffled.repairs);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a),
        Command::Shuffle(a) => shuffle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Divergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DIVERGENCE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
