//! Benchmark driver: replays an instance through one algorithm, timing only the
//! algorithm's own work, and checks answers against a BFS oracle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use dyntc::instance::{Instance, OpKind, ReplayDefect};
use dyntc::reachability::AlgoCounters;
use dyntc::supportive::StageHistogram;
use dyntc::traversal::bfs_query;
use dyntc::{
    AdjustPeriod, DiGraph, DynamicReachability, QueryStage, SearchScratch, SsrKind, SsrParams,
    StaticAlgo, StaticReachability, SvConfig, SvState, SvVariant,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Replay(#[from] ReplayDefect),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoName {
    Bfs,
    Dfs,
    Dbfs,
    BiBfs,
    Sv,
    Sva,
    Svc,
}

impl AlgoName {
    pub const ALL: [AlgoName; 7] = [
        AlgoName::Bfs,
        AlgoName::Dfs,
        AlgoName::Dbfs,
        AlgoName::BiBfs,
        AlgoName::Sv,
        AlgoName::Sva,
        AlgoName::Svc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgoName::Bfs => "bfs",
            AlgoName::Dfs => "dfs",
            AlgoName::Dbfs => "dbfs",
            AlgoName::BiBfs => "bibfs",
            AlgoName::Sv => "sv",
            AlgoName::Sva => "sva",
            AlgoName::Svc => "svc",
        }
    }

    fn static_algo(self) -> Option<StaticAlgo> {
        match self {
            AlgoName::Bfs => Some(StaticAlgo::Bfs),
            AlgoName::Dfs => Some(StaticAlgo::Dfs),
            AlgoName::Dbfs => Some(StaticAlgo::Dbfs),
            AlgoName::BiBfs => Some(StaticAlgo::BiBfs),
            _ => None,
        }
    }
}

impl fmt::Display for AlgoName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgoName {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        AlgoName::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm `{s}`")))
    }
}

/// An algorithm plus all of its parameters. Parameters that do not apply to
/// the chosen algorithm are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoChoice {
    pub name: AlgoName,
    pub k: usize,
    pub c: AdjustPeriod,
    /// `None` selects the size-dependent default.
    pub z: Option<usize>,
    pub ssr: SsrKind,
    pub ssr_params: SsrParams,
    pub fallback: StaticAlgo,
    pub seed: u64,
}

impl AlgoChoice {
    pub fn new(name: AlgoName) -> Self {
        AlgoChoice {
            name,
            k: 1,
            c: AdjustPeriod::Never,
            z: None,
            ssr: SsrKind::Ses,
            ssr_params: SsrParams::default(),
            fallback: StaticAlgo::BiBfs,
            seed: 0,
        }
    }

    pub fn static_algo(algo: StaticAlgo) -> Self {
        let name = match algo {
            StaticAlgo::Bfs => AlgoName::Bfs,
            StaticAlgo::Dfs => AlgoName::Dfs,
            StaticAlgo::Dbfs => AlgoName::Dbfs,
            StaticAlgo::BiBfs => AlgoName::BiBfs,
        };
        AlgoChoice::new(name)
    }

    pub fn sv(k: usize) -> Self {
        AlgoChoice { k, ..AlgoChoice::new(AlgoName::Sv) }
    }

    pub fn sva(k: usize, c: AdjustPeriod) -> Self {
        AlgoChoice { k, c, ..AlgoChoice::new(AlgoName::Sva) }
    }

    pub fn svc(z: usize, c: AdjustPeriod) -> Self {
        AlgoChoice { z: Some(z), c, ..AlgoChoice::new(AlgoName::Svc) }
    }

    pub fn with_ssr(mut self, kind: SsrKind) -> Self {
        self.ssr = kind;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Supportive-vertex configuration for a graph with `n` vertices, or
    /// `None` for the static searches.
    pub fn sv_config(&self, n: usize) -> Result<Option<SvConfig>, BenchError> {
        let variant = match self.name {
            AlgoName::Sv => SvVariant::Sv { k: self.k },
            AlgoName::Sva => SvVariant::Sva { k: self.k, period: self.c },
            AlgoName::Svc => SvVariant::Svc {
                min_scc: self.z.unwrap_or_else(|| SvVariant::default_min_scc(n)),
                period: self.c,
            },
            _ => return Ok(None),
        };
        let config = SvConfig::new(variant)
            .with_ssr(self.ssr, self.ssr_params)
            .with_seed(self.seed)
            .with_fallback(self.fallback);
        config.validate().map_err(BenchError::Config)?;
        Ok(Some(config))
    }

    pub fn validate(&self, n: usize) -> Result<(), BenchError> {
        self.sv_config(n).map(|_| ())
    }

    pub fn build(&self, g: &DiGraph) -> Result<Box<dyn DynamicReachability>, BenchError> {
        if let Some(algo) = self.name.static_algo() {
            return Ok(Box::new(StaticReachability::new(algo, g)));
        }
        let config = self.sv_config(g.vertex_count())?.expect("sv family");
        Ok(Box::new(SvState::new(g, config)))
    }

    /// Short label used in reports, e.g. `sv(k=2)/si`.
    pub fn label(&self, n: usize) -> String {
        match self.sv_config(n) {
            Ok(Some(config)) => {
                let mut s = format!("{}/{}", config.variant, self.ssr);
                if self.fallback != StaticAlgo::BiBfs {
                    s.push_str(&format!("/{}", self.fallback));
                }
                s
            }
            _ => self.name.to_string(),
        }
    }
}

/// Order-sensitive 64-bit FNV-1a hash of a stream of query answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnswerDigest(u64);

impl AnswerDigest {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        AnswerDigest(Self::OFFSET)
    }

    pub fn push(&mut self, answer: bool) {
        self.0 ^= answer as u64;
        self.0 = self.0.wrapping_mul(Self::PRIME);
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn of(answers: impl IntoIterator<Item = bool>) -> Self {
        let mut d = AnswerDigest::new();
        answers.into_iter().for_each(|a| d.push(a));
        d
    }
}

impl Default for AnswerDigest {
    fn default() -> Self {
        AnswerDigest::new()
    }
}

impl fmt::Display for AnswerDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// One processed operation, recorded only when tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub index: usize,
    pub kind: OpKind,
    pub a: usize,
    pub b: usize,
    pub ns: u64,
    pub answer: Option<bool>,
    pub stage: Option<QueryStage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub instance: String,
    pub n: usize,
    pub density: f64,
    pub algo: String,
    pub seed: u64,
    pub init_ns: u64,
    pub update_ns: u64,
    pub query_ns: u64,
    pub adds: u64,
    pub deletes: u64,
    pub queries: u64,
    pub positive_answers: u64,
    pub counters: AlgoCounters,
    pub timed_out: bool,
    pub digest: AnswerDigest,
    pub trace: Option<Vec<TraceEntry>>,
}

impl RunMetrics {
    pub fn ops_ns(&self) -> u64 {
        self.update_ns + self.query_ns
    }

    pub fn ops(&self) -> u64 {
        self.adds + self.deletes + self.queries
    }

    pub fn stages(&self) -> Option<&StageHistogram> {
        self.counters.stages.as_ref()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub timeout: Option<Duration>,
    pub trace: bool,
}

fn nanos(d: Duration) -> u64 {
    d.as_nanos().min(u64::MAX as u128) as u64
}

fn initial_graph(inst: &Instance) -> Result<DiGraph, BenchError> {
    let mut g = DiGraph::new(inst.n);
    for (i, &(u, v)) in inst.initial_edges.iter().enumerate() {
        g.insert_edge(u, v).map_err(|_| {
            BenchError::Config(format!("initial edge {i} ({u}, {v}) out of range for n = {}", inst.n))
        })?;
    }
    Ok(g)
}

fn defect(position: usize, tail: usize, head: usize) -> BenchError {
    BenchError::Replay(ReplayDefect { position, tail, head })
}

pub fn run_benchmark(inst: &Instance, choice: &AlgoChoice, opts: RunOptions) -> Result<RunMetrics, BenchError> {
    choice.validate(inst.n)?;
    run_with(inst, choice.label(inst.n), choice.seed, opts, |g| choice.build(g))
}

/// Replays `inst` through the algorithm produced by `build`.
///
/// Graph mutations and initialization are outside the update and query totals;
/// only notifications and query calls are timed.
pub fn run_with<F>(inst: &Instance, label: String, seed: u64, opts: RunOptions, build: F) -> Result<RunMetrics, BenchError>
where
    F: FnOnce(&DiGraph) -> Result<Box<dyn DynamicReachability>, BenchError>,
{
    let started = Instant::now();
    let mut g = initial_graph(inst)?;
    let t0 = Instant::now();
    let mut algo = build(&g)?;
    let init_ns = nanos(t0.elapsed());
    let notify = !algo.ignores_updates();

    let mut m = RunMetrics {
        instance: inst.name().to_string(),
        n: inst.n,
        density: inst.initial_density(),
        algo: label,
        seed,
        init_ns,
        update_ns: 0,
        query_ns: 0,
        adds: 0,
        deletes: 0,
        queries: 0,
        positive_answers: 0,
        counters: AlgoCounters::default(),
        timed_out: false,
        digest: AnswerDigest::new(),
        trace: opts.trace.then(Vec::new),
    };

    for (index, op) in inst.ops.iter().enumerate() {
        let (a, b) = (op.a, op.b);
        let mut answer = None;
        let ns = match op.kind {
            OpKind::Add => {
                let e = g.insert_edge(a, b).map_err(|_| defect(index, a, b))?;
                let ns = if notify {
                    let t = Instant::now();
                    algo.on_insert(&g, e, a, b);
                    nanos(t.elapsed())
                } else {
                    0
                };
                m.adds += 1;
                m.update_ns += ns;
                ns
            }
            OpKind::Delete => {
                let e = g.delete_edge(a, b).map_err(|_| defect(index, a, b))?;
                let ns = if notify {
                    let t = Instant::now();
                    algo.on_delete(&g, e, a, b);
                    nanos(t.elapsed())
                } else {
                    0
                };
                m.deletes += 1;
                m.update_ns += ns;
                ns
            }
            OpKind::Query => {
                let t = Instant::now();
                let r = algo.query(&g, a, b);
                let ns = nanos(t.elapsed());
                m.queries += 1;
                m.query_ns += ns;
                m.positive_answers += r as u64;
                m.digest.push(r);
                answer = Some(r);
                ns
            }
        };
        if let Some(trace) = m.trace.as_mut() {
            let stage = if answer.is_some() { algo.last_stage() } else { None };
            trace.push(TraceEntry { index, kind: op.kind, a, b, ns, answer, stage });
        }
        if let Some(limit) = opts.timeout {
            if started.elapsed() >= limit && index + 1 < inst.ops.len() {
                m.timed_out = true;
                break;
            }
        }
    }
    m.counters = algo.counters();
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub op_index: usize,
    pub s: usize,
    pub t: usize,
    pub expected: bool,
    pub got: bool,
    pub stage: Option<QueryStage>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "divergence at op {}: q {} {} expected {} got {}",
            self.op_index, self.s, self.t, self.expected, self.got
        )?;
        if let Some(stage) = self.stage {
            write!(f, " (stage {})", stage.name())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub algo: String,
    pub ops_checked: usize,
    pub queries_checked: usize,
    pub divergence: Option<Divergence>,
}

impl VerifyReport {
    pub fn is_success(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            Some(d) => write!(f, "{}: {d}", self.algo),
            None => write!(
                f,
                "{}: ok ({} ops, {} queries agree with bfs)",
                self.algo, self.ops_checked, self.queries_checked
            ),
        }
    }
}

pub fn verify_run(inst: &Instance, choice: &AlgoChoice) -> Result<VerifyReport, BenchError> {
    choice.validate(inst.n)?;
    verify_with(inst, choice.label(inst.n), |g| choice.build(g))
}

/// Runs the algorithm and a per-query BFS in lockstep, stopping at the first
/// disagreement.
pub fn verify_with<F>(inst: &Instance, label: String, build: F) -> Result<VerifyReport, BenchError>
where
    F: FnOnce(&DiGraph) -> Result<Box<dyn DynamicReachability>, BenchError>,
{
    let mut g = initial_graph(inst)?;
    let mut algo = build(&g)?;
    let mut scratch = SearchScratch::new(inst.n);
    let mut report = VerifyReport { algo: label, ops_checked: 0, queries_checked: 0, divergence: None };
    for (index, op) in inst.ops.iter().enumerate() {
        let (a, b) = (op.a, op.b);
        match op.kind {
            OpKind::Add => {
                let e = g.insert_edge(a, b).map_err(|_| defect(index, a, b))?;
                algo.on_insert(&g, e, a, b);
            }
            OpKind::Delete => {
                let e = g.delete_edge(a, b).map_err(|_| defect(index, a, b))?;
                algo.on_delete(&g, e, a, b);
            }
            OpKind::Query => {
                let expected = bfs_query(&g, &mut scratch, a, b);
                let got = algo.query(&g, a, b);
                report.queries_checked += 1;
                if expected != got {
                    report.divergence = Some(Divergence {
                        op_index: index,
                        s: a,
                        t: b,
                        expected,
                        got,
                        stage: algo.last_stage(),
                    });
                    report.ops_checked = index + 1;
                    return Ok(report);
                }
            }
        }
    }
    report.ops_checked = inst.ops.len();
    Ok(report)
}

/// Stable column order of [`emit_csv`].
pub const CSV_HEADER: [&str; 28] = [
    "instance",
    "n",
    "density",
    "algo",
    "seed",
    "init_ns",
    "update_ns",
    "query_ns",
    "ops_ns",
    "ops",
    "adds",
    "deletes",
    "queries",
    "positive_answers",
    "stage_source_supportive",
    "stage_target_supportive",
    "stage_scc_representative",
    "stage_o1",
    "stage_o2",
    "stage_o3",
    "stage_fallback",
    "non_fallback_share",
    "adjustments",
    "recomputations",
    "peak_supports",
    "engine_notifications",
    "timed_out",
    "digest",
];

pub fn csv_record(m: &RunMetrics) -> Vec<String> {
    let mut row = vec![
        m.instance.clone(),
        m.n.to_string(),
        format!("{:.4}", m.density),
        m.algo.clone(),
        m.seed.to_string(),
        m.init_ns.to_string(),
        m.update_ns.to_string(),
        m.query_ns.to_string(),
        m.ops_ns().to_string(),
        m.ops().to_string(),
        m.adds.to_string(),
        m.deletes.to_string(),
        m.queries.to_string(),
        m.positive_answers.to_string(),
    ];
    match m.stages() {
        Some(h) => {
            row.extend(QueryStage::ALL.iter().map(|&s| h.get(s).to_string()));
            row.push(format!("{:.6}", h.non_fallback_share()));
        }
        None => row.extend(std::iter::repeat_n(String::new(), QueryStage::ALL.len() + 1)),
    }
    row.extend([
        m.counters.adjustments.to_string(),
        m.counters.recomputations.to_string(),
        m.counters.peak_supports.to_string(),
        m.counters.engine_notifications.to_string(),
        m.timed_out.to_string(),
        m.digest.to_string(),
    ]);
    row
}

pub fn emit_csv<W: Write>(runs: &[RunMetrics], out: W, header: bool) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for m in runs {
        w.write_record(csv_record(m))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-operation trace lines as CSV.
pub fn emit_trace<W: Write>(trace: &[TraceEntry], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "op", "a", "b", "ns", "answer", "stage"])?;
    for e in trace {
        w.write_record([
            e.index.to_string(),
            e.kind.tag().to_string(),
            e.a.to_string(),
            e.b.to_string(),
            e.ns.to_string(),
            e.answer.map(|a| a.to_string()).unwrap_or_default(),
            e.stage.map(|s| s.name().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
