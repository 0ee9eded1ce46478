//! Dynamic instances: an initial edge list followed by a stream of insertions,
//! deletions and queries.
//!
//! Text format (UTF-8, LF, decimal ids):
//!
//! ```text
//! # name er-n4-d1-s7        optional metadata comments
//! # seed 7
//! # params er n=4 d=1 ...
//! n 4                       vertex count, first non-comment line
//! e 0 1                     initial edges
//! e 2 3
//!                           blank separator
//! a 1 2                     insert edge
//! q 0 2                     reachability query
//! d 0 1                     delete edge
//! ```
//!
//! Other `#` lines are ignored. Readers accept gzip-compressed input
//! transparently.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use flate2::read::MultiGzDecoder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DiGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Delete,
    Query,
}

impl OpKind {
    pub fn tag(self) -> char {
        match self {
            OpKind::Add => 'a',
            OpKind::Delete => 'd',
            OpKind::Query => 'q',
        }
    }

    pub fn is_update(self) -> bool {
        self != OpKind::Query
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operation {
    pub kind: OpKind,
    pub a: VertexId,
    pub b: VertexId,
}

impl Operation {
    pub fn add(a: VertexId, b: VertexId) -> Self {
        Operation { kind: OpKind::Add, a, b }
    }

    pub fn delete(a: VertexId, b: VertexId) -> Self {
        Operation { kind: OpKind::Delete, a, b }
    }

    pub fn query(a: VertexId, b: VertexId) -> Self {
        Operation { kind: OpKind::Query, a, b }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceMeta {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub params: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    pub initial_edges: Vec<(VertexId, VertexId)>,
    pub ops: Vec<Operation>,
    pub meta: InstanceMeta,
}

impl Instance {
    pub fn initial_density(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.initial_edges.len() as f64 / self.n as f64
        }
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }

    pub fn name(&self) -> &str {
        self.meta.name.as_deref().unwrap_or("unnamed")
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: vertex {vertex} out of range (n = {n})")]
    VertexRange {
        line: usize,
        column: usize,
        vertex: u64,
        n: usize,
    },
    #[error(transparent)]
    Replay(#[from] ReplayDefect),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A deletion naming an edge that is not live at its position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("operation {position}: delete ({tail}, {head}) has no live edge")]
pub struct ReplayDefect {
    pub position: usize,
    pub tail: VertexId,
    pub head: VertexId,
}

/// One parsed line of an instance file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Meta(InstanceMeta),
    Header(usize),
    Edge(VertexId, VertexId),
    Op(Operation),
}

/// Streams records out of `reader`, calling `sink` for each. Metadata is
/// delivered once, right before the header.
pub fn read_records<R, F>(reader: R, mut sink: F) -> Result<(), InstanceError>
where
    R: BufRead,
    F: FnMut(Record, usize) -> Result<(), InstanceError>,
{
    let mut meta = InstanceMeta::default();
    let mut n: Option<usize> = None;
    let mut in_ops = false;
    let mut line_no = 0;

    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        let text = line.trim_end_matches('\r');
        if let Some(comment) = text.strip_prefix('#') {
            if n.is_none() {
                parse_meta(comment.trim_start(), &mut meta, line_no)?;
            }
            continue;
        }
        let mut tokens = Tokens::new(text, line_no);
        let Some((tag, tag_col)) = tokens.next_token() else {
            continue;
        };

        let Some(count) = n else {
            if tag != "n" {
                return Err(tokens.error(tag_col, "expected header `n <count>`"));
            }
            let count = tokens.number("vertex count")?;
            tokens.finish()?;
            let count = usize::try_from(count).map_err(|_| tokens.error(tag_col, "vertex count too large"))?;
            n = Some(count);
            sink(Record::Meta(std::mem::take(&mut meta)), line_no)?;
            sink(Record::Header(count), line_no)?;
            continue;
        };

        let kind = match tag {
            "e" if in_ops => return Err(tokens.error(tag_col, "initial edge after operations")),
            "e" => None,
            "a" => Some(OpKind::Add),
            "d" => Some(OpKind::Delete),
            "q" => Some(OpKind::Query),
            "n" => return Err(tokens.error(tag_col, "duplicate header")),
            other => return Err(tokens.error(tag_col, &format!("unknown record `{other}`"))),
        };
        let a = tokens.vertex(count)?;
        let b = tokens.vertex(count)?;
        tokens.finish()?;
        match kind {
            None => sink(Record::Edge(a, b), line_no)?,
            Some(kind) => {
                in_ops = true;
                sink(Record::Op(Operation { kind, a, b }), line_no)?;
            }
        }
    }

    if n.is_none() {
        return Err(InstanceError::Syntax {
            line: line_no.max(1),
            column: 1,
            message: "missing header `n <count>`".into(),
        });
    }
    Ok(())
}

fn parse_meta(comment: &str, meta: &mut InstanceMeta, line: usize) -> Result<(), InstanceError> {
    let (key, value) = comment.split_once(' ').unwrap_or((comment, ""));
    match key {
        "name" => meta.name = Some(value.to_string()),
        "params" => meta.params = Some(value.to_string()),
        "seed" => {
            let seed = value.trim().parse().map_err(|_| InstanceError::Syntax {
                line,
                column: 8,
                message: format!("bad seed `{value}`"),
            })?;
            meta.seed = Some(seed);
        }
        _ => {}
    }
    Ok(())
}

struct Tokens<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Tokens { text, pos: 0, line }
    }

    /// Next whitespace-separated token and its 1-based column.
    fn next_token(&mut self) -> Option<(&'a str, usize)> {
        let rest = &self.text[self.pos..];
        let start = self.pos + (rest.len() - rest.trim_start().len());
        let rest = &self.text[start..];
        if rest.is_empty() {
            self.pos = self.text.len();
            return None;
        }
        let len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        self.pos = start + len;
        Some((&rest[..len], start + 1))
    }

    fn error(&self, column: usize, message: &str) -> InstanceError {
        InstanceError::Syntax {
            line: self.line,
            column,
            message: message.to_string(),
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, InstanceError> {
        let col = self.pos + 1;
        let (tok, col) = self
            .next_token()
            .ok_or_else(|| self.error(col, &format!("missing {what}")))?;
        tok.parse::<u64>()
            .map_err(|_| self.error(col, &format!("expected {what}, found `{tok}`")))
    }

    fn vertex(&mut self, n: usize) -> Result<VertexId, InstanceError> {
        let col = self.pos + 1 + (self.text[self.pos..].len() - self.text[self.pos..].trim_start().len());
        let id = self.number("vertex id")?;
        if id >= n as u64 {
            return Err(InstanceError::VertexRange {
                line: self.line,
                column: col,
                vertex: id,
                n,
            });
        }
        Ok(id as VertexId)
    }

    fn finish(&mut self) -> Result<(), InstanceError> {
        match self.next_token() {
            None => Ok(()),
            Some((tok, col)) => Err(self.error(col, &format!("unexpected trailing `{tok}`"))),
        }
    }
}

pub fn parse_instance<R: BufRead>(reader: R) -> Result<Instance, InstanceError> {
    let mut inst = Instance::default();
    read_records(reader, |rec, _| {
        match rec {
            Record::Meta(meta) => inst.meta = meta,
            Record::Header(n) => inst.n = n,
            Record::Edge(u, v) => inst.initial_edges.push((u, v)),
            Record::Op(op) => inst.ops.push(op),
        }
        Ok(())
    })?;
    Ok(inst)
}

pub fn parse_str(text: &str) -> Result<Instance, InstanceError> {
    parse_instance(text.as_bytes())
}

/// Opens a file for reading, decompressing if it starts with the gzip magic.
pub fn open_reader(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut file = BufReader::new(File::open(path)?);
    let gz = file.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    Ok(if gz {
        Box::new(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        Box::new(file)
    })
}

pub fn read_instance_file(path: &Path) -> Result<Instance, InstanceError> {
    parse_instance(open_reader(path)?)
}

/// Replays a stream against a graph without materialising its operations.
/// Returns the number of operations seen.
pub fn validate_stream<R: BufRead>(reader: R) -> Result<usize, InstanceError> {
    let mut g = DiGraph::new(0);
    let mut ops = 0;
    read_records(reader, |rec, _| {
        match rec {
            Record::Header(n) => g = DiGraph::new(n),
            Record::Edge(u, v) => {
                g.insert_edge(u, v).expect("range checked by parser");
            }
            Record::Op(op) => {
                apply_update(&mut g, op, ops)?;
                ops += 1;
            }
            Record::Meta(_) => {}
        }
        Ok(())
    })?;
    Ok(ops)
}

fn apply_update(g: &mut DiGraph, op: Operation, position: usize) -> Result<(), ReplayDefect> {
    match op.kind {
        OpKind::Add => {
            g.insert_edge(op.a, op.b).expect("vertex ids validated");
        }
        OpKind::Delete => {
            g.delete_edge(op.a, op.b).map_err(|_| ReplayDefect {
                position,
                tail: op.a,
                head: op.b,
            })?;
        }
        OpKind::Query => {}
    }
    Ok(())
}

/// Replays the instance against a fresh graph and returns the final graph.
pub fn validate_replay(inst: &Instance) -> Result<DiGraph, InstanceError> {
    let mut g = DiGraph::new(inst.n);
    let check = |v: VertexId, line: usize| {
        if v >= inst.n {
            Err(InstanceError::VertexRange {
                line,
                column: 0,
                vertex: v as u64,
                n: inst.n,
            })
        } else {
            Ok(())
        }
    };
    for &(u, v) in &inst.initial_edges {
        check(u, 0)?;
        check(v, 0)?;
        g.insert_edge(u, v).expect("checked");
    }
    for (i, &op) in inst.ops.iter().enumerate() {
        check(op.a, 0)?;
        check(op.b, 0)?;
        apply_update(&mut g, op, i)?;
    }
    Ok(g)
}

pub fn write_instance<W: Write>(inst: &Instance, mut out: W) -> io::Result<()> {
    if let Some(name) = &inst.meta.name {
        writeln!(out, "# name {name}")?;
    }
    if let Some(seed) = inst.meta.seed {
        writeln!(out, "# seed {seed}")?;
    }
    if let Some(params) = &inst.meta.params {
        writeln!(out, "# params {params}")?;
    }
    writeln!(out, "n {}", inst.n)?;
    for &(u, v) in &inst.initial_edges {
        writeln!(out, "e {u} {v}")?;
    }
    if !inst.ops.is_empty() {
        writeln!(out)?;
        for op in &inst.ops {
            writeln!(out, "{} {} {}", op.kind.tag(), op.a, op.b)?;
        }
    }
    out.flush()
}

pub fn to_text(inst: &Instance) -> String {
    let mut buf = Vec::new();
    write_instance(inst, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Percentages of insertions, deletions and queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mix {
    pub insert: u32,
    pub delete: u32,
    pub query: u32,
}

impl Mix {
    pub const EQUAL: Mix = Mix {
        insert: 33,
        delete: 33,
        query: 34,
    };

    pub fn new(insert: u32, delete: u32, query: u32) -> Result<Self, InstanceError> {
        if insert + delete + query != 100 {
            return Err(InstanceError::Config(format!(
                "mix {insert}:{delete}:{query} does not sum to 100"
            )));
        }
        Ok(Mix { insert, delete, query })
    }

    fn weight(&self, kind: OpKind) -> u32 {
        match kind {
            OpKind::Add => self.insert,
            OpKind::Delete => self.delete,
            OpKind::Query => self.query,
        }
    }
}

impl fmt::Display for Mix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.insert, self.delete, self.query)
    }
}

impl FromStr for Mix {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<_> = s.split(':').map(|p| p.trim().parse::<u32>()).collect();
        match parts.as_slice() {
            [Ok(a), Ok(d), Ok(q)] => Mix::new(*a, *d, *q),
            _ => Err(InstanceError::Config(format!("mix `{s}` is not of the form a:d:q"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErParams {
    pub n: usize,
    pub density: f64,
    pub ops: usize,
    pub mix: Mix,
    pub batch: usize,
    pub seed: u64,
}

impl ErParams {
    /// The large random setting: 100k vertices, 100k operations split evenly
    /// between insertions, deletions and queries, in batches of ten.
    pub fn reference(density: f64, seed: u64) -> Self {
        ErParams {
            n: 100_000,
            density,
            ops: 100_000,
            mix: Mix::EQUAL,
            batch: 10,
            seed,
        }
    }
}

const KINDS: [OpKind; 3] = [OpKind::Add, OpKind::Delete, OpKind::Query];

/// Splits `batches` among the three tags proportionally to `mix` by largest
/// remainder.
fn apportion(batches: usize, mix: Mix) -> [usize; 3] {
    let mut counts = [0usize; 3];
    let mut rems = [(0usize, 0usize); 3];
    for (i, kind) in KINDS.iter().enumerate() {
        let exact = batches * mix.weight(*kind) as usize;
        counts[i] = exact / 100;
        rems[i] = (exact % 100, i);
    }
    let mut left = batches - counts.iter().sum::<usize>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in &rems {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Random G(n, m) instance with `m = floor(d n)` and a batched operation stream.
///
/// Batch tags are an exact apportionment of the mix, shuffled. Deletions pick
/// uniformly from the live edge multiset; a deletion batch that cannot be
/// served in full is exchanged with the next non-deletion batch.
pub fn generate_er(p: &ErParams) -> Result<Instance, InstanceError> {
    if p.n == 0 {
        return Err(InstanceError::Config("n must be at least 1".into()));
    }
    if p.batch == 0 {
        return Err(InstanceError::Config("batch must be at least 1".into()));
    }
    if !(p.density.is_finite() && p.density >= 0.0) {
        return Err(InstanceError::Config(format!("invalid density {}", p.density)));
    }
    Mix::new(p.mix.insert, p.mix.delete, p.mix.query)?;

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.n;
    let m0 = (p.density * n as f64).floor() as usize;
    let mut live: Vec<(VertexId, VertexId)> = (0..m0)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    let initial_edges = live.clone();

    let batches = p.ops.div_ceil(p.batch);
    let counts = apportion(batches, p.mix);
    let mut tags: Vec<OpKind> = KINDS
        .iter()
        .zip(counts)
        .flat_map(|(&k, c)| std::iter::repeat_n(k, c))
        .collect();
    tags.shuffle(&mut rng);

    let mut ops = Vec::with_capacity(p.ops);
    for i in 0..batches {
        let size = p.batch.min(p.ops - i * p.batch);
        if tags[i] == OpKind::Delete && live.len() < size {
            match (i + 1..batches).find(|&j| tags[j] != OpKind::Delete) {
                Some(j) => tags.swap(i, j),
                None => {
                    tags[i] = if p.mix.query > 0 && p.mix.insert == 0 {
                        OpKind::Query
                    } else {
                        OpKind::Add
                    }
                }
            }
        }
        for _ in 0..size {
            let op = match tags[i] {
                OpKind::Add => {
                    let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    live.push((u, v));
                    Operation::add(u, v)
                }
                OpKind::Delete => {
                    let (u, v) = live.swap_remove(rng.gen_range(0..live.len()));
                    Operation::delete(u, v)
                }
                OpKind::Query => Operation::query(rng.gen_range(0..n), rng.gen_range(0..n)),
            };
            ops.push(op);
        }
    }

    Ok(Instance {
        n,
        initial_edges,
        ops,
        meta: InstanceMeta {
            name: Some(format!("er-n{}-d{}-s{}", n, p.density, p.seed)),
            seed: Some(p.seed),
            params: Some(format!(
                "er n={} d={} ops={} mix={} batch={}",
                n, p.density, p.ops, p.mix, p.batch
            )),
        },
    })
}

#[derive(Debug, Clone)]
pub struct Shuffled {
    pub instance: Instance,
    /// Deletions that had to be exchanged with their matching insertion.
    pub repairs: usize,
}

/// Permutes the insertions and deletions uniformly among the positions that
/// held updates; queries stay where they are. Deletions that end up ahead of
/// every insertion that could serve them are swapped with the next matching
/// insertion.
pub fn shuffle_updates(inst: &Instance, seed: u64) -> Shuffled {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots: Vec<usize> = (0..inst.ops.len())
        .filter(|&i| inst.ops[i].kind.is_update())
        .collect();
    let mut updates: Vec<Operation> = slots.iter().map(|&i| inst.ops[i]).collect();
    updates.shuffle(&mut rng);
    let mut ops = inst.ops.clone();
    for (&slot, &op) in slots.iter().zip(&updates) {
        ops[slot] = op;
    }

    let mut pending_adds: HashMap<(VertexId, VertexId), std::collections::VecDeque<usize>> = HashMap::new();
    for (i, op) in ops.iter().enumerate() {
        if op.kind == OpKind::Add {
            pending_adds.entry((op.a, op.b)).or_default().push_back(i);
        }
    }
    let mut live: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for &e in &inst.initial_edges {
        *live.entry(e).or_default() += 1;
    }

    let mut repairs = 0;
    for i in 0..ops.len() {
        let op = ops[i];
        let key = (op.a, op.b);
        match op.kind {
            OpKind::Query => {}
            OpKind::Add => {
                pending_adds.get_mut(&key).and_then(|q| q.pop_front());
                *live.entry(key).or_default() += 1;
            }
            OpKind::Delete => {
                let count = live.entry(key).or_default();
                if *count > 0 {
                    *count -= 1;
                    continue;
                }
                // a valid source guarantees a later insertion of the same pair
                if let Some(j) = pending_adds.get_mut(&key).and_then(|q| q.pop_front()) {
                    ops.swap(i, j);
                    repairs += 1;
                    *count += 1;
                }
            }
        }
    }

    let mut meta = inst.meta.clone();
    meta.name = Some(format!("{}-shuffled-{seed}", inst.name()));
    Shuffled {
        instance: Instance {
            n: inst.n,
            initial_edges: inst.initial_edges.clone(),
            ops,
            meta,
        },
        repairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn parse_basic() {
        let inst = parse_str("n 3\ne 0 1\n\na 1 2\nq 0 2\nd 0 1\n").unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!(inst.initial_edges, vec![(0, 1)]);
        assert_eq!(
            inst.ops,
            vec![Operation::add(1, 2), Operation::query(0, 2), Operation::delete(0, 1)]
        );
    }

    #[test]
    fn parse_empty_ops() {
        let inst = parse_str("n 2\ne 0 1\n").unwrap();
        assert!(inst.ops.is_empty());
    }

    #[test]
    fn parse_range_error_names_line() {
        let err = parse_str("n 3\n\nq 0 5\n").unwrap_err();
        match err {
            InstanceError::VertexRange { line, column, vertex, n } => {
                assert_eq!((line, column, vertex, n), (3, 5, 5, 3));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parse_syntax_errors() {
        for (text, line) in [
            ("e 0 1\n", 1),
            ("n 3\nx 0 1\n", 2),
            ("n 3\na 0\n", 2),
            ("n 3\na 0 1 2\n", 2),
            ("n 3\na 0 1\ne 0 1\n", 3),
            ("n 3\nq 0 -1\n", 2),
            ("", 1),
        ] {
            match parse_str(text) {
                Err(InstanceError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn replay_detects_delete_before_add() {
        let inst = parse_str("n 3\n\nd 0 1\na 0 1\n").unwrap();
        match validate_replay(&inst) {
            Err(InstanceError::Replay(d)) => assert_eq!(d.position, 0),
            other => panic!("{other:?}"),
        }
        assert!(validate_stream("n 3\n\nq 0 1\nd 0 1\n".as_bytes()).is_err());
        assert_eq!(validate_stream("n 3\ne 0 1\n\nq 0 1\nd 0 1\n".as_bytes()).unwrap(), 2);
    }

    #[test]
    fn write_header_only() {
        let inst = Instance {
            n: 0,
            ..Default::default()
        };
        assert_eq!(to_text(&inst), "n 0\n");
    }

    #[test]
    fn write_is_stable() {
        let inst = parse_str("# name x\nn 3\ne 0 1\n\na 1 2\n").unwrap();
        assert_eq!(to_text(&inst), to_text(&inst.clone()));
        assert_eq!(to_text(&inst), "# name x\nn 3\ne 0 1\n\na 1 2\n");
    }

    #[test]
    fn gzip_is_transparent() {
        use flate2::write::GzEncoder;
        let inst = generate_er(&ErParams {
            n: 50,
            density: 2.0,
            ops: 100,
            mix: Mix::EQUAL,
            batch: 10,
            seed: 3,
        })
        .unwrap();
        let dir = std::env::temp_dir().join(format!("dyntc-gz-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("inst.txt.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::default());
        write_instance(&inst, &mut enc).unwrap();
        enc.finish().unwrap();
        assert_eq!(read_instance_file(&path).unwrap(), inst);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn er_exact_edge_count() {
        let inst = generate_er(&ErParams {
            n: 4,
            density: 1.0,
            ops: 0,
            mix: Mix::EQUAL,
            batch: 10,
            seed: 1,
        })
        .unwrap();
        assert_eq!(inst.initial_edges.len(), 4);
        assert!(inst.ops.is_empty());
    }

    #[test]
    fn er_rejects_bad_config() {
        let mut p = ErParams::reference(1.25, 0);
        p.mix = Mix { insert: 50, delete: 50, query: 1 };
        assert!(matches!(generate_er(&p), Err(InstanceError::Config(_))));
        assert!("10:10".parse::<Mix>().is_err());
        assert!("10:10:70".parse::<Mix>().is_err());
        assert_eq!("33:33:34".parse::<Mix>().unwrap(), Mix::EQUAL);
    }

    #[test]
    fn reference_setting() {
        let p = ErParams::reference(5.0, 0);
        assert_eq!((p.n, p.ops, p.batch), (100_000, 100_000, 10));
        assert_eq!(p.mix, Mix::EQUAL);
    }

    #[test]
    fn er_replays_cleanly() {
        for seed in 0..20 {
            for d in [1.25, 5.0, 20.0] {
                let inst = generate_er(&ErParams {
                    n: 500,
                    density: d,
                    ops: 2000,
                    mix: Mix::EQUAL,
                    batch: 10,
                    seed,
                })
                .unwrap();
                validate_replay(&inst).unwrap();
            }
        }
    }

    #[test]
    fn er_batches_and_mix() {
        let p = ErParams {
            n: 300,
            density: 2.0,
            ops: 5003,
            mix: Mix::new(50, 20, 30).unwrap(),
            batch: 10,
            seed: 11,
        };
        let inst = generate_er(&p).unwrap();
        assert_eq!(inst.ops.len(), 5003);
        let mut runs = Vec::new();
        let mut i = 0;
        while i < inst.ops.len() {
            let j = (i..inst.ops.len()).find(|&j| inst.ops[j].kind != inst.ops[i].kind).unwrap_or(inst.ops.len());
            runs.push((i, j - i));
            i = j;
        }
        for &(start, len) in &runs {
            if start + len != inst.ops.len() {
                assert_eq!(len % 10, 0, "run at {start}");
            }
        }
        for kind in KINDS {
            let want = p.ops as f64 * p.mix.weight(kind) as f64 / 100.0;
            let got = inst.count(kind) as f64;
            assert!((got - want).abs() <= 2.0 * p.batch as f64, "{kind:?}: {got} vs {want}");
        }
    }

    #[test]
    fn er_deletes_only_with_empty_start() {
        // no initial edges: leading deletion batches must be moved behind insertions
        let p = ErParams {
            n: 20,
            density: 0.0,
            ops: 400,
            mix: Mix::new(30, 60, 10).unwrap(),
            batch: 10,
            seed: 4,
        };
        let inst = generate_er(&p).unwrap();
        validate_replay(&inst).unwrap();
    }

    #[test]
    fn er_density_is_conserved() {
        for seed in 0..20 {
            let inst = generate_er(&ErParams {
                n: 1000,
                density: 2.0,
                ops: 3000,
                mix: Mix::EQUAL,
                batch: 10,
                seed,
            })
            .unwrap();
            let m0 = inst.initial_edges.len() as f64;
            let fin = validate_replay(&inst).unwrap().edge_count() as f64;
            assert!((fin - m0).abs() <= 0.1 * m0);
        }
    }

    #[test]
    fn shuffle_trivial_and_multiset() {
        let one = parse_str("n 3\ne 0 1\n\nq 0 1\nd 0 1\nq 1 0\n").unwrap();
        let s = shuffle_updates(&one, 9);
        assert_eq!(s.instance.ops, one.ops);
        assert_eq!(s.repairs, 0);

        let inst = generate_er(&ErParams {
            n: 100,
            density: 1.0,
            ops: 1000,
            mix: Mix::EQUAL,
            batch: 10,
            seed: 2,
        })
        .unwrap();
        let s = shuffle_updates(&inst, 5);
        let mut a = inst.ops.clone();
        let mut b = s.instance.ops.clone();
        let key = |o: &Operation| (o.kind.tag(), o.a, o.b);
        a.sort_by_key(key);
        b.sort_by_key(key);
        assert_eq!(a, b);
        for (x, y) in inst.ops.iter().zip(&s.instance.ops) {
            assert_eq!(x.kind == OpKind::Query, y.kind == OpKind::Query);
            if x.kind == OpKind::Query {
                assert_eq!(x, y);
            }
        }
        validate_replay(&s.instance).unwrap();
    }

    // Growing stream: mostly insertions of fresh pairs, deletions of earlier ones.
    fn growing(n: usize, ops: usize, seed: u64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut live: Vec<(usize, usize)> = Vec::new();
        let mut out = Vec::new();
        for _ in 0..ops {
            let r: f64 = rng.gen();
            if r < 0.7 || live.is_empty() {
                let e = (rng.gen_range(0..n), rng.gen_range(0..n));
                live.push(e);
                out.push(Operation::add(e.0, e.1));
            } else if r < 0.9 {
                let (u, v) = live.swap_remove(rng.gen_range(0..live.len()));
                out.push(Operation::delete(u, v));
            } else {
                out.push(Operation::query(rng.gen_range(0..n), rng.gen_range(0..n)));
            }
        }
        Instance {
            n,
            initial_edges: Vec::new(),
            ops: out,
            meta: InstanceMeta::default(),
        }
    }

    #[test]
    fn shuffle_repairs_growing_instances() {
        let mut total = 0;
        for seed in 0..10 {
            let inst = growing(200, 3000, seed);
            validate_replay(&inst).unwrap();
            let s = shuffle_updates(&inst, seed + 100);
            total += s.repairs;
            validate_replay(&s.instance).unwrap();
        }
        assert!(total > 0, "growing streams should need repairs");
    }

    proptest! {
        #[test]
        fn write_parse_roundtrip(n in 1usize..50, seed in any::<u64>(), d in 0.0f64..4.0, ops in 0usize..300) {
            let inst = generate_er(&ErParams { n, density: d, ops, mix: Mix::EQUAL, batch: 7, seed }).unwrap();
            let text = to_text(&inst);
            prop_assert_eq!(parse_str(&text).unwrap(), inst.clone());
            prop_assert_eq!(to_text(&generate_er(&ErParams { n, density: d, ops, mix: Mix::EQUAL, batch: 7, seed }).unwrap()), text);
        }

        #[test]
        fn shuffled_growing_streams_replay(seed in any::<u64>(), shuffle_seed in any::<u64>()) {
            let inst = growing(30, 400, seed);
            let s = shuffle_updates(&inst, shuffle_seed);
            prop_assert!(validate_replay(&s.instance).is_ok());
        }
    }
}
