//! Fully dynamic single-source / single-sink reachability rooted at one vertex.
//!
//! Two engines share one state layout:
//!
//! * [`SsrKind::Si`] keeps an arbitrary reachability tree. Insertions extend it
//!   by BFS from a newly reached vertex; deleting a tree edge detaches a
//!   subtree, which is re-hung by a backward scan for surviving parents and a
//!   forward BFS from each reattachment point.
//! * [`SsrKind::Ses`] keeps an exact BFS level tree. Insertions relax levels
//!   downwards by BFS; deleting a tree edge runs an Even-Shiloach style loop
//!   that raises levels one step at a time.
//!
//! Both abandon an expensive repair for a fresh BFS when more than
//! `ratio * n` vertices get involved; SES additionally gives up once a single
//! vertex has been raised more than `beta` times within one deletion.
//!
//! A `Reverse` engine answers "does `v` reach the root" by walking in-edges;
//! no reversed copy of the graph is stored.

mod ses;
mod si;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::graph::{DiGraph, Direction, EdgeId, VertexId};

pub(crate) const NO_EDGE: EdgeId = EdgeId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SsrKind {
    Si,
    Ses,
}

impl SsrKind {
    pub fn name(self) -> &'static str {
        match self {
            SsrKind::Si => "si",
            SsrKind::Ses => "ses",
        }
    }
}

impl fmt::Display for SsrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SsrKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "si" => Ok(SsrKind::Si),
            "ses" => Ok(SsrKind::Ses),
            other => Err(format!("unknown SSR algorithm `{other}`")),
        }
    }
}

/// Rebuild thresholds. `beta` only matters for SES.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsrParams {
    pub ratio: f64,
    pub beta: u32,
}

impl SsrParams {
    pub const DEFAULT_RATIO: f64 = 0.25;
    pub const DEFAULT_BETA: u32 = 5;

    pub fn new(ratio: f64, beta: u32) -> Result<Self, String> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(format!("ratio must lie in [0, 1], got {ratio}"));
        }
        if beta == 0 {
            return Err("beta must be at least 1".into());
        }
        Ok(SsrParams { ratio, beta })
    }
}

impl Default for SsrParams {
    fn default() -> Self {
        SsrParams {
            ratio: Self::DEFAULT_RATIO,
            beta: Self::DEFAULT_BETA,
        }
    }
}

/// Work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SsrStats {
    /// Insert and delete notifications received.
    pub notifications: u64,
    /// Full BFS rebuilds, including the initial one.
    pub recomputations: u64,
    /// Rebuilds caused by a repair exceeding a threshold.
    pub threshold_aborts: u64,
    /// Vertices dequeued or visited by any procedure since creation.
    pub vertices_processed: u64,
    /// Vertices processed by the most recent notification.
    pub last_update_work: u64,
    /// Largest per-deletion processed-vertex count seen so far.
    pub max_deletion_work: u64,
}

#[derive(Debug, Clone)]
pub struct SsrEngine {
    kind: SsrKind,
    root: VertexId,
    dir: Direction,
    params: SsrParams,
    // tree edge into each vertex, NO_EDGE for the root and unreachable vertices
    parent: Vec<EdgeId>,
    // SI only
    reachable: Vec<bool>,
    // SES only; `n` marks unreachable
    level: Vec<u32>,
    queue: VecDeque<VertexId>,
    list: Vec<VertexId>,
    stamp: Vec<u32>,
    epoch: u32,
    in_queue: Vec<bool>,
    raised: Vec<u32>,
    stats: SsrStats,
}

impl SsrEngine {
    pub fn new(kind: SsrKind, g: &DiGraph, root: VertexId, dir: Direction, params: SsrParams) -> Self {
        let n = g.vertex_count();
        assert!(root < n, "root {root} out of range for {n} vertices");
        let mut engine = SsrEngine {
            kind,
            root,
            dir,
            params,
            parent: vec![NO_EDGE; n],
            reachable: Vec::new(),
            level: Vec::new(),
            queue: VecDeque::new(),
            list: Vec::new(),
            stamp: vec![0; n],
            epoch: 0,
            in_queue: Vec::new(),
            raised: Vec::new(),
            stats: SsrStats::default(),
        };
        match kind {
            SsrKind::Si => engine.reachable = vec![false; n],
            SsrKind::Ses => {
                engine.level = vec![n as u32; n];
                engine.in_queue = vec![false; n];
                engine.raised = vec![0; n];
            }
        }
        let work = engine.recompute(g);
        engine.stats.last_update_work = work;
        engine
    }

    pub fn kind(&self) -> SsrKind {
        self.kind
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn direction(&self) -> Direction {
        self.dir
    }

    pub fn params(&self) -> SsrParams {
        self.params
    }

    pub fn stats(&self) -> SsrStats {
        self.stats
    }

    fn n(&self) -> usize {
        self.parent.len()
    }

    /// Whether the root reaches `v` (`Forward`) or `v` reaches the root (`Reverse`).
    #[inline]
    pub fn query(&self, v: VertexId) -> bool {
        match self.kind {
            SsrKind::Si => self.reachable[v],
            SsrKind::Ses => (self.level[v] as usize) < self.n(),
        }
    }

    /// BFS distance from the root, SES only.
    pub fn level(&self, v: VertexId) -> Option<u32> {
        match self.kind {
            SsrKind::Si => None,
            SsrKind::Ses => Some(self.level[v]).filter(|&l| (l as usize) < self.n()),
        }
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        Some(self.parent[v]).filter(|&e| e != NO_EDGE)
    }

    pub fn reachable_count(&self) -> usize {
        (0..self.n()).filter(|&v| self.query(v)).count()
    }

    pub fn on_insert(&mut self, g: &DiGraph, edge: EdgeId, tail: VertexId, head: VertexId) {
        self.stats.notifications += 1;
        let (from, to) = self.orient(tail, head);
        let work = match self.kind {
            SsrKind::Si => self.si_insert(g, edge, from, to),
            SsrKind::Ses => self.ses_insert(g, edge, from, to),
        };
        self.record(work);
    }

    pub fn on_delete(&mut self, g: &DiGraph, edge: EdgeId, tail: VertexId, head: VertexId) {
        self.stats.notifications += 1;
        let (from, to) = self.orient(tail, head);
        let work = match self.kind {
            SsrKind::Si => self.si_delete(g, edge, from, to),
            SsrKind::Ses => self.ses_delete(g, edge, from, to),
        };
        self.record(work);
        self.stats.max_deletion_work = self.stats.max_deletion_work.max(work);
    }

    fn record(&mut self, work: u64) {
        self.stats.last_update_work = work;
        self.stats.vertices_processed += work;
    }

    /// Graph edge `(tail, head)` as seen from the root's side of the search.
    #[inline]
    fn orient(&self, tail: VertexId, head: VertexId) -> (VertexId, VertexId) {
        match self.dir {
            Direction::Forward => (tail, head),
            Direction::Reverse => (head, tail),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn exceeds_ratio(&self, count: usize) -> bool {
        count as f64 > self.params.ratio * self.n() as f64
    }

    /// Fresh BFS tree from the root. Returns the number of vertices visited.
    fn recompute(&mut self, g: &DiGraph) -> u64 {
        self.stats.recomputations += 1;
        let n = self.n();
        self.parent.iter_mut().for_each(|p| *p = NO_EDGE);
        self.queue.clear();
        match self.kind {
            SsrKind::Si => {
                self.reachable.iter_mut().for_each(|r| *r = false);
                self.reachable[self.root] = true;
            }
            SsrKind::Ses => {
                self.level.iter_mut().for_each(|l| *l = n as u32);
                self.in_queue.iter_mut().for_each(|q| *q = false);
                self.level[self.root] = 0;
            }
        }
        self.queue.push_back(self.root);
        let mut visited = 0;
        while let Some(x) = self.queue.pop_front() {
            visited += 1;
            for &(e, y) in g.neighbors(x, self.dir) {
                let fresh = match self.kind {
                    SsrKind::Si => !std::mem::replace(&mut self.reachable[y], true),
                    SsrKind::Ses => {
                        if (self.level[y] as usize) < n {
                            false
                        } else {
                            self.level[y] = self.level[x] + 1;
                            true
                        }
                    }
                };
                if fresh {
                    self.parent[y] = e;
                    self.queue.push_back(y);
                }
            }
        }
        visited
    }

    /// Verifies the tree against the graph: parent edges are live and point
    /// from a reachable vertex, SES levels step by exactly one along them.
    pub fn audit(&self, g: &DiGraph) -> Result<(), String> {
        let n = self.n();
        if !self.query(self.root) || self.parent[self.root] != NO_EDGE {
            return Err("root must be reachable and parentless".into());
        }
        for v in 0..n {
            if v == self.root {
                continue;
            }
            let reach = self.query(v);
            let p = self.parent[v];
            if !reach {
                if p != NO_EDGE {
                    return Err(format!("unreachable {v} keeps parent edge {p}"));
                }
                continue;
            }
            let edge = g.edge(p).ok_or(format!("vertex {v} hangs on dead edge {p}"))?;
            let (from, to) = self.orient(edge.tail, edge.head);
            if to != v || !self.query(from) {
                return Err(format!("parent edge {p} of {v} does not come from the tree"));
            }
            if self.kind == SsrKind::Ses && self.level[from] + 1 != self.level[v] {
                return Err(format!(
                    "level({v}) = {} but parent level {}",
                    self.level[v], self.level[from]
                ));
            }
        }
        // parent pointers must lead back to the root
        for v in 0..n {
            let mut x = v;
            let mut steps = 0;
            while self.query(x) && x != self.root {
                let e = g.edge(self.parent[x]).expect("checked above");
                x = self.orient(e.tail, e.head).0;
                steps += 1;
                if steps > n {
                    return Err(format!("parent cycle through {v}"));
                }
            }
        }
        Ok(())
    }
}
