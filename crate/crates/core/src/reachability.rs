use crate::graph::{DiGraph, EdgeId, UpdateObserver, VertexId};
use crate::supportive::{QueryStage, StageHistogram};
use crate::traversal::{SearchScratch, StaticAlgo};

/// Counters an algorithm exposes to the benchmark harness.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlgoCounters {
    pub stages: Option<StageHistogram>,
    pub recomputations: u64,
    pub engine_notifications: u64,
    pub supports: usize,
    pub peak_supports: usize,
    pub adjustments: u64,
}

/// A fully dynamic transitive-closure algorithm: it observes every update of
/// one graph and answers reachability queries on it.
pub trait DynamicReachability: UpdateObserver {
    fn query(&mut self, g: &DiGraph, s: VertexId, t: VertexId) -> bool;

    /// Ladder stage that decided the most recent query, if the algorithm has one.
    fn last_stage(&self) -> Option<QueryStage> {
        None
    }

    fn counters(&self) -> AlgoCounters {
        AlgoCounters::default()
    }

    /// True if update notifications are no-ops, so callers may skip them.
    fn ignores_updates(&self) -> bool {
        false
    }
}

/// A static search wrapped as a dynamic algorithm with no-op update handlers.
#[derive(Debug, Clone)]
pub struct StaticReachability {
    algo: StaticAlgo,
    scratch: SearchScratch,
}

impl StaticReachability {
    pub fn new(algo: StaticAlgo, g: &DiGraph) -> Self {
        StaticReachability {
            algo,
            scratch: SearchScratch::new(g.vertex_count()),
        }
    }

    pub fn algo(&self) -> StaticAlgo {
        self.algo
    }
}

impl UpdateObserver for StaticReachability {
    fn on_insert(&mut self, _: &DiGraph, _: EdgeId, _: VertexId, _: VertexId) {}
    fn on_delete(&mut self, _: &DiGraph, _: EdgeId, _: VertexId, _: VertexId) {}
}

impl DynamicReachability for StaticReachability {
    fn query(&mut self, g: &DiGraph, s: VertexId, t: VertexId) -> bool {
        self.algo.query(g, &mut self.scratch, s, t)
    }

    fn ignores_updates(&self) -> bool {
        true
    }
}
