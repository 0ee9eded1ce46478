//! Supportive vertices: answer `s ->* t` from the reachability sets of a few
//! chosen vertices, falling back to a static search only when they cannot
//! decide.
//!
//! For a supportive vertex `v` with out-set `R+(v)` and in-set `R-(v)`:
//!
//! * `s in R-(v)` and `t in R+(v)` proves `s` reaches `t` (stage `O1`);
//! * `s in R+(v)` and `t not in R+(v)` proves it does not (`O2`);
//! * `t in R-(v)` and `s not in R-(v)` proves it does not (`O3`).
//!
//! Three selection policies exist. `Sv` draws `k` non-isolated vertices once.
//! `Sva` redraws them every `c` updates. `Svc` puts one supportive vertex into
//! every strongly connected component of at least `z` vertices and remembers
//! each member's representative; the map is refreshed every `c` updates and
//! validated lazily at query time.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{tarjan_scc, DiGraph, Direction, EdgeId, UpdateObserver, VertexId};
use crate::reachability::{AlgoCounters, DynamicReachability};
use crate::ssr::{SsrEngine, SsrKind, SsrParams, SsrStats};
use crate::traversal::{SearchScratch, StaticAlgo};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdjustPeriod {
    Every(u64),
    Never,
}

impl fmt::Display for AdjustPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdjustPeriod::Every(c) => write!(f, "{c}"),
            AdjustPeriod::Never => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SvVariant {
    Sv { k: usize },
    Sva { k: usize, period: AdjustPeriod },
    Svc { min_scc: usize, period: AdjustPeriod },
}

impl SvVariant {
    /// Minimum SCC size used for SVC when none is given: 25 below a million
    /// vertices, 50 from there on.
    pub fn default_min_scc(n: usize) -> usize {
        if n < 1_000_000 {
            25
        } else {
            50
        }
    }

    fn period(&self) -> AdjustPeriod {
        match *self {
            SvVariant::Sv { .. } => AdjustPeriod::Never,
            SvVariant::Sva { period, .. } | SvVariant::Svc { period, .. } => period,
        }
    }

    fn target(&self) -> Option<usize> {
        match *self {
            SvVariant::Sv { k } | SvVariant::Sva { k, .. } => Some(k),
            SvVariant::Svc { .. } => None,
        }
    }
}

impl fmt::Display for SvVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SvVariant::Sv { k } => write!(f, "sv(k={k})"),
            SvVariant::Sva { k, period } => write!(f, "sva(k={k},c={period})"),
            SvVariant::Svc { min_scc, period } => write!(f, "svc(z={min_scc},c={period})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvConfig {
    pub variant: SvVariant,
    pub ssr_kind: SsrKind,
    pub ssr_params: SsrParams,
    pub seed: u64,
    pub fallback: StaticAlgo,
}

impl SvConfig {
    pub fn new(variant: SvVariant) -> Self {
        SvConfig {
            variant,
            ssr_kind: SsrKind::Ses,
            ssr_params: SsrParams::default(),
            seed: 0,
            fallback: StaticAlgo::BiBfs,
        }
    }

    pub fn with_ssr(mut self, kind: SsrKind, params: SsrParams) -> Self {
        self.ssr_kind = kind;
        self.ssr_params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_fallback(mut self, fallback: StaticAlgo) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.variant {
            SvVariant::Sv { k } | SvVariant::Sva { k, .. } if k == 0 => {
                return Err("k must be at least 1".into())
            }
            SvVariant::Svc { min_scc: 0, .. } => return Err("z must be at least 1".into()),
            _ => {}
        }
        if self.variant.period() == AdjustPeriod::Every(0) {
            return Err("c must be at least 1".into());
        }
        SsrParams::new(self.ssr_params.ratio, self.ssr_params.beta).map(|_| ())
    }
}

/// Where in the query ladder an answer came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryStage {
    SourceSupportive,
    TargetSupportive,
    SccRepresentative,
    O1,
    O2,
    O3,
    Fallback,
}

impl QueryStage {
    pub const ALL: [QueryStage; 7] = [
        QueryStage::SourceSupportive,
        QueryStage::TargetSupportive,
        QueryStage::SccRepresentative,
        QueryStage::O1,
        QueryStage::O2,
        QueryStage::O3,
        QueryStage::Fallback,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            QueryStage::SourceSupportive => "source_supportive",
            QueryStage::TargetSupportive => "target_supportive",
            QueryStage::SccRepresentative => "scc_representative",
            QueryStage::O1 => "o1",
            QueryStage::O2 => "o2",
            QueryStage::O3 => "o3",
            QueryStage::Fallback => "fallback",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageHistogram {
    counts: [u64; 7],
}

impl StageHistogram {
    pub fn record(&mut self, stage: QueryStage) {
        self.counts[stage.index()] += 1;
    }

    pub fn get(&self, stage: QueryStage) -> u64 {
        self.counts[stage.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Share of queries answered without the static fallback, 1.0 when empty.
    pub fn non_fallback_share(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            1.0
        } else {
            1.0 - self.get(QueryStage::Fallback) as f64 / total as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (QueryStage, u64)> + '_ {
        QueryStage::ALL.iter().map(move |&s| (s, self.get(s)))
    }
}

/// A supportive vertex with its out-set and in-set engines.
#[derive(Debug, Clone)]
pub struct SupportPair {
    pub vertex: VertexId,
    pub fwd: SsrEngine,
    pub bwd: SsrEngine,
}

impl SupportPair {
    fn new(g: &DiGraph, vertex: VertexId, kind: SsrKind, params: SsrParams) -> Self {
        SupportPair {
            vertex,
            fwd: SsrEngine::new(kind, g, vertex, Direction::Forward, params),
            bwd: SsrEngine::new(kind, g, vertex, Direction::Reverse, params),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvState {
    config: SvConfig,
    supports: Vec<SupportPair>,
    // vertex -> position in `supports`
    support_of: Vec<u32>,
    // SVC: vertex -> position of its representative in `supports`
    rep: Vec<u32>,
    update_counter: u64,
    adjustments: u64,
    rng: ChaCha8Rng,
    stages: StageHistogram,
    last_stage: Option<QueryStage>,
    scratch: SearchScratch,
    peak_supports: usize,
    // counters of engines destroyed by SVA re-selection
    retired: SsrStats,
}

impl SvState {
    pub fn new(g: &DiGraph, config: SvConfig) -> Self {
        let mut st = SvState::with_supports(g, config, &[]);
        match config.variant {
            SvVariant::Sv { k } | SvVariant::Sva { k, .. } => st.draw_supports(g, k),
            SvVariant::Svc { min_scc, .. } => st.select_scc_cover(g, min_scc),
        }
        st
    }

    /// State with a fixed list of supportive vertices instead of a drawn one.
    /// SVC representatives are left empty until the first adjustment.
    pub fn with_supports(g: &DiGraph, config: SvConfig, vertices: &[VertexId]) -> Self {
        let n = g.vertex_count();
        let mut st = SvState {
            config,
            supports: Vec::new(),
            support_of: vec![NONE; n],
            rep: Vec::new(),
            update_counter: 0,
            adjustments: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            stages: StageHistogram::default(),
            last_stage: None,
            scratch: SearchScratch::new(n),
            peak_supports: 0,
            retired: SsrStats::default(),
        };
        if matches!(config.variant, SvVariant::Svc { .. }) {
            st.rep = vec![NONE; n];
        }
        for &v in vertices {
            if st.support_of[v] == NONE {
                st.add_support(g, v);
            }
        }
        st
    }

    pub fn config(&self) -> &SvConfig {
        &self.config
    }

    pub fn supports(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.supports.iter().map(|p| p.vertex)
    }

    pub fn support_pairs(&self) -> &[SupportPair] {
        &self.supports
    }

    pub fn is_supportive(&self, v: VertexId) -> bool {
        self.support_of[v] != NONE
    }

    /// SVC representative currently recorded for `v`; may be stale.
    pub fn representative(&self, v: VertexId) -> Option<VertexId> {
        match self.rep.get(v) {
            Some(&r) if r != NONE => Some(self.supports[r as usize].vertex),
            _ => None,
        }
    }

    pub fn rep_entries(&self) -> usize {
        self.rep.iter().filter(|&&r| r != NONE).count()
    }

    /// Fewer supportive vertices than requested (SV/SVA only).
    pub fn has_deficit(&self) -> bool {
        self.config
            .variant
            .target()
            .is_some_and(|k| self.supports.len() < k)
    }

    pub fn update_counter(&self) -> u64 {
        self.update_counter
    }

    pub fn adjustments(&self) -> u64 {
        self.adjustments
    }

    pub fn stage_stats(&self) -> StageHistogram {
        self.stages
    }

    /// Notifications delivered to SSR engines, including engines since discarded.
    pub fn engine_notifications(&self) -> u64 {
        self.retired.notifications + self.live_engine_stats().map(|s| s.notifications).sum::<u64>()
    }

    pub fn recomputations(&self) -> u64 {
        self.retired.recomputations + self.live_engine_stats().map(|s| s.recomputations).sum::<u64>()
    }

    fn live_engine_stats(&self) -> impl Iterator<Item = SsrStats> + '_ {
        self.supports.iter().flat_map(|p| [p.fwd.stats(), p.bwd.stats()])
    }

    fn add_support(&mut self, g: &DiGraph, v: VertexId) -> u32 {
        debug_assert_eq!(self.support_of[v], NONE);
        let idx = self.supports.len() as u32;
        self.supports
            .push(SupportPair::new(g, v, self.config.ssr_kind, self.config.ssr_params));
        self.support_of[v] = idx;
        self.peak_supports = self.peak_supports.max(self.supports.len());
        idx
    }

    fn clear_supports(&mut self) {
        for p in self.supports.drain(..) {
            self.support_of[p.vertex] = NONE;
            for s in [p.fwd.stats(), p.bwd.stats()] {
                self.retired.notifications += s.notifications;
                self.retired.recomputations += s.recomputations;
            }
        }
    }

    /// Adds up to `k - |supports|` distinct non-isolated vertices drawn uniformly.
    fn draw_supports(&mut self, g: &DiGraph, k: usize) {
        let eligible: Vec<VertexId> = (0..g.vertex_count())
            .filter(|&v| !g.is_isolated(v) && self.support_of[v] == NONE)
            .collect();
        let want = k.saturating_sub(self.supports.len()).min(eligible.len());
        for i in sample(&mut self.rng, eligible.len(), want) {
            self.add_support(g, eligible[i]);
        }
    }

    /// SCC cover: one supportive vertex (lowest id) per component of at least
    /// `z` vertices lacking one, then a rebuilt representative map. Existing
    /// supportive vertices are kept.
    fn select_scc_cover(&mut self, g: &DiGraph, z: usize) {
        let scc = tarjan_scc(g);
        self.rep.iter_mut().for_each(|r| *r = NONE);
        for members in scc.members() {
            if members.len() < z {
                continue;
            }
            let rep = match members.iter().find(|&&v| self.support_of[v] != NONE) {
                Some(&v) => self.support_of[v],
                None => self.add_support(g, members[0]),
            };
            for &v in &members {
                self.rep[v] = rep;
            }
        }
        if self.supports.is_empty() {
            let inner = (0..g.vertex_count()).find(|&v| g.in_degree(v) > 0 && g.out_degree(v) > 0);
            match inner {
                Some(v) => {
                    self.add_support(g, v);
                }
                None => self.draw_supports(g, 1),
            }
        }
    }

    /// Periodic re-selection: SVA redraws from scratch, SVC refreshes its cover.
    pub fn adjust(&mut self, g: &DiGraph) {
        self.adjustments += 1;
        match self.config.variant {
            SvVariant::Sv { .. } => {}
            SvVariant::Sva { k, .. } => {
                self.clear_supports();
                self.draw_supports(g, k);
            }
            SvVariant::Svc { min_scc, .. } => self.select_scc_cover(g, min_scc),
        }
    }

    fn after_update(&mut self, g: &DiGraph) {
        self.update_counter += 1;
        if let AdjustPeriod::Every(c) = self.config.variant.period() {
            if self.update_counter.is_multiple_of(c) {
                self.adjust(g);
            }
        }
    }

    fn repair_deficit(&mut self, g: &DiGraph, tail: VertexId, head: VertexId) {
        let Some(k) = self.config.variant.target() else {
            return;
        };
        let mut fresh: Vec<VertexId> = [tail, head]
            .into_iter()
            .filter(|&v| self.support_of[v] == NONE)
            .collect();
        fresh.dedup();
        while self.supports.len() < k && !fresh.is_empty() {
            let pick = fresh.swap_remove(self.rng.gen_range(0..fresh.len()));
            self.add_support(g, pick);
        }
    }

    fn decide(&mut self, g: &DiGraph, s: VertexId, t: VertexId) -> (bool, QueryStage) {
        if !self.rep.is_empty() {
            let r = self.rep[s];
            if r != NONE {
                let p = &self.supports[r as usize];
                if p.fwd.query(s) && p.bwd.query(s) {
                    return (p.fwd.query(t), QueryStage::SccRepresentative);
                }
                self.rep[s] = NONE;
            }
            let r = self.rep[t];
            if r != NONE {
                let p = &self.supports[r as usize];
                if p.fwd.query(t) && p.bwd.query(t) {
                    return (p.bwd.query(s), QueryStage::SccRepresentative);
                }
                self.rep[t] = NONE;
            }
        }

        if let Some(p) = self.supports.get(self.support_of[s] as usize) {
            return (p.fwd.query(t), QueryStage::SourceSupportive);
        }
        if let Some(p) = self.supports.get(self.support_of[t] as usize) {
            return (p.bwd.query(s), QueryStage::TargetSupportive);
        }

        for p in &self.supports {
            let (s_in, t_out) = (p.bwd.query(s), p.fwd.query(t));
            if s_in && t_out {
                return (true, QueryStage::O1);
            }
            if p.fwd.query(s) && !t_out {
                return (false, QueryStage::O2);
            }
            if !s_in && p.bwd.query(t) {
                return (false, QueryStage::O3);
            }
        }

        let answer = self.config.fallback.query(g, &mut self.scratch, s, t);
        (answer, QueryStage::Fallback)
    }

    pub fn query_with_stage(&mut self, g: &DiGraph, s: VertexId, t: VertexId) -> (bool, QueryStage) {
        let (answer, stage) = self.decide(g, s, t);
        self.stages.record(stage);
        self.last_stage = Some(stage);
        (answer, stage)
    }
}

impl UpdateObserver for SvState {
    fn on_insert(&mut self, g: &DiGraph, edge: EdgeId, tail: VertexId, head: VertexId) {
        for p in &mut self.supports {
            p.fwd.on_insert(g, edge, tail, head);
            p.bwd.on_insert(g, edge, tail, head);
        }
        if self.has_deficit() {
            self.repair_deficit(g, tail, head);
        }
        self.after_update(g);
    }

    fn on_delete(&mut self, g: &DiGraph, edge: EdgeId, tail: VertexId, head: VertexId) {
        for p in &mut self.supports {
            p.fwd.on_delete(g, edge, tail, head);
            p.bwd.on_delete(g, edge, tail, head);
        }
        self.after_update(g);
    }
}

impl DynamicReachability for SvState {
    fn query(&mut self, g: &DiGraph, s: VertexId, t: VertexId) -> bool {
        self.query_with_stage(g, s, t).0
    }

    fn last_stage(&self) -> Option<QueryStage> {
        self.last_stage
    }

    fn counters(&self) -> AlgoCounters {
        AlgoCounters {
            stages: Some(self.stages),
            recomputations: self.recomputations(),
            engine_notifications: self.engine_notifications(),
            supports: self.supports.len(),
            peak_supports: self.peak_supports,
            adjustments: self.adjustments,
        }
    }
}
