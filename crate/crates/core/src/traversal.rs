//! Static reachability queries. None of these keep state between queries
//! besides reusable scratch buffers, so they do no work on updates.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::graph::{DiGraph, VertexId};

/// Visited marks and frontiers shared by all static searches.
///
/// Marks are epoch stamps, so starting a new query is O(1) instead of O(n).
#[derive(Debug, Default, Clone)]
pub struct SearchScratch {
    fwd_mark: Vec<u32>,
    bwd_mark: Vec<u32>,
    epoch: u32,
    queue: VecDeque<VertexId>,
    back_queue: VecDeque<VertexId>,
    stack: Vec<(VertexId, usize)>,
    visited: usize,
}

impl SearchScratch {
    pub fn new(n: usize) -> Self {
        let mut s = SearchScratch::default();
        s.reserve(n);
        s
    }

    fn reserve(&mut self, n: usize) {
        if self.fwd_mark.len() < n {
            self.fwd_mark.resize(n, 0);
            self.bwd_mark.resize(n, 0);
        }
    }

    fn begin(&mut self, n: usize) {
        self.reserve(n);
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.fwd_mark.iter_mut().for_each(|m| *m = 0);
            self.bwd_mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.queue.clear();
        self.back_queue.clear();
        self.stack.clear();
        self.visited = 0;
    }

    #[inline]
    fn mark_fwd(&mut self, v: VertexId) -> bool {
        if self.fwd_mark[v] == self.epoch {
            false
        } else {
            self.fwd_mark[v] = self.epoch;
            self.visited += 1;
            true
        }
    }

    #[inline]
    fn mark_bwd(&mut self, v: VertexId) -> bool {
        if self.bwd_mark[v] == self.epoch {
            false
        } else {
            self.bwd_mark[v] = self.epoch;
            self.visited += 1;
            true
        }
    }

    /// Number of vertices marked by the most recent query (both sides for BiBFS).
    pub fn last_visited(&self) -> usize {
        self.visited
    }
}

pub fn bfs_query(g: &DiGraph, scratch: &mut SearchScratch, s: VertexId, t: VertexId) -> bool {
    scratch.begin(g.vertex_count());
    scratch.mark_fwd(s);
    if s == t {
        return true;
    }
    scratch.queue.push_back(s);
    while let Some(x) = scratch.queue.pop_front() {
        for &(_, y) in g.out_neighbors(x) {
            if y == t {
                scratch.mark_fwd(y);
                return true;
            }
            if scratch.mark_fwd(y) {
                scratch.queue.push_back(y);
            }
        }
    }
    false
}

pub fn dfs_query(g: &DiGraph, scratch: &mut SearchScratch, s: VertexId, t: VertexId) -> bool {
    scratch.begin(g.vertex_count());
    scratch.mark_fwd(s);
    if s == t {
        return true;
    }
    scratch.stack.push((s, 0));
    while let Some(top) = scratch.stack.last_mut() {
        let (x, pos) = *top;
        let out = g.out_neighbors(x);
        if pos == out.len() {
            scratch.stack.pop();
            continue;
        }
        top.1 += 1;
        let y = out[pos].1;
        if scratch.mark_fwd(y) {
            if y == t {
                return true;
            }
            scratch.stack.push((y, 0));
        }
    }
    false
}

/// DFS order, but each newly visited vertex first checks whether `t` is among
/// its out-neighbours.
pub fn dbfs_query(g: &DiGraph, scratch: &mut SearchScratch, s: VertexId, t: VertexId) -> bool {
    scratch.begin(g.vertex_count());
    scratch.mark_fwd(s);
    if s == t {
        return true;
    }
    if g.out_neighbors(s).iter().any(|&(_, y)| y == t) {
        return true;
    }
    scratch.stack.push((s, 0));
    while let Some(top) = scratch.stack.last_mut() {
        let (x, pos) = *top;
        let out = g.out_neighbors(x);
        if pos == out.len() {
            scratch.stack.pop();
            continue;
        }
        top.1 += 1;
        let y = out[pos].1;
        if scratch.mark_fwd(y) {
            if g.out_neighbors(y).iter().any(|&(_, z)| z == t) {
                return true;
            }
            scratch.stack.push((y, 0));
        }
    }
    false
}

/// Alternating bidirectional BFS. Each turn dequeues one vertex on one side and
/// examines all of its neighbours; the forward side moves first.
pub fn bibfs_query(g: &DiGraph, scratch: &mut SearchScratch, s: VertexId, t: VertexId) -> bool {
    if s == t {
        scratch.begin(g.vertex_count());
        return true;
    }
    scratch.begin(g.vertex_count());
    scratch.mark_fwd(s);
    scratch.mark_bwd(t);
    scratch.queue.push_back(s);
    scratch.back_queue.push_back(t);
    let epoch = scratch.epoch;
    loop {
        let Some(x) = scratch.queue.pop_front() else {
            return false;
        };
        for &(_, y) in g.out_neighbors(x) {
            if scratch.bwd_mark[y] == epoch {
                return true;
            }
            if scratch.mark_fwd(y) {
                scratch.queue.push_back(y);
            }
        }

        let Some(x) = scratch.back_queue.pop_front() else {
            return false;
        };
        for &(_, y) in g.in_neighbors(x) {
            if scratch.fwd_mark[y] == epoch {
                return true;
            }
            if scratch.mark_bwd(y) {
                scratch.back_queue.push_back(y);
            }
        }
    }
}

/// The four static query algorithms, usable directly or as a fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StaticAlgo {
    Bfs,
    Dfs,
    Dbfs,
    BiBfs,
}

impl StaticAlgo {
    pub const ALL: [StaticAlgo; 4] = [StaticAlgo::Bfs, StaticAlgo::Dfs, StaticAlgo::Dbfs, StaticAlgo::BiBfs];

    pub fn query(self, g: &DiGraph, scratch: &mut SearchScratch, s: VertexId, t: VertexId) -> bool {
        match self {
            StaticAlgo::Bfs => bfs_query(g, scratch, s, t),
            StaticAlgo::Dfs => dfs_query(g, scratch, s, t),
            StaticAlgo::Dbfs => dbfs_query(g, scratch, s, t),
            StaticAlgo::BiBfs => bibfs_query(g, scratch, s, t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StaticAlgo::Bfs => "bfs",
            StaticAlgo::Dfs => "dfs",
            StaticAlgo::Dbfs => "dbfs",
            StaticAlgo::BiBfs => "bibfs",
        }
    }
}

impl fmt::Display for StaticAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StaticAlgo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(StaticAlgo::Bfs),
            "dfs" => Ok(StaticAlgo::Dfs),
            "dbfs" => Ok(StaticAlgo::Dbfs),
            "bibfs" => Ok(StaticAlgo::BiBfs),
            other => Err(format!("unknown static algorithm `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> DiGraph {
        let mut g = DiGraph::new(n);
        for &(u, v) in edges {
            g.insert_edge(u, v).unwrap();
        }
        g
    }

    // Reference answers from a plain closure computed by repeated relaxation.
    fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut r = vec![vec![false; n]; n];
        for (v, row) in r.iter_mut().enumerate() {
            row[v] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for &(u, v) in edges {
                for s in 0..n {
                    if r[s][u] && !r[s][v] {
                        r[s][v] = true;
                        changed = true;
                    }
                }
            }
        }
        r
    }

    #[test]
    fn path_and_empty_path() {
        let g = from_edges(3, &[(0, 1), (1, 2)]);
        let mut sc = SearchScratch::new(3);
        for algo in StaticAlgo::ALL {
            assert!(algo.query(&g, &mut sc, 0, 2), "{algo}");
            assert!(!algo.query(&g, &mut sc, 2, 0), "{algo}");
            for v in 0..3 {
                assert!(algo.query(&g, &mut sc, v, v), "{algo}");
            }
        }
    }

    #[test]
    fn diamond_and_components() {
        let g = from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let mut sc = SearchScratch::new(4);
        assert!(dfs_query(&g, &mut sc, 0, 3));
        let g = from_edges(4, &[(0, 1), (2, 3)]);
        assert!(!dfs_query(&g, &mut sc, 0, 3));
    }

    #[test]
    fn dbfs_answers_from_out_neighbourhood() {
        let g = from_edges(3, &[(0, 1), (1, 2)]);
        let mut sc = SearchScratch::new(3);
        assert!(dbfs_query(&g, &mut sc, 0, 2));
        // 0 and 1 visited, 2 never pushed
        assert_eq!(sc.last_visited(), 2);
        assert!(!dbfs_query(&g, &mut sc, 2, 0));
    }

    #[test]
    fn bibfs_meets_in_the_middle() {
        // path 0..4 plus two-step branches out of 0
        let mut edges = vec![(0, 1), (1, 2), (2, 3), (3, 4)];
        for b in 0..20 {
            edges.push((0, 5 + b));
            edges.push((5 + b, 25 + b));
        }
        let g = from_edges(45, &edges);
        let mut sc = SearchScratch::new(45);
        assert!(bfs_query(&g, &mut sc, 0, 4));
        let bfs_seen = sc.last_visited();
        assert!(bibfs_query(&g, &mut sc, 0, 4));
        assert!(sc.last_visited() < bfs_seen, "{} vs {bfs_seen}", sc.last_visited());
    }

    #[test]
    fn bibfs_same_vertex_does_no_work() {
        let g = from_edges(3, &[(0, 1)]);
        let mut sc = SearchScratch::new(3);
        assert!(bibfs_query(&g, &mut sc, 2, 2));
        assert_eq!(sc.last_visited(), 0);
    }

    #[test]
    fn bibfs_stops_when_small_side_exhausts() {
        // big forward region from 0, t=100 has a single in-neighbour that is
        // unreachable from 0
        let n = 102;
        let mut edges: Vec<_> = (0..99).map(|v| (v, v + 1)).collect();
        edges.push((101, 100));
        let g = from_edges(n, &edges);
        let mut sc = SearchScratch::new(n);
        assert!(!bibfs_query(&g, &mut sc, 0, 100));
        assert!(sc.last_visited() <= 6, "visited {}", sc.last_visited());
    }

    #[test]
    fn loops_and_parallels_are_harmless() {
        let g = from_edges(3, &[(0, 0), (0, 1), (0, 1), (1, 1)]);
        let mut sc = SearchScratch::new(3);
        for algo in StaticAlgo::ALL {
            assert!(algo.query(&g, &mut sc, 0, 1));
            assert!(!algo.query(&g, &mut sc, 0, 2));
        }
    }

    #[test]
    fn epoch_wraparound_resets_marks() {
        let g = from_edges(3, &[(0, 1)]);
        let mut sc = SearchScratch::new(3);
        sc.epoch = u32::MAX - 1;
        for _ in 0..4 {
            assert!(bfs_query(&g, &mut sc, 0, 1));
            assert!(!bibfs_query(&g, &mut sc, 1, 0));
        }
    }

    proptest! {
        #[test]
        fn all_queries_agree_with_closure(
            n in 1usize..60,
            raw in prop::collection::vec((0usize..60, 0usize..60), 0..120),
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = from_edges(n, &edges);
            let reach = closure(n, &edges);
            let mut sc = SearchScratch::new(n);
            for s in 0..n {
                for t in 0..n {
                    for algo in StaticAlgo::ALL {
                        prop_assert_eq!(algo.query(&g, &mut sc, s, t), reach[s][t], "{} {} {}", algo, s, t);
                    }
                }
            }
        }
    }
}
