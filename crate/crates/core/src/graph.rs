//! Dynamic directed multigraph with constant-time edge updates.
//!
//! Vertices are dense indices fixed at construction. Every edge is stored once
//! in the out-list of its tail and once in the in-list of its head; each list
//! entry carries the opposite endpoint so traversals never touch the edge table.
//! Removal swaps the last list entry into the vacated slot, which keeps updates
//! O(1) but makes iteration order depend on the mutation history.

use std::collections::HashMap;

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Orientation in which a graph is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Follow edges from tail to head.
    Forward,
    /// Follow edges from head to tail.
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("no edge ({tail}, {head}) to delete")]
    MissingEdge { tail: VertexId, head: VertexId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
}

#[derive(Debug, Clone, Copy)]
struct EdgeSlot {
    tail: VertexId,
    head: VertexId,
    out_pos: usize,
    in_pos: usize,
    live: bool,
}

/// Receives notifications after the graph has been mutated.
///
/// Deletion notifications fire after the edge has left the adjacency lists, so
/// an observer scanning `g` never sees the removed edge.
pub trait UpdateObserver {
    fn on_insert(&mut self, g: &DiGraph, edge: EdgeId, tail: VertexId, head: VertexId);
    fn on_delete(&mut self, g: &DiGraph, edge: EdgeId, tail: VertexId, head: VertexId);
}

#[derive(Debug, Clone, Default)]
pub struct DiGraph {
    slots: Vec<EdgeSlot>,
    free: Vec<EdgeId>,
    out_adj: Vec<Vec<(EdgeId, VertexId)>>,
    in_adj: Vec<Vec<(EdgeId, VertexId)>>,
    // live ids per ordered pair, most recent last
    parallels: HashMap<(VertexId, VertexId), Vec<EdgeId>>,
    m: usize,
    adjacency_writes: u64,
}

impl DiGraph {
    pub fn new(n: usize) -> Self {
        DiGraph {
            slots: Vec::new(),
            free: Vec::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            parallels: HashMap::new(),
            m: 0,
            adjacency_writes: 0,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    /// m / n, or 0 for the empty graph.
    pub fn density(&self) -> f64 {
        if self.vertex_count() == 0 {
            0.0
        } else {
            self.m as f64 / self.vertex_count() as f64
        }
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj[v].len()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_adj[v].len()
    }

    pub fn is_isolated(&self, v: VertexId) -> bool {
        self.out_adj[v].is_empty() && self.in_adj[v].is_empty()
    }

    /// Total number of adjacency-list entries written or moved since creation.
    pub fn adjacency_writes(&self) -> u64 {
        self.adjacency_writes
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.vertex_count(),
            })
        }
    }

    pub fn edge(&self, id: EdgeId) -> Option<Edge> {
        self.slots.get(id).filter(|s| s.live).map(|s| Edge {
            id,
            tail: s.tail,
            head: s.head,
        })
    }

    pub fn insert_edge(&mut self, tail: VertexId, head: VertexId) -> Result<EdgeId, GraphError> {
        self.check_vertex(tail)?;
        self.check_vertex(head)?;
        let slot = EdgeSlot {
            tail,
            head,
            out_pos: self.out_adj[tail].len(),
            in_pos: self.in_adj[head].len(),
            live: true,
        };
        let id = match self.free.pop() {
            Some(id) => {
                self.slots[id] = slot;
                id
            }
            None => {
                self.slots.push(slot);
                self.slots.len() - 1
            }
        };
        self.out_adj[tail].push((id, head));
        self.in_adj[head].push((id, tail));
        self.adjacency_writes += 2;
        self.parallels.entry((tail, head)).or_default().push(id);
        self.m += 1;
        Ok(id)
    }

    /// Removes the most recently inserted live edge `(tail, head)`.
    pub fn delete_edge(&mut self, tail: VertexId, head: VertexId) -> Result<EdgeId, GraphError> {
        self.check_vertex(tail)?;
        self.check_vertex(head)?;
        let missing = GraphError::MissingEdge { tail, head };
        let ids = self.parallels.get_mut(&(tail, head)).ok_or(missing.clone())?;
        let id = ids.pop().ok_or(missing)?;
        if ids.is_empty() {
            self.parallels.remove(&(tail, head));
        }

        let slot = self.slots[id];
        let out = &mut self.out_adj[tail];
        out.swap_remove(slot.out_pos);
        if let Some(&(moved, _)) = out.get(slot.out_pos) {
            self.slots[moved].out_pos = slot.out_pos;
            self.adjacency_writes += 1;
        }
        let inc = &mut self.in_adj[head];
        inc.swap_remove(slot.in_pos);
        if let Some(&(moved, _)) = inc.get(slot.in_pos) {
            self.slots[moved].in_pos = slot.in_pos;
            self.adjacency_writes += 1;
        }
        self.adjacency_writes += 2;

        self.slots[id].live = false;
        self.free.push(id);
        self.m -= 1;
        Ok(id)
    }

    /// Inserts an edge and notifies each observer in order.
    pub fn insert_edge_notify(
        &mut self,
        tail: VertexId,
        head: VertexId,
        observers: &mut [&mut dyn UpdateObserver],
    ) -> Result<EdgeId, GraphError> {
        let id = self.insert_edge(tail, head)?;
        for obs in observers.iter_mut() {
            obs.on_insert(self, id, tail, head);
        }
        Ok(id)
    }

    pub fn delete_edge_notify(
        &mut self,
        tail: VertexId,
        head: VertexId,
        observers: &mut [&mut dyn UpdateObserver],
    ) -> Result<EdgeId, GraphError> {
        let id = self.delete_edge(tail, head)?;
        for obs in observers.iter_mut() {
            obs.on_delete(self, id, tail, head);
        }
        Ok(id)
    }

    /// `(edge, opposite endpoint)` pairs of `v`: out-edges for `Forward`,
    /// in-edges for `Reverse`.
    #[inline]
    pub fn neighbors(&self, v: VertexId, dir: Direction) -> &[(EdgeId, VertexId)] {
        match dir {
            Direction::Forward => &self.out_adj[v],
            Direction::Reverse => &self.in_adj[v],
        }
    }

    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.out_adj[v]
    }

    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.in_adj[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(tail, list)| {
            list.iter().map(move |&(id, head)| Edge { id, tail, head })
        })
    }

    /// Checks every structural invariant. Intended for tests on small graphs.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.vertex_count();
        if self.in_adj.len() != n {
            return Err("in/out adjacency length mismatch".into());
        }
        let out_total: usize = self.out_adj.iter().map(Vec::len).sum();
        let in_total: usize = self.in_adj.iter().map(Vec::len).sum();
        if out_total != self.m || in_total != self.m {
            return Err(format!("m = {} but out total {out_total}, in total {in_total}", self.m));
        }
        let mut seen_out = vec![0u8; self.slots.len()];
        let mut seen_in = vec![0u8; self.slots.len()];
        for (v, list) in self.out_adj.iter().enumerate() {
            for (pos, &(id, head)) in list.iter().enumerate() {
                let s = self.slots.get(id).ok_or(format!("unknown edge {id}"))?;
                if !s.live || s.tail != v || s.head != head || s.out_pos != pos {
                    return Err(format!("out entry {id} at {v}[{pos}] inconsistent"));
                }
                seen_out[id] += 1;
            }
        }
        for (v, list) in self.in_adj.iter().enumerate() {
            for (pos, &(id, tail)) in list.iter().enumerate() {
                let s = self.slots.get(id).ok_or(format!("unknown edge {id}"))?;
                if !s.live || s.head != v || s.tail != tail || s.in_pos != pos {
                    return Err(format!("in entry {id} at {v}[{pos}] inconsistent"));
                }
                seen_in[id] += 1;
            }
        }
        let mut live = 0;
        for (id, s) in self.slots.iter().enumerate() {
            let expected = u8::from(s.live);
            if seen_out[id] != expected || seen_in[id] != expected {
                return Err(format!("edge {id} listed {}/{} times", seen_out[id], seen_in[id]));
            }
            live += usize::from(s.live);
        }
        if live != self.m {
            return Err(format!("{live} live slots but m = {}", self.m));
        }
        let indexed: usize = self.parallels.values().map(Vec::len).sum();
        if indexed != self.m {
            return Err(format!("pair index holds {indexed} ids but m = {}", self.m));
        }
        Ok(())
    }
}

/// Strongly connected components: a component id per vertex plus sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub component: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl SccDecomposition {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Members of every component, each list sorted by vertex id.
    pub fn members(&self) -> Vec<Vec<VertexId>> {
        let mut out: Vec<Vec<VertexId>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &c) in self.component.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

const UNVISITED: usize = usize::MAX;

/// Iterative Tarjan. Components are numbered in the order they complete, which
/// is a reverse topological order of the condensation.
pub fn tarjan_scc(g: &DiGraph) -> SccDecomposition {
    let n = g.vertex_count();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNVISITED; n];
    let mut sizes = Vec::new();
    let mut stack: Vec<VertexId> = Vec::new();
    // (vertex, next out-edge position)
    let mut call: Vec<(VertexId, usize)> = Vec::new();
    let mut next_index = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            let out = g.out_neighbors(v);
            if frame.1 < out.len() {
                let w = out[frame.1].1;
                frame.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }

            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                let id = sizes.len();
                let mut size = 0;
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component[w] = id;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                sizes.push(size);
            }
        }
    }

    SccDecomposition { component, sizes }
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

    fn reach_matrix(g: &DiGraph) -> Vec<Vec<bool>> {
        let n = g.vertex_count();
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                seen[s] = true;
                let mut queue = std::collections::VecDeque::from([s]);
                while let Some(x) = queue.pop_front() {
                    for &(_, y) in g.out_neighbors(x) {
                        if !seen[y] {
                            seen[y] = true;
                            queue.push_back(y);
                        }
                    }
                }
                seen
            })
            .collect()
    }

    #[test]
    fn empty_and_isolated() {
        let g = DiGraph::new(0);
        assert_eq!((g.vertex_count(), g.edge_count()), (0, 0));
        assert_eq!(g.density(), 0.0);

        let g = DiGraph::new(5);
        assert!((0..5).all(|v| g.is_isolated(v) && g.out_degree(v) == 0 && g.in_degree(v) == 0));

        let g = DiGraph::new(100_000);
        assert_eq!(g.density(), 0.0);
    }

    #[test]
    fn insert_loops_and_parallels() {
        let mut g = DiGraph::new(2);
        g.insert_edge(0, 1).unwrap();
        assert_eq!((g.edge_count(), g.out_degree(0), g.in_degree(1)), (1, 1, 1));

        g.insert_edge(0, 0).unwrap();
        assert_eq!((g.out_degree(0), g.in_degree(0)), (2, 1));

        let a = g.insert_edge(0, 1).unwrap();
        let b = g.insert_edge(0, 1).unwrap();
        assert_ne!(a, b);
        assert_eq!(g.edge_count(), 4);
        g.audit().unwrap();
    }

    #[test]
    fn insert_out_of_range() {
        let mut g = DiGraph::new(2);
        assert_eq!(
            g.insert_edge(0, 2),
            Err(GraphError::VertexOutOfRange { vertex: 2, n: 2 })
        );
    }

    #[test]
    fn delete_variants() {
        let mut g = from_edges(2, &[(0, 1)]);
        g.delete_edge(0, 1).unwrap();
        assert_eq!(g.edge_count(), 0);

        let mut g = DiGraph::new(2);
        let _first = g.insert_edge(0, 1).unwrap();
        let second = g.insert_edge(0, 1).unwrap();
        assert_eq!(g.delete_edge(0, 1).unwrap(), second);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.out_degree(0), 1);

        let mut g = from_edges(2, &[(0, 1)]);
        assert_eq!(g.delete_edge(1, 0), Err(GraphError::MissingEdge { tail: 1, head: 0 }));
        g.audit().unwrap();
    }

    #[test]
    fn neighbor_directions() {
        let g = from_edges(3, &[(0, 1), (0, 2)]);
        let mut fwd: Vec<_> = g.neighbors(0, Direction::Forward).iter().map(|p| p.1).collect();
        fwd.sort();
        assert_eq!(fwd, vec![1, 2]);
        let rev: Vec<_> = g.neighbors(1, Direction::Reverse).iter().map(|p| p.1).collect();
        assert_eq!(rev, vec![0]);
        assert!(g.neighbors(2, Direction::Forward).is_empty());
    }

    #[test]
    fn observers_see_post_mutation_state() {
        struct Probe(Vec<(bool, usize)>);
        impl UpdateObserver for Probe {
            fn on_insert(&mut self, g: &DiGraph, _: EdgeId, _: VertexId, _: VertexId) {
                self.0.push((true, g.edge_count()));
            }
            fn on_delete(&mut self, g: &DiGraph, e: EdgeId, _: VertexId, _: VertexId) {
                assert!(g.edge(e).is_none());
                self.0.push((false, g.edge_count()));
            }
        }
        let mut g = DiGraph::new(2);
        let mut probe = Probe(Vec::new());
        g.insert_edge_notify(0, 1, &mut [&mut probe]).unwrap();
        g.delete_edge_notify(0, 1, &mut [&mut probe]).unwrap();
        assert_eq!(probe.0, vec![(true, 1), (false, 0)]);
    }

    #[test]
    fn scc_small_cases() {
        let g = from_edges(3, &[(0, 1), (1, 0), (1, 2)]);
        let scc = tarjan_scc(&g);
        assert_eq!(scc.count(), 2);
        assert_eq!(scc.component[0], scc.component[1]);
        assert_ne!(scc.component[0], scc.component[2]);

        let g = from_edges(3, &[(0, 1), (1, 2)]);
        let scc = tarjan_scc(&g);
        assert_eq!(scc.sizes, vec![1, 1, 1]);
    }

    #[test]
    fn scc_deep_path_does_not_overflow() {
        let n = 1_000_000;
        let mut g = DiGraph::new(n);
        for v in 0..n - 1 {
            g.insert_edge(v, v + 1).unwrap();
        }
        g.insert_edge(n - 1, 0).unwrap();
        let scc = tarjan_scc(&g);
        assert_eq!(scc.sizes, vec![n]);
    }

    #[test]
    fn amortized_adjacency_work() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 1000;
        let mut g = DiGraph::new(n);
        let mut live: Vec<(usize, usize)> = Vec::new();
        let ops = 1_000_000u64;
        for _ in 0..ops {
            if live.is_empty() || rng.gen_bool(0.5) {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                g.insert_edge(u, v).unwrap();
                live.push((u, v));
            } else {
                let i = rng.gen_range(0..live.len());
                let (u, v) = live.swap_remove(i);
                g.delete_edge(u, v).unwrap();
            }
        }
        // insertion writes 2 entries, deletion at most 4
        assert!(g.adjacency_writes() <= 4 * ops);
        g.audit().unwrap();
    }

    proptest! {
        #[test]
        fn interleaved_updates_keep_invariants(
            n in 1usize..12,
            script in prop::collection::vec((any::<bool>(), 0usize..12, 0usize..12), 0..200),
        ) {
            let mut g = DiGraph::new(n);
            let mut live: Vec<(usize, usize)> = Vec::new();
            let (mut inserted, mut deleted) = (0usize, 0usize);
            for (ins, a, b) in script {
                let (u, v) = (a % n, b % n);
                if ins || live.is_empty() {
                    g.insert_edge(u, v).unwrap();
                    live.push((u, v));
                    inserted += 1;
                } else {
                    let (u, v) = live.swap_remove(a % live.len());
                    g.delete_edge(u, v).unwrap();
                    deleted += 1;
                }
                prop_assert!(g.audit().is_ok(), "{:?}", g.audit());
            }
            prop_assert_eq!(g.edge_count(), inserted - deleted);
        }

        #[test]
        fn scc_matches_mutual_reachability(
            n in 1usize..60,
            raw in prop::collection::vec((0usize..60, 0usize..60), 0..150),
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = from_edges(n, &edges);
            let reach = reach_matrix(&g);
            let scc = tarjan_scc(&g);
            for a in 0..n {
                for b in 0..n {
                    let mutual = reach[a][b] && reach[b][a];
                    prop_assert_eq!(scc.component[a] == scc.component[b], mutual);
                }
            }
            prop_assert_eq!(scc.sizes.iter().sum::<usize>(), n);
        }
    }
}
