use super::{SsrEngine, NO_EDGE};
use crate::graph::{DiGraph, EdgeId, VertexId};

impl SsrEngine {
    pub(super) fn si_insert(&mut self, g: &DiGraph, edge: EdgeId, from: VertexId, to: VertexId) -> u64 {
        if self.reachable[to] || !self.reachable[from] {
            return 0;
        }
        self.reachable[to] = true;
        self.parent[to] = edge;
        self.queue.clear();
        self.queue.push_back(to);
        self.extend_from_queue(g)
    }

    pub(super) fn si_delete(&mut self, g: &DiGraph, edge: EdgeId, _from: VertexId, to: VertexId) -> u64 {
        if self.parent[to] != edge {
            return 0;
        }

        // detached subtree, found through children whose parent edge leaves x
        let mut detached = std::mem::take(&mut self.list);
        detached.clear();
        detached.push(to);
        let mut i = 0;
        let mut work = 0u64;
        while i < detached.len() {
            if self.exceeds_ratio(detached.len()) {
                self.list = detached;
                self.stats.threshold_aborts += 1;
                return work + self.recompute(g);
            }
            let x = detached[i];
            i += 1;
            work += 1;
            for &(e, y) in g.neighbors(x, self.dir) {
                if self.parent[y] == e {
                    detached.push(y);
                }
            }
        }

        for &x in &detached {
            self.reachable[x] = false;
            self.parent[x] = NO_EDGE;
        }

        // backward step: any surviving parent re-hangs x
        let back = self.dir.flip();
        self.queue.clear();
        for &x in &detached {
            work += 1;
            if let Some(&(e, _)) = g.neighbors(x, back).iter().find(|&&(_, y)| self.reachable[y]) {
                self.reachable[x] = true;
                self.parent[x] = e;
                self.queue.push_back(x);
            }
        }
        self.list = detached;
        work + self.extend_from_queue(g)
    }

    /// BFS from the queued vertices attaching every unreachable vertex met.
    fn extend_from_queue(&mut self, g: &DiGraph) -> u64 {
        let mut work = 0;
        while let Some(x) = self.queue.pop_front() {
            work += 1;
            for &(e, y) in g.neighbors(x, self.dir) {
                if !self.reachable[y] {
                    self.reachable[y] = true;
                    self.parent[y] = e;
                    self.queue.push_back(y);
                }
            }
        }
        work
    }
}
