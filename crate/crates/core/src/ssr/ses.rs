use super::{SsrEngine, NO_EDGE};
use crate::graph::{DiGraph, EdgeId, VertexId};

impl SsrEngine {
    pub(super) fn ses_insert(&mut self, g: &DiGraph, edge: EdgeId, from: VertexId, to: VertexId) -> u64 {
        let n = self.n() as u32;
        if self.level[from] >= n || self.level[from] + 1 >= self.level[to] {
            return 0;
        }
        self.level[to] = self.level[from] + 1;
        self.parent[to] = edge;
        self.queue.clear();
        self.queue.push_back(to);
        let mut work = 0;
        while let Some(x) = self.queue.pop_front() {
            work += 1;
            let next = self.level[x] + 1;
            for &(e, y) in g.neighbors(x, self.dir) {
                if next < self.level[y] {
                    self.level[y] = next;
                    self.parent[y] = e;
                    self.queue.push_back(y);
                }
            }
        }
        work
    }

    pub(super) fn ses_delete(&mut self, g: &DiGraph, edge: EdgeId, _from: VertexId, to: VertexId) -> u64 {
        if self.parent[to] != edge {
            return 0;
        }
        let n = self.n() as u32;
        let back = self.dir.flip();
        let epoch = self.next_epoch();
        let mut touched = std::mem::take(&mut self.list);
        touched.clear();
        self.queue.clear();
        self.parent[to] = NO_EDGE;

        let mut work = 0u64;
        let mut aborted = !self.ses_enqueue(to, epoch, &mut touched);
        while !aborted {
            let Some(w) = self.queue.pop_front() else {
                break;
            };
            self.in_queue[w] = false;
            work += 1;
            let lw = self.level[w];
            if lw >= n {
                continue;
            }
            let level = &self.level;
            let support = g
                .neighbors(w, back)
                .iter()
                .find(|&&(_, y)| level[y] < n && level[y] + 1 == lw);
            if let Some(&(e, _)) = support {
                self.parent[w] = e;
                continue;
            }

            self.raised[w] += 1;
            if self.raised[w] > self.params.beta {
                aborted = true;
                break;
            }
            self.parent[w] = NO_EDGE;
            if lw + 1 >= n {
                self.level[w] = n;
            } else {
                self.level[w] = lw + 1;
                if !self.ses_enqueue(w, epoch, &mut touched) {
                    aborted = true;
                    break;
                }
            }
            for &(e, c) in g.neighbors(w, self.dir) {
                if self.parent[c] == e && !self.ses_enqueue(c, epoch, &mut touched) {
                    aborted = true;
                    break;
                }
            }
        }

        for &v in &touched {
            self.raised[v] = 0;
        }
        self.list = touched;
        if aborted {
            while let Some(v) = self.queue.pop_front() {
                self.in_queue[v] = false;
            }
            self.stats.threshold_aborts += 1;
            work += self.recompute(g);
        }
        work
    }

    /// Queues `v` unless already queued. Returns `false` once the number of
    /// distinct vertices queued during this deletion exceeds the ratio cap.
    fn ses_enqueue(&mut self, v: VertexId, epoch: u32, touched: &mut Vec<VertexId>) -> bool {
        if self.in_queue[v] {
            return true;
        }
        self.in_queue[v] = true;
        self.queue.push_back(v);
        if self.stamp[v] != epoch {
            self.stamp[v] = epoch;
            touched.push(v);
            if self.exceeds_ratio(touched.len()) {
                return false;
            }
        }
        true
    }
}
