#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::{Path, PathBuf};

use dyntc::instance::{Instance, InstanceMeta, OpKind, Operation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance with loops, parallels and deletions drawn from the live
/// edge multiset. Densities vary from sparse to dense.
pub fn fuzz_instance(seed: u64, max_n: usize, max_ops: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let n = rng.gen_range(1..=max_n);
    let density = [0.3, 0.8, 1.5, 3.0, 6.0][rng.gen_range(0..5)];
    let m0 = (density * n as f64) as usize;
    let mut live: Vec<(usize, usize)> = Vec::new();
    let mut initial_edges = Vec::new();
    for _ in 0..m0 {
        let e = (rng.gen_range(0..n), rng.gen_range(0..n));
        initial_edges.push(e);
        live.push(e);
    }
    let ops_len = rng.gen_range(0..=max_ops);
    let (p_add, p_del) = [(0.33, 0.33), (0.5, 0.2), (0.2, 0.5), (0.1, 0.1)][rng.gen_range(0..4)];
    let mut ops = Vec::with_capacity(ops_len);
    while ops.len() < ops_len {
        let r: f64 = rng.gen();
        if r < p_add {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            live.push((a, b));
            ops.push(Operation::add(a, b));
        } else if r < p_add + p_del && !live.is_empty() {
            let (a, b) = live.swap_remove(rng.gen_range(0..live.len()));
            ops.push(Operation::delete(a, b));
        } else {
            ops.push(Operation::query(rng.gen_range(0..n), rng.gen_range(0..n)));
        }
    }
    Instance {
        n,
        initial_edges,
        ops,
        meta: InstanceMeta {
            name: Some(format!("fuzz-{seed}")),
            seed: Some(seed),
            params: None,
        },
    }
}

/// Query answers computed from a plain edge multiset and a fresh BFS per query.
pub fn oracle_answers(inst: &Instance) -> Vec<bool> {
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for &e in &inst.initial_edges {
        *edges.entry(e).or_default() += 1;
    }
    let mut answers = Vec::new();
    for op in &inst.ops {
        let key = (op.a, op.b);
        match op.kind {
            OpKind::Add => *edges.entry(key).or_default() += 1,
            OpKind::Delete => {
                let c = edges.get_mut(&key).expect("delete of live edge");
                *c -= 1;
                if *c == 0 {
                    edges.remove(&key);
                }
            }
            OpKind::Query => answers.push(reaches(inst.n, &edges, op.a, op.b)),
        }
    }
    answers
}

fn reaches(n: usize, edges: &HashMap<(usize, usize), usize>, s: usize, t: usize) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges.keys() {
        adj[u].push(v);
    }
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        if x == t {
            return true;
        }
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    false
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}
