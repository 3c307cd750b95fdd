use super::Graph;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `k × k` four-neighbour lattice, vertex `r*k + c`, no wraparound.
pub fn make_lattice(k: usize) -> Result<Graph> {
    if k < 2 {
        return Err(Error::usage("lattice side must be at least 2"));
    }
    let mut edges = Vec::with_capacity(2 * k * (k - 1));
    for r in 0..k {
        for c in 0..k {
            let v = r * k + c;
            if c + 1 < k {
                edges.push((v, v + 1));
            }
            if r + 1 < k {
                edges.push((v, v + k));
            }
        }
    }
    Graph::new(k * k, edges)
}

/// Erdős–Rényi `G(n, p)`; deterministic in `seed`.
pub fn make_random_graph(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::usage(format!("edge probability {edge_prob} not in [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(edge_prob) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges)
}

/// Centre vertex 0 joined to leaves `1..=n_leaves`.
pub fn make_star(n_leaves: usize) -> Result<Graph> {
    if n_leaves == 0 {
        return Err(Error::usage("a star needs at least one leaf"));
    }
    Graph::new(n_leaves + 1, (1..=n_leaves).map(|l| (0, l)))
}

pub fn make_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::usage("a cycle needs at least 3 vertices"));
    }
    Graph::new(n, (0..n).map(|v| (v, (v + 1) % n)))
}

pub fn make_path(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::usage("a path needs at least one vertex"));
    }
    Graph::new(n, (1..n).map(|v| (v - 1, v)))
}
