//! Deterministic pseudo-random instance generation. Every generated instance
//! embeds a hidden feasible link set, so the oracle never reports infeasible.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::model::{Cost, Link, SrapInstance};

#[derive(Debug, Clone)]
pub struct SrapGenParams {
    pub n: usize,
    pub m: usize,
    pub links: usize,
    /// Force R = V(H); needed by the local search.
    pub all_terminals: bool,
    pub max_cost: Cost,
}

impl Default for SrapGenParams {
    fn default() -> Self {
        SrapGenParams { n: 8, m: 2, links: 12, all_terminals: false, max_cost: 20 }
    }
}

/// A feasible SRAP instance: terminals always include the root, and a chain
/// of links spanning all terminals (sometimes routed through outside
/// vertices) guarantees every dangerous cut is covered.
pub fn gen_srap(params: &SrapGenParams, seed: u64) -> SrapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n.max(3);
    let m = params.m;
    let mut terminal_set: Vec<usize> = vec![0];
    for v in 1..n {
        if params.all_terminals || rng.gen_bool(0.6) {
            terminal_set.push(v);
        }
    }
    if terminal_set.len() < 2 {
        terminal_set.push(rng.gen_range(1..n));
    }

    let mut links: Vec<Link> = Vec::new();
    let mut used = std::collections::HashSet::new();
    let push = |links: &mut Vec<Link>, used: &mut std::collections::HashSet<(usize, usize)>, u: usize, v: usize, cost: Cost| {
        if u == v {
            return;
        }
        let key = (u.min(v), u.max(v));
        if used.insert(key) {
            links.push(Link { u: key.0, v: key.1, cost });
        }
    };

    // Hidden feasible chain over the terminals, occasionally routed through
    // an outside vertex.
    let mut order = terminal_set.clone();
    order.shuffle(&mut rng);
    for w in order.windows(2) {
        let cost = rng.gen_range(1..=params.max_cost);
        if m > 0 && rng.gen_bool(0.3) {
            let x = n + rng.gen_range(0..m);
            let half = cost / 2 + 1;
            push(&mut links, &mut used, w[0], x, half);
            push(&mut links, &mut used, x, w[1], cost - cost / 2);
        } else {
            push(&mut links, &mut used, w[0], w[1], cost);
        }
    }

    // Random filler links up to the requested count.
    let mut attempts = 0;
    while links.len() < params.links && attempts < 10 * params.links + 100 {
        attempts += 1;
        let u = rng.gen_range(0..n + m);
        let v = rng.gen_range(0..n + m);
        let cost = rng.gen_range(1..=params.max_cost);
        push(&mut links, &mut used, u, v, cost);
    }

    SrapInstance::build(n, m, &terminal_set, links).expect("generated instance is valid")
}
