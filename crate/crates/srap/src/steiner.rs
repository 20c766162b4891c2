//! Gamma-restricted Hyper-SRAP generation: cheapest full component per
//! candidate ring set via Dreyfus-Wagner, and the gamma(eps) parameter rule.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::{Cost, HyperLink, LinkId, SrapInstance};

/// gamma(eps) = 2^ceil(1/eps). Saturates instead of overflowing; callers cap
/// it far below saturation anyway.
pub fn gamma_for(eps: f64) -> Result<u64, ParamError> {
    if !(eps > 0.0) {
        return Err(ParamError::NonPositiveEpsilon(eps));
    }
    let exp = (1.0 / eps).ceil();
    if exp >= 63.0 {
        return Ok(u64::MAX);
    }
    Ok(1u64 << exp as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    NonPositiveEpsilon(f64),
}

impl std::fmt::Display for ParamError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamError::NonPositiveEpsilon(e) => write!(f, "epsilon must be positive, got {e}"),
        }
    }
}

impl std::error::Error for ParamError {}

/// All-pairs shortest paths with deterministic tie-breaking, returning per
/// pair the edge-id path.
fn all_pairs(num_vertices: usize, edges: &[(usize, usize, Cost)]) -> Vec<Vec<Option<(Cost, Vec<usize>)>>> {
    let mut adj: Vec<Vec<(usize, Cost, usize)>> = vec![Vec::new(); num_vertices];
    for (id, &(u, v, c)) in edges.iter().enumerate() {
        adj[u].push((v, c, id));
        adj[v].push((u, c, id));
    }
    for a in adj.iter_mut() {
        a.sort_by_key(|&(w, c, id)| (w, c, id));
    }
    let mut out = vec![vec![None; num_vertices]; num_vertices];
    for s in 0..num_vertices {
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0 as Cost, vec![s], Vec::<usize>::new(), s)));
        while let Some(Reverse((cost, path, labels, v))) = heap.pop() {
            if out[s][v].is_some() {
                continue;
            }
            out[s][v] = Some((cost, labels.clone()));
            for &(w, c, label) in &adj[v] {
                if out[s][w].is_none() {
                    let mut p = path.clone();
                    p.push(w);
                    let mut lb = labels.clone();
                    lb.push(label);
                    heap.push(Reverse((cost + c, p, lb, w)));
                }
            }
        }
    }
    out
}

/// Minimum-cost connected subgraph spanning the terminal set, by the
/// Dreyfus-Wagner recurrences over terminal subsets. Returns the edge ids of
/// the tree, or `None` when the terminals cannot be connected.
pub fn dreyfus_wagner(
    num_vertices: usize,
    edges: &[(usize, usize, Cost)],
    terminals: &[usize],
) -> Option<(Cost, Vec<usize>)> {
    assert!(terminals.len() >= 2, "dreyfus_wagner needs at least two terminals");
    let dist = all_pairs(num_vertices, edges);
    let p = terminals.len() - 1;
    let q: &[usize] = &terminals[..p];
    let goal = terminals[p];
    const INF: Cost = Cost::MAX / 4;

    #[derive(Clone, Copy, PartialEq, Eq, Debug)]
    enum Choice {
        None,
        // Tree for a singleton terminal set is the path terminal -> v.
        Leaf,
        // dp[mask][v] from dp[mask][u] plus the u -> v path.
        Grow { from: usize },
        // dp[mask][v] = dp[sub][v] + dp[mask & !sub][v].
        Merge { sub: usize },
    }

    let full = 1usize << p;
    let mut dp = vec![vec![INF; num_vertices]; full];
    let mut choice = vec![vec![Choice::None; num_vertices]; full];
    for i in 0..p {
        for v in 0..num_vertices {
            if let Some((c, _)) = &dist[q[i]][v] {
                dp[1 << i][v] = *c;
                choice[1 << i][v] = Choice::Leaf;
            }
        }
    }
    for mask in 1..full {
        if mask.count_ones() >= 2 {
            // Merge step.
            for v in 0..num_vertices {
                let mut sub = (mask - 1) & mask;
                while sub > 0 {
                    let other = mask & !sub;
                    // Each unordered split is seen twice; harmless.
                    if dp[sub][v] < INF && dp[other][v] < INF {
                        let cand = dp[sub][v] + dp[other][v];
                        if cand < dp[mask][v] {
                            dp[mask][v] = cand;
                            choice[mask][v] = Choice::Merge { sub };
                        }
                    }
                    sub = (sub - 1) & mask;
                }
            }
        }
        // Grow step: relax through graph distances.
        let mut order: Vec<usize> = (0..num_vertices).collect();
        order.sort_by_key(|&v| dp[mask][v]);
        for u in order {
            if dp[mask][u] >= INF {
                continue;
            }
            for v in 0..num_vertices {
                if v == u {
                    continue;
                }
                if let Some((c, _)) = &dist[u][v] {
                    let cand = dp[mask][u] + c;
                    if cand < dp[mask][v] {
                        dp[mask][v] = cand;
                        choice[mask][v] = Choice::Grow { from: u };
                    }
                }
            }
        }
        // A single sorted relaxation pass is not exact in general; iterate to
        // a fixpoint (tiny graphs, converges in a few rounds).
        loop {
            let mut changed = false;
            for u in 0..num_vertices {
                if dp[mask][u] >= INF {
                    continue;
                }
                for v in 0..num_vertices {
                    if v == u {
                        continue;
                    }
                    if let Some((c, _)) = &dist[u][v] {
                        let cand = dp[mask][u] + c;
                        if cand < dp[mask][v] {
                            dp[mask][v] = cand;
                            choice[mask][v] = Choice::Grow { from: u };
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    let total = dp[full - 1][goal];
    if total >= INF {
        return None;
    }

    // Walk the choices back into an edge set.
    let mut tree: Vec<usize> = Vec::new();
    let mut stack = vec![(full - 1, goal)];
    while let Some((mask, v)) = stack.pop() {
        match choice[mask][v] {
            Choice::None => {}
            Choice::Leaf => {
                let i = mask.trailing_zeros() as usize;
                let (_, labels) = dist[q[i]][v].as_ref().unwrap();
                tree.extend_from_slice(labels);
            }
            Choice::Grow { from } => {
                let (_, labels) = dist[from][v].as_ref().unwrap();
                tree.extend_from_slice(labels);
                stack.push((mask, from));
            }
            Choice::Merge { sub } => {
                stack.push((sub, v));
                stack.push((mask & !sub, v));
            }
        }
    }
    tree.sort_unstable();
    tree.dedup();

    // The reconstructed set must connect the terminals at exactly the dp cost.
    let set_cost: Cost = tree.iter().map(|&i| edges[i].2).sum();
    debug_assert_eq!(set_cost, total, "reconstruction cost mismatch");
    Some((total, tree))
}

/// A gamma-restricted Hyper-SRAP instance: every candidate ring set priced at
/// its cheapest full component.
#[derive(Debug, Clone)]
pub struct HyperSrapInstance {
    pub base: SrapInstance,
    pub hyperlinks: Vec<HyperLink>,
    pub gamma: u32,
}

/// All size-k subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..=n.saturating_sub(k) {
            cur.push(v);
            rec(v + 1, n, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Price every ring-vertex subset of size 2..=gamma by Dreyfus-Wagner on the
/// subset plus the outside vertices, keeping the connectable ones.
pub fn generate_hyperlinks(inst: &SrapInstance, gamma: u32) -> HyperSrapInstance {
    let mut hyperlinks = Vec::new();
    let max_size = (gamma as usize).min(inst.n);
    for size in 2..=max_size {
        for combo in combinations(inst.n, size) {
            if let Some(h) = price_component(inst, &combo) {
                hyperlinks.push(h);
            }
        }
    }
    HyperSrapInstance { base: inst.clone(), hyperlinks, gamma }
}

/// Cheapest full component joining `a`: Dreyfus-Wagner on the graph induced
/// by `a` and the outside vertices (other ring vertices removed).
pub fn price_component(inst: &SrapInstance, a: &[usize]) -> Option<HyperLink> {
    let allowed = |v: usize| -> bool { v >= inst.n || a.contains(&v) };
    // Compact the vertex ids for the restricted graph.
    let verts: Vec<usize> = (0..inst.num_vertices()).filter(|&v| allowed(v)).collect();
    let index_of = |v: usize| verts.binary_search(&v).unwrap();
    let mut edges = Vec::new();
    let mut edge_ids: Vec<LinkId> = Vec::new();
    for (id, l) in inst.links.iter().enumerate() {
        if allowed(l.u) && allowed(l.v) {
            edges.push((index_of(l.u), index_of(l.v), l.cost));
            edge_ids.push(id);
        }
    }
    let terminals: Vec<usize> = a.iter().map(|&v| index_of(v)).collect();
    let (cost, tree) = dreyfus_wagner(verts.len(), &edges, &terminals)?;
    let realization: Vec<LinkId> = tree.iter().map(|&i| edge_ids[i]).collect();
    Some(HyperLink::new(a.to_vec(), cost, Some(realization)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingRealization;

impl std::fmt::Display for MissingRealization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "hyper-link has no realization tree")
    }
}

impl std::error::Error for MissingRealization {}

/// Union of the realization trees of a hyper-link solution, as original links.
pub fn realize_solution(sol: &[HyperLink]) -> Result<Vec<LinkId>, MissingRealization> {
    let mut out = Vec::new();
    for h in sol {
        let r = h.realization.as_ref().ok_or(MissingRealization)?;
        out.extend_from_slice(r);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{r4, r4s};
    use crate::model::Link;
    use crate::oracle::{steiner_tree_bruteforce, OracleBudget};

    #[test]
    fn gamma_formula() {
        assert_eq!(gamma_for(1.0).unwrap(), 2);
        assert_eq!(gamma_for(0.5).unwrap(), 4);
        assert_eq!(gamma_for(0.3707).unwrap(), 8);
        assert!(gamma_for(0.0).is_err());
        assert!(gamma_for(-1.0).is_err());
    }

    #[test]
    fn dw_star() {
        // x=3 joined to 0,1,2 by unit edges.
        let edges = vec![(3, 0, 1), (3, 1, 1), (3, 2, 1)];
        let (cost, tree) = dreyfus_wagner(4, &edges, &[0, 1, 2]).unwrap();
        assert_eq!(cost, 3);
        assert_eq!(tree, vec![0, 1, 2]);
    }

    #[test]
    fn dw_two_terminals_is_shortest_path() {
        let edges = vec![(0, 1, 5), (0, 2, 1), (2, 1, 1)];
        let (cost, tree) = dreyfus_wagner(3, &edges, &[0, 1]).unwrap();
        assert_eq!(cost, 2);
        assert_eq!(tree, vec![1, 2]);
    }

    #[test]
    fn dw_disconnected() {
        let edges = vec![(0, 1, 1)];
        assert_eq!(dreyfus_wagner(3, &edges, &[0, 2]), None);
    }

    #[test]
    fn dw_matches_bruteforce_on_random_graphs() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let budget = OracleBudget::default();
        for seed in 0..60u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..=8);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.5) {
                        edges.push((u, v, rng.gen_range(1..=10) as Cost));
                    }
                }
            }
            let t = rng.gen_range(2..=4.min(n));
            let mut terminals: Vec<usize> = (0..n).collect();
            terminals.shuffle(&mut rng);
            terminals.truncate(t);
            terminals.sort_unstable();
            let dw = dreyfus_wagner(n, &edges, &terminals);
            let bf = steiner_tree_bruteforce(n, &edges, &terminals, &budget).unwrap();
            match (dw, bf) {
                (None, None) => {}
                (Some((c1, _)), Some((c2, _))) => {
                    assert_eq!(c1, c2, "cost mismatch on seed {seed}");
                }
                (a, b) => panic!("existence mismatch on seed {seed}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn hyperlinks_on_r4() {
        let inst = r4();
        let hi = generate_hyperlinks(&inst, 2);
        let sets: Vec<(Vec<usize>, Cost)> =
            hi.hyperlinks.iter().map(|h| (h.vertices.clone(), h.cost)).collect();
        assert_eq!(sets, vec![(vec![0, 2], 1), (vec![1, 3], 1)]);
    }

    #[test]
    fn hyperlinks_on_r4s_allow_steiner_ring_vertices() {
        let inst = r4s();
        let hi = generate_hyperlinks(&inst, 2);
        let sets: Vec<Vec<usize>> = hi.hyperlinks.iter().map(|h| h.vertices.clone()).collect();
        // Vertex 2 is a Steiner ring vertex but still a candidate member.
        assert_eq!(sets, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn hyperlinks_complete_graph_prices_all_subsets() {
        // Dense links: every pair of a 4-ring directly linked.
        let links = vec![
            Link { u: 0, v: 1, cost: 1 },
            Link { u: 0, v: 2, cost: 1 },
            Link { u: 0, v: 3, cost: 1 },
            Link { u: 1, v: 2, cost: 1 },
            Link { u: 1, v: 3, cost: 1 },
            Link { u: 2, v: 3, cost: 1 },
        ];
        let inst = SrapInstance::build(4, 0, &[0, 1, 2, 3], links).unwrap();
        let hi = generate_hyperlinks(&inst, 10);
        // C(4,2) + C(4,3) + C(4,4) = 6 + 4 + 1.
        assert_eq!(hi.hyperlinks.len(), 11);
    }

    #[test]
    fn pair_pricing_equals_restricted_shortest_path() {
        // Path 0 - x - 1 with x outside; pair {0,1} costs 2 through x.
        let inst = SrapInstance::build(
            3,
            1,
            &[0, 1],
            vec![Link { u: 0, v: 3, cost: 1 }, Link { u: 3, v: 1, cost: 1 }],
        )
        .unwrap();
        let h = price_component(&inst, &[0, 1]).unwrap();
        assert_eq!(h.cost, 2);
        assert_eq!(h.realization, Some(vec![0, 1]));
    }

    #[test]
    fn realize_unions_without_duplicates() {
        let a = HyperLink::new(vec![0, 1], 2, Some(vec![0, 1]));
        let b = HyperLink::new(vec![1, 2], 2, Some(vec![1, 2]));
        assert_eq!(realize_solution(&[a, b]).unwrap(), vec![0, 1, 2]);
        let c = HyperLink::new(vec![1, 2], 2, None);
        assert!(realize_solution(&[c]).is_err());
    }
}
