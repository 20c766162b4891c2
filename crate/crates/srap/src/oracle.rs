//! Brute-force exact solvers and definitional checkers.
//!
//! Everything here recomputes from first principles and stays independent of
//! the solver implementation paths it is used to check: drop sets are derived
//! from the responsibility definition, ratios by subset enumeration, Steiner
//! trees by vertex-superset enumeration.

use std::fmt;
use std::time::{Duration, Instant};

use crate::dsu::UnionFind;
use crate::feasibility::max_flow;
use crate::model::{arc_enters, Cost, HyperLink, Interval, LinkId, Ratio, SrapInstance};

#[derive(Debug, Clone)]
pub struct OracleBudget {
    /// Max link count for exhaustive subset enumeration.
    pub max_links: usize,
    /// Max vertex count for Steiner-tree enumeration.
    pub max_steiner_vertices: usize,
    /// Wall-clock cap per oracle call.
    pub time_cap: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_links: 20,
            max_steiner_vertices: 9,
            time_cap: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    BudgetExceeded { what: &'static str, have: usize, max: usize },
    TimeCapExceeded,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { what, have, max } => {
                write!(f, "oracle budget exceeded: {have} {what} > {max}")
            }
            OracleError::TimeCapExceeded => write!(f, "oracle time cap exceeded"),
        }
    }
}

impl std::error::Error for OracleError {}

/// Coverage feasibility of a link subset: every dangerous ring-cut is
/// straddled by the ring vertices of some connected component of the chosen
/// links. Equivalent to 3-edge-connectivity of ring+links on terminals; the
/// equivalence is asserted against max-flow in tests and on final witnesses.
pub fn links_cover_all_cuts(inst: &SrapInstance, chosen: &[LinkId]) -> bool {
    let cuts = inst.dangerous_cuts();
    if cuts.is_empty() {
        return true;
    }
    let mut uf = UnionFind::new(inst.num_vertices());
    for &id in chosen {
        let l = inst.links[id];
        uf.union(l.u, l.v);
    }
    let mut span: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for v in 0..inst.n {
        let root = uf.find(v);
        span.entry(root).or_default().push(v);
    }
    'cuts: for &cut in &cuts {
        for verts in span.values() {
            if verts.len() < 2 {
                continue;
            }
            let inside = verts.iter().any(|&v| cut.contains(v));
            let outside = verts[0] < cut.lo || *verts.last().unwrap() > cut.hi;
            if inside && outside {
                continue 'cuts;
            }
        }
        return false;
    }
    true
}

/// Exhaustive minimum-cost SRAP solution, or `None` when infeasible.
///
/// Branch and bound over links sorted by cost; prunes on partial cost against
/// the incumbent and on unreachable coverage.
pub fn exact_srap(
    inst: &SrapInstance,
    budget: &OracleBudget,
) -> Result<Option<(Cost, Vec<LinkId>)>, OracleError> {
    if inst.links.len() > budget.max_links {
        return Err(OracleError::BudgetExceeded {
            what: "links",
            have: inst.links.len(),
            max: budget.max_links,
        });
    }
    if !links_cover_all_cuts(inst, &(0..inst.links.len()).collect::<Vec<_>>()) {
        return Ok(None);
    }
    let mut order: Vec<LinkId> = (0..inst.links.len()).collect();
    order.sort_by_key(|&i| (inst.links[i].cost, i));
    let deadline = Instant::now() + budget.time_cap;

    struct Search<'a> {
        inst: &'a SrapInstance,
        order: &'a [LinkId],
        best_cost: Cost,
        best: Option<Vec<LinkId>>,
        deadline: Instant,
        ticks: u32,
    }
    impl Search<'_> {
        fn run(
            &mut self,
            idx: usize,
            chosen: &mut Vec<LinkId>,
            cost: Cost,
        ) -> Result<(), OracleError> {
            self.ticks = self.ticks.wrapping_add(1);
            if self.ticks % 4096 == 0 && Instant::now() > self.deadline {
                return Err(OracleError::TimeCapExceeded);
            }
            if cost >= self.best_cost {
                return Ok(());
            }
            if links_cover_all_cuts(self.inst, chosen) {
                self.best_cost = cost;
                self.best = Some(chosen.clone());
                return Ok(());
            }
            if idx == self.order.len() {
                return Ok(());
            }
            // Coverage must still be reachable with the remaining links.
            let mut all: Vec<LinkId> = chosen.clone();
            all.extend_from_slice(&self.order[idx..]);
            if !links_cover_all_cuts(self.inst, &all) {
                return Ok(());
            }
            let id = self.order[idx];
            chosen.push(id);
            self.run(idx + 1, chosen, cost + self.inst.links[id].cost)?;
            chosen.pop();
            self.run(idx + 1, chosen, cost)
        }
    }
    let mut search =
        Search { inst, order: &order, best_cost: Cost::MAX, best: None, deadline, ticks: 0 };
    search.run(0, &mut Vec::new(), 0)?;
    Ok(search.best.map(|mut ids| {
        ids.sort_unstable();
        (search.best_cost, ids)
    }))
}

/// Exhaustive minimum-cost augmentation making `edges` plus chosen links
/// (k+1)-edge-connected on the terminals. Plain graph data so the oracle does
/// not depend on reduction types.
pub fn exact_scap(
    num_vertices: usize,
    edges: &[(usize, usize)],
    terminals: &[usize],
    links: &[(usize, usize, Cost)],
    k: u64,
    budget: &OracleBudget,
) -> Result<Option<(Cost, Vec<usize>)>, OracleError> {
    if links.len() > budget.max_links {
        return Err(OracleError::BudgetExceeded {
            what: "links",
            have: links.len(),
            max: budget.max_links,
        });
    }
    if terminals.len() < 2 {
        return Ok(Some((0, Vec::new())));
    }
    // lambda(u, w) >= min(lambda(u, t0), lambda(t0, w)), so checking every
    // terminal against a fixed hub certifies all pairs.
    let hub = terminals[0];
    let feasible = |chosen: &[usize]| -> bool {
        let mut all: Vec<(usize, usize)> = edges.to_vec();
        for &i in chosen {
            all.push((links[i].0, links[i].1));
        }
        terminals[1..]
            .iter()
            .all(|&t| t == hub || max_flow(num_vertices, &all, hub, t) >= k + 1)
    };
    if !feasible(&(0..links.len()).collect::<Vec<_>>()) {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..links.len()).collect();
    order.sort_by_key(|&i| (links[i].2, i));
    let deadline = Instant::now() + budget.time_cap;

    #[allow(clippy::too_many_arguments)]
    fn run(
        order: &[usize],
        links: &[(usize, usize, Cost)],
        feasible: &dyn Fn(&[usize]) -> bool,
        idx: usize,
        chosen: &mut Vec<usize>,
        cost: Cost,
        best_cost: &mut Cost,
        best: &mut Option<Vec<usize>>,
        deadline: Instant,
    ) -> Result<(), OracleError> {
        if Instant::now() > deadline {
            return Err(OracleError::TimeCapExceeded);
        }
        if cost >= *best_cost {
            return Ok(());
        }
        if feasible(chosen) {
            *best_cost = cost;
            *best = Some(chosen.clone());
            return Ok(());
        }
        if idx == order.len() {
            return Ok(());
        }
        let mut all = chosen.clone();
        all.extend_from_slice(&order[idx..]);
        if !feasible(&all) {
            return Ok(());
        }
        let id = order[idx];
        chosen.push(id);
        run(order, links, feasible, idx + 1, chosen, cost + links[id].2, best_cost, best, deadline)?;
        chosen.pop();
        run(order, links, feasible, idx + 1, chosen, cost, best_cost, best, deadline)
    }

    let mut best_cost = Cost::MAX;
    let mut best = None;
    run(&order, links, &feasible, 0, &mut Vec::new(), 0, &mut best_cost, &mut best, deadline)?;
    Ok(best.map(|mut ids| {
        ids.sort_unstable();
        (best_cost, ids)
    }))
}

/// Responsibility pairs computed from the definition: arc (u, v) is
/// responsible for cut C iff it enters C and no arc on the root-to-u path
/// enters C.
pub fn responsibility_bruteforce(
    inst: &SrapInstance,
    f0: &[(usize, usize)],
) -> Vec<(Interval, usize)> {
    // parent[v] = tail of the arc entering v.
    let mut parent = vec![usize::MAX; inst.n];
    for &(t, h) in f0 {
        parent[h] = t;
    }
    let mut out = Vec::new();
    for &cut in &inst.dangerous_cuts() {
        for (i, &(t, h)) in f0.iter().enumerate() {
            if !arc_enters(t, h, cut) {
                continue;
            }
            let mut blocked = false;
            let mut v = t;
            while v != 0 && parent[v] != usize::MAX {
                let u = parent[v];
                if arc_enters(u, v, cut) {
                    blocked = true;
                    break;
                }
                v = u;
            }
            if !blocked {
                out.push((cut, i));
            }
        }
    }
    out
}

/// Definitional drop: arcs of `f0` all of whose responsible cuts are covered
/// by `k`, by full cut enumeration.
pub fn brute_force_drop(
    inst: &SrapInstance,
    f0: &[(usize, usize)],
    k: &[HyperLink],
) -> Vec<(usize, usize)> {
    let resp = responsibility_bruteforce(inst, f0);
    let mut dropped = Vec::new();
    for (i, &arc) in f0.iter().enumerate() {
        let cuts: Vec<Interval> =
            resp.iter().filter(|&&(_, j)| j == i).map(|&(c, _)| c).collect();
        if cuts.iter().all(|&c| k.iter().any(|h| h.covers(c))) {
            dropped.push(arc);
        }
    }
    dropped
}

/// Interval DP deciding alpha-thinness: a maximal laminar family of ring
/// interval cuts is exactly a full binary split tree of [1, n-1], so
/// thin(i, j) = (cover count of [i, j] <= alpha) and some split point works.
pub fn is_alpha_thin(inst: &SrapInstance, k: &[HyperLink], alpha: usize) -> bool {
    let n = inst.n;
    let count = |lo: usize, hi: usize| -> usize {
        k.iter().filter(|h| h.covers(Interval::new(lo, hi))).count()
    };
    let mut thin = vec![vec![false; n]; n];
    for len in 1..n {
        for lo in 1..n {
            let hi = lo + len - 1;
            if hi >= n {
                break;
            }
            if count(lo, hi) > alpha {
                continue;
            }
            thin[lo][hi] = len == 1 || (lo..hi).any(|s| thin[lo][s] && thin[s + 1][hi]);
        }
    }
    thin[1][n - 1]
}

/// Exhaustive minimum of c(K)/c(drop(K) ∩ F_cur) over alpha-thin subsets of
/// hyper-links with a nonzero denominator. `in_cur` masks F_cur inside `f0`.
pub fn brute_force_min_ratio(
    inst: &SrapInstance,
    hyper: &[HyperLink],
    f0: &[(usize, usize, Cost)],
    in_cur: &[bool],
    alpha: usize,
    budget: &OracleBudget,
) -> Result<Option<(Vec<usize>, Ratio)>, OracleError> {
    if hyper.len() > budget.max_links {
        return Err(OracleError::BudgetExceeded {
            what: "hyper-links",
            have: hyper.len(),
            max: budget.max_links,
        });
    }
    let arcs: Vec<(usize, usize)> = f0.iter().map(|&(t, h, _)| (t, h)).collect();
    let mut best: Option<(Vec<usize>, Ratio)> = None;
    for mask in 1u64..(1u64 << hyper.len()) {
        let ids: Vec<usize> = (0..hyper.len()).filter(|i| mask >> i & 1 == 1).collect();
        let subset: Vec<HyperLink> = ids.iter().map(|&i| hyper[i].clone()).collect();
        if !is_alpha_thin(inst, &subset, alpha) {
            continue;
        }
        let dropped = brute_force_drop(inst, &arcs, &subset);
        let den: Cost = f0
            .iter()
            .zip(in_cur)
            .filter(|((t, h, _), &cur)| cur && dropped.contains(&(*t, *h)))
            .map(|((_, _, c), _)| *c)
            .sum();
        if den == 0 {
            continue;
        }
        let num: Cost = ids.iter().map(|&i| hyper[i].cost).sum();
        let ratio = Ratio::new(num, den);
        let better = match &best {
            None => true,
            Some((bids, br)) => ratio < *br || (ratio == *br && ids < *bids),
        };
        if better {
            best = Some((ids, ratio));
        }
    }
    Ok(best)
}

/// Exhaustive maximum of gain(drop(K)) - cost(K) over alpha-thin subsets,
/// with per-arc gains and per-hyper-link costs supplied directly. The empty
/// set gives the value floor 0.
pub fn brute_force_max_slack(
    inst: &SrapInstance,
    hyper: &[HyperLink],
    f0: &[(usize, usize)],
    gain: &[i128],
    link_cost: &[i128],
    alpha: usize,
) -> (i128, Vec<usize>) {
    assert!(hyper.len() <= 24, "slack brute force limited to 24 hyper-links");
    let mut best_value = 0i128;
    let mut best_ids: Vec<usize> = Vec::new();
    for mask in 1u64..(1u64 << hyper.len()) {
        let ids: Vec<usize> = (0..hyper.len()).filter(|i| mask >> i & 1 == 1).collect();
        let subset: Vec<HyperLink> = ids.iter().map(|&i| hyper[i].clone()).collect();
        if !is_alpha_thin(inst, &subset, alpha) {
            continue;
        }
        let dropped = brute_force_drop(inst, f0, &subset);
        let gains: i128 = f0
            .iter()
            .enumerate()
            .filter(|(_, arc)| dropped.contains(arc))
            .map(|(i, _)| gain[i])
            .sum();
        let value = gains - ids.iter().map(|&i| link_cost[i]).sum::<i128>();
        if value > best_value {
            best_value = value;
            best_ids = ids;
        }
    }
    (best_value, best_ids)
}

/// Exhaustive minimum Steiner tree: minimum over vertex supersets of the
/// terminal set of the spanning tree cost of the induced subgraph.
pub fn steiner_tree_bruteforce(
    num_vertices: usize,
    edges: &[(usize, usize, Cost)],
    terminals: &[usize],
    budget: &OracleBudget,
) -> Result<Option<(Cost, Vec<usize>)>, OracleError> {
    if num_vertices > budget.max_steiner_vertices {
        return Err(OracleError::BudgetExceeded {
            what: "vertices",
            have: num_vertices,
            max: budget.max_steiner_vertices,
        });
    }
    assert!(terminals.len() >= 2);
    let required: u32 = terminals.iter().map(|&t| 1u32 << t).sum();
    let mut best: Option<(Cost, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << num_vertices) {
        if mask & required != required {
            continue;
        }
        let mut order: Vec<usize> = (0..edges.len())
            .filter(|&i| mask >> edges[i].0 & 1 == 1 && mask >> edges[i].1 & 1 == 1)
            .collect();
        order.sort_by_key(|&i| (edges[i].2, i));
        let mut uf = UnionFind::new(num_vertices);
        let mut tree = Vec::new();
        let mut cost = 0;
        for &i in &order {
            if uf.find(edges[i].0) != uf.find(edges[i].1) {
                uf.union(edges[i].0, edges[i].1);
                tree.push(i);
                cost += edges[i].2;
            }
        }
        if mask.count_ones() as usize != tree.len() + 1 {
            continue;
        }
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, tree));
        }
    }
    Ok(best)
}
