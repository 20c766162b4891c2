//! A structured 2-approximate directed solution: Euler-tour cycles per full
//! component, cycle merging, shortcutting to terminals, and the delete/shorten
//! reduction to a non-shortenable, R-special solution.

use std::collections::{BTreeMap, BTreeSet};

use crate::completion::CompleteInstance;
use crate::dsu::UnionFind;
use crate::feasibility::{intersecting, is_feasible_directed};
use crate::model::{Cost, HyperLink, Interval, LinkId, SrapInstance};
use crate::oracle::{exact_srap, OracleBudget};
use crate::steiner::{realize_solution, HyperSrapInstance};

/// A directed closed walk over ring vertices; consecutive nodes (wrapping)
/// are directed links of the complete instance. Not necessarily simple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedCycle {
    pub nodes: Vec<usize>,
    pub cost: Cost,
}

impl DirectedCycle {
    pub fn empty() -> Self {
        DirectedCycle { nodes: Vec::new(), cost: 0 }
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        if self.nodes.len() < 2 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() {
            out.push((self.nodes[i], self.nodes[(i + 1) % self.nodes.len()]));
        }
        out
    }

    pub fn node_set(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.nodes.iter().copied().collect();
        set.into_iter().collect()
    }
}

fn cycle_cost(complete: &CompleteInstance, nodes: &[usize]) -> Cost {
    if nodes.len() < 2 {
        return 0;
    }
    let mut cost = 0;
    for i in 0..nodes.len() {
        let (t, h) = (nodes[i], nodes[(i + 1) % nodes.len()]);
        cost += complete
            .arc_cost(t, h)
            .unwrap_or_else(|| panic!("complete instance misses arc ({t}, {h})"));
    }
    cost
}

/// Decompose a link set into full components: links are grouped by shared
/// outside vertices, each group reduced to a cheapest spanning tree, and
/// outside leaves pruned. Groups joining fewer than two ring vertices vanish.
pub fn decompose_full_components(inst: &SrapInstance, links: &[LinkId]) -> Vec<Vec<LinkId>> {
    if links.is_empty() {
        return Vec::new();
    }
    let mut uf = UnionFind::new(links.len());
    let mut at_outside: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &id) in links.iter().enumerate() {
        let l = inst.links[id];
        for v in [l.u, l.v] {
            if !inst.is_ring_vertex(v) {
                at_outside.entry(v).or_default().push(i);
            }
        }
    }
    for members in at_outside.values() {
        for w in members.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut classes: BTreeMap<usize, Vec<LinkId>> = BTreeMap::new();
    for (i, &id) in links.iter().enumerate() {
        classes.entry(uf.find(i)).or_default().push(id);
    }
    let mut out = Vec::new();
    for ids in classes.values() {
        if let Some(tree) = component_tree(inst, ids) {
            out.push(tree);
        }
    }
    // Deterministic order: by smallest ring vertex joined, then links.
    out.sort_by_key(|tree| {
        let mut ring: Vec<usize> = tree
            .iter()
            .flat_map(|&id| [inst.links[id].u, inst.links[id].v])
            .filter(|&v| inst.is_ring_vertex(v))
            .collect();
        ring.sort_unstable();
        (ring.first().copied().unwrap_or(usize::MAX), tree.clone())
    });
    out
}

/// Cheapest spanning tree of one link class with outside leaves pruned.
fn component_tree(inst: &SrapInstance, ids: &[LinkId]) -> Option<Vec<LinkId>> {
    let mut order = ids.to_vec();
    order.sort_by_key(|&id| (inst.links[id].cost, id));
    let mut uf = UnionFind::new(inst.num_vertices());
    let mut tree: Vec<LinkId> = Vec::new();
    for &id in &order {
        let l = inst.links[id];
        if uf.find(l.u) != uf.find(l.v) {
            uf.union(l.u, l.v);
            tree.push(id);
        }
    }
    // Prune outside leaves until only ring-joining structure remains.
    loop {
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        for &id in &tree {
            *degree.entry(inst.links[id].u).or_insert(0) += 1;
            *degree.entry(inst.links[id].v).or_insert(0) += 1;
        }
        let before = tree.len();
        tree.retain(|&id| {
            let l = inst.links[id];
            let u_is_outside_leaf = !inst.is_ring_vertex(l.u) && degree[&l.u] == 1;
            let v_is_outside_leaf = !inst.is_ring_vertex(l.v) && degree[&l.v] == 1;
            !(u_is_outside_leaf || v_is_outside_leaf)
        });
        if tree.len() == before {
            break;
        }
    }
    let ring_count = tree
        .iter()
        .flat_map(|&id| [inst.links[id].u, inst.links[id].v])
        .filter(|&v| inst.is_ring_vertex(v))
        .collect::<BTreeSet<_>>()
        .len();
    if ring_count >= 2 {
        tree.sort_unstable();
        Some(tree)
    } else {
        None
    }
}

/// Euler-tour directed cycle of one full component: ring vertices in the
/// order the doubled-tree walk visits them, each hop a completed directed
/// link. Costs at most twice the tree.
pub fn euler_cycle(
    inst: &SrapInstance,
    complete: &CompleteInstance,
    tree: &[LinkId],
) -> DirectedCycle {
    let mut adj: BTreeMap<usize, Vec<(usize, LinkId)>> = BTreeMap::new();
    for &id in tree {
        let l = inst.links[id];
        adj.entry(l.u).or_default().push((l.v, id));
        adj.entry(l.v).or_default().push((l.u, id));
    }
    let start = *adj.keys().find(|&&v| inst.is_ring_vertex(v)).expect("tree joins no ring vertex");
    let mut visits = Vec::new();
    fn walk(
        v: usize,
        parent_link: Option<LinkId>,
        inst: &SrapInstance,
        adj: &BTreeMap<usize, Vec<(usize, LinkId)>>,
        visits: &mut Vec<usize>,
    ) {
        if inst.is_ring_vertex(v) {
            visits.push(v);
        }
        for &(w, id) in &adj[&v] {
            if Some(id) == parent_link {
                continue;
            }
            walk(w, Some(id), inst, adj, visits);
            if inst.is_ring_vertex(v) {
                visits.push(v);
            }
        }
    }
    walk(start, None, inst, &adj, &mut visits);
    // The walk re-emits the start after each child subtree; the final return
    // is the wrap-around, so drop a trailing duplicate of the start.
    if visits.len() > 1 && visits.last() == visits.first() {
        visits.pop();
    }
    let cost = cycle_cost(complete, &visits);
    let tree_cost: Cost = tree.iter().map(|&id| inst.links[id].cost).sum();
    assert!(cost <= 2 * tree_cost, "euler cycle exceeds twice the tree cost");
    DirectedCycle { nodes: visits, cost }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotIntersecting;

impl std::fmt::Display for NotIntersecting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cycles are not intersecting as hyper-links")
    }
}

impl std::error::Error for NotIntersecting {}

/// Merge a root cycle with an intersecting cycle into one directed cycle on
/// the union of their node sets, at most the summed cost.
pub fn merge_cycles(
    complete: &CompleteInstance,
    root_cycle: &DirectedCycle,
    other: &DirectedCycle,
) -> Result<DirectedCycle, NotIntersecting> {
    let set_s = root_cycle.node_set();
    let set_a = other.node_set();
    let hs = HyperLink::new(set_s.clone(), 0, None);
    let ha = HyperLink::new(set_a.clone(), 0, None);
    if !intersecting(&hs, &ha) {
        return Err(NotIntersecting);
    }

    if set_s.iter().any(|v| ha.contains(*v)) {
        // Shared vertex: splice the other cycle in at its first shared node.
        let i = root_cycle.nodes.iter().position(|v| ha.contains(*v)).unwrap();
        let v = root_cycle.nodes[i];
        let j = other.nodes.iter().position(|&w| w == v).unwrap();
        let mut nodes = root_cycle.nodes[..=i].to_vec();
        nodes.extend(other.nodes[j + 1..].iter().copied());
        nodes.extend(other.nodes[..=j].iter().copied());
        nodes.extend(root_cycle.nodes[i + 1..].iter().copied());
        // Trailing shared node duplicates the next hop's tail; keep as-is,
        // arcs (a_{j-1}, v) and (v, s_{i+1}) both exist.
        let cost = cycle_cost(complete, &nodes);
        assert_eq!(cost, root_cycle.cost + other.cost);
        return Ok(DirectedCycle { nodes, cost });
    }

    // Disjoint node sets: leave-and-reenter construction.
    let ia = Interval::new(set_a[0], *set_a.last().unwrap());
    let k = (0..root_cycle.nodes.len())
        .find(|&k| {
            let t = root_cycle.nodes[k];
            let h = root_cycle.nodes[(k + 1) % root_cycle.nodes.len()];
            ia.contains(t) && !ia.contains(h)
        })
        .expect("root cycle never leaves the other cycle's interval");
    let s_i = root_cycle.nodes[k];
    let s_next = root_cycle.nodes[(k + 1) % root_cycle.nodes.len()];
    let istar = Interval::new(s_i.min(s_next), s_i.max(s_next));
    let j = (0..other.nodes.len())
        .find(|&j| {
            let t = other.nodes[j];
            let h = other.nodes[(j + 1) % other.nodes.len()];
            istar.contains(t) && !istar.contains(h)
        })
        .expect("other cycle never leaves the bridging interval");
    let a_j = other.nodes[j];

    // s_1..s_i, a_{j+1}..a_j, s_{i+1}..; the two new arcs are shortenings.
    let mut nodes = root_cycle.nodes[..=k].to_vec();
    for step in 1..=other.nodes.len() {
        nodes.push(other.nodes[(j + step) % other.nodes.len()]);
    }
    debug_assert_eq!(*nodes.last().unwrap(), a_j);
    nodes.extend(root_cycle.nodes[k + 1..].iter().copied());
    let cost = cycle_cost(complete, &nodes);
    assert!(
        cost <= root_cycle.cost + other.cost,
        "merged cycle more expensive than its parts"
    );
    Ok(DirectedCycle { nodes, cost })
}

/// Build a single directed cycle with node set R from a feasible solution:
/// Euler-cycle each full component, merge everything into the root cycle,
/// then shortcut over non-terminals.
pub fn build_terminal_cycle(
    inst: &SrapInstance,
    complete: &CompleteInstance,
    solution_links: &[LinkId],
) -> DirectedCycle {
    let components = decompose_full_components(inst, solution_links);
    let mut cycles: Vec<DirectedCycle> =
        components.iter().map(|tree| euler_cycle(inst, complete, tree)).collect();
    if cycles.is_empty() {
        return DirectedCycle::empty();
    }
    let root_pos = cycles
        .iter()
        .position(|c| c.nodes.contains(&0))
        .expect("feasible solution has no component containing the root");
    let mut current = cycles.remove(root_pos);
    while !cycles.is_empty() {
        let pos = cycles
            .iter()
            .position(|c| {
                intersecting(
                    &HyperLink::new(current.node_set(), 0, None),
                    &HyperLink::new(c.node_set(), 0, None),
                )
            })
            .expect("no unmerged cycle intersects the accumulated cycle");
        let next = cycles.remove(pos);
        current = merge_cycles(complete, &current, &next).unwrap();
    }
    // Shortcut over non-terminals, then collapse repeated visits.
    let mut nodes: Vec<usize> =
        current.nodes.iter().copied().filter(|&v| inst.is_terminal(v)).collect();
    let mut i = 0;
    while i < nodes.len() && nodes.len() > 1 {
        let next = (i + 1) % nodes.len();
        if nodes[i] == nodes[next] {
            nodes.remove(next);
        } else {
            i += 1;
        }
    }
    if nodes.len() < 2 {
        return DirectedCycle::empty();
    }
    let cost = cycle_cost(complete, &nodes);
    assert!(cost <= current.cost, "shortcutting increased the cost");
    let cycle = DirectedCycle { nodes, cost };
    debug_assert!(is_feasible_directed(inst, &cycle.arcs()));
    cycle
}

/// One admissible reduction step on a feasible terminal-incident arc set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialMove {
    Delete((usize, usize)),
    Shorten((usize, usize), (usize, usize)),
}

/// Find the next delete-or-shorten move keeping feasibility, or `None` at a
/// non-shortenable fixpoint. Deletions are tried before shortenings; arcs
/// are scanned by (cost descending, tail, head); shortenings land on
/// terminals, most aggressive first.
pub fn find_special_move(
    inst: &SrapInstance,
    complete: &CompleteInstance,
    live: &BTreeSet<(usize, usize)>,
) -> Option<SpecialMove> {
    let arc_cost = |t: usize, h: usize| -> Cost {
        complete.arc_cost(t, h).unwrap_or_else(|| panic!("missing completed arc ({t}, {h})"))
    };
    let mut order: Vec<(usize, usize)> = live.iter().copied().collect();
    order.sort_by_key(|&(t, h)| (std::cmp::Reverse(arc_cost(t, h)), t, h));
    for &(t, h) in &order {
        let trial: Vec<(usize, usize)> =
            live.iter().copied().filter(|&a| a != (t, h)).collect();
        if is_feasible_directed(inst, &trial) {
            return Some(SpecialMove::Delete((t, h)));
        }
    }
    for &(t, h) in &order {
        let mut trial: Vec<(usize, usize)> =
            live.iter().copied().filter(|&a| a != (t, h)).collect();
        // Shorten toward the head, most aggressive first.
        let candidates: Vec<usize> =
            if t < h { (t + 1..h).rev().collect() } else { (h + 1..t).collect() };
        for s in candidates {
            if !inst.is_terminal(s) {
                continue;
            }
            trial.push((s, h));
            if is_feasible_directed(inst, &trial) {
                return Some(SpecialMove::Shorten((t, h), (s, h)));
            }
            trial.pop();
        }
    }
    None
}

/// Repeatedly delete any arc whose removal keeps feasibility, else replace an
/// arc by a strictly shorter terminal shortening that keeps feasibility.
/// The fixpoint is R-special.
pub fn make_nonshortenable(
    inst: &SrapInstance,
    complete: &CompleteInstance,
    arcs: &[(usize, usize)],
) -> Vec<(usize, usize)> {
    let mut live: BTreeSet<(usize, usize)> = arcs.iter().copied().collect();
    assert!(
        is_feasible_directed(inst, &live.iter().copied().collect::<Vec<_>>()),
        "input to make_nonshortenable is infeasible"
    );
    while let Some(mv) = find_special_move(inst, complete, &live) {
        match mv {
            SpecialMove::Delete(a) => {
                live.remove(&a);
            }
            SpecialMove::Shorten(a, b) => {
                live.remove(&a);
                live.insert(b);
            }
        }
    }
    let out: Vec<(usize, usize)> = live.into_iter().collect();
    assert!(check_r_special(inst, &out), "delete/shorten fixpoint is not R-special");
    out
}

/// The four structural properties of an R-special directed solution.
pub fn check_r_special(inst: &SrapInstance, arcs: &[(usize, usize)]) -> bool {
    // 1. Only incident on terminals.
    if !arcs.iter().all(|&(t, h)| inst.is_terminal(t) && inst.is_terminal(h)) {
        return false;
    }
    // 2. r-out arborescence on the terminals: in-degree one off the root,
    //    no arc into the root, everything reachable from the root.
    let terminals = inst.terminals();
    if arcs.len() != terminals.len() - 1 {
        return false;
    }
    let mut indeg: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, h) in arcs {
        *indeg.entry(h).or_insert(0) += 1;
    }
    if indeg.contains_key(&0) {
        return false;
    }
    for &t in &terminals {
        if t != 0 && indeg.get(&t).copied().unwrap_or(0) != 1 {
            return false;
        }
    }
    let mut reached = BTreeSet::from([0usize]);
    let mut frontier = vec![0usize];
    while let Some(v) = frontier.pop() {
        for &(t, h) in arcs {
            if t == v && reached.insert(h) {
                frontier.push(h);
            }
        }
    }
    if reached.len() != terminals.len() {
        return false;
    }
    // 3. Planar as chords: no two arcs with four distinct endpoints
    //    interleave along the ring path.
    for (i, &(t1, h1)) in arcs.iter().enumerate() {
        let span1 = Interval::new(t1.min(h1), t1.max(h1));
        for &(t2, h2) in &arcs[i + 1..] {
            if t1 == t2 || t1 == h2 || h1 == t2 || h1 == h2 {
                continue;
            }
            let inside2 =
                (span1.lo < t2 && t2 < span1.hi) as u8 + (span1.lo < h2 && h2 < span1.hi) as u8;
            if inside2 == 1 {
                return false;
            }
        }
    }
    // 4. No vertex sends two arcs in the same ring direction.
    let mut dirs: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for &(t, h) in arcs {
        let e = dirs.entry(t).or_insert((0, 0));
        if h > t {
            e.1 += 1;
        } else {
            e.0 += 1;
        }
        if e.0 > 1 || e.1 > 1 {
            return false;
        }
    }
    true
}

/// Seed solution policy: exact oracle when the instance is small enough,
/// otherwise greedy cut cover over the generated hyper-links. `None` when no
/// feasible solution exists.
pub fn initial_solution(
    inst: &SrapInstance,
    hyper: &HyperSrapInstance,
    oracle_budget: usize,
) -> Option<Vec<LinkId>> {
    if inst.links.len() <= oracle_budget {
        let budget = OracleBudget { max_links: oracle_budget, ..OracleBudget::default() };
        if let Ok(res) = exact_srap(inst, &budget) {
            return res.map(|(_, ids)| ids);
        }
    }
    greedy_cut_cover(inst, hyper).map(|sol| realize_solution(&sol).expect("generated hyper-links carry realizations"))
}

/// Greedy set cover of the dangerous cuts by hyper-links, minimizing cost per
/// newly covered cut.
pub fn greedy_cut_cover(inst: &SrapInstance, hyper: &HyperSrapInstance) -> Option<Vec<HyperLink>> {
    let cuts = inst.dangerous_cuts();
    let mut uncovered: Vec<Interval> = cuts;
    let mut chosen: Vec<usize> = Vec::new();
    while !uncovered.is_empty() {
        let mut best: Option<(usize, usize)> = None; // (id, newly covered)
        for (id, h) in hyper.hyperlinks.iter().enumerate() {
            if chosen.contains(&id) {
                continue;
            }
            let newly = uncovered.iter().filter(|&&c| h.covers(c)).count();
            if newly == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bid, bnew)) => {
                    let hb = &hyper.hyperlinks[bid];
                    // cost/newly < best cost/best newly, by cross multiplication.
                    let lhs = h.cost as u128 * bnew as u128;
                    let rhs = hb.cost as u128 * newly as u128;
                    lhs < rhs || (lhs == rhs && newly > bnew) || (lhs == rhs && newly == bnew && id < bid)
                }
            };
            if better {
                best = Some((id, newly));
            }
        }
        let (id, _) = best?;
        let h = &hyper.hyperlinks[id];
        uncovered.retain(|&c| !h.covers(c));
        chosen.push(id);
    }
    Some(chosen.into_iter().map(|id| hyper.hyperlinks[id].clone()).collect())
}

#[derive(Debug, Clone)]
pub struct TwoApproxReport {
    pub initial_cost: Cost,
    pub f0_cost: Cost,
}

/// Full pipeline from a feasible link solution to an R-special directed
/// solution of at most twice its cost.
pub fn two_approx_rspecial(
    inst: &SrapInstance,
    complete: &CompleteInstance,
    initial_links: &[LinkId],
) -> (Vec<(usize, usize)>, TwoApproxReport) {
    let cycle = build_terminal_cycle(inst, complete, initial_links);
    let f0 = make_nonshortenable(inst, complete, &cycle.arcs());
    let initial_cost = inst.total_link_cost(initial_links);
    let f0_cost: Cost = f0.iter().map(|&(t, h)| complete.arc_cost(t, h).unwrap()).sum();
    assert!(f0_cost <= 2 * initial_cost, "R-special solution exceeds twice the seed cost");
    (f0, TwoApproxReport { initial_cost, f0_cost })
}

/// Cost of a directed arc set under the complete instance.
pub fn arcs_cost(complete: &CompleteInstance, arcs: &[(usize, usize)]) -> Cost {
    arcs.iter().map(|&(t, h)| complete.arc_cost(t, h).expect("missing completed arc")).sum()
}
