//! The local search algorithm for instances where every ring vertex is a
//! terminal: solution links carry witness sets of one or two directed links,
//! moves swap in thin hyper-link sets whose drop beats 1.5 times their cost,
//! and the potential function certifies geometric progress.
//!
//! Halves are avoided throughout by doubling: the potential and the witness
//! cost function are stored at twice their value.

use std::collections::{BTreeMap, BTreeSet};

use crate::completion::{complete, CompleteInstance};
use crate::dropcalc::DropEngine;
use crate::feasibility::{augmented_graph, is_feasible_directed, verify_edge_connectivity};
use crate::greedy::{ResolvedParams, SolveError};
use crate::model::{Cost, HyperLink, LinkId, SrapInstance};
use crate::oracle::links_cover_all_cuts;
use crate::rspecial::{
    check_r_special, decompose_full_components, find_special_move, initial_solution, SpecialMove,
};
use crate::steiner::{gamma_for, generate_hyperlinks};
use crate::SolverOptions;

type Arc = (usize, usize);

/// One solution link together with its witness arcs. Dead items stay in
/// place so indices remain stable.
#[derive(Debug, Clone)]
struct WitnessItem {
    link: LinkId,
    cost: Cost,
    witnesses: BTreeSet<Arc>,
    alive: bool,
}

/// Witness bookkeeping: solution links, their witness sets, and the reverse
/// index from arcs to owning links.
#[derive(Debug, Clone, Default)]
pub struct WitnessState {
    items: Vec<WitnessItem>,
    owners: BTreeMap<Arc, BTreeSet<usize>>,
}

impl WitnessState {
    pub fn arcs(&self) -> Vec<Arc> {
        self.owners.keys().copied().collect()
    }

    pub fn live_links(&self) -> Vec<LinkId> {
        let mut out: Vec<LinkId> =
            self.items.iter().filter(|it| it.alive).map(|it| it.link).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Twice the potential: 2c(f) for single-witness links, 3c(f) for
    /// double-witness links.
    pub fn potential_doubled(&self) -> u128 {
        self.items
            .iter()
            .filter(|it| it.alive)
            .map(|it| match it.witnesses.len() {
                1 => 2 * it.cost as u128,
                2 => 3 * it.cost as u128,
                n => panic!("witness set of size {n}"),
            })
            .sum()
    }

    /// Twice the witness cost of each arc: sum of 2c(f)/|W_f| over owners.
    pub fn witness_cost_doubled(&self) -> BTreeMap<Arc, u128> {
        let mut out = BTreeMap::new();
        for (arc, owners) in &self.owners {
            let mut v = 0u128;
            for &i in owners {
                let it = &self.items[i];
                v += match it.witnesses.len() {
                    1 => 2 * it.cost as u128,
                    2 => it.cost as u128,
                    n => panic!("witness set of size {n}"),
                };
            }
            out.insert(*arc, v);
        }
        out
    }

    fn insert_witness(&mut self, item: usize, arc: Arc) {
        self.items[item].witnesses.insert(arc);
        self.owners.entry(arc).or_default().insert(item);
    }

    /// Remove an arc everywhere; owners whose witness set empties die.
    fn remove_arc(&mut self, arc: Arc) {
        if let Some(owners) = self.owners.remove(&arc) {
            for i in owners {
                self.items[i].witnesses.remove(&arc);
                if self.items[i].witnesses.is_empty() {
                    self.items[i].alive = false;
                }
            }
        }
    }

    /// Replace an arc by its shortening in every witness set. Witness sets
    /// already holding the replacement simply shrink.
    fn replace_arc(&mut self, from: Arc, to: Arc) {
        if let Some(owners) = self.owners.remove(&from) {
            for &i in &owners {
                self.items[i].witnesses.remove(&from);
                self.items[i].witnesses.insert(to);
            }
            self.owners.entry(to).or_default().extend(owners);
        }
    }

    /// Add one full component: fresh items for its tree links, witnessed by
    /// the Euler segment arcs that traverse them.
    fn add_component(&mut self, inst: &SrapInstance, tree: &[LinkId]) {
        let (visits, traversals) = euler_segments(inst, tree);
        let base = self.items.len();
        let seg_count = visits.len();
        let by_link: BTreeMap<LinkId, Vec<usize>> = {
            let mut m: BTreeMap<LinkId, Vec<usize>> = BTreeMap::new();
            for &(id, seg) in &traversals {
                m.entry(id).or_default().push(seg);
            }
            m
        };
        for (pos, (&id, segs)) in by_link.iter().enumerate() {
            assert_eq!(segs.len(), 2, "tree link must be traversed exactly twice");
            self.items.push(WitnessItem {
                link: id,
                cost: inst.links[id].cost,
                witnesses: BTreeSet::new(),
                alive: true,
            });
            for &seg in segs {
                let a = visits[seg % seg_count];
                let b = visits[(seg + 1) % seg_count];
                assert_ne!(a, b, "degenerate euler segment");
                self.insert_witness(base + pos, (a, b));
            }
        }
    }

    fn assert_consistent(&self) {
        for (arc, owners) in &self.owners {
            assert!(!owners.is_empty());
            for &i in owners {
                assert!(self.items[i].alive && self.items[i].witnesses.contains(arc));
            }
        }
        for (i, it) in self.items.iter().enumerate() {
            if it.alive {
                assert!((1..=2).contains(&it.witnesses.len()));
                for arc in &it.witnesses {
                    assert!(self.owners[arc].contains(&i));
                }
            }
        }
    }
}

/// Euler walk of a component tree: ring-vertex visit order plus, per link
/// traversal, the segment (index of the preceding visit) it belongs to.
fn euler_segments(inst: &SrapInstance, tree: &[LinkId]) -> (Vec<usize>, Vec<(LinkId, usize)>) {
    let mut adj: BTreeMap<usize, Vec<(usize, LinkId)>> = BTreeMap::new();
    for &id in tree {
        let l = inst.links[id];
        adj.entry(l.u).or_default().push((l.v, id));
        adj.entry(l.v).or_default().push((l.u, id));
    }
    let start = *adj.keys().find(|&&v| inst.is_ring_vertex(v)).expect("component joins no ring vertex");
    let mut visits = Vec::new();
    let mut traversals = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn walk(
        v: usize,
        parent: Option<LinkId>,
        inst: &SrapInstance,
        adj: &BTreeMap<usize, Vec<(usize, LinkId)>>,
        visits: &mut Vec<usize>,
        traversals: &mut Vec<(LinkId, usize)>,
    ) {
        if inst.is_ring_vertex(v) {
            visits.push(v);
        }
        for &(w, id) in &adj[&v] {
            if Some(id) == parent {
                continue;
            }
            traversals.push((id, visits.len() - 1));
            walk(w, Some(id), inst, adj, visits, traversals);
            traversals.push((id, visits.len() - 1));
            if inst.is_ring_vertex(v) {
                visits.push(v);
            }
        }
    }
    walk(start, None, inst, &adj, &mut visits, &mut traversals);
    if visits.len() > 1 && visits.last() == visits.first() {
        visits.pop();
        // Traversals that pointed past the popped visit wrap around.
        let wrap = visits.len();
        for t in traversals.iter_mut() {
            if t.1 >= wrap {
                t.1 = wrap - 1;
            }
        }
    }
    (visits, traversals)
}

/// Shorten the witness arcs in place until the directed solution is
/// R-special, inheriting witness memberships across each move.
fn specialize(state: &mut WitnessState, inst: &SrapInstance, comp: &CompleteInstance) {
    loop {
        let live: BTreeSet<Arc> = state.owners.keys().copied().collect();
        match find_special_move(inst, comp, &live) {
            Some(SpecialMove::Delete(a)) => state.remove_arc(a),
            Some(SpecialMove::Shorten(a, b)) => state.replace_arc(a, b),
            None => break,
        }
    }
    debug_assert!(check_r_special(inst, &state.arcs()));
    state.assert_consistent();
}

/// Build witness sets for an arbitrary feasible solution and specialize.
pub fn initial_witnesses(
    inst: &SrapInstance,
    comp: &CompleteInstance,
    solution: &[LinkId],
) -> WitnessState {
    let mut state = WitnessState::default();
    for tree in decompose_full_components(inst, solution) {
        state.add_component(inst, &tree);
    }
    assert!(
        is_feasible_directed(inst, &state.arcs()),
        "initial witness arcs are infeasible"
    );
    specialize(&mut state, inst, comp);
    state
}

#[derive(Debug, Clone)]
pub struct LocalSearchIteration {
    pub index: usize,
    pub added: Vec<(Vec<usize>, Cost)>,
    pub slack_value: i128,
    pub potential_doubled: u128,
}

#[derive(Debug, Clone)]
pub struct LocalSearchOutput {
    pub params: ResolvedParams,
    pub initial_cost: Cost,
    pub initial_potential_doubled: u128,
    pub iterations: Vec<LocalSearchIteration>,
    pub solution: Vec<LinkId>,
    pub cost: Cost,
    pub dp_alpha_floor: u32,
}

pub fn local_search(
    inst: &SrapInstance,
    eps: f64,
    opts: &SolverOptions,
) -> Result<LocalSearchOutput, SolveError> {
    if !(eps > 0.0) {
        return Err(SolveError::BadEpsilon(eps));
    }
    if (0..inst.n).any(|v| !inst.terminal[v]) {
        return Err(SolveError::NotAllTerminals);
    }
    let eps_prime = (eps / 2.0) / (1.5 + eps / 2.0);
    let gamma_theory = gamma_for(eps_prime).map_err(|_| SolveError::BadEpsilon(eps))?;
    let alpha_theory = (8.0 / eps).ceil() as u32;
    let gamma_used = gamma_theory.min(opts.gamma_cap as u64) as u32;
    let alpha_used = opts.alpha_override.unwrap_or(alpha_theory.min(opts.alpha_cap));
    let params = ResolvedParams {
        eps,
        eps_prime,
        gamma_theory,
        gamma_used,
        alpha_theory,
        alpha_used,
    };

    let comp = complete(inst);
    let hyper = generate_hyperlinks(inst, gamma_used);
    if !crate::feasibility::is_feasible_hyper(inst, &hyper.hyperlinks) {
        return Err(SolveError::Infeasible);
    }
    let seed = initial_solution(inst, &hyper, opts.oracle_budget).ok_or(SolveError::Infeasible)?;
    let initial_cost = inst.total_link_cost(&seed);

    let mut state = initial_witnesses(inst, &comp, &seed);
    let initial_potential = state.potential_doubled();
    let decay = 1.0 - eps / (12.0 * inst.n as f64);
    let mut iterations = Vec::new();
    let mut dp_alpha_floor = alpha_used;
    let mut alpha_req = alpha_used as usize;

    loop {
        let phi_old = state.potential_doubled();
        if phi_old == 0 {
            break;
        }
        let arcs = state.arcs();
        let f0: Vec<Arc> = arcs.clone();
        let engine = DropEngine::new(inst, &f0);
        let cbar = state.witness_cost_doubled();
        let mut gain = vec![0i128; inst.n];
        for (arc, v) in &cbar {
            gain[arc.1] = *v as i128;
        }
        let link_cost: Vec<i128> = hyper.hyperlinks.iter().map(|h| 3 * h.cost as i128).collect();
        let res = crate::dp::maximize_slack(
            inst,
            &hyper.hyperlinks,
            &engine.ext,
            gain,
            link_cost,
            alpha_req,
            opts.dp_key_budget,
        );
        alpha_req = res.effective_alpha;
        dp_alpha_floor = dp_alpha_floor.min(res.effective_alpha as u32);
        if res.chosen.is_empty() {
            break;
        }
        // Tentatively apply the move; roll back when the potential does not
        // drop by the required factor.
        let snapshot = state.clone();
        let z: Vec<HyperLink> =
            res.chosen.iter().map(|&i| hyper.hyperlinks[i].clone()).collect();
        for arc in engine.drop(&z) {
            state.remove_arc(arc);
        }
        for h in &z {
            let tree = h.realization.clone().expect("generated hyper-links carry realizations");
            state.add_component(inst, &tree);
        }
        assert!(
            is_feasible_directed(inst, &state.arcs()),
            "witness arcs infeasible after applying a move"
        );
        specialize(&mut state, inst, &comp);
        let phi_new = state.potential_doubled();
        assert!(phi_new <= phi_old, "potential increased across a move");
        if (phi_new as f64) > decay * phi_old as f64 {
            state = snapshot;
            break;
        }
        iterations.push(LocalSearchIteration {
            index: iterations.len() + 1,
            added: z.iter().map(|h| (h.vertices.clone(), h.cost)).collect(),
            slack_value: res.value,
            potential_doubled: phi_new,
        });
    }

    let solution = state.live_links();
    assert!(links_cover_all_cuts(inst, &solution), "local search solution uncovers a cut");
    let cost = inst.total_link_cost(&solution);
    let edges = augmented_graph(inst, &solution);
    assert!(
        verify_edge_connectivity(inst.num_vertices(), &edges, &inst.terminals(), 3),
        "local search output failed the max-flow certificate"
    );
    Ok(LocalSearchOutput {
        params,
        initial_cost,
        initial_potential_doubled: initial_potential,
        iterations,
        solution,
        cost,
        dp_alpha_floor,
    })
}
