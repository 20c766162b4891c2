//! Metric completion, shadow completion, and the second directed metric
//! completion, with provenance back to original links.
//!
//! The result is a complete instance: for every ordered ring pair with a
//! directed link-path there is a directed link of shortest-path cost, and
//! every shortening of a present directed link is present at most its cost.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::model::{Cost, DirectedLink, LinkId, Provenance, SrapInstance};

/// A completed undirected link between two ring vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletedLink {
    /// Ring endpoints, u < v.
    pub u: usize,
    pub v: usize,
    pub cost: Cost,
    /// Original links along the shortest link-path from u to v.
    pub path_links: Vec<LinkId>,
    /// Vertex sequence of that path, starting at u.
    pub path_vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CompleteInstance {
    pub base: SrapInstance,
    /// Metric completion over ring pairs (absent pairs are unreachable).
    pub l1: Vec<CompletedLink>,
    /// Shadows and shortenings of the completed links.
    pub l2: Vec<DirectedLink>,
    /// Second metric completion: the final directed link set.
    pub arcs: Vec<DirectedLink>,
    arc_by_pair: HashMap<(usize, usize), usize>,
    l1_by_pair: HashMap<(usize, usize), usize>,
}

/// Dijkstra with ties broken by lexicographically smallest vertex sequence.
/// Returns per-target (cost, path) for paths starting at `source`.
fn lex_dijkstra(
    num_vertices: usize,
    adj: &[Vec<(usize, Cost, usize)>],
    source: usize,
) -> Vec<Option<(Cost, Vec<usize>, Vec<usize>)>> {
    // Heap entries: (cost, vertex path, edge-label path, vertex).
    let mut done: Vec<Option<(Cost, Vec<usize>, Vec<usize>)>> = vec![None; num_vertices];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0 as Cost, vec![source], Vec::new(), source)));
    while let Some(Reverse((cost, path, labels, v))) = heap.pop() {
        if done[v].is_some() {
            continue;
        }
        done[v] = Some((cost, path.clone(), labels.clone()));
        for &(w, c, label) in &adj[v] {
            if done[w].is_none() {
                let mut p = path.clone();
                p.push(w);
                let mut lb = labels.clone();
                lb.push(label);
                heap.push(Reverse((cost + c, p, lb, w)));
            }
        }
    }
    done
}

/// Metric completion: one undirected link per reachable ring pair, at
/// shortest link-path cost, with the path recorded as provenance.
pub fn metric_complete_undirected(inst: &SrapInstance) -> Vec<CompletedLink> {
    let nv = inst.num_vertices();
    let mut adj: Vec<Vec<(usize, Cost, usize)>> = vec![Vec::new(); nv];
    for (id, l) in inst.links.iter().enumerate() {
        adj[l.u].push((l.v, l.cost, id));
        adj[l.v].push((l.u, l.cost, id));
    }
    for a in adj.iter_mut() {
        a.sort_by_key(|&(w, c, id)| (w, c, id));
    }
    let mut out = Vec::new();
    for u in 0..inst.n {
        let reach = lex_dijkstra(nv, &adj, u);
        for v in u + 1..inst.n {
            if let Some((cost, path, labels)) = &reach[v] {
                out.push(CompletedLink {
                    u,
                    v,
                    cost: *cost,
                    path_links: labels.clone(),
                    path_vertices: path.clone(),
                });
            }
        }
    }
    out
}

/// Shadow completion: both orientations of each completed link plus every
/// head-preserving shortening, all at the completed link's cost. Parallel
/// candidates for the same ordered pair keep the cheapest (ties: smallest
/// completed-link id).
pub fn shadow_complete(l1: &[CompletedLink]) -> Vec<DirectedLink> {
    let mut best: HashMap<(usize, usize), DirectedLink> = HashMap::new();
    let mut offer = |tail: usize, head: usize, cost: Cost, prov: Provenance| {
        let entry = best.entry((tail, head));
        match entry {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                if cost < e.get().cost {
                    *e.get_mut() = DirectedLink { tail, head, cost, provenance: prov };
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(DirectedLink { tail, head, cost, provenance: prov });
            }
        }
    };
    for (id, l) in l1.iter().enumerate() {
        offer(l.u, l.v, l.cost, Provenance::Shadow { l1: id });
        offer(l.v, l.u, l.cost, Provenance::Shadow { l1: id });
        // Shortenings keep the head fixed; the new tail lies strictly
        // between the endpoints on the ring path.
        for t in [l.u, l.v] {
            for s in l.u + 1..l.v {
                if s != t {
                    offer(s, t, l.cost, Provenance::Shortening { l1: id });
                }
            }
        }
    }
    let mut arcs: Vec<DirectedLink> = best.into_values().collect();
    arcs.sort_by_key(|a| (a.tail, a.head));
    arcs
}

/// Second metric completion over the directed links, composing provenance.
pub fn metric_complete_directed(n: usize, l2: &[DirectedLink]) -> Vec<DirectedLink> {
    let mut adj: Vec<Vec<(usize, Cost, usize)>> = vec![Vec::new(); n];
    for (id, a) in l2.iter().enumerate() {
        adj[a.tail].push((a.head, a.cost, id));
    }
    for a in adj.iter_mut() {
        a.sort_by_key(|&(w, c, id)| (w, c, id));
    }
    let mut out = Vec::new();
    for u in 0..n {
        let reach = lex_dijkstra(n, &adj, u);
        for v in 0..n {
            if v == u {
                continue;
            }
            if let Some((cost, _path, labels)) = &reach[v] {
                let provenance = if labels.len() == 1 {
                    l2[labels[0]].provenance.clone()
                } else {
                    Provenance::Composition { pieces: labels.clone() }
                };
                out.push(DirectedLink { tail: u, head: v, cost: *cost, provenance });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompletionError {
    /// kappa is undefined for artificial and zero-cost provenance.
    NoOriginalProvenance,
}

impl std::fmt::Display for CompletionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "directed link has no original-link provenance")
    }
}

impl std::error::Error for CompletionError {}

impl CompleteInstance {
    pub fn arc(&self, tail: usize, head: usize) -> Option<&DirectedLink> {
        self.arc_by_pair.get(&(tail, head)).map(|&i| &self.arcs[i])
    }

    pub fn arc_cost(&self, tail: usize, head: usize) -> Option<Cost> {
        self.arc(tail, head).map(|a| a.cost)
    }

    pub fn completed_link(&self, u: usize, v: usize) -> Option<&CompletedLink> {
        let key = (u.min(v), u.max(v));
        self.l1_by_pair.get(&key).map(|&i| &self.l1[i])
    }

    /// The completed undirected links whose coverage dominates the arc:
    /// a single link for a shadow or shortening, the composed path's links
    /// for a composition.
    pub fn kappa(&self, arc: &DirectedLink) -> Result<Vec<usize>, CompletionError> {
        match &arc.provenance {
            Provenance::Shadow { l1 } | Provenance::Shortening { l1 } => Ok(vec![*l1]),
            Provenance::Composition { pieces } => {
                let mut ids = Vec::new();
                for &p in pieces {
                    match &self.l2[p].provenance {
                        Provenance::Shadow { l1 } | Provenance::Shortening { l1 } => ids.push(*l1),
                        _ => return Err(CompletionError::NoOriginalProvenance),
                    }
                }
                ids.sort_unstable();
                ids.dedup();
                Ok(ids)
            }
            Provenance::Artificial | Provenance::ZeroCostReduction => {
                Err(CompletionError::NoOriginalProvenance)
            }
        }
    }

    /// Total cost of the kappa set.
    pub fn kappa_cost(&self, arc: &DirectedLink) -> Result<Cost, CompletionError> {
        Ok(self.kappa(arc)?.iter().map(|&i| self.l1[i].cost).sum())
    }

    /// Original instance links realizing the kappa set.
    pub fn kappa_original_links(&self, arc: &DirectedLink) -> Result<Vec<LinkId>, CompletionError> {
        let mut out = Vec::new();
        for id in self.kappa(arc)? {
            out.extend_from_slice(&self.l1[id].path_links);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Run all three completion passes and check the complete-instance property.
pub fn complete(inst: &SrapInstance) -> CompleteInstance {
    let l1 = metric_complete_undirected(inst);
    let l2 = shadow_complete(&l1);
    let arcs = metric_complete_directed(inst.n, &l2);
    let arc_by_pair: HashMap<(usize, usize), usize> =
        arcs.iter().enumerate().map(|(i, a)| ((a.tail, a.head), i)).collect();
    let l1_by_pair: HashMap<(usize, usize), usize> =
        l1.iter().enumerate().map(|(i, l)| ((l.u, l.v), i)).collect();
    let out = CompleteInstance { base: inst.clone(), l1, l2, arcs, arc_by_pair, l1_by_pair };
    debug_assert!(out.is_complete(), "completion did not reach a fixpoint");
    out
}

impl CompleteInstance {
    /// Every shortening of every directed link is present at most its cost.
    pub fn is_complete(&self) -> bool {
        for a in &self.arcs {
            let (lo, hi) = (a.tail.min(a.head), a.tail.max(a.head));
            for s in lo + 1..hi {
                match self.arc_cost(s, a.head) {
                    Some(c) if c <= a.cost => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::r4;
    use crate::model::{arc_enters, Link};

    #[test]
    fn l1_on_r4_only_link_pairs_are_finite() {
        let inst = r4();
        let l1 = metric_complete_undirected(&inst);
        let pairs: Vec<(usize, usize, Cost)> = l1.iter().map(|l| (l.u, l.v, l.cost)).collect();
        assert_eq!(pairs, vec![(0, 2, 1), (1, 3, 1)]);
    }

    #[test]
    fn l1_two_hop_star() {
        // Ring a=0, b=1 of a triangle ring; outside x=3 with links a-x, x-b.
        let inst = SrapInstance::build(
            3,
            1,
            &[0, 1],
            vec![Link { u: 0, v: 3, cost: 1 }, Link { u: 3, v: 1, cost: 1 }],
        )
        .unwrap();
        let l1 = metric_complete_undirected(&inst);
        let ab = l1.iter().find(|l| l.u == 0 && l.v == 1).unwrap();
        assert_eq!(ab.cost, 2);
        assert_eq!(ab.path_links, vec![0, 1]);
        assert_eq!(ab.path_vertices, vec![0, 3, 1]);
    }

    #[test]
    fn l1_fixpoint_on_costs() {
        let inst = r4();
        let l1 = metric_complete_undirected(&inst);
        // Re-running completion on an instance whose links are the completed
        // pairs leaves costs unchanged.
        let links: Vec<Link> =
            l1.iter().map(|l| Link { u: l.u, v: l.v, cost: l.cost }).collect();
        let again = SrapInstance::build(inst.n, 0, &[0, 1, 2, 3], links).unwrap();
        let l1b = metric_complete_undirected(&again);
        let costs: Vec<_> = l1.iter().map(|l| (l.u, l.v, l.cost)).collect();
        let costs_b: Vec<_> = l1b.iter().map(|l| (l.u, l.v, l.cost)).collect();
        assert_eq!(costs, costs_b);
    }

    #[test]
    fn shadows_on_r4() {
        let inst = r4();
        let l1 = metric_complete_undirected(&inst);
        let l2 = shadow_complete(&l1);
        let have: Vec<(usize, usize, Cost)> = l2.iter().map(|a| (a.tail, a.head, a.cost)).collect();
        // {1,3}: shadows (1,3),(3,1), shortenings (2,3),(2,1).
        // {0,2}: shadows (0,2),(2,0), shortenings (1,2),(1,0).
        let mut expected = vec![
            (1, 3, 1),
            (3, 1, 1),
            (2, 3, 1),
            (2, 1, 1),
            (0, 2, 1),
            (2, 0, 1),
            (1, 2, 1),
            (1, 0, 1),
        ];
        expected.sort();
        assert_eq!(have, expected);
    }

    #[test]
    fn ring_adjacent_link_has_no_strict_shortening() {
        let l1 = vec![CompletedLink {
            u: 1,
            v: 2,
            cost: 5,
            path_links: vec![0],
            path_vertices: vec![1, 2],
        }];
        let l2 = shadow_complete(&l1);
        assert_eq!(l2.len(), 2);
        assert!(l2.iter().all(|a| matches!(a.provenance, Provenance::Shadow { .. })));
    }

    #[test]
    fn directed_completion_composes() {
        let inst = r4();
        let comp = complete(&inst);
        assert_eq!(comp.arc_cost(0, 2), Some(1));
        // (3,2) composes (3,1) then (1,2).
        let arc = comp.arc(3, 2).unwrap();
        assert_eq!(arc.cost, 2);
        assert!(matches!(&arc.provenance, Provenance::Composition { pieces } if pieces.len() == 2));
    }

    #[test]
    fn chain_costs_add() {
        // Ring 0-1-2 with links {0,1}:2 and {1,2}:3; arc (0,2) costs 5.
        let inst = SrapInstance::build(
            3,
            0,
            &[0, 1, 2],
            vec![Link { u: 0, v: 1, cost: 2 }, Link { u: 1, v: 2, cost: 3 }],
        )
        .unwrap();
        let comp = complete(&inst);
        assert_eq!(comp.arc_cost(0, 2), Some(5));
    }

    #[test]
    fn directed_completion_idempotent() {
        let inst = r4();
        let comp = complete(&inst);
        let again = metric_complete_directed(inst.n, &comp.arcs);
        let a: Vec<(usize, usize, Cost)> =
            comp.arcs.iter().map(|x| (x.tail, x.head, x.cost)).collect();
        let b: Vec<(usize, usize, Cost)> =
            again.iter().map(|x| (x.tail, x.head, x.cost)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn complete_instance_property_holds() {
        let inst = r4();
        assert!(complete(&inst).is_complete());
    }

    #[test]
    fn empty_links_complete_to_nothing() {
        let inst = SrapInstance::build(4, 0, &[0, 1], vec![]).unwrap();
        let comp = complete(&inst);
        assert!(comp.l1.is_empty());
        assert!(comp.arcs.is_empty());
    }

    #[test]
    fn kappa_examples() {
        let inst = r4();
        let comp = complete(&inst);
        // (2,3) is a shortening of the shadow of {1,3}.
        let k = comp.kappa(comp.arc(2, 3).unwrap()).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!((comp.l1[k[0]].u, comp.l1[k[0]].v), (1, 3));
        // (3,2) composes through both completed links, at cost 2 = arc cost.
        let arc = comp.arc(3, 2).unwrap();
        let k = comp.kappa(arc).unwrap();
        let pairs: Vec<(usize, usize)> = k.iter().map(|&i| (comp.l1[i].u, comp.l1[i].v)).collect();
        assert_eq!(pairs, vec![(0, 2), (1, 3)]);
        assert_eq!(comp.kappa_cost(arc).unwrap(), 2);
        // A direct shadow has a singleton kappa of equal cost.
        let shadow = comp.arc(1, 3).unwrap();
        assert_eq!(comp.kappa(shadow).unwrap().len(), 1);
        assert_eq!(comp.kappa_cost(shadow).unwrap(), shadow.cost);
    }

    #[test]
    fn kappa_dominance_on_r4() {
        let inst = r4();
        let comp = complete(&inst);
        for arc in &comp.arcs {
            // Cost dominance.
            assert!(comp.kappa_cost(arc).unwrap() <= arc.cost, "kappa more expensive for {arc:?}");
            // Coverage dominance: every cut the arc enters is covered by kappa.
            let ids = comp.kappa(arc).unwrap();
            for cut in inst.dangerous_cuts() {
                if arc_enters(arc.tail, arc.head, cut) {
                    assert!(
                        ids.iter().any(|&i| {
                            let l = &comp.l1[i];
                            crate::model::HyperLink::new(vec![l.u, l.v], l.cost, None).covers(cut)
                        }),
                        "kappa misses cut {cut} entered by {arc:?}"
                    );
                }
            }
        }
    }
}
