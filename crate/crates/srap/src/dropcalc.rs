//! The drop calculus over an R-special directed solution: responsibility
//! sets, v-bad intervals, the artificial extension with its extended least
//! common ancestor, and drop computation.
//!
//! Three routes to the same set exist: the responsibility definition (in the
//! oracle module), the path criterion through the intersection graph, and the
//! lca formula on connected sets. [`DropEngine::drop`] uses the per-component
//! extent test, which is the path criterion evaluated in O(1) per component.

use std::collections::{BTreeMap, BTreeSet};

use crate::dsu::UnionFind;
use crate::feasibility::intersecting;
use crate::model::{HyperLink, Interval, SrapInstance};

/// Maximal interval around terminal `v` containing no terminal that is a
/// non-descendant of `v` in the arborescence.
pub fn v_bad_interval(inst: &SrapInstance, f0: &[(usize, usize)], v: usize) -> Interval {
    assert!(inst.is_terminal(v), "v-bad intervals are defined for terminals");
    let desc = descendants(inst, f0, v);
    let blocked = |u: usize| inst.is_terminal(u) && !desc.contains(&u);
    let mut lo = v;
    while lo > 0 && !blocked(lo - 1) {
        lo -= 1;
    }
    let mut hi = v;
    while hi + 1 < inst.n && !blocked(hi + 1) {
        hi += 1;
    }
    Interval::new(lo, hi)
}

/// Terminals reachable from `v` in the arborescence, including `v`.
pub fn descendants(inst: &SrapInstance, f0: &[(usize, usize)], v: usize) -> BTreeSet<usize> {
    let _ = inst;
    let mut out = BTreeSet::from([v]);
    let mut frontier = vec![v];
    while let Some(u) = frontier.pop() {
        for &(t, h) in f0 {
            if t == u && out.insert(h) {
                frontier.push(h);
            }
        }
    }
    out
}

/// Per-cut responsible arc and per-arc responsibility sets. Responsibility is
/// resolved through v-bad intervals: (u, v) is responsible for C iff v is in
/// C and C lies inside the v-bad interval.
#[derive(Debug, Clone)]
pub struct ResponsibilityIndex {
    /// Dangerous cut -> its unique responsible arc.
    pub by_cut: Vec<(Interval, (usize, usize))>,
    /// Arc -> the cuts it is responsible for, in cut order.
    pub by_arc: BTreeMap<(usize, usize), Vec<Interval>>,
}

pub fn responsibility(inst: &SrapInstance, f0: &[(usize, usize)]) -> ResponsibilityIndex {
    let vbad: BTreeMap<usize, Interval> =
        f0.iter().map(|&(_, h)| (h, v_bad_interval(inst, f0, h))).collect();
    let mut by_cut = Vec::new();
    let mut by_arc: BTreeMap<(usize, usize), Vec<Interval>> =
        f0.iter().map(|&a| (a, Vec::new())).collect();
    for cut in inst.dangerous_cuts() {
        let owners: Vec<(usize, usize)> = f0
            .iter()
            .copied()
            .filter(|&(_, h)| cut.contains(h) && vbad[&h].contains_interval(cut))
            .collect();
        assert_eq!(owners.len(), 1, "cut {cut} has {} responsible arcs", owners.len());
        by_cut.push((cut, owners[0]));
        by_arc.get_mut(&owners[0]).unwrap().push(cut);
    }
    for (arc, cuts) in &by_arc {
        assert!(!cuts.is_empty(), "arc {arc:?} is responsible for no cut");
    }
    ResponsibilityIndex { by_cut, by_arc }
}

/// The artificial extension of an R-special solution to a V(H)-special
/// arborescence over all ring vertices: each Steiner ring vertex hangs off
/// the terminal of the minimal v-bad interval containing it, in a chain.
#[derive(Debug, Clone)]
pub struct ArtificialExtension {
    /// Parent per ring vertex; None exactly at the root.
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// v-bad interval per terminal (by ring vertex id).
    pub vbad: BTreeMap<usize, Interval>,
}

pub fn artificial_extension(inst: &SrapInstance, f0: &[(usize, usize)]) -> ArtificialExtension {
    let terminals = inst.terminals();
    let vbad: BTreeMap<usize, Interval> =
        terminals.iter().map(|&v| (v, v_bad_interval(inst, f0, v))).collect();
    // The family of v-bad intervals is laminar.
    for (&a, ia) in &vbad {
        for (&b, ib) in &vbad {
            if a < b {
                let disjoint = ia.hi < ib.lo || ib.hi < ia.lo;
                let nested = ia.contains_interval(*ib) || ib.contains_interval(*ia);
                assert!(disjoint || nested, "v-bad intervals of {a} and {b} cross");
            }
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; inst.n];
    for &(t, h) in f0 {
        parent[h] = Some(t);
    }
    // Minimal enclosing interval per Steiner ring vertex; laminarity makes
    // the minimum unique.
    let mut owner: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for u in 0..inst.n {
        if inst.is_terminal(u) {
            continue;
        }
        let (&v, _) = vbad
            .iter()
            .filter(|(_, iv)| iv.contains(u))
            .min_by_key(|(_, iv)| iv.len())
            .expect("root interval spans the whole ring");
        owner.entry(v).or_default().push(u);
    }
    for (&v, members) in &owner {
        let left: Vec<usize> = members.iter().copied().filter(|&u| u < v).collect();
        let right: Vec<usize> = members.iter().copied().filter(|&u| u > v).collect();
        // Chains move outward from the terminal.
        let mut prev = v;
        for &u in left.iter().rev() {
            parent[u] = Some(prev);
            prev = u;
        }
        let mut prev = v;
        for &u in &right {
            parent[u] = Some(prev);
            prev = u;
        }
    }
    let mut depth = vec![0usize; inst.n];
    for v in 0..inst.n {
        let mut d = 0;
        let mut u = v;
        while let Some(p) = parent[u] {
            d += 1;
            u = p;
            assert!(d <= inst.n, "parent chain has a cycle");
        }
        depth[v] = d;
    }
    let ext = ArtificialExtension { parent, depth, vbad };
    debug_assert!(ext.descendant_sets_match(inst), "extension descendants differ from v-bad");
    ext
}

impl ArtificialExtension {
    pub fn lca2(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Extended least common ancestor of a nonempty ring-vertex set.
    pub fn lca(&self, set: &[usize]) -> usize {
        let mut it = set.iter();
        let first = *it.next().expect("lca of empty set");
        it.fold(first, |acc, &v| self.lca2(acc, v))
    }

    /// True iff `anc` is an ancestor of `v` (or equal) in the extension.
    pub fn is_ancestor(&self, anc: usize, mut v: usize) -> bool {
        loop {
            if v == anc {
                return true;
            }
            match self.parent[v] {
                Some(p) => v = p,
                None => return false,
            }
        }
    }

    fn descendant_sets_match(&self, inst: &SrapInstance) -> bool {
        for (&v, iv) in &self.vbad {
            for u in 0..inst.n {
                if self.is_ancestor(v, u) != iv.contains(u) {
                    return false;
                }
            }
        }
        true
    }
}

/// Precomputed state for fast drop queries against a fixed R-special
/// solution.
pub struct DropEngine<'a> {
    pub inst: &'a SrapInstance,
    pub f0: Vec<(usize, usize)>,
    pub ext: ArtificialExtension,
    /// In-arc tail per ring vertex, where present.
    pub in_tail: Vec<Option<usize>>,
}

impl<'a> DropEngine<'a> {
    pub fn new(inst: &'a SrapInstance, f0: &[(usize, usize)]) -> Self {
        let ext = artificial_extension(inst, f0);
        let mut in_tail = vec![None; inst.n];
        for &(t, h) in f0 {
            in_tail[h] = Some(t);
        }
        DropEngine { inst, f0: f0.to_vec(), ext, in_tail }
    }

    /// Arcs of f0 droppable after adding `k`: the head reaches, through the
    /// intersection graph of `k`, a vertex outside its v-bad interval.
    pub fn drop(&self, k: &[HyperLink]) -> Vec<(usize, usize)> {
        if k.is_empty() {
            return Vec::new();
        }
        let mut uf = UnionFind::new(k.len());
        for i in 0..k.len() {
            for j in i + 1..k.len() {
                if intersecting(&k[i], &k[j]) {
                    uf.union(i, j);
                }
            }
        }
        // Extent and membership per component.
        let mut extent: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut comp_of_vertex: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, h) in k.iter().enumerate() {
            let root = uf.clone().find(i);
            let e = extent.entry(root).or_insert((usize::MAX, 0));
            e.0 = e.0.min(h.min_vertex());
            e.1 = e.1.max(h.max_vertex());
            for &v in &h.vertices {
                comp_of_vertex.insert(v, root);
            }
        }
        let mut out = Vec::new();
        for &(t, h) in &self.f0 {
            if let Some(&comp) = comp_of_vertex.get(&h) {
                let (lo, hi) = extent[&comp];
                let iv = self.ext.vbad[&h];
                if lo < iv.lo || hi > iv.hi {
                    out.push((t, h));
                }
            }
        }
        out
    }

    /// Total of the supplied per-head weights over the dropped arcs.
    pub fn drop_weight(&self, k: &[HyperLink], weight: &[i128]) -> i128 {
        self.drop(k).iter().map(|&(_, h)| weight[h]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotConnected;

impl std::fmt::Display for NotConnected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "hyper-link set is not connected in the intersection graph")
    }
}

impl std::error::Error for NotConnected {}

/// Drop of a set connected in the intersection graph, via the lca formula:
/// all in-arcs of vertices of the set except the in-arc of the extended lca.
pub fn drop_connected_lca(
    engine: &DropEngine<'_>,
    k: &[HyperLink],
) -> Result<Vec<(usize, usize)>, NotConnected> {
    if k.is_empty() {
        return Ok(Vec::new());
    }
    let mut uf = UnionFind::new(k.len());
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            if intersecting(&k[i], &k[j]) {
                uf.union(i, j);
            }
        }
    }
    let root = uf.find(0);
    for i in 1..k.len() {
        if uf.find(i) != root {
            return Err(NotConnected);
        }
    }
    let vertices: BTreeSet<usize> = k.iter().flat_map(|h| h.vertices.iter().copied()).collect();
    let vset: Vec<usize> = vertices.iter().copied().collect();
    let lca = engine.ext.lca(&vset);
    Ok(engine
        .f0
        .iter()
        .copied()
        .filter(|&(_, h)| vertices.contains(&h) && h != lca)
        .collect())
}

/// Drop computed as cuts demand: every responsible cut covered. Used for the
/// debug cross-check; the oracle module recomputes responsibility on its own.
pub fn drop_by_responsibility(
    inst: &SrapInstance,
    f0: &[(usize, usize)],
    k: &[HyperLink],
) -> Vec<(usize, usize)> {
    let resp = responsibility(inst, f0);
    f0.iter()
        .copied()
        .filter(|arc| resp.by_arc[arc].iter().all(|&cut| k.iter().any(|h| h.covers(cut))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{r4, r4s};
    use crate::model::SrapInstance;
    use crate::oracle::brute_force_drop;

    fn h(vs: &[usize]) -> HyperLink {
        HyperLink::new(vs.to_vec(), 1, None)
    }

    const PATH_F0: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 3)];

    #[test]
    fn vbad_intervals_on_r4_path() {
        let inst = r4();
        assert_eq!(v_bad_interval(&inst, &PATH_F0, 2), Interval::new(2, 3));
        assert_eq!(v_bad_interval(&inst, &PATH_F0, 1), Interval::new(1, 3));
        assert_eq!(v_bad_interval(&inst, &PATH_F0, 3), Interval::new(3, 3));
        assert_eq!(v_bad_interval(&inst, &PATH_F0, 0), Interval::new(0, 3));
    }

    #[test]
    fn vbad_interval_spans_steiner_ring_vertices() {
        let inst = r4s();
        let f0 = [(0, 1), (1, 3)];
        assert_eq!(v_bad_interval(&inst, &f0, 3), Interval::new(2, 3));
    }

    #[test]
    fn responsibility_on_r4_path() {
        let inst = r4();
        let idx = responsibility(&inst, &PATH_F0);
        assert_eq!(
            idx.by_arc[&(1, 2)],
            vec![Interval::new(2, 2), Interval::new(2, 3)]
        );
        assert_eq!(
            idx.by_arc[&(0, 1)],
            vec![Interval::new(1, 1), Interval::new(1, 2), Interval::new(1, 3)]
        );
        assert_eq!(idx.by_arc[&(2, 3)], vec![Interval::new(3, 3)]);
        // Responsibility partitions the cuts.
        assert_eq!(idx.by_cut.len(), inst.dangerous_cuts().len());
    }

    #[test]
    fn extension_trivial_when_all_terminals() {
        let inst = r4();
        let ext = artificial_extension(&inst, &PATH_F0);
        assert_eq!(ext.parent, vec![None, Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn extension_adds_chain_for_steiner_vertex() {
        let inst = r4s();
        let f0 = [(0, 1), (1, 3)];
        let ext = artificial_extension(&inst, &f0);
        // Vertex 2's minimal enclosing interval is I_3 = [2,3].
        assert_eq!(ext.parent[2], Some(3));
        assert_eq!(ext.lca(&[2, 3]), 3);
        assert_eq!(ext.lca(&[1, 3]), 1);
        assert_eq!(ext.lca(&[2]), 2);
    }

    #[test]
    fn drop_examples_r4() {
        let inst = r4();
        let engine = DropEngine::new(&inst, &PATH_F0);
        assert_eq!(engine.drop(&[h(&[2, 3])]), vec![(2, 3)]);
        assert_eq!(engine.drop(&[h(&[1, 3]), h(&[0, 2])]).len(), 3);
        assert!(engine.drop(&[]).is_empty());
    }

    #[test]
    fn drop_lca_examples() {
        let inst = r4();
        let engine = DropEngine::new(&inst, &PATH_F0);
        assert_eq!(drop_connected_lca(&engine, &[h(&[2, 3])]).unwrap(), vec![(2, 3)]);
        assert_eq!(drop_connected_lca(&engine, &[h(&[1, 3])]).unwrap(), vec![(2, 3)]);
        // Root-containing set spanning all terminals drops everything.
        assert_eq!(drop_connected_lca(&engine, &[h(&[0, 1, 2, 3])]).unwrap().len(), 3);
    }

    #[test]
    fn drop_lca_rejects_disconnected_sets() {
        // Ring of 6 so two disjoint non-interleaved pairs exist.
        let inst = SrapInstance::build(6, 0, &[0, 1, 2, 3, 4, 5], vec![]).unwrap();
        let f0 = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)];
        let engine = DropEngine::new(&inst, &f0);
        assert_eq!(
            drop_connected_lca(&engine, &[h(&[0, 1]), h(&[3, 4])]),
            Err(NotConnected)
        );
    }

    #[test]
    fn drop_routes_agree_on_fixture_cases() {
        let inst = r4();
        let engine = DropEngine::new(&inst, &PATH_F0);
        let cases: Vec<Vec<HyperLink>> = vec![
            vec![],
            vec![h(&[2, 3])],
            vec![h(&[1, 3])],
            vec![h(&[0, 2])],
            vec![h(&[1, 3]), h(&[0, 2])],
            vec![h(&[1, 2]), h(&[2, 3])],
        ];
        for k in cases {
            let fast = engine.drop(&k);
            let def = drop_by_responsibility(&inst, &PATH_F0, &k);
            let brute = brute_force_drop(&inst, &PATH_F0, &k);
            assert_eq!(fast, def, "fast vs definitional on {k:?}");
            assert_eq!(fast, brute, "fast vs oracle on {k:?}");
        }
    }

    #[test]
    fn drop_monotone_under_superset() {
        let inst = r4();
        let engine = DropEngine::new(&inst, &PATH_F0);
        let small = vec![h(&[2, 3])];
        let big = vec![h(&[2, 3]), h(&[0, 2])];
        let ds = engine.drop(&small);
        let db = engine.drop(&big);
        assert!(ds.iter().all(|a| db.contains(a)));
    }
}
