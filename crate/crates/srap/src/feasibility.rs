//! Feasibility checks for hyper-link, directed, and mixed solutions, plus the
//! max-flow certification of the final augmented graph.
//!
//! Two independent routes exist on purpose: the hyper-link checks reason about
//! dangerous ring-cuts and the intersection graph, while
//! [`verify_edge_connectivity`] runs max-flow on the assembled multigraph.
//! Tests assert the two routes agree.

use crate::dsu::UnionFind;
use crate::model::{arc_enters, HyperLink, SrapInstance};

/// True iff the two vertex sets intersect as hyper-links: they share a vertex,
/// or each has a vertex strictly between two vertices of the other in
/// ring-path order.
pub fn intersecting(a: &HyperLink, b: &HyperLink) -> bool {
    if a.vertices.iter().any(|v| b.contains(*v)) {
        return true;
    }
    let a_inside_b = a.vertices.iter().any(|&v| b.min_vertex() < v && v < b.max_vertex());
    let b_inside_a = b.vertices.iter().any(|&v| a.min_vertex() < v && v < a.max_vertex());
    a_inside_b && b_inside_a
}

/// The hyper-link intersection graph over a fixed list of hyper-links.
///
/// Adjacency is symmetric and irreflexive. `by_vertex` maps each ring vertex
/// to the hyper-links containing it.
pub struct IntersectionGraph<'a> {
    pub hyperlinks: &'a [HyperLink],
    pub adj: Vec<Vec<usize>>,
    pub by_vertex: Vec<Vec<usize>>,
}

impl<'a> IntersectionGraph<'a> {
    pub fn new(inst: &SrapInstance, hyperlinks: &'a [HyperLink]) -> Self {
        let mut adj = vec![Vec::new(); hyperlinks.len()];
        for i in 0..hyperlinks.len() {
            for j in i + 1..hyperlinks.len() {
                if intersecting(&hyperlinks[i], &hyperlinks[j]) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut by_vertex = vec![Vec::new(); inst.n];
        for (i, h) in hyperlinks.iter().enumerate() {
            for &v in &h.vertices {
                by_vertex[v].push(i);
            }
        }
        IntersectionGraph { hyperlinks, adj, by_vertex }
    }

    /// Union-find over the hyper-links of `members` connected by intersection.
    pub fn components(&self, members: &[usize]) -> UnionFind {
        let mut uf = UnionFind::new(self.hyperlinks.len());
        let in_set: std::collections::HashSet<usize> = members.iter().copied().collect();
        for &i in members {
            for &j in &self.adj[i] {
                if in_set.contains(&j) {
                    uf.union(i, j);
                }
            }
        }
        uf
    }
}

/// Path-criterion feasibility: every terminal reaches the root in the
/// intersection graph restricted to `sol`.
pub fn is_feasible_hyper(inst: &SrapInstance, sol: &[HyperLink]) -> bool {
    let mut uf = UnionFind::new(sol.len());
    for i in 0..sol.len() {
        for j in i + 1..sol.len() {
            if intersecting(&sol[i], &sol[j]) {
                uf.union(i, j);
            }
        }
    }
    let root_links: Vec<usize> =
        (0..sol.len()).filter(|&i| sol[i].contains(0)).collect();
    'terminals: for t in inst.terminals() {
        if t == 0 {
            continue;
        }
        for i in 0..sol.len() {
            if sol[i].contains(t) && root_links.iter().any(|&r| uf.same(i, r)) {
                continue 'terminals;
            }
        }
        return false;
    }
    true
}

/// Cut-by-cut feasibility: every dangerous ring-cut is covered by some
/// hyper-link of `sol`. Must agree with [`is_feasible_hyper`].
pub fn is_feasible_hyper_by_cuts(inst: &SrapInstance, sol: &[HyperLink]) -> bool {
    inst.dangerous_cuts().iter().all(|&cut| sol.iter().any(|h| h.covers(cut)))
}

/// True iff every dangerous cut is entered by some arc of `arcs`.
pub fn is_feasible_directed(inst: &SrapInstance, arcs: &[(usize, usize)]) -> bool {
    inst.dangerous_cuts()
        .iter()
        .all(|&cut| arcs.iter().any(|&(t, h)| arc_enters(t, h, cut)))
}

/// True iff every dangerous cut is covered by a hyper-link of `sol` or
/// entered by an arc of `arcs`.
pub fn is_feasible_mixed(inst: &SrapInstance, sol: &[HyperLink], arcs: &[(usize, usize)]) -> bool {
    inst.dangerous_cuts().iter().all(|&cut| {
        sol.iter().any(|h| h.covers(cut)) || arcs.iter().any(|&(t, h)| arc_enters(t, h, cut))
    })
}

/// Max-flow value between `s` and `t` in an undirected multigraph given as an
/// edge list with unit capacity per parallel edge. Augmenting-path search
/// (Edmonds-Karp style) on a residual capacity matrix.
pub fn max_flow(num_vertices: usize, edges: &[(usize, usize)], s: usize, t: usize) -> u64 {
    assert_ne!(s, t);
    let mut cap = vec![vec![0u64; num_vertices]; num_vertices];
    for &(u, v) in edges {
        cap[u][v] += 1;
        cap[v][u] += 1;
    }
    let mut flow = 0;
    loop {
        // BFS for a shortest augmenting path.
        let mut parent = vec![usize::MAX; num_vertices];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..num_vertices {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut bottleneck = u64::MAX;
        let mut v = t;
        while v != s {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
}

/// True iff the multigraph has at least `k` pairwise edge-disjoint paths
/// between every pair of terminals, by max-flow per pair.
pub fn verify_edge_connectivity(
    num_vertices: usize,
    edges: &[(usize, usize)],
    terminals: &[usize],
    k: u64,
) -> bool {
    for (i, &s) in terminals.iter().enumerate() {
        for &t in &terminals[i + 1..] {
            if s == t {
                continue;
            }
            if max_flow(num_vertices, edges, s, t) < k {
                return false;
            }
        }
    }
    true
}

/// Ring edges plus the realized links, as a multigraph edge list.
pub fn augmented_graph(inst: &SrapInstance, link_ids: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = inst.ring_edges();
    for &id in link_ids {
        let l = inst.links[id];
        edges.push((l.u, l.v));
    }
    edges
}
