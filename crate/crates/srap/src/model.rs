//! Instance representation and ring geometry.
//!
//! Ring vertices are numbered 0..n-1 in circular order with root 0 and root
//! edge {0, n-1}. Outside Steiner vertices are n..n+m-1. Deleting the root
//! edge turns the ring into the path 0..n-1, so intervals of positions stand
//! in for ring cuts: a dangerous cut is an interval of {1..n-1} containing a
//! terminal.

use std::fmt;

/// Link costs. Nonnegative by construction; callers pre-scale rationals.
pub type Cost = u64;

/// Index of a link in `SrapInstance::links`.
pub type LinkId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub u: usize,
    pub v: usize,
    pub cost: Cost,
}

impl Link {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A contiguous range of ring positions, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A dangerous ring-cut: an interval of {1..n-1} containing a terminal.
pub type DangerousCut = Interval;

/// A set of ring vertices priced at the cheapest full component joining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperLink {
    /// Ring vertices joined, sorted ascending; at least two.
    pub vertices: Vec<usize>,
    pub cost: Cost,
    /// Link ids of the cheapest full component joining `vertices`, when known.
    pub realization: Option<Vec<LinkId>>,
}

impl HyperLink {
    pub fn new(mut vertices: Vec<usize>, cost: Cost, realization: Option<Vec<LinkId>>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        assert!(vertices.len() >= 2, "hyper-link needs two distinct ring vertices");
        HyperLink { vertices, cost, realization }
    }

    pub fn min_vertex(&self) -> usize {
        self.vertices[0]
    }

    pub fn max_vertex(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Some vertex lies inside the interval.
    pub fn touches(&self, cut: Interval) -> bool {
        // First vertex >= lo, if any, is inside iff <= hi.
        match self.vertices.binary_search(&cut.lo) {
            Ok(_) => true,
            Err(pos) => pos < self.vertices.len() && self.vertices[pos] <= cut.hi,
        }
    }

    /// True iff the vertex set intersects both the cut and its complement.
    pub fn covers(&self, cut: Interval) -> bool {
        self.touches(cut) && (self.min_vertex() < cut.lo || self.max_vertex() > cut.hi)
    }

    /// Minimal interval of ring positions spanning the vertex set.
    pub fn span(&self) -> Interval {
        Interval::new(self.min_vertex(), self.max_vertex())
    }
}

/// Provenance of a completed directed link, chaining back to original links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// One of the two orientations of a completed undirected link.
    Shadow { l1: usize },
    /// Head-preserving contraction of a shadow of a completed undirected link.
    Shortening { l1: usize },
    /// Metric completion over a directed path of shadow/shortening links.
    Composition { pieces: Vec<usize> },
    /// Added by the artificial extension; never lifted back.
    Artificial,
    /// Zero-cost link introduced by a cactus unfolding.
    ZeroCostReduction,
}

/// A directed link over ring vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedLink {
    pub tail: usize,
    pub head: usize,
    pub cost: Cost,
    pub provenance: Provenance,
}

impl DirectedLink {
    /// True iff the link enters the cut: head inside, tail outside.
    pub fn enters(&self, cut: Interval) -> bool {
        cut.contains(self.head) && !cut.contains(self.tail)
    }
}

/// True iff a directed (tail, head) pair enters the cut.
pub fn arc_enters(tail: usize, head: usize, cut: Interval) -> bool {
    cut.contains(head) && !cut.contains(tail)
}

/// Minimal interval containing all of `a` and not crossing the root edge.
pub fn interval_of(a: &[usize]) -> Interval {
    assert!(!a.is_empty(), "interval_of on empty set");
    let lo = *a.iter().min().unwrap();
    let hi = *a.iter().max().unwrap();
    Interval::new(lo, hi)
}

/// Exact nonnegative rational used for cost ratios, kept in lowest terms so
/// equality is value equality. `den == 0` means infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: Cost,
    pub den: Cost,
}

impl Ratio {
    pub const INFINITE: Ratio = Ratio { num: 1, den: 0 };

    pub fn new(num: Cost, den: Cost) -> Self {
        if den == 0 {
            return Ratio::INFINITE;
        }
        if num == 0 {
            return Ratio { num: 0, den: 1 };
        }
        fn gcd(a: Cost, b: Cost) -> Cost {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(num, den);
        Ratio { num: num / g, den: den / g }
    }

    pub fn is_infinite(&self) -> bool {
        self.den == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.den == 0 {
            f64::INFINITY
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.is_infinite(), other.is_infinite()) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            (false, false) => {
                (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
            }
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    RingTooSmall { n: usize },
    RootNotTerminal,
    TerminalOutOfRange { v: usize },
    EndpointOutOfRange { v: usize },
    SelfLoop { u: usize },
    DuplicateLink { u: usize, v: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::RingTooSmall { n } => write!(f, "ring needs at least 3 vertices, got {n}"),
            ModelError::RootNotTerminal => write!(f, "root vertex 0 must be a terminal"),
            ModelError::TerminalOutOfRange { v } => write!(f, "terminal {v} is not a ring vertex"),
            ModelError::EndpointOutOfRange { v } => write!(f, "link endpoint {v} out of range"),
            ModelError::SelfLoop { u } => write!(f, "link endpoints must differ, got ({u}, {u})"),
            ModelError::DuplicateLink { u, v } => write!(f, "duplicate link pair ({u}, {v})"),
        }
    }
}

impl std::error::Error for ModelError {}

/// A Steiner ring augmentation instance.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrapInstance {
    /// Ring size. Vertices 0..n-1 in circular order, root 0, root edge {0, n-1}.
    pub n: usize,
    /// Outside Steiner vertices n..n+m-1.
    pub m: usize,
    /// terminal[v] for ring vertices; terminal[0] always true.
    pub terminal: Vec<bool>,
    pub links: Vec<Link>,
}

impl SrapInstance {
    pub fn build(
        n: usize,
        m: usize,
        terminals: &[usize],
        links: Vec<Link>,
    ) -> Result<Self, ModelError> {
        if n < 3 {
            return Err(ModelError::RingTooSmall { n });
        }
        let mut terminal = vec![false; n];
        for &t in terminals {
            if t >= n {
                return Err(ModelError::TerminalOutOfRange { v: t });
            }
            terminal[t] = true;
        }
        if !terminal[0] {
            return Err(ModelError::RootNotTerminal);
        }
        let mut seen = std::collections::HashSet::new();
        for l in &links {
            if l.u == l.v {
                return Err(ModelError::SelfLoop { u: l.u });
            }
            for v in [l.u, l.v] {
                if v >= n + m {
                    return Err(ModelError::EndpointOutOfRange { v });
                }
            }
            if !seen.insert(l.endpoints()) {
                let (u, v) = l.endpoints();
                return Err(ModelError::DuplicateLink { u, v });
            }
        }
        Ok(SrapInstance { n, m, terminal, links })
    }

    pub fn num_vertices(&self) -> usize {
        self.n + self.m
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        v < self.n && self.terminal[v]
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.terminal[v]).collect()
    }

    pub fn is_ring_vertex(&self, v: usize) -> bool {
        v < self.n
    }

    /// All dangerous ring-cuts in lexicographic (lo, hi) order.
    pub fn dangerous_cuts(&self) -> Vec<DangerousCut> {
        let mut cuts = Vec::new();
        for lo in 1..self.n {
            let mut has_terminal = false;
            for hi in lo..self.n {
                has_terminal |= self.terminal[hi];
                if has_terminal {
                    cuts.push(Interval::new(lo, hi));
                }
            }
        }
        cuts
    }

    /// All interval cuts of {1..n-1}, terminal or not, lexicographic order.
    pub fn all_ring_cuts(&self) -> Vec<Interval> {
        let mut cuts = Vec::new();
        for lo in 1..self.n {
            for hi in lo..self.n {
                cuts.push(Interval::new(lo, hi));
            }
        }
        cuts
    }

    pub fn total_link_cost(&self, ids: &[LinkId]) -> Cost {
        ids.iter().map(|&i| self.links[i].cost).sum()
    }

    /// Ring edges as vertex pairs, including the root edge {0, n-1}.
    pub fn ring_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = (0..self.n - 1).map(|i| (i, i + 1)).collect();
        edges.push((0, self.n - 1));
        edges
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// n=4, all terminals, links {1,3}:1 and {0,2}:1.
    pub fn r4() -> SrapInstance {
        SrapInstance::build(
            4,
            0,
            &[0, 1, 2, 3],
            vec![Link { u: 1, v: 3, cost: 1 }, Link { u: 0, v: 2, cost: 1 }],
        )
        .unwrap()
    }

    /// Same ring as r4 but vertex 2 is a Steiner ring vertex.
    pub fn r4s() -> SrapInstance {
        SrapInstance::build(
            4,
            0,
            &[0, 1, 3],
            vec![Link { u: 1, v: 3, cost: 1 }, Link { u: 0, v: 2, cost: 1 }],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn build_accepts_fixtures() {
        let inst = r4();
        assert_eq!(inst.n, 4);
        assert_eq!(inst.terminals(), vec![0, 1, 2, 3]);
        let inst = r4s();
        assert_eq!(inst.terminals(), vec![0, 1, 3]);
    }

    #[test]
    fn build_rejects_bad_instances() {
        // Root missing from terminals.
        assert_eq!(
            SrapInstance::build(4, 0, &[1, 2], vec![]),
            Err(ModelError::RootNotTerminal)
        );
        assert_eq!(SrapInstance::build(2, 0, &[0], vec![]), Err(ModelError::RingTooSmall { n: 2 }));
        assert_eq!(
            SrapInstance::build(4, 0, &[0], vec![Link { u: 0, v: 9, cost: 1 }]),
            Err(ModelError::EndpointOutOfRange { v: 9 })
        );
        assert_eq!(
            SrapInstance::build(4, 0, &[0], vec![Link { u: 2, v: 2, cost: 1 }]),
            Err(ModelError::SelfLoop { u: 2 })
        );
        assert_eq!(
            SrapInstance::build(
                4,
                0,
                &[0],
                vec![Link { u: 1, v: 3, cost: 1 }, Link { u: 3, v: 1, cost: 2 }]
            ),
            Err(ModelError::DuplicateLink { u: 1, v: 3 })
        );
    }

    #[test]
    fn dangerous_cuts_r4() {
        let cuts = r4().dangerous_cuts();
        assert_eq!(cuts.len(), 6);
        let expected: Vec<Interval> = vec![
            Interval::new(1, 1),
            Interval::new(1, 2),
            Interval::new(1, 3),
            Interval::new(2, 2),
            Interval::new(2, 3),
            Interval::new(3, 3),
        ];
        assert_eq!(cuts, expected);
    }

    #[test]
    fn dangerous_cuts_r4s_drops_steiner_singleton() {
        let cuts = r4s().dangerous_cuts();
        assert_eq!(cuts.len(), 5);
        assert!(!cuts.contains(&Interval::new(2, 2)));
    }

    #[test]
    fn dangerous_cuts_smallest_ring() {
        let inst = SrapInstance::build(3, 0, &[0, 1, 2], vec![]).unwrap();
        let cuts = inst.dangerous_cuts();
        assert_eq!(
            cuts,
            vec![Interval::new(1, 1), Interval::new(1, 2), Interval::new(2, 2)]
        );
    }

    #[test]
    fn cut_count_bound() {
        for n in 3..10 {
            let all: Vec<usize> = (0..n).collect();
            let inst = SrapInstance::build(n, 0, &all, vec![]).unwrap();
            assert_eq!(inst.dangerous_cuts().len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn covers_examples() {
        let h13 = HyperLink::new(vec![1, 3], 1, None);
        let h02 = HyperLink::new(vec![0, 2], 1, None);
        assert!(h13.covers(Interval::new(1, 2)));
        assert!(!h13.covers(Interval::new(1, 3)));
        assert!(!h02.covers(Interval::new(1, 1)));
    }

    #[test]
    fn enters_examples() {
        let arc = |tail, head| DirectedLink { tail, head, cost: 0, provenance: Provenance::Artificial };
        assert!(arc(0, 1).enters(Interval::new(1, 2)));
        assert!(!arc(1, 2).enters(Interval::new(1, 2)));
        assert!(arc(2, 3).enters(Interval::new(3, 3)));
        // A link and its reverse never enter the same cut.
        for (t, h) in [(0, 1), (1, 2), (2, 0), (3, 1)] {
            for cut in r4().dangerous_cuts() {
                assert!(!(arc_enters(t, h, cut) && arc_enters(h, t, cut)));
            }
        }
    }

    #[test]
    fn interval_of_examples() {
        assert_eq!(interval_of(&[1, 3]), Interval::new(1, 3));
        assert_eq!(interval_of(&[2, 4]), Interval::new(2, 4));
        assert_eq!(interval_of(&[0, 3]), Interval::new(0, 3));
        assert_eq!(interval_of(&[5]), Interval::new(5, 5));
    }
}
