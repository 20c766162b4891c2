//! Interval dynamic program maximizing gain(drop(K)) - cost(K) over
//! alpha-thin hyper-link sets, and the Dinkelbach wrapper minimizing
//! cost(K) / cost(drop(K) ∩ F_cur).
//!
//! Table entries are keyed by an interval C, the covering set B = δ_S(C) of
//! at most alpha hyper-links, and per intersection-component bookkeeping: the
//! component's extended lca (phi) and whether that lca is a vertex of the
//! component (psi). The laminar family certifying thinness is exactly the
//! split tree the recursion walks.

use std::collections::HashMap;

use crate::dropcalc::{ArtificialExtension, DropEngine};
use crate::dsu::UnionFind;
use crate::feasibility::intersecting;
use crate::model::{Cost, HyperLink, Interval, Ratio, SrapInstance};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Part {
    /// Hyper-link ids of one intersection component restricted to B.
    pub members: Vec<usize>,
    /// Extended lca of the component's full vertex set.
    pub phi: usize,
    /// True iff phi is itself a vertex of the component.
    pub psi: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableKey {
    /// Hyper-links covering the interval, sorted.
    pub b: Vec<usize>,
    /// Partition of `b` by intersection components, sorted by smallest member.
    pub parts: Vec<Part>,
}

impl TableKey {
    pub fn empty() -> Self {
        TableKey { b: Vec::new(), parts: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub value: i128,
    pub witness: Vec<usize>,
}

pub struct DpContext<'a> {
    pub inst: &'a SrapInstance,
    pub hyper: &'a [HyperLink],
    pub ext: &'a ArtificialExtension,
    /// Gain of dropping the in-arc of each ring vertex; zero without in-arc.
    pub gain: Vec<i128>,
    /// Cost charged per hyper-link (already scaled by the caller).
    pub link_cost: Vec<i128>,
    pub alpha: usize,
    intersect: Vec<Vec<bool>>,
}

impl<'a> DpContext<'a> {
    pub fn new(
        inst: &'a SrapInstance,
        hyper: &'a [HyperLink],
        ext: &'a ArtificialExtension,
        gain: Vec<i128>,
        link_cost: Vec<i128>,
        alpha: usize,
    ) -> Self {
        assert!(alpha >= 1);
        assert_eq!(gain.len(), inst.n);
        assert_eq!(link_cost.len(), hyper.len());
        let mut intersect = vec![vec![false; hyper.len()]; hyper.len()];
        for i in 0..hyper.len() {
            for j in i + 1..hyper.len() {
                if intersecting(&hyper[i], &hyper[j]) {
                    intersect[i][j] = true;
                    intersect[j][i] = true;
                }
            }
        }
        DpContext { inst, hyper, ext, gain, link_cost, alpha, intersect }
    }

    fn covers(&self, id: usize, c: Interval) -> bool {
        self.hyper[id].covers(c)
    }

    fn vertex_union(&self, ids: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = ids
            .iter()
            .flat_map(|&i| self.hyper[i].vertices.iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Base table for a singleton interval {v}: every subset of the hyper-links
/// containing v (size at most alpha) realizes exactly one key.
fn base_table(ctx: &DpContext<'_>, v: usize) -> HashMap<TableKey, Entry> {
    let at_v: Vec<usize> =
        (0..ctx.hyper.len()).filter(|&i| ctx.hyper[i].contains(v)).collect();
    let mut table = HashMap::new();
    table.insert(TableKey::empty(), Entry { value: 0, witness: Vec::new() });
    let max_size = ctx.alpha.min(at_v.len());
    for size in 1..=max_size {
        for combo in crate::steiner::combinations(at_v.len(), size) {
            let ids: Vec<usize> = combo.iter().map(|&i| at_v[i]).collect();
            let verts = ctx.vertex_union(&ids);
            let phi = ctx.ext.lca(&verts);
            let psi = verts.binary_search(&phi).is_ok();
            let cost: i128 = ids.iter().map(|&i| ctx.link_cost[i]).sum();
            let value = if phi != v { ctx.gain[v] - cost } else { -cost };
            let key = TableKey {
                b: ids.clone(),
                parts: vec![Part { members: ids.clone(), phi, psi }],
            };
            table.insert(key, Entry { value, witness: ids });
        }
    }
    table
}

/// Merge two adjacent-interval keys into the key their union realizes, with
/// the value correction (shared-link cost refund plus released lca gains).
/// `None` when the keys are incompatible.
pub fn merge_entries(
    ctx: &DpContext<'_>,
    c1: Interval,
    k1: &TableKey,
    c2: Interval,
    k2: &TableKey,
) -> Option<(TableKey, i128)> {
    debug_assert_eq!(c1.hi + 1, c2.lo, "intervals must be adjacent");
    let c = Interval::new(c1.lo, c2.hi);
    // Links crossing the internal boundary must be shared.
    let x1: Vec<usize> = k1.b.iter().copied().filter(|&i| ctx.covers(i, c2)).collect();
    let x2: Vec<usize> = k2.b.iter().copied().filter(|&i| ctx.covers(i, c1)).collect();
    if x1 != x2 {
        return None;
    }
    let mut union: Vec<usize> = k1.b.iter().chain(k2.b.iter()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let b: Vec<usize> = union.iter().copied().filter(|&i| ctx.covers(i, c)).collect();
    if b.len() > ctx.alpha {
        return None;
    }

    // Components of the union: intersecting pairs plus same-part edges.
    let pos: HashMap<usize, usize> = union.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let mut uf = UnionFind::new(union.len());
    for (p, &i) in union.iter().enumerate() {
        for (q, &j) in union.iter().enumerate().skip(p + 1) {
            if ctx.intersect[i][j] {
                uf.union(p, q);
            }
        }
    }
    for part in k1.parts.iter().chain(k2.parts.iter()) {
        for w in part.members.windows(2) {
            uf.union(pos[&w[0]], pos[&w[1]]);
        }
    }
    // Constituent parts per merged component.
    let mut comp_parts: HashMap<usize, Vec<&Part>> = HashMap::new();
    for part in k1.parts.iter().chain(k2.parts.iter()) {
        let root = uf.find(pos[&part.members[0]]);
        comp_parts.entry(root).or_default().push(part);
    }
    let mut comp_members: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in &union {
        comp_members.entry(uf.find(pos[&i])).or_default().push(i);
    }

    // Pending lcas inside their own side, before and after the merge.
    let mut pending_before: Vec<usize> = Vec::new();
    for (key_parts, side) in [(&k1.parts, c1), (&k2.parts, c2)] {
        for part in key_parts.iter() {
            if part.psi && side.contains(part.phi) {
                pending_before.push(part.phi);
            }
        }
    }
    pending_before.sort_unstable();
    pending_before.dedup();

    let mut parts: Vec<Part> = Vec::new();
    let mut pending_after: Vec<usize> = Vec::new();
    for (&root, constituents) in &comp_parts {
        let phis: Vec<usize> = constituents.iter().map(|p| p.phi).collect();
        let phi = ctx.ext.lca(&phis);
        let psi = constituents.iter().any(|p| p.psi && p.phi == phi);
        if psi && c.contains(phi) {
            pending_after.push(phi);
        }
        let members: Vec<usize> = comp_members[&root]
            .iter()
            .copied()
            .filter(|i| b.binary_search(i).is_ok())
            .collect();
        if !members.is_empty() {
            parts.push(Part { members, phi, psi });
        }
    }
    pending_after.sort_unstable();
    pending_after.dedup();
    parts.sort();

    let released: i128 = pending_before.iter().map(|&u| ctx.gain[u]).sum::<i128>()
        - pending_after.iter().map(|&u| ctx.gain[u]).sum::<i128>();
    let refund: i128 = k1
        .b
        .iter()
        .filter(|i| k2.b.binary_search(i).is_ok())
        .map(|&i| ctx.link_cost[i])
        .sum();
    Some((TableKey { b, parts }, released + refund))
}

/// Fill the whole table bottom-up by interval length.
pub fn table_fill(ctx: &DpContext<'_>) -> HashMap<Interval, HashMap<TableKey, Entry>> {
    table_fill_bounded(ctx, usize::MAX).expect("unbounded fill cannot abort")
}

/// Bounded fill: gives up (returning `None`) once the number of attempted
/// merges exceeds the work budget, so callers can retry with a smaller alpha.
pub fn table_fill_bounded(
    ctx: &DpContext<'_>,
    work_budget: usize,
) -> Option<HashMap<Interval, HashMap<TableKey, Entry>>> {
    let n = ctx.inst.n;
    let mut work: usize = 0;
    let mut table: HashMap<Interval, HashMap<TableKey, Entry>> = HashMap::new();
    for v in 1..n {
        table.insert(Interval::new(v, v), base_table(ctx, v));
    }
    for len in 2..n {
        for lo in 1..n {
            let hi = lo + len - 1;
            if hi >= n {
                break;
            }
            let mut merged: HashMap<TableKey, Entry> = HashMap::new();
            for s in lo..hi {
                let c1 = Interval::new(lo, s);
                let c2 = Interval::new(s + 1, hi);
                let left = &table[&c1];
                let right = &table[&c2];
                // Bucket the right keys by their boundary-crossing set.
                let mut buckets: HashMap<Vec<usize>, Vec<(&TableKey, &Entry)>> = HashMap::new();
                for (k2, e2) in right {
                    let x2: Vec<usize> =
                        k2.b.iter().copied().filter(|&i| ctx.covers(i, c1)).collect();
                    buckets.entry(x2).or_default().push((k2, e2));
                }
                for (k1, e1) in left {
                    let x1: Vec<usize> =
                        k1.b.iter().copied().filter(|&i| ctx.covers(i, c2)).collect();
                    let Some(bucket) = buckets.get(&x1) else { continue };
                    work += bucket.len();
                    if work > work_budget {
                        return None;
                    }
                    for (k2, e2) in bucket {
                        let Some((key, correction)) = merge_entries(ctx, c1, k1, c2, k2) else {
                            continue;
                        };
                        let value = e1.value + e2.value + correction;
                        let slot = merged.get(&key);
                        if slot.map_or(true, |e| value > e.value) {
                            let mut witness: Vec<usize> =
                                e1.witness.iter().chain(e2.witness.iter()).copied().collect();
                            witness.sort_unstable();
                            witness.dedup();
                            merged.insert(key.clone(), Entry { value, witness });
                        }
                    }
                }
            }
            table.insert(Interval::new(lo, hi), merged);
        }
    }
    Some(table)
}

#[derive(Debug, Clone)]
pub struct SlackResult {
    pub value: i128,
    pub chosen: Vec<usize>,
    /// Alpha actually used; smaller than requested when the key budget bit.
    pub effective_alpha: usize,
}

/// Largest alpha not exceeding the requested one whose estimated table width
/// stays within budget: subsets of at most alpha links out of the worst
/// interval's cover count. At least 1. The bounded fill still aborts when
/// the estimate is too optimistic.
pub fn effective_alpha(
    inst: &SrapInstance,
    hyper: &[HyperLink],
    alpha: usize,
    key_budget: usize,
) -> usize {
    let mut worst = 0usize;
    for lo in 1..inst.n {
        for hi in lo..inst.n {
            let c = Interval::new(lo, hi);
            worst = worst.max(hyper.iter().filter(|h| h.covers(c)).count());
        }
    }
    let mut a = alpha.max(1);
    loop {
        if a == 1 {
            return 1;
        }
        let mut total: u128 = 1;
        let mut binom: u128 = 1;
        for j in 1..=a.min(worst) {
            binom = binom.saturating_mul((worst - j + 1) as u128) / j as u128;
            total = total.saturating_add(binom);
        }
        if total <= key_budget as u128 {
            return a;
        }
        a -= 1;
    }
}

/// Exact maximizer of gain(drop(K)) - cost(K) over alpha-thin subsets; the
/// empty set floors the value at 0.
///
/// Alpha degrades adaptively when the table would exceed the work budget:
/// the search then covers alpha'-thin sets for the largest affordable
/// alpha' <= alpha (reported in the result). Alpha 1 always completes.
pub fn maximize_slack(
    inst: &SrapInstance,
    hyper: &[HyperLink],
    ext: &ArtificialExtension,
    gain: Vec<i128>,
    link_cost: Vec<i128>,
    alpha: usize,
    key_budget: usize,
) -> SlackResult {
    let n = inst.n;
    let mut alpha_eff = effective_alpha(inst, hyper, alpha, key_budget);
    let table = loop {
        let ctx = DpContext::new(
            inst,
            hyper,
            ext,
            gain.clone(),
            link_cost.clone(),
            alpha_eff,
        );
        let budget = if alpha_eff == 1 { usize::MAX } else { key_budget };
        if let Some(table) = table_fill_bounded(&ctx, budget) {
            break table;
        }
        alpha_eff -= 1;
    };
    let top = &table[&Interval::new(1, n - 1)];
    let mut best = Entry { value: 0, witness: Vec::new() };
    for e in top.values() {
        if e.value > best.value || (e.value == best.value && e.witness.len() < best.witness.len())
        {
            best = e.clone();
        }
    }
    SlackResult { value: best.value, chosen: best.witness, effective_alpha: alpha_eff }
}

#[derive(Debug, Clone)]
pub struct RatioResult {
    pub chosen: Vec<usize>,
    pub ratio: Ratio,
    pub iterations: usize,
    pub effective_alpha: usize,
}

/// Minimize c(K) / c(drop(K) ∩ F_cur) over alpha-thin hyper-link subsets by
/// Dinkelbach iteration: exact with integer costs, each iterate strictly
/// decreases the ratio. `None` when no thin set drops anything from F_cur.
pub fn min_ratio_thin_set(
    inst: &SrapInstance,
    hyper: &[HyperLink],
    engine: &DropEngine<'_>,
    arc_cost: &[Cost],
    in_cur: &[bool],
    alpha: usize,
    key_budget: usize,
) -> Option<RatioResult> {
    assert_eq!(arc_cost.len(), engine.f0.len());
    assert_eq!(in_cur.len(), engine.f0.len());
    let drop_cost = |k: &[usize]| -> Cost {
        let hl: Vec<HyperLink> = k.iter().map(|&i| hyper[i].clone()).collect();
        let dropped = engine.drop(&hl);
        engine
            .f0
            .iter()
            .enumerate()
            .filter(|(i, arc)| in_cur[*i] && dropped.contains(arc))
            .map(|(i, _)| arc_cost[i])
            .sum()
    };
    // Initial ratio: the best single hyper-link.
    let mut incumbent: Option<(Vec<usize>, Ratio)> = None;
    for i in 0..hyper.len() {
        let den = drop_cost(&[i]);
        if den == 0 {
            continue;
        }
        let r = Ratio::new(hyper[i].cost, den);
        if incumbent.as_ref().map_or(true, |(_, br)| r < *br) {
            incumbent = Some((vec![i], r));
        }
    }
    let (mut best_ids, mut rho) = incumbent?;
    let mut iterations = 0;
    // The table structure is independent of the gains, so the effective
    // alpha discovered on the first iterate holds for the rest.
    let mut alpha_req = alpha;
    let mut effective;
    loop {
        iterations += 1;
        let mut gain = vec![0i128; inst.n];
        for (i, &(_, h)) in engine.f0.iter().enumerate() {
            if in_cur[i] {
                gain[h] = rho.num as i128 * arc_cost[i] as i128;
            }
        }
        let link_cost: Vec<i128> =
            hyper.iter().map(|h| rho.den as i128 * h.cost as i128).collect();
        let res =
            maximize_slack(inst, hyper, &engine.ext, gain, link_cost, alpha_req, key_budget);
        effective = res.effective_alpha;
        alpha_req = res.effective_alpha;
        if res.value <= 0 {
            return Some(RatioResult {
                chosen: best_ids,
                ratio: rho,
                iterations,
                effective_alpha: effective,
            });
        }
        let num: Cost = res.chosen.iter().map(|&i| hyper[i].cost).sum();
        let den = drop_cost(&res.chosen);
        let next = Ratio::new(num, den);
        assert!(den > 0 && next < rho, "Dinkelbach iterate must strictly decrease");
        best_ids = res.chosen;
        rho = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dropcalc::DropEngine;
    use crate::model::fixtures::r4;
    use crate::model::Link;
    use crate::oracle::{brute_force_max_slack, brute_force_min_ratio, OracleBudget};

    fn h(vs: &[usize], cost: Cost) -> HyperLink {
        HyperLink::new(vs.to_vec(), cost, None)
    }

    /// R4 fan solution with unit completed costs.
    const FAN_F0: [(usize, usize); 3] = [(0, 2), (2, 1), (2, 3)];
    const PATH_F0: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 3)];

    #[test]
    fn slack_on_r4_takes_both_links() {
        let inst = r4();
        let hyper = vec![h(&[1, 3], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &PATH_F0);
        // gain = completed arc costs: (0,1) costs 2, others 1.
        let mut gain = vec![0i128; 4];
        gain[1] = 2;
        gain[2] = 1;
        gain[3] = 1;
        let link_cost: Vec<i128> = hyper.iter().map(|x| x.cost as i128).collect();
        let res = maximize_slack(&inst, &hyper, &engine.ext, gain, link_cost, 4, 100_000);
        assert_eq!(res.chosen, vec![0, 1]);
        assert_eq!(res.value, 4 - 2);
    }

    #[test]
    fn slack_zero_gain_picks_empty() {
        let inst = r4();
        let hyper = vec![h(&[1, 3], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &PATH_F0);
        let res = maximize_slack(
            &inst,
            &hyper,
            &engine.ext,
            vec![0; 4],
            vec![1, 1],
            4,
            100_000,
        );
        assert_eq!(res.value, 0);
        assert!(res.chosen.is_empty());
    }

    #[test]
    fn toy_table_entry_value() {
        let inst = r4();
        let hyper = vec![h(&[1, 3], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &PATH_F0);
        let mut gain = vec![0i128; 4];
        gain[1] = 2;
        gain[2] = 1;
        gain[3] = 1;
        let ctx = DpContext::new(
            &inst,
            &hyper,
            &engine.ext,
            gain,
            vec![1, 1],
            4,
        );
        let table = table_fill(&ctx);
        let top = &table[&Interval::new(1, 3)];
        // The entry realized by both links: B = {{0,2}} (the root link; {1,3}
        // sits inside [1,3]), one part with phi = lca({0,1,2,3}) = 0 and
        // psi = true (0 is a vertex of {0,2}).
        let key = TableKey {
            b: vec![1],
            parts: vec![Part { members: vec![1], phi: 0, psi: true }],
        };
        let entry = top.get(&key).expect("expected key missing");
        // All three arcs dropped, no final deduction at the root: 4 - 2.
        assert_eq!(entry.value, 2);
        assert_eq!(entry.witness, vec![0, 1]);
        // Empty key carries value 0.
        assert_eq!(top[&TableKey::empty()].value, 0);
    }

    #[test]
    fn merge_rejects_boundary_mismatch() {
        let inst = r4();
        let hyper = vec![h(&[1, 3], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &PATH_F0);
        let ctx =
            DpContext::new(&inst, &hyper, &engine.ext, vec![0; 4], vec![1, 1], 4);
        // Left key holds {1,3} which crosses into [2,3]; right key is empty.
        let k1 = TableKey {
            b: vec![0],
            parts: vec![Part { members: vec![0], phi: 1, psi: true }],
        };
        let k2 = TableKey::empty();
        assert_eq!(
            merge_entries(&ctx, Interval::new(1, 1), &k1, Interval::new(2, 3), &k2),
            None
        );
    }

    #[test]
    fn merge_alpha_overflow_is_invalid() {
        let inst = r4();
        let hyper = vec![h(&[0, 1], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &PATH_F0);
        let ctx =
            DpContext::new(&inst, &hyper, &engine.ext, vec![0; 4], vec![1, 1], 1);
        // Both links cover [1,2]; alpha = 1 forbids the union at the top.
        let k1 = TableKey {
            b: vec![0],
            parts: vec![Part { members: vec![0], phi: 0, psi: true }],
        };
        let k2 = TableKey {
            b: vec![1],
            parts: vec![Part { members: vec![1], phi: 0, psi: true }],
        };
        assert_eq!(
            merge_entries(&ctx, Interval::new(1, 1), &k1, Interval::new(2, 2), &k2),
            None
        );
    }

    #[test]
    fn min_ratio_r4_fan() {
        // {1,3} alone is responsible-covered for both (2,1) and (2,3), so it
        // drops cost 2 for cost 1; adding {0,2} drops all three arcs at cost
        // 2. Both give ratio 1/2, the exhaustive minimum.
        let inst = r4();
        let hyper = vec![h(&[1, 3], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &FAN_F0);
        let arc_cost = vec![1, 1, 1];
        let res = min_ratio_thin_set(
            &inst,
            &hyper,
            &engine,
            &arc_cost,
            &[true, true, true],
            4,
            100_000,
        )
        .unwrap();
        assert_eq!(res.ratio, Ratio::new(1, 2));
        let f0c: Vec<(usize, usize, Cost)> =
            FAN_F0.iter().zip(&arc_cost).map(|(&(t, h), &c)| (t, h, c)).collect();
        let (_, bf_ratio) = brute_force_min_ratio(
            &inst,
            &hyper,
            &f0c,
            &[true, true, true],
            4,
            &OracleBudget::default(),
        )
        .unwrap()
        .unwrap();
        assert_eq!(res.ratio, bf_ratio);
    }

    #[test]
    fn min_ratio_none_when_cur_empty() {
        let inst = r4();
        let hyper = vec![h(&[1, 3], 1), h(&[0, 2], 1)];
        let engine = DropEngine::new(&inst, &FAN_F0);
        let res = min_ratio_thin_set(
            &inst,
            &hyper,
            &engine,
            &[1, 1, 1],
            &[false, false, false],
            4,
            100_000,
        );
        assert!(res.is_none());
    }

    #[test]
    fn dp_matches_bruteforce_on_random_instances() {
        use crate::completion::complete;
        use crate::generator::{gen_srap, SrapGenParams};
        use crate::rspecial::{initial_solution, two_approx_rspecial};
        use crate::steiner::generate_hyperlinks;
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;

        let budget = OracleBudget { max_links: 12, ..OracleBudget::default() };
        let mut tested = 0;
        for seed in 0..200u64 {
            let params = SrapGenParams {
                n: 4 + (seed as usize % 4),
                m: seed as usize % 2,
                links: 4 + (seed as usize % 5),
                all_terminals: seed % 2 == 0,
                max_cost: 9,
            };
            let inst = gen_srap(&params, seed);
            let comp = complete(&inst);
            let hi = generate_hyperlinks(&inst, 3);
            if hi.hyperlinks.len() > 12 || hi.hyperlinks.is_empty() {
                continue;
            }
            let seed_sol = initial_solution(&inst, &hi, 20).unwrap();
            let (f0, _) = two_approx_rspecial(&inst, &comp, &seed_sol);
            if f0.is_empty() {
                continue;
            }
            let engine = DropEngine::new(&inst, &f0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let alpha = rng.gen_range(1..=3usize);
            let gain: Vec<i128> = {
                let mut g = vec![0i128; inst.n];
                for &(_, h) in &f0 {
                    g[h] = rng.gen_range(0..=10);
                }
                g
            };
            let arc_gain: Vec<i128> = f0.iter().map(|&(_, h)| gain[h]).collect();
            let link_cost: Vec<i128> =
                hi.hyperlinks.iter().map(|x| x.cost as i128).collect();
            let res = maximize_slack(
                &inst,
                &hi.hyperlinks,
                &engine.ext,
                gain.clone(),
                link_cost.clone(),
                alpha,
                1_000_000,
            );
            assert_eq!(res.effective_alpha, alpha, "budget must not truncate in tests");
            let (bf_value, _) = brute_force_max_slack(
                &inst,
                &hi.hyperlinks,
                &f0,
                &arc_gain,
                &link_cost,
                alpha,
            );
            assert_eq!(res.value, bf_value, "slack mismatch on seed {seed} alpha {alpha}");
            // Chosen set must actually achieve the value and be thin.
            let chosen_links: Vec<HyperLink> =
                res.chosen.iter().map(|&i| hi.hyperlinks[i].clone()).collect();
            assert!(crate::oracle::is_alpha_thin(&inst, &chosen_links, alpha));
            let achieved: i128 = engine.drop_weight(&chosen_links, &gain)
                - res.chosen.iter().map(|&i| link_cost[i]).sum::<i128>();
            assert_eq!(achieved, res.value, "witness does not achieve value on seed {seed}");
            tested += 1;

            // Ratio minimization against the oracle.
            let arc_cost: Vec<Cost> =
                f0.iter().map(|&(t, h)| comp.arc_cost(t, h).unwrap()).collect();
            let in_cur: Vec<bool> = f0.iter().map(|_| rng.gen_bool(0.8)).collect();
            let dp_res = min_ratio_thin_set(
                &inst,
                &hi.hyperlinks,
                &engine,
                &arc_cost,
                &in_cur,
                alpha,
                1_000_000,
            );
            let f0c: Vec<(usize, usize, Cost)> = f0
                .iter()
                .zip(&arc_cost)
                .map(|(&(t, h), &c)| (t, h, c))
                .collect();
            let bf = brute_force_min_ratio(&inst, &hi.hyperlinks, &f0c, &in_cur, alpha, &budget)
                .unwrap();
            match (dp_res, bf) {
                (None, None) => {}
                (Some(a), Some((_, br))) => {
                    assert_eq!(a.ratio, br, "ratio mismatch on seed {seed}");
                }
                (a, b) => panic!("ratio existence mismatch on seed {seed}: {a:?} vs {b:?}"),
            }
        }
        assert!(tested >= 100, "only {tested} instances exercised");
    }
}
