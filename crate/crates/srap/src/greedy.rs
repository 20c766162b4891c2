//! The relative greedy algorithm: start from a 2-approximate R-special
//! directed solution, repeatedly add the thin hyper-link set of minimum
//! cost-to-drop ratio (falling back to a kappa set when every ratio exceeds
//! one), and stop when the directed part is gone.

use crate::completion::{complete, CompleteInstance};
use crate::dropcalc::DropEngine;
use crate::feasibility::{
    augmented_graph, is_feasible_hyper, is_feasible_mixed, verify_edge_connectivity,
};
use crate::model::{Cost, HyperLink, LinkId, Ratio, SrapInstance};
use crate::rspecial::{initial_solution, two_approx_rspecial};
use crate::steiner::{gamma_for, generate_hyperlinks, ParamError};
use crate::SolverOptions;

#[derive(Debug, Clone)]
pub struct ResolvedParams {
    pub eps: f64,
    pub eps_prime: f64,
    pub gamma_theory: u64,
    pub gamma_used: u32,
    pub alpha_theory: u32,
    pub alpha_used: u32,
}

/// eps' = (eps/2)/(1 + ln 2 + eps/2), gamma = 2^ceil(1/eps'),
/// alpha = 4*ceil(4/eps).
pub fn params_for(eps: f64) -> Result<(f64, u64, u32), ParamError> {
    if !(eps > 0.0) {
        return Err(ParamError::NonPositiveEpsilon(eps));
    }
    let eps_prime = (eps / 2.0) / (1.0 + std::f64::consts::LN_2 + eps / 2.0);
    let gamma = gamma_for(eps_prime)?;
    let alpha = 4 * (4.0 / eps).ceil() as u32;
    Ok((eps_prime, gamma, alpha))
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub index: usize,
    pub via_fallback: bool,
    pub ratio: Option<Ratio>,
    /// Hyper-links added this iteration, as (vertex set, cost).
    pub added: Vec<(Vec<usize>, Cost)>,
    pub added_cost: Cost,
    pub dropped_cost: Cost,
    pub remaining_arcs: usize,
}

#[derive(Debug, Clone)]
pub struct GreedyOutput {
    pub params: ResolvedParams,
    pub initial_cost: Cost,
    pub f0: Vec<(usize, usize)>,
    pub f0_cost: Cost,
    pub iterations: Vec<IterationRecord>,
    /// Realized solution links of the original instance.
    pub solution: Vec<LinkId>,
    pub cost: Cost,
    /// Smallest alpha the dynamic program actually ran with.
    pub dp_alpha_floor: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Infeasible,
    BadEpsilon(f64),
    NotAllTerminals,
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveError::Infeasible => write!(f, "instance has no feasible augmentation"),
            SolveError::BadEpsilon(e) => write!(f, "epsilon must be positive, got {e}"),
            SolveError::NotAllTerminals => {
                write!(f, "local search requires every ring vertex to be a terminal")
            }
        }
    }
}

impl std::error::Error for SolveError {}

/// Hyper-link view of a kappa set: each completed link becomes a size-2
/// hyper-link at its completed cost, realized by its original link path.
pub fn kappa_hyperlinks(comp: &CompleteInstance, tail: usize, head: usize) -> Vec<HyperLink> {
    let arc = comp.arc(tail, head).expect("kappa of a non-completed arc");
    comp.kappa(arc)
        .expect("F0 arcs carry original-link provenance")
        .into_iter()
        .map(|l1| {
            let l = &comp.l1[l1];
            HyperLink::new(vec![l.u, l.v], l.cost, Some(l.path_links.clone()))
        })
        .collect()
}

pub fn relative_greedy(
    inst: &SrapInstance,
    eps: f64,
    opts: &SolverOptions,
) -> Result<GreedyOutput, SolveError> {
    let (eps_prime, gamma_theory, alpha_theory) =
        params_for(eps).map_err(|_| SolveError::BadEpsilon(eps))?;
    let gamma_used = (gamma_theory.min(opts.gamma_cap as u64)) as u32;
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
    if !is_feasible_hyper(inst, &hyper.hyperlinks) {
        return Err(SolveError::Infeasible);
    }
    let seed = initial_solution(inst, &hyper, opts.oracle_budget).ok_or(SolveError::Infeasible)?;
    let (f0, report) = two_approx_rspecial(inst, &comp, &seed);

    let mut chosen: Vec<HyperLink> = Vec::new();
    let mut iterations = Vec::new();
    let mut dp_alpha_floor = alpha_used;

    if !f0.is_empty() {
        let engine = DropEngine::new(inst, &f0);
        let arc_cost: Vec<Cost> =
            f0.iter().map(|&(t, h)| comp.arc_cost(t, h).expect("F0 arc not completed")).collect();
        let mut alive = vec![true; f0.len()];
        let mut index = 0;
        // Effective alpha is stable per instance; reuse what the DP settles on.
        let mut alpha_req = alpha_used as usize;
        while alive.iter().any(|&a| a) {
            index += 1;
            assert!(index <= f0.len() + 1, "greedy failed to make progress");
            let dp = crate::dp::min_ratio_thin_set(
                inst,
                &hyper.hyperlinks,
                &engine,
                &arc_cost,
                &alive,
                alpha_req,
                opts.dp_key_budget,
            );
            if let Some(res) = &dp {
                alpha_req = res.effective_alpha;
            }
            let (z, via_fallback, ratio) = match dp {
                Some(res) if res.ratio <= Ratio::new(1, 1) => {
                    dp_alpha_floor = dp_alpha_floor.min(res.effective_alpha as u32);
                    let z: Vec<HyperLink> =
                        res.chosen.iter().map(|&i| hyper.hyperlinks[i].clone()).collect();
                    (z, false, Some(res.ratio))
                }
                other => {
                    let ratio = other.map(|r| r.ratio);
                    // Fallback: the alive arc with the largest kappa saving.
                    let (best, _) = f0
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| alive[*i])
                        .map(|(i, &(t, h))| {
                            let arc = comp.arc(t, h).unwrap();
                            let saving = arc.cost as i128 - comp.kappa_cost(arc).unwrap() as i128;
                            (i, (std::cmp::Reverse(saving), t, h))
                        })
                        .min_by_key(|(_, key)| key.clone())
                        .expect("fallback needs an alive arc");
                    let (t, h) = f0[best];
                    (kappa_hyperlinks(&comp, t, h), true, ratio)
                }
            };
            let dropped = engine.drop(&z);
            let mut dropped_cost = 0;
            let mut progressed = false;
            for (i, arc) in f0.iter().enumerate() {
                if alive[i] && dropped.contains(arc) {
                    alive[i] = false;
                    dropped_cost += arc_cost[i];
                    progressed = true;
                }
            }
            assert!(progressed, "iteration dropped nothing");
            let added_cost = z.iter().map(|h| h.cost).sum();
            iterations.push(IterationRecord {
                index,
                via_fallback,
                ratio,
                added: z.iter().map(|h| (h.vertices.clone(), h.cost)).collect(),
                added_cost,
                dropped_cost,
                remaining_arcs: alive.iter().filter(|&&a| a).count(),
            });
            chosen.extend(z);
            // The surviving arcs plus everything chosen stay feasible.
            let alive_arcs: Vec<(usize, usize)> = f0
                .iter()
                .enumerate()
                .filter(|(i, _)| alive[*i])
                .map(|(_, &a)| a)
                .collect();
            debug_assert!(is_feasible_mixed(inst, &chosen, &alive_arcs));
        }
    }

    let solution = crate::steiner::realize_solution(&chosen)
        .expect("greedy hyper-links always carry realizations");
    let cost = inst.total_link_cost(&solution);
    let edges = augmented_graph(inst, &solution);
    assert!(
        verify_edge_connectivity(inst.num_vertices(), &edges, &inst.terminals(), 3),
        "greedy output failed the max-flow certificate"
    );
    Ok(GreedyOutput {
        params,
        initial_cost: report.initial_cost,
        f0_cost: report.f0_cost,
        f0,
        iterations,
        solution,
        cost,
        dp_alpha_floor,
    })
}
