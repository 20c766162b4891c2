//! Solvers for the Steiner Ring Augmentation Problem and its relatives.
//!
//! The library covers the full pipeline: instance model and ring geometry,
//! metric/shadow completion, gamma-restricted hyper-link generation via
//! Dreyfus-Wagner, a structured 2-approximate directed solution, the drop
//! calculus, an interval dynamic program for ratio-minimizing thin sets, the
//! relative greedy and local search algorithms, reductions from 2-SCAP and
//! k-SAG, and brute-force oracles used as ground truth in tests.

pub mod completion;
pub mod dp;
pub mod dropcalc;
pub mod dsu;
pub mod feasibility;
pub mod generator;
pub mod greedy;
pub mod localsearch;
pub mod model;
pub mod oracle;
pub mod reduction;
pub mod rspecial;
pub mod steiner;

pub use model::{Cost, DangerousCut, DirectedLink, HyperLink, Interval, Link, LinkId, SrapInstance};

/// Knobs shared by the solvers. Defaults keep desk-scale runs fast while the
/// theoretical parameters stay available through the caps.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Upper bound on hyper-link size; overrides gamma(eps) when smaller.
    pub gamma_cap: u32,
    /// Upper bound on alpha fed to the thin-set dynamic program.
    pub alpha_cap: u32,
    /// Explicit alpha override; takes precedence over the formula and cap.
    pub alpha_override: Option<u32>,
    /// Max link count for exact oracle runs used to seed the pipelines.
    pub oracle_budget: usize,
    /// Soft bound on dynamic-program key enumeration; alpha degrades to fit.
    pub dp_key_budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gamma_cap: 4,
            alpha_cap: 8,
            alpha_override: None,
            oracle_budget: 20,
            dp_key_budget: 30_000,
        }
    }
}
