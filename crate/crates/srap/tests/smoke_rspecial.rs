use srap::completion::complete;
use srap::feasibility::is_feasible_directed;
use srap::generator::{gen_srap, SrapGenParams};
use srap::oracle::{exact_srap, OracleBudget};
use srap::rspecial::{check_r_special, initial_solution, two_approx_rspecial};
use srap::steiner::generate_hyperlinks;

#[test]
fn rspecial_pipeline_on_many_random_instances() {
    let budget = OracleBudget::default();
    let mut worst: f64 = 0.0;
    for seed in 0..500u64 {
        let params = SrapGenParams {
            n: 4 + (seed as usize % 7),
            m: seed as usize % 4,
            links: 5 + (seed as usize % 11),
            all_terminals: seed % 3 == 0,
            max_cost: 20,
        };
        let inst = gen_srap(&params, seed);
        let comp = complete(&inst);
        let hyper = generate_hyperlinks(&inst, 4);
        let seed_sol = initial_solution(&inst, &hyper, 20).unwrap();
        let (opt_cost, _) = exact_srap(&inst, &budget).unwrap().unwrap();
        let (f0, report) = two_approx_rspecial(&inst, &comp, &seed_sol);
        assert!(check_r_special(&inst, &f0), "seed {seed}: not R-special: {f0:?}");
        assert!(is_feasible_directed(&inst, &f0), "seed {seed}: infeasible");
        assert!(report.f0_cost <= 2 * opt_cost, "seed {seed}: {} > 2*{}", report.f0_cost, opt_cost);
        if opt_cost > 0 { worst = worst.max(report.f0_cost as f64 / opt_cost as f64); }
    }
    println!("worst F0/OPT ratio over 500 instances: {worst:.3}");
}
