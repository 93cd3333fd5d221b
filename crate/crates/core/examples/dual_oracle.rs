//! Cross-check the closed-form worst case against direct minimization of the
//! dual objective with numerically integrated log-moment generating functions.

use entropic_logistics::demo::demo_network;
use entropic_logistics::oracles::{dual_worst_case, mc_feasible_tilt_check};
use entropic_logistics::resilience::{variance_mass, worst_case_cost};
use entropic_logistics::{edge_occupancy, solve_gibbs, CostModel};

fn main() -> entropic_logistics::Result<()> {
    let (net, demand) = demo_network();
    let cm = CostModel::from_network(&net);
    let plan = solve_gibbs(&net, &demand, 0.9)?;
    let occ = edge_occupancy(&plan, &net.enumerate_paths())?;
    let s = variance_mass(&cm, &occ)?;
    for eps in [0.1, 1.0, 7.0] {
        let closed = worst_case_cost(&cm, eps, &occ)?;
        let dual = dual_worst_case(&cm, &occ, eps)?;
        let mc = mc_feasible_tilt_check(&cm, &occ, eps, 20_000, 7)?;
        println!(
            "eps {eps:>4}: closed {closed:.9}  dual {:.9}  tau* {:.6} (closed {:.6})  best sampled tilt {mc:.6}",
            dual.value,
            dual.tau_star,
            (s / (2.0 * eps)).sqrt()
        );
    }
    Ok(())
}
