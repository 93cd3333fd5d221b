//! Which single edge hurts most when only its cost distribution is allowed
//! to move within the KL budget.

use entropic_logistics::demo::demo_network;
use entropic_logistics::resilience::{
    edge_risk_ranking, riskiest_edge, single_edge_curve, worst_case_cost,
};
use entropic_logistics::{edge_occupancy, solve_gibbs, CostModel};

fn main() -> entropic_logistics::Result<()> {
    let (net, demand) = demo_network();
    let cm = CostModel::from_network(&net);
    let eps = 7.0;
    for alpha in [0.3, 7.0] {
        let plan = solve_gibbs(&net, &demand, alpha)?;
        let occ = edge_occupancy(&plan, &net.enumerate_paths())?;
        println!(
            "alpha = {alpha}: L*({eps}) = {:.4}",
            worst_case_cost(&cm, eps, &occ)?
        );
        for r in edge_risk_ranking(&cm, eps, &occ)?.iter().take(5) {
            println!(
                "  #{} {:<8} phi {:.4}  sigma2 {:>7.3}  L_e* {:.4}",
                r.rank,
                net.edge_label(r.edge_index),
                r.phi,
                r.sigma2,
                r.l_edge_star
            );
        }
        let top = riskiest_edge(&cm, eps, &occ)?;
        let grid = [0.0, 1.0, 4.0, 9.0];
        let curve = single_edge_curve("top", &cm, &occ, &top, &grid, f64::INFINITY)?;
        let k = net.shape().edge_index(&top).expect("edge of the network");
        println!("  {} alone: {:?}", net.edge_label(k), curve.values);
    }
    Ok(())
}
