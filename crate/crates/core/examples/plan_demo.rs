//! Solve the demo network at three regularization weights and show how the
//! plan spreads out as alpha grows.

use entropic_logistics::demo::{demo_network, DEMO_ALPHAS};
use entropic_logistics::planner::{
    expected_path_cost, plan_entropy, solve_bridge, solve_gibbs, total_variation,
};

fn main() -> entropic_logistics::Result<()> {
    let (net, demand) = demo_network();
    let labels = net.labels();
    for alpha in DEMO_ALPHAS {
        let plan = solve_gibbs(&net, &demand, alpha)?;
        let bridge = solve_bridge(&net, &demand, alpha, 1e-10, 10_000)?;
        println!("alpha = {alpha}");
        println!(
            "  entropy {:.4}, expected path cost {:.4}, |gibbs - bridge|_TV = {:.1e} ({} iteration(s))",
            plan_entropy(&plan),
            expected_path_cost(&net, &plan),
            total_variation(&plan, &bridge.plan),
            bridge.iterations
        );
        let factories: Vec<String> = plan
            .factory_marginals()
            .iter()
            .zip(&labels.factories)
            .map(|(p, f)| format!("{f} {p:.3}"))
            .collect();
        println!("  factory shares: {}", factories.join(", "));
        let (k, p) = plan
            .probabilities()
            .iter()
            .enumerate()
            .fold(
                (0, 0.0),
                |best, (k, &p)| if p > best.1 { (k, p) } else { best },
            );
        let path = net.shape().path(k);
        println!(
            "  heaviest path: {} -> {} -> {} with mass {p:.4}",
            labels.factories[path.factory],
            labels.warehouses[path.warehouse],
            labels.outlets[path.outlet]
        );
    }
    Ok(())
}
