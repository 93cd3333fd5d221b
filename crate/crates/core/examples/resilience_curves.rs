//! Worst-case cost L*(eps) for the three demo plans, and where each curve
//! crosses the business threshold.

use entropic_logistics::demo::{demo_network, DEMO_ALPHAS};
use entropic_logistics::resilience::{resilience_curve, DEFAULT_THRESHOLD};
use entropic_logistics::{edge_occupancy, solve_gibbs, CostModel};

fn main() -> entropic_logistics::Result<()> {
    let (net, demand) = demo_network();
    let cm = CostModel::from_network(&net);
    let index = net.enumerate_paths();
    let grid: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();

    let mut curves = Vec::new();
    for alpha in DEMO_ALPHAS {
        let plan = solve_gibbs(&net, &demand, alpha)?;
        let occ = edge_occupancy(&plan, &index)?;
        curves.push(resilience_curve(
            format!("alpha={alpha}"),
            &cm,
            &occ,
            &grid,
            DEFAULT_THRESHOLD,
        )?);
    }

    print!("{:>6}", "eps");
    for c in &curves {
        print!("{:>12}", c.label);
    }
    println!();
    for (i, eps) in grid.iter().enumerate() {
        print!("{eps:>6.1}");
        for c in &curves {
            print!("{:>12.4}", c.values[i]);
        }
        println!();
    }
    for c in &curves {
        match c.crossing {
            Some(eps) => println!("{} reaches {DEFAULT_THRESHOLD} at eps = {eps:.3}", c.label),
            None => println!("{} stays below {DEFAULT_THRESHOLD} on this grid", c.label),
        }
    }
    Ok(())
}
