//! Time the bridge solver on k x k x k random networks.

use std::time::Instant;

use entropic_logistics::network::generate_random_network;
use entropic_logistics::solve_bridge;

fn main() -> entropic_logistics::Result<()> {
    let reps = 5;
    for k in [10, 25, 50, 100] {
        let mut total = 0.0;
        for seed in 0..reps {
            let (net, demand) = generate_random_network(k, k, k, seed, 10.0)?;
            let start = Instant::now();
            solve_bridge(&net, &demand, 0.9, 1e-10, 10_000)?;
            total += start.elapsed().as_secs_f64();
        }
        println!(
            "|V| = {:>3} ({:>7} paths): {:.4} s per solve",
            3 * k,
            k * k * k,
            total / reps as f64
        );
    }
    Ok(())
}
