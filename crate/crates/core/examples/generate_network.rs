//! Generate a random geometric network, round-trip it through JSON and plan
//! on it.

use entropic_logistics::network::generate_random_document;
use entropic_logistics::planner::plan_entropy;
use entropic_logistics::{solve_bridge, validate_network, NetworkDocument};

fn main() -> entropic_logistics::Result<()> {
    let doc = generate_random_document(4, 3, 6, 42, 10.0)?;
    let json = doc.to_json();
    println!("{} bytes of JSON, first lines:", json.len());
    for line in json.lines().take(8) {
        println!("  {line}");
    }
    let parsed = NetworkDocument::from_json(&json).expect("round trip");
    assert_eq!(parsed, doc);
    let (net, demand) = validate_network(&parsed)?;
    let sol = solve_bridge(&net, &demand, 0.9, 1e-10, 10_000)?;
    println!(
        "{} edges, {} paths; bridge converged in {} iteration(s), entropy {:.4}",
        net.shape().num_edges(),
        net.shape().num_paths(),
        sol.iterations,
        plan_entropy(&sol.plan)
    );
    Ok(())
}
