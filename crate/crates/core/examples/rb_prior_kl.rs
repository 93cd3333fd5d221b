//! Build the Ruelle-Bowen path prior and split the KL divergence of a plan
//! from it into cost, entropy, boundary and eigenvalue terms.

use entropic_logistics::demo::{demo_network, DEMO_ALPHAS};
use entropic_logistics::prior::{build_rb_prior, kl_decomposition, kl_to_prior};
use entropic_logistics::solve_gibbs;

fn main() -> entropic_logistics::Result<()> {
    let (net, demand) = demo_network();
    for alpha in DEMO_ALPHAS {
        let prior = build_rb_prior(&net, alpha)?;
        let plan = solve_gibbs(&net, &demand, alpha)?;
        let kl = kl_to_prior(&net, &plan, &prior)?;
        let parts = kl_decomposition(&net, &demand, &plan, &prior);
        println!("alpha = {alpha}: lambda = {:.6}", prior.lambda());
        println!(
            "  objective {:+.6}  source {:+.6}  terminal {:+.6}  eigenvalue {:+.6}",
            parts.objective, parts.source, parts.terminal, parts.eigenvalue
        );
        println!("  sum {:.10}  direct KL {kl:.10}", parts.total());
    }
    Ok(())
}
