//! Bundled 3x4x5 demo network.
//!
//! Node positions are hand-placed so that the corridor `f1 -> w4` is the
//! cheap route to every outlet. Production costs are 4.0 at every factory and
//! each edge cost has standard deviation equal to its mean
//! (`default_sigma2_ratio = 1`). With these settings a low-`alpha` plan is
//! cheapest at `eps = 0` but is overtaken by the high-`alpha` plan as the
//! KL budget grows, and only the `alpha = 7` plan stays below a worst-case
//! cost of 8 up to `eps = 10`.

use crate::network::{validate_network, Demand, Network, NetworkDocument};

pub const DEMO_NETWORK_JSON: &str = include_str!("../data/demo_network.json");

/// The three regularization weights compared in the demo.
pub const DEMO_ALPHAS: [f64; 3] = [0.3, 0.9, 7.0];

pub fn demo_document() -> NetworkDocument {
    NetworkDocument::from_json(DEMO_NETWORK_JSON).expect("bundled demo network parses")
}

pub fn demo_network() -> (Network, Demand) {
    validate_network(&demo_document()).expect("bundled demo network is valid")
}
