//! Entropy-regularized logistics planning for three-layer networks
//! (factories, distribution bases, sales outlets) and resilience evaluation
//! of the resulting plans under KL-bounded uncertainty in Gaussian edge costs.
//!
//! The main entry points:
//!
//! * [`network::validate_network`] turns a JSON [`network::NetworkDocument`]
//!   into a [`network::Network`] and its [`network::Demand`].
//! * [`planner::solve_gibbs`] and [`planner::solve_bridge`] compute the
//!   regularized plan for a weight `alpha`.
//! * [`resilience::worst_case_cost`] and friends score a plan's occupancy.
//! * [`oracles`] holds independent numerical references used by the tests
//!   and the `verify` command.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod demo;
pub mod error;
pub mod network;
pub mod oracles;
pub mod planner;
pub mod prior;
pub mod report;
pub mod resilience;

pub use error::{Error, Result};
pub use network::{validate_network, Demand, Edge, Network, NetworkDocument, PathIndex, Shape};
pub use planner::{solve_bridge, solve_gibbs, Plan};
pub use resilience::{edge_occupancy, CostModel, EdgeOccupancy};
