//! Entropy-regularized plan design.
//!
//! A plan is a distribution over paths `x = (f, w, s)` with outlet marginals
//! fixed to the demand `zeta`. Minimizing `sum_x C_x P_x - alpha H(P)` under
//! those constraints has the per-outlet Gibbs solution
//!
//! ```text
//! P_x = zeta_s exp(-C_x / alpha) / sum_{x' in X_s} exp(-C_x' / alpha)
//! ```
//!
//! [`solve_gibbs`] evaluates that formula directly. [`solve_bridge`] reaches the
//! same plan by iterative proportional scaling of the path kernel
//! `K_x = exp(-C_x / alpha)` against the terminal marginal, which is the
//! Schrödinger-bridge route. Both run in the log domain.

use crate::error::{Error, Result};
use crate::network::{Demand, Network, Shape};

/// Tolerance used for plan feasibility checks.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_BRIDGE_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_BRIDGE_MAX_ITER: usize = 10_000;

/// Probability mass per path, in path-index order (see [`Shape::path_index`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    shape: Shape,
    probabilities: Vec<f64>,
    alpha: f64,
}

impl Plan {
    pub fn new(shape: Shape, probabilities: Vec<f64>, alpha: f64) -> Result<Self> {
        if probabilities.len() != shape.num_paths() {
            return Err(Error::PlanMismatch(format!(
                "expected {} path probabilities, got {}",
                shape.num_paths(),
                probabilities.len()
            )));
        }
        Ok(Self {
            shape,
            probabilities,
            alpha,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn get(&self, factory: usize, warehouse: usize, outlet: usize) -> f64 {
        self.probabilities[self
            .shape
            .path_index(&crate::network::Path::new(factory, warehouse, outlet))]
    }

    /// Mass arriving at each outlet.
    pub fn outlet_marginals(&self) -> Vec<f64> {
        let ns = self.shape.outlets;
        let mut out = vec![0.0; ns];
        for (k, p) in self.probabilities.iter().enumerate() {
            out[k % ns] += p;
        }
        out
    }

    /// Production share of each factory.
    pub fn factory_marginals(&self) -> Vec<f64> {
        let per_factory = self.shape.warehouses * self.shape.outlets;
        self.probabilities
            .chunks(per_factory)
            .map(|c| c.iter().sum())
            .collect()
    }

    /// Largest violation of `sum P = 1` and `sum_{X_s} P = zeta_s`.
    pub fn marginal_error(&self, demand: &Demand) -> f64 {
        let total: f64 = self.probabilities.iter().sum();
        self.outlet_marginals()
            .iter()
            .zip(demand.values())
            .map(|(m, z)| (m - z).abs())
            .fold((total - 1.0).abs(), f64::max)
    }

    /// Checks nonnegativity and both marginal constraints to `tol`.
    pub fn check_feasible(&self, demand: &Demand, tol: f64) -> Result<()> {
        if demand.len() != self.shape.outlets {
            return Err(Error::PlanMismatch(format!(
                "plan has {} outlets, demand has {}",
                self.shape.outlets,
                demand.len()
            )));
        }
        if let Some(k) = self
            .probabilities
            .iter()
            .position(|p| !p.is_finite() || *p < 0.0)
        {
            return Err(Error::InfeasiblePlan(format!(
                "path {k} has probability {}",
                self.probabilities[k]
            )));
        }
        let err = self.marginal_error(demand);
        if err > tol {
            return Err(Error::InfeasiblePlan(format!(
                "marginal violation {err:e} exceeds {tol:e}"
            )));
        }
        Ok(())
    }
}

/// Result of the iterative bridge solver.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSolution {
    pub plan: Plan,
    pub iterations: usize,
    pub final_marginal_error: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveAlpha(alpha))
    }
}

fn check_demand(net: &Network, demand: &Demand) -> Result<()> {
    if demand.len() != net.shape().outlets {
        return Err(Error::InvalidArgument(format!(
            "demand has {} entries for {} outlets",
            demand.len(),
            net.shape().outlets
        )));
    }
    Ok(())
}

/// `log(sum exp(x))` over a strided slice view; `-inf` for an empty or all `-inf` input.
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Closed-form minimizer, computed per outlet with max-shifted exponentials.
pub fn solve_gibbs(net: &Network, demand: &Demand, alpha: f64) -> Result<Plan> {
    check_alpha(alpha)?;
    check_demand(net, demand)?;
    let shape = net.shape();
    let ns = shape.outlets;
    let logits: Vec<f64> = net.path_costs().into_iter().map(|c| -c / alpha).collect();
    let mut probs = vec![0.0; logits.len()];
    for (s, &zeta) in demand.values().iter().enumerate() {
        if zeta == 0.0 {
            continue;
        }
        let m = logits
            .iter()
            .skip(s)
            .step_by(ns)
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let norm: f64 = logits
            .iter()
            .skip(s)
            .step_by(ns)
            .map(|l| (l - m).exp())
            .sum();
        for k in (s..logits.len()).step_by(ns) {
            probs[k] = zeta * (logits[k] - m).exp() / norm;
        }
    }
    Plan::new(shape, probs, alpha)
}

/// Iterative proportional scaling on the path kernel `K_x = exp(-C_x / alpha)`.
///
/// The terminal potential `b` is rescaled by `zeta_s / m_s`, where `m_s` is
/// the outlet marginal of `P_x = b_s K_x / Z`, until the largest marginal
/// violation is at most `tol`. The source is the point mass on the virtual
/// node, so its constraint holds for every `b`.
pub fn solve_bridge(
    net: &Network,
    demand: &Demand,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BridgeSolution> {
    check_alpha(alpha)?;
    check_demand(net, demand)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let shape = net.shape();
    let ns = shape.outlets;
    let log_kernel: Vec<f64> = net.path_costs().into_iter().map(|c| -c / alpha).collect();
    // log sum_{x in X_s} K_x
    let log_outlet_mass: Vec<f64> = (0..ns)
        .map(|s| log_sum_exp(log_kernel.iter().skip(s).step_by(ns).copied()))
        .collect();
    let zeta = demand.values();
    let mut log_b = vec![0.0; ns];

    let marginals = |log_b: &[f64]| -> Vec<f64> {
        let weighted = log_b.iter().zip(&log_outlet_mass).map(|(b, m)| b + m);
        let log_z = log_sum_exp(weighted.clone());
        weighted.map(|w| (w - log_z).exp()).collect()
    };

    let mut iterations = 0;
    loop {
        let m = marginals(&log_b);
        let residual = m
            .iter()
            .zip(zeta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if iterations > 0 && residual <= tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged {
                iterations,
                residual,
            });
        }
        for s in 0..ns {
            log_b[s] = if zeta[s] == 0.0 {
                f64::NEG_INFINITY
            } else {
                log_b[s] + zeta[s].ln() - m[s].ln()
            };
        }
        iterations += 1;
    }

    let log_z = log_sum_exp(log_b.iter().zip(&log_outlet_mass).map(|(b, m)| b + m));
    let probs: Vec<f64> = log_kernel
        .iter()
        .enumerate()
        .map(|(k, lk)| {
            let b = log_b[k % ns];
            if b == f64::NEG_INFINITY {
                0.0
            } else {
                (b + lk - log_z).exp()
            }
        })
        .collect();
    let plan = Plan::new(shape, probs, alpha)?;
    let final_marginal_error = plan.marginal_error(demand);
    if final_marginal_error > tol.max(FEASIBILITY_TOLERANCE) {
        return Err(Error::NotConverged {
            iterations,
            residual: final_marginal_error,
        });
    }
    Ok(BridgeSolution {
        plan,
        iterations,
        final_marginal_error,
    })
}

/// Shannon entropy in nats, with `0 log 0 = 0`.
pub fn plan_entropy(plan: &Plan) -> f64 {
    -plan
        .probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Expected path cost `sum_x C_x P_x`.
pub fn expected_path_cost(net: &Network, plan: &Plan) -> f64 {
    net.path_costs()
        .iter()
        .zip(&plan.probabilities)
        .map(|(c, p)| c * p)
        .sum()
}

/// `sum_x C_x P_x - alpha H(P)`.
pub fn plan_objective(net: &Network, plan: &Plan, alpha: f64) -> f64 {
    expected_path_cost(net, plan) - alpha * plan_entropy(plan)
}

/// Total-variation distance `0.5 * sum |P - Q|`.
pub fn total_variation(a: &Plan, b: &Plan) -> f64 {
    assert_eq!(a.shape, b.shape, "plans over different networks");
    0.5 * a
        .probabilities
        .iter()
        .zip(&b.probabilities)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_path_net() -> (Network, Demand) {
        // paths (f1,w1,s1) and (f2,w1,s1) with costs 1 and 2
        let shape = Shape::new(2, 1, 1).unwrap();
        let net =
            Network::from_edge_costs(shape, vec![1.0, 2.0, 0.0, 0.0, 0.0], vec![0.0; 5]).unwrap();
        (net, Demand::uniform(1))
    }

    // Grid minimization of the objective over the 1-simplex; oracle for the
    // two-path instance.
    fn grid_minimizer(c1: f64, c2: f64, alpha: f64, step: f64) -> f64 {
        let n = (1.0 / step).round() as usize;
        let obj = |p: f64| {
            let h = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
            c1 * p + c2 * (1.0 - p) - alpha * (h(p) + h(1.0 - p))
        };
        (0..=n)
            .map(|k| k as f64 / n as f64)
            .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap()
    }

    #[test]
    fn gibbs_two_path_matches_grid_oracle() {
        let p_grid = grid_minimizer(1.0, 2.0, 1.0, 1e-6);
        assert!((p_grid - 0.731059).abs() < 2e-6);
        let (net, demand) = two_path_net();
        let plan = solve_gibbs(&net, &demand, 1.0).unwrap();
        let p = plan.probabilities();
        assert!((p[0] - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((p[0] - p_grid).abs() < 2e-6);
        assert!((p[1] - 0.268941).abs() < 1e-6);
    }

    #[test]
    fn gibbs_large_alpha_is_conditionally_uniform() {
        let (net, _) = crate::network::generate_random_network(3, 4, 5, 3, 10.0).unwrap();
        let demand = Demand::new(vec![0.1, 0.3, 0.2, 0.15, 0.25]).unwrap();
        let plan = solve_gibbs(&net, &demand, 1e9).unwrap();
        for (k, p) in plan.probabilities().iter().enumerate() {
            let s = k % 5;
            assert!((p - demand.values()[s] / 12.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gibbs_tiny_alpha_concentrates_without_overflow() {
        let (net, demand) = crate::network::generate_random_network(3, 4, 5, 11, 10.0).unwrap();
        let plan = solve_gibbs(&net, &demand, 1e-6).unwrap();
        let costs = net.path_costs();
        for s in 0..5 {
            let best = (s..60)
                .step_by(5)
                .min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
                .unwrap();
            assert!(plan.probabilities()[best] >= 0.2 * (1.0 - 1e-6));
        }
        plan.check_feasible(&demand, FEASIBILITY_TOLERANCE).unwrap();
    }

    #[test]
    fn ties_split_equally_as_alpha_vanishes() {
        let shape = Shape::new(1, 2, 1).unwrap();
        let net =
            Network::from_edge_costs(shape, vec![0.0, 1.0, 1.0, 2.0, 2.0], vec![0.0; 5]).unwrap();
        let plan = solve_gibbs(&net, &Demand::uniform(1), 1e-6).unwrap();
        assert_eq!(plan.probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        let (net, demand) = two_path_net();
        assert_eq!(
            solve_gibbs(&net, &demand, 0.0),
            Err(Error::NonPositiveAlpha(0.0))
        );
        assert!(matches!(
            solve_bridge(&net, &demand, -1.0, 1e-10, 10),
            Err(Error::NonPositiveAlpha(_))
        ));
    }

    #[test]
    fn bridge_single_path_converges_in_one_pass() {
        let shape = Shape::new(1, 1, 1).unwrap();
        let net = Network::from_edge_costs(shape, vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        let sol = solve_bridge(&net, &Demand::uniform(1), 0.5, 1e-10, 100).unwrap();
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.plan.probabilities(), &[1.0]);
    }

    #[test]
    fn bridge_uniform_costs_single_pass_conditional_uniform() {
        let shape = Shape::new(3, 4, 5).unwrap();
        let net = Network::from_edge_costs(shape, vec![2.0; 35], vec![0.0; 35]).unwrap();
        let sol = solve_bridge(&net, &Demand::uniform(5), 0.9, 1e-10, 100).unwrap();
        assert_eq!(sol.iterations, 1);
        for p in sol.plan.probabilities() {
            assert!((p - 1.0 / 60.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bridge_matches_gibbs_with_zero_demand_outlet() {
        let (net, _) = crate::network::generate_random_network(2, 3, 4, 5, 10.0).unwrap();
        let demand = Demand::new(vec![0.5, 0.0, 0.25, 0.25]).unwrap();
        for alpha in [0.3, 0.9, 7.0] {
            let g = solve_gibbs(&net, &demand, alpha).unwrap();
            let b = solve_bridge(&net, &demand, alpha, 1e-10, 100).unwrap();
            assert!(total_variation(&g, &b.plan) <= 1e-8);
            assert!((1..24).step_by(4).all(|k| b.plan.probabilities()[k] == 0.0));
        }
    }

    #[test]
    fn bridge_reports_non_convergence() {
        let (net, demand) = crate::network::generate_random_network(3, 4, 5, 5, 10.0).unwrap();
        assert!(matches!(
            solve_bridge(&net, &demand, 0.9, 1e-10, 0),
            Err(Error::NotConverged { iterations: 0, .. })
        ));
    }

    #[test]
    fn entropy_edge_cases() {
        let shape = Shape::new(3, 4, 5).unwrap();
        let mut point = vec![0.0; 60];
        point[0] = 1.0;
        assert_eq!(plan_entropy(&Plan::new(shape, point, 1.0).unwrap()), 0.0);
        let uniform = Plan::new(shape, vec![1.0 / 60.0; 60], 1.0).unwrap();
        assert!((plan_entropy(&uniform) - 60f64.ln()).abs() < 1e-12);
        assert!((60f64.ln() - 4.0943).abs() < 1e-4);
    }

    #[test]
    fn objective_examples() {
        let shape = Shape::new(1, 1, 1).unwrap();
        let net = Network::from_edge_costs(shape, vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        let plan = Plan::new(shape, vec![1.0], 5.0).unwrap();
        assert_eq!(plan_objective(&net, &plan, 5.0), 6.0);

        // uniform costs: conditional-uniform plan has objective C - alpha log(|F||W|)
        let shape = Shape::new(3, 4, 5).unwrap();
        let net = Network::from_edge_costs(shape, vec![1.5; 35], vec![0.0; 35]).unwrap();
        let plan = solve_gibbs(&net, &Demand::uniform(5), 2.0).unwrap();
        let expected = 4.5 - 2.0 * 60f64.ln();
        assert!((plan_objective(&net, &plan, 2.0) - expected).abs() < 1e-12);
        // H = log 60 = log(|F||W|) + log |S|; the demand entropy is fixed
        assert!((plan_entropy(&plan) - (12f64.ln() + 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn feasibility_check_flags_bad_plans() {
        let shape = Shape::new(1, 1, 2).unwrap();
        let d = Demand::uniform(2);
        Plan::new(shape, vec![0.5, 0.5], 1.0)
            .unwrap()
            .check_feasible(&d, 1e-10)
            .unwrap();
        let bad = Plan::new(shape, vec![0.6, 0.4], 1.0).unwrap();
        assert!(matches!(
            bad.check_feasible(&d, 1e-10),
            Err(Error::InfeasiblePlan(_))
        ));
        let neg = Plan::new(shape, vec![-0.5, 1.5], 1.0).unwrap();
        assert!(matches!(
            neg.check_feasible(&d, 1e-10),
            Err(Error::InfeasiblePlan(_))
        ));
        assert!(Plan::new(shape, vec![1.0], 1.0).is_err());
    }
}
