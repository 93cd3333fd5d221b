//! Independent numerical references for the closed forms.
//!
//! * [`dual_worst_case`] minimizes the Lagrangian dual
//!   `tau eps + tau sum_e log E[exp(phi_e A_e / tau)]` over `tau`, with every
//!   moment-generating integral evaluated by quadrature instead of the Gaussian
//!   closed form.
//! * [`brute_force_plan`] grid-searches the constrained simplex for tiny
//!   instances.
//! * [`mc_feasible_tilt_check`] samples KL-feasible Gaussian mean shifts.

pub mod golden;
pub mod quadrature;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::network::{Demand, Edge, Network};
use crate::planner::Plan;
use crate::resilience::{nominal_cost, CostModel, EdgeOccupancy};

use golden::golden_section;
use quadrature::adaptive_simpson;

/// Half-width of the integration window in standard deviations.
pub const QUADRATURE_SIGMAS: f64 = 12.0;
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;
/// Left end of the `tau` search interval.
pub const TAU_MIN: f64 = 1e-8;

/// Minimizer and minimum of the dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEvaluation {
    pub tau_star: f64,
    pub value: f64,
    pub iterations: usize,
    /// Derivative of the dual objective at `tau_star`.
    pub derivative: f64,
    /// False when the minimum sits on the left end of the search interval.
    pub interior: bool,
}

/// `log E[exp(theta D)]` for `D ~ N(0, variance)`, and its derivative in
/// `theta` when `with_slope` is set (zero otherwise), integrated numerically
/// in the standardized variable over `+-12` sigma.
fn centered_log_mgf(variance: f64, theta: f64, with_slope: bool) -> Result<(f64, f64)> {
    if variance == 0.0 || theta == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sigma = variance.sqrt();
    let t = theta * sigma;
    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    // anchor at the largest sampled exponent so the integrand stays O(1);
    // the shifted exponent is formed directly to avoid cancellation
    let z0 = (0..=240).map(|k| -QUADRATURE_SIGMAS + 0.1 * k as f64).fold(
        -QUADRATURE_SIGMAS,
        |best, z| {
            if t * z - 0.5 * z * z > t * best - 0.5 * best * best {
                z
            } else {
                best
            }
        },
    );
    let shift = t * z0 - 0.5 * z0 * z0 - half_log_2pi;
    let shifted = move |z: f64| ((z - z0) * (t - 0.5 * (z + z0))).exp();
    let panels = (2.0 * QUADRATURE_SIGMAS) as usize;
    let tol = QUADRATURE_TOLERANCE / panels as f64;
    let mut mass = 0.0;
    let mut first = 0.0;
    for p in 0..panels {
        let a = -QUADRATURE_SIGMAS + p as f64;
        mass += adaptive_simpson(&shifted, a, a + 1.0, tol)?;
        if with_slope {
            first += adaptive_simpson(&|z| z * shifted(z), a, a + 1.0, tol)?;
        }
    }
    if !(mass > 0.0) {
        return Err(Error::QuadratureFailure {
            lo: -QUADRATURE_SIGMAS,
            hi: QUADRATURE_SIGMAS,
        });
    }
    Ok((shift + mass.ln(), sigma * first / mass))
}

fn check_positive_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tau must be positive, got {tau}"
        )))
    }
}

/// Dual objective restricted to the edges in `active`; other edges keep their
/// nominal law and contribute `phi_e mean_e`.
fn dual_objective_on(
    cm: &CostModel,
    occ: &EdgeOccupancy,
    eps: f64,
    tau: f64,
    active: &[usize],
) -> Result<f64> {
    let mut value = nominal_cost(cm, occ)? + tau * eps;
    for &k in active {
        let (log_mgf, _) = centered_log_mgf(cm.variance()[k], occ.phi()[k] / tau, false)?;
        value += tau * log_mgf;
    }
    Ok(value)
}

fn dual_derivative_on(
    cm: &CostModel,
    occ: &EdgeOccupancy,
    eps: f64,
    tau: f64,
    active: &[usize],
) -> Result<f64> {
    let mut d = eps;
    for &k in active {
        let theta = occ.phi()[k] / tau;
        let (log_mgf, slope) = centered_log_mgf(cm.variance()[k], theta, true)?;
        d += log_mgf - theta * slope;
    }
    Ok(d)
}

/// `tau eps + tau sum_e log integral p(A_e) exp(phi_e A_e / tau) dA_e`.
pub fn dual_objective(cm: &CostModel, occ: &EdgeOccupancy, eps: f64, tau: f64) -> Result<f64> {
    check_positive_tau(tau)?;
    let all: Vec<usize> = (0..cm.len()).collect();
    dual_objective_on(cm, occ, eps, tau, &all)
}

fn minimize_dual(
    cm: &CostModel,
    occ: &EdgeOccupancy,
    eps: f64,
    active: &[usize],
) -> Result<DualEvaluation> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "the dual needs a positive budget, got {eps}"
        )));
    }
    let f = |tau: f64| dual_objective_on(cm, occ, eps, tau, active);
    let d = |tau: f64| dual_derivative_on(cm, occ, eps, tau, active);
    let mut iterations = 0;

    // bracket: double the right end until the objective increases
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    loop {
        let f_next = f(2.0 * hi)?;
        iterations += 1;
        if f_next > f_hi {
            hi *= 2.0;
            break;
        }
        if iterations > 1100 {
            return Err(Error::NotConverged {
                iterations,
                residual: f_next - f_hi,
            });
        }
        hi *= 2.0;
        f_hi = f_next;
    }

    let mut failure = None;
    let golden = golden_section(
        |tau| match f(tau) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        TAU_MIN,
        hi,
        1e-4,
        1e-15,
        1000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    iterations += golden.iterations;

    let d_min = d(TAU_MIN)?;
    if d_min >= 0.0 {
        return Ok(DualEvaluation {
            tau_star: TAU_MIN,
            value: f(TAU_MIN)?,
            iterations,
            derivative: d_min,
            interior: false,
        });
    }

    // polish on the sign change of the derivative
    let (mut a, mut b) = (golden.lo.max(TAU_MIN), golden.hi);
    let mut widen = b - a;
    while d(a)? > 0.0 {
        a = (a - widen).max(TAU_MIN);
        widen *= 2.0;
        iterations += 1;
    }
    widen = b - a;
    while d(b)? < 0.0 {
        b += widen;
        widen *= 2.0;
        iterations += 1;
        if iterations > 5000 {
            return Err(Error::NotConverged {
                iterations,
                residual: d(b)?,
            });
        }
    }
    // Illinois false position with a bisection every fourth step
    let (mut da, mut db) = (d(a)?, d(b)?);
    let mut last_side = 0i8;
    for step in 0..400 {
        let mid = 0.5 * (a + b);
        if b - a <= 1e-15 * mid || da == 0.0 || db == 0.0 {
            break;
        }
        let secant = b - db * (b - a) / (db - da);
        let bisect = step % 4 == 3 || !(secant > a && secant < b);
        let x = if bisect { mid } else { secant };
        let dx = d(x)?;
        iterations += 1;
        if dx == 0.0 {
            a = x;
            b = x;
            break;
        }
        if dx < 0.0 {
            if !bisect && last_side < 0 {
                db *= 0.5;
            }
            a = x;
            da = dx;
            last_side = -1;
        } else {
            if !bisect && last_side > 0 {
                da *= 0.5;
            }
            b = x;
            db = dx;
            last_side = 1;
        }
    }
    let tau_star = 0.5 * (a + b);
    Ok(DualEvaluation {
        tau_star,
        value: f(tau_star)?,
        iterations,
        derivative: d(tau_star)?,
        interior: true,
    })
}

/// Worst-case expected cost over the full ambiguity set, via the dual.
pub fn dual_worst_case(cm: &CostModel, occ: &EdgeOccupancy, eps: f64) -> Result<DualEvaluation> {
    let all: Vec<usize> = (0..cm.len()).collect();
    minimize_dual(cm, occ, eps, &all)
}

/// Dual evaluation when only `edge` may deviate from its nominal law.
pub fn dual_single_edge_worst(
    cm: &CostModel,
    occ: &EdgeOccupancy,
    eps: f64,
    edge: &Edge,
) -> Result<DualEvaluation> {
    let k = occ.edge_index(edge)?;
    minimize_dual(cm, occ, eps, &[k])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cap on grid points visited per outlet.
pub const BRUTE_FORCE_MAX_POINTS: f64 = 5e7;

/// Exhaustive grid search of the entropy-regularized objective.
///
/// The objective separates over outlets, so each outlet's conditional
/// distribution is searched on the grid `{k * step}` of its simplex. The total
/// number of free coordinates must be at most three.
pub fn brute_force_plan(
    net: &Network,
    demand: &Demand,
    alpha: f64,
    grid_step: f64,
) -> Result<Plan> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be in (0, 1], got {grid_step}"
        )));
    }
    let shape = net.shape();
    let m = shape.paths_per_outlet();
    let ns = shape.outlets;
    let active = demand.values().iter().filter(|&&z| z > 0.0).count();
    let free = active * (m - 1);
    if free > 3 {
        return Err(Error::TooLarge(format!(
            "{free} free dimensions, at most 3 supported"
        )));
    }
    let n = (1.0 / grid_step).round() as usize;
    let points = binomial(n + m - 1, m - 1);
    if points > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::TooLarge(format!("{points} grid points per outlet")));
    }
    let costs = net.path_costs();
    let mut probs = vec![0.0; shape.num_paths()];
    for (s, &zeta) in demand.values().iter().enumerate() {
        if zeta == 0.0 {
            continue;
        }
        let c: Vec<f64> = (s..costs.len()).step_by(ns).map(|k| costs[k]).collect();
        let objective = |counts: &[usize]| -> f64 {
            counts
                .iter()
                .zip(&c)
                .map(|(&k, &cost)| {
                    let p = zeta * k as f64 / n as f64;
                    let ent = if p > 0.0 { p * p.ln() } else { 0.0 };
                    cost * p + alpha * ent
                })
                .sum()
        };
        let mut best = (f64::INFINITY, vec![0; m]);
        let mut counts = vec![0; m];
        visit_compositions(n, 0, &mut counts, &mut |cand| {
            let v = objective(cand);
            if v < best.0 {
                best = (v, cand.to_vec());
            }
        });
        for (j, k) in best.1.iter().enumerate() {
            probs[s + j * ns] = zeta * *k as f64 / n as f64;
        }
    }
    Plan::new(shape, probs, alpha)
}

fn visit_compositions(
    remaining: usize,
    pos: usize,
    counts: &mut [usize],
    visit: &mut impl FnMut(&[usize]),
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[pos] = k;
        visit_compositions(remaining - k, pos + 1, counts, visit);
    }
}

/// Expected cost and KL size of a Gaussian mean-shift perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanShift {
    /// `sum_e delta_e^2 / (2 sigma_e^2)`; infinite when a zero-variance edge moves.
    pub kl: f64,
    /// `sum_e phi_e (mean_e + delta_e)`.
    pub value: f64,
}

pub fn mean_shift_tilt(cm: &CostModel, occ: &EdgeOccupancy, delta: &[f64]) -> Result<MeanShift> {
    if delta.len() != cm.len() {
        return Err(Error::DomainMismatch {
            cost: cm.len(),
            occupancy: delta.len(),
        });
    }
    let mut kl = 0.0;
    for (d, v) in delta.iter().zip(cm.variance()) {
        if *d == 0.0 {
            continue;
        }
        kl += if *v > 0.0 {
            d * d / (2.0 * v)
        } else {
            f64::INFINITY
        };
    }
    let value =
        nominal_cost(cm, occ)? + occ.phi().iter().zip(delta).map(|(p, d)| p * d).sum::<f64>();
    Ok(MeanShift { kl, value })
}

/// Largest expected cost among `n` random KL-feasible Gaussian mean shifts.
///
/// Every other sample lies on the boundary of the budget; the rest are
/// scaled uniformly into its interior.
pub fn mc_feasible_tilt_check(
    cm: &CostModel,
    occ: &EdgeOccupancy,
    eps: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::NegativeEpsilon(eps));
    }
    let nominal = nominal_cost(cm, occ)?;
    let sigma: Vec<f64> = cm.variance().iter().map(|v| v.sqrt()).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut z = vec![0.0; cm.len()];
    for i in 0..n {
        let mut norm2 = 0.0;
        for (zk, s) in z.iter_mut().zip(&sigma) {
            *zk = if *s > 0.0 {
                rng.sample(StandardNormal)
            } else {
                0.0
            };
            norm2 += *zk * *zk;
        }
        let u: f64 = if i % 2 == 0 { 1.0 } else { rng.gen() };
        let value = if norm2 > 0.0 {
            let r = (2.0 * eps / norm2).sqrt() * u;
            let shift: f64 = occ
                .phi()
                .iter()
                .zip(&sigma)
                .zip(&z)
                .map(|((p, s), zk)| p * s * zk * r)
                .sum();
            nominal + shift
        } else {
            nominal
        };
        best = best.max(value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{PathIndex, Shape};
    use crate::planner::{plan_objective, solve_gibbs};
    use crate::resilience::{edge_occupancy, worst_case_cost, worst_case_means};

    fn unit_instance() -> (CostModel, EdgeOccupancy) {
        let shape = Shape::new(1, 1, 1).unwrap();
        let plan = Plan::new(shape, vec![1.0], 1.0).unwrap();
        let occ = edge_occupancy(&plan, &PathIndex::new(shape)).unwrap();
        (CostModel::new(vec![1.0; 3], vec![1.0; 3]).unwrap(), occ)
    }

    #[test]
    fn centered_log_mgf_matches_gaussian_identity() {
        for (var, theta) in [
            (1.0, 0.5),
            (0.25, 3.0),
            (4.0, -0.7),
            (1e-4, 40.0),
            (2.0, 1e-3),
        ] {
            let (l, dl) = centered_log_mgf(var, theta, true).unwrap();
            assert!(
                (l - 0.5 * theta * theta * var).abs() < 1e-10,
                "{var} {theta}: {l}"
            );
            assert!(
                (dl - theta * var).abs() < 1e-9 * (1.0 + (theta * var).abs()),
                "{var} {theta}: {dl}"
            );
        }
    }

    #[test]
    fn dual_objective_matches_analytic_value() {
        let (cm, occ) = unit_instance();
        for tau in [0.05, 0.4, 1.0, 3.0] {
            let v = dual_objective(&cm, &occ, 1.0, tau).unwrap();
            let analytic = tau + 1.0 + 3.0 * (1.0 / 9.0) / (2.0 * tau);
            assert!((v - analytic).abs() < 1e-8);
        }
        let flat = CostModel::new(vec![1.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(
            dual_objective(&flat, &occ, 2.0, 0.5).unwrap(),
            0.5 * 2.0 + 1.0
        );
        assert!(dual_objective(&cm, &occ, 1.0, 0.0).is_err());
    }

    #[test]
    fn dual_objective_is_convex_in_tau() {
        let (cm, occ) = unit_instance();
        let taus: Vec<f64> = (1..40).map(|k| 0.05 * k as f64).collect();
        for w in taus.windows(3) {
            let f = |t| dual_objective(&cm, &occ, 0.7, t).unwrap();
            assert!(f(w[1]) <= 0.5 * (f(w[0]) + f(w[2])) + 1e-12);
        }
    }

    #[test]
    fn dual_unit_instance() {
        let (cm, occ) = unit_instance();
        let r = dual_worst_case(&cm, &occ, 1.0).unwrap();
        assert!((r.value - (1.0 + (2.0f64 / 3.0).sqrt())).abs() < 1e-9);
        assert!((r.tau_star - (1.0f64 / 6.0).sqrt()).abs() < 1e-7);
        assert!(r.derivative.abs() <= 1e-8);
        assert!(r.interior);
    }

    #[test]
    fn dual_tiny_epsilon_tends_to_nominal() {
        let (cm, occ) = unit_instance();
        let r = dual_worst_case(&cm, &occ, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn dual_zero_variance_is_boundary_minimum() {
        let (_, occ) = unit_instance();
        let flat = CostModel::new(vec![2.0; 3], vec![0.0; 3]).unwrap();
        let r = dual_worst_case(&flat, &occ, 1.0).unwrap();
        assert!(!r.interior);
        assert!((r.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn single_edge_dual_unit_instance() {
        let (cm, occ) = unit_instance();
        let r = dual_single_edge_worst(&cm, &occ, 2.0, &Edge::transport(0, 0)).unwrap();
        assert!((r.value - 5.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_two_paths() {
        let shape = Shape::new(2, 1, 1).unwrap();
        let net =
            Network::from_edge_costs(shape, vec![1.0, 2.0, 0.0, 0.0, 0.0], vec![0.0; 5]).unwrap();
        let d = Demand::uniform(1);
        let plan = brute_force_plan(&net, &d, 1.0, 1e-4).unwrap();
        assert!((plan.probabilities()[0] - 0.7311).abs() < 1e-3);
        let gibbs = solve_gibbs(&net, &d, 1.0).unwrap();
        assert!(plan_objective(&net, &gibbs, 1.0) <= plan_objective(&net, &plan, 1.0));
    }

    #[test]
    fn brute_force_trivial_and_symmetric() {
        let shape = Shape::new(1, 1, 1).unwrap();
        let net = Network::from_edge_costs(shape, vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        for alpha in [0.1, 1.0, 10.0] {
            let p = brute_force_plan(&net, &Demand::uniform(1), alpha, 1e-3).unwrap();
            assert_eq!(p.probabilities(), &[1.0]);
        }
        let shape = Shape::new(1, 2, 1).unwrap();
        let net =
            Network::from_edge_costs(shape, vec![1.0, 2.0, 2.0, 3.0, 3.0], vec![0.0; 5]).unwrap();
        let p = brute_force_plan(&net, &Demand::uniform(1), 0.4, 1e-3).unwrap();
        assert_eq!(p.probabilities(), &[0.5, 0.5]);
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let (net, d) = crate::network::generate_random_network(3, 4, 5, 1, 10.0).unwrap();
        assert!(matches!(
            brute_force_plan(&net, &d, 1.0, 0.1),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn monte_carlo_respects_bound() {
        let (cm, occ) = unit_instance();
        let bound = worst_case_cost(&cm, 1.0, &occ).unwrap();
        let max = mc_feasible_tilt_check(&cm, &occ, 1.0, 10_000, 5).unwrap();
        assert!(max <= 1.816497 + 1e-6 && max <= bound + 1e-9);
        assert!(max > 1.0);

        let means = worst_case_means(&cm, 1.0, &occ).unwrap();
        let delta: Vec<f64> = means.iter().zip(cm.mean()).map(|(a, b)| a - b).collect();
        let shift = mean_shift_tilt(&cm, &occ, &delta).unwrap();
        assert!((shift.kl - 1.0).abs() < 1e-12);
        assert!((shift.value - bound).abs() < 1e-9);

        let zero = mc_feasible_tilt_check(&cm, &occ, 0.0, 100, 5).unwrap();
        assert_eq!(zero, 1.0);
    }
}
