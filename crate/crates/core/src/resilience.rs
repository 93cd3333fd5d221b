//! Worst-case expected cost over a KL ambiguity set of Gaussian edge costs.
//!
//! Edge costs are independent `A_e ~ N(mean_e, variance_e)`. For a plan with
//! edge occupation `phi_e = (1/3) sum_{x in X_e} P_x`, the largest occupancy
//! weighted expected cost over all cost laws within total KL budget `eps` is
//!
//! ```text
//! L* = sum_e phi_e mean_e + sqrt(2 eps sum_e phi_e^2 variance_e)
//! ```
//!
//! and it is attained by Gaussians with shifted means
//! `mean_e + variance_e phi_e sqrt(2 eps / sum phi^2 variance)`. Restricting
//! the budget to a single edge `e` gives `sum phi mean + phi_e sigma_e sqrt(2 eps)`.

use crate::error::{Error, Result};
use crate::network::{Edge, Network, PathIndex, Shape};
use crate::planner::Plan;

/// Default "business impossible" level for resilience curves.
pub const DEFAULT_THRESHOLD: f64 = 8.0;

/// Gaussian law of every edge cost, in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl CostModel {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::DomainMismatch {
                cost: mean.len(),
                occupancy: variance.len(),
            });
        }
        if let Some(k) = variance.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NegativeVariance {
                edge: format!("#{k}"),
                value: variance[k],
            });
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("cost mean".into()));
        }
        Ok(Self { mean, variance })
    }

    pub fn from_network(net: &Network) -> Self {
        Self {
            mean: net.costs().to_vec(),
            variance: net.variances().to_vec(),
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Edge occupation probabilities, in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOccupancy {
    shape: Shape,
    phi: Vec<f64>,
}

impl EdgeOccupancy {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Sum of `phi` over the production, transport and delivery layers.
    pub fn layer_sums(&self) -> [f64; 3] {
        let f = self.shape.factories;
        let fw = f + f * self.shape.warehouses;
        [
            self.phi[..f].iter().sum(),
            self.phi[f..fw].iter().sum(),
            self.phi[fw..].iter().sum(),
        ]
    }

    pub fn edge_index(&self, edge: &Edge) -> Result<usize> {
        self.shape
            .edge_index(edge)
            .ok_or_else(|| Error::UnknownEdge(format!("{edge:?}")))
    }
}

/// `phi_e = (1/3) sum_{x in X_e} P_x`.
pub fn edge_occupancy(plan: &Plan, index: &PathIndex) -> Result<EdgeOccupancy> {
    let shape = index.shape();
    if plan.shape() != shape {
        return Err(Error::PlanMismatch(
            "plan and path index shapes differ".into(),
        ));
    }
    let p = plan.probabilities();
    let phi = (0..shape.num_edges())
        .map(|e| index.through_edge(e).iter().map(|&x| p[x]).sum::<f64>() / 3.0)
        .collect();
    Ok(EdgeOccupancy { shape, phi })
}

fn check_domain(cm: &CostModel, occ: &EdgeOccupancy) -> Result<()> {
    if cm.len() != occ.phi.len() {
        return Err(Error::DomainMismatch {
            cost: cm.len(),
            occupancy: occ.phi.len(),
        });
    }
    Ok(())
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeEpsilon(eps))
    }
}

/// `sum_e phi_e mean_e`.
pub fn nominal_cost(cm: &CostModel, occ: &EdgeOccupancy) -> Result<f64> {
    check_domain(cm, occ)?;
    Ok(occ.phi.iter().zip(&cm.mean).map(|(p, a)| p * a).sum())
}

/// `sum_e phi_e^2 variance_e`, the spread that the KL budget can exploit.
pub fn variance_mass(cm: &CostModel, occ: &EdgeOccupancy) -> Result<f64> {
    check_domain(cm, occ)?;
    Ok(occ
        .phi
        .iter()
        .zip(&cm.variance)
        .map(|(p, v)| p * p * v)
        .sum())
}

pub fn worst_case_cost(cm: &CostModel, eps: f64, occ: &EdgeOccupancy) -> Result<f64> {
    check_epsilon(eps)?;
    let nominal = nominal_cost(cm, occ)?;
    Ok(nominal + (2.0 * eps * variance_mass(cm, occ)?).sqrt())
}

/// Means of the worst-case Gaussian cost laws.
pub fn worst_case_means(cm: &CostModel, eps: f64, occ: &EdgeOccupancy) -> Result<Vec<f64>> {
    check_epsilon(eps)?;
    let mass = variance_mass(cm, occ)?;
    if mass <= 0.0 {
        return Err(Error::ZeroVarianceMass);
    }
    let scale = (2.0 * eps / mass).sqrt();
    Ok(cm
        .mean
        .iter()
        .zip(&cm.variance)
        .zip(&occ.phi)
        .map(|((a, v), p)| a + v * p * scale)
        .collect())
}

/// Worst case when only edge `edge` may deviate from its nominal law.
pub fn single_edge_worst(
    cm: &CostModel,
    eps: f64,
    occ: &EdgeOccupancy,
    edge: &Edge,
) -> Result<f64> {
    check_epsilon(eps)?;
    let k = occ.edge_index(edge)?;
    single_edge_worst_at(cm, eps, occ, k)
}

pub(crate) fn single_edge_worst_at(
    cm: &CostModel,
    eps: f64,
    occ: &EdgeOccupancy,
    k: usize,
) -> Result<f64> {
    check_epsilon(eps)?;
    let nominal = nominal_cost(cm, occ)?;
    Ok(nominal + occ.phi[k] * cm.variance[k].sqrt() * (2.0 * eps).sqrt())
}

/// Edge maximizing the single-edge worst case, i.e. maximizing `phi_e sigma_e`.
/// Ties go to the first edge in canonical order.
pub fn riskiest_edge(cm: &CostModel, eps: f64, occ: &EdgeOccupancy) -> Result<Edge> {
    check_domain(cm, occ)?;
    check_epsilon(eps)?;
    let score = |k: usize| occ.phi[k] * cm.variance[k].sqrt();
    let best = (1..occ.phi.len()).fold(0, |best, k| if score(k) > score(best) { k } else { best });
    Ok(occ.shape.edge(best))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRisk {
    pub edge: Edge,
    pub edge_index: usize,
    pub phi: f64,
    pub sigma2: f64,
    pub l_edge_star: f64,
    /// 1-based rank, 1 is the riskiest.
    pub rank: usize,
}

/// All edges ordered by decreasing single-edge worst case (stable on ties).
pub fn edge_risk_ranking(cm: &CostModel, eps: f64, occ: &EdgeOccupancy) -> Result<Vec<EdgeRisk>> {
    check_domain(cm, occ)?;
    check_epsilon(eps)?;
    let nominal = nominal_cost(cm, occ)?;
    let root = (2.0 * eps).sqrt();
    let mut rows: Vec<EdgeRisk> = (0..occ.phi.len())
        .map(|k| EdgeRisk {
            edge: occ.shape.edge(k),
            edge_index: k,
            phi: occ.phi[k],
            sigma2: cm.variance[k],
            l_edge_star: nominal + occ.phi[k] * cm.variance[k].sqrt() * root,
            rank: 0,
        })
        .collect();
    // sort on phi * sigma so that eps = 0 still ranks by exposure
    rows.sort_by(|a, b| {
        let sa = a.phi * a.sigma2.sqrt();
        let sb = b.phi * b.sigma2.sqrt();
        sb.total_cmp(&sa)
    });
    for (r, row) in rows.iter_mut().enumerate() {
        row.rank = r + 1;
    }
    Ok(rows)
}

/// Sampled map `eps -> L*` for one plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ResilienceCurve {
    pub label: String,
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub threshold: f64,
    /// Smallest grid `eps` with `L* >= threshold`.
    pub crossing: Option<f64>,
}

impl ResilienceCurve {
    fn from_values(label: String, epsilons: Vec<f64>, values: Vec<f64>, threshold: f64) -> Self {
        let crossing = epsilons
            .iter()
            .zip(&values)
            .find(|(_, v)| **v >= threshold)
            .map(|(e, _)| *e);
        Self {
            label,
            epsilons,
            values,
            threshold,
            crossing,
        }
    }
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidArgument("epsilon grid is empty".into()));
    }
    for &e in eps_grid {
        check_epsilon(e)?;
    }
    if eps_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "epsilon grid must be ascending".into(),
        ));
    }
    Ok(())
}

pub fn resilience_curve(
    label: impl Into<String>,
    cm: &CostModel,
    occ: &EdgeOccupancy,
    eps_grid: &[f64],
    threshold: f64,
) -> Result<ResilienceCurve> {
    check_grid(eps_grid)?;
    let nominal = nominal_cost(cm, occ)?;
    let mass = variance_mass(cm, occ)?;
    let values = eps_grid
        .iter()
        .map(|e| nominal + (2.0 * e * mass).sqrt())
        .collect();
    Ok(ResilienceCurve::from_values(
        label.into(),
        eps_grid.to_vec(),
        values,
        threshold,
    ))
}

/// Single-edge analogue of [`resilience_curve`].
pub fn single_edge_curve(
    label: impl Into<String>,
    cm: &CostModel,
    occ: &EdgeOccupancy,
    edge: &Edge,
    eps_grid: &[f64],
    threshold: f64,
) -> Result<ResilienceCurve> {
    check_grid(eps_grid)?;
    let k = occ.edge_index(edge)?;
    let values = eps_grid
        .iter()
        .map(|&e| single_edge_worst_at(cm, e, occ, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResilienceCurve::from_values(
        label.into(),
        eps_grid.to_vec(),
        values,
        threshold,
    ))
}
