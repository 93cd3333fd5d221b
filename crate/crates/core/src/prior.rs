//! Ruelle–Bowen reference measure on the symmetrized network graph.
//!
//! The weight matrix `B` has `B_ij = exp(-A_ij / alpha)` on every edge in both
//! directions. With Perron eigenvalue `lambda` and left/right eigenvectors
//! `u`, `v` scaled so that `sum_i u_i v_i = 1`, the measure of a walk
//! `x_0 .. x_T` is `u_{x_0} v_{x_T} lambda^{-T} prod_t B_{x_t x_{t+1}}`, a
//! probability distribution over all walks of length `T`.
//!
//! The strictly layered graph is nilpotent, so the prior is only meaningful on
//! the symmetrized graph. Node order is `i`, factories, warehouses, outlets.

use crate::error::{Error, Result};
use crate::network::{Demand, Layer, Network, NodeId, Shape};
use crate::planner::{expected_path_cost, plan_entropy, Plan};

pub const PERRON_TOLERANCE: f64 = 1e-13;
pub const PERRON_MAX_ITER: usize = 100_000;
/// Walk length of a path `i -> f -> w -> s`.
pub const PATH_STEPS: usize = 3;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub lambda: f64,
    /// Left eigenvector, `u^T B = lambda u^T`.
    pub u: Vec<f64>,
    /// Right eigenvector, `B v = lambda v`.
    pub v: Vec<f64>,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Dominant eigenvector by power iteration on `B + cI`.
///
/// The shift `c` (the largest absolute row sum) makes the iteration aperiodic,
/// which the bipartite layered graph needs: its spectrum is symmetric about
/// zero. Returns the eigenvalue of `B` and the unit 2-norm eigenvector.
fn power_iteration(b: &SquareMatrix) -> Result<(f64, Vec<f64>)> {
    let n = b.dim();
    let shift = (0..n)
        .map(|i| (0..n).map(|j| b.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if shift == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut change = f64::INFINITY;
    for _ in 0..PERRON_MAX_ITER {
        let bv = b.mul_vec(&v);
        let mut next: Vec<f64> = bv.iter().zip(&v).map(|(a, x)| a + shift * x).collect();
        let norm = norm2(&next);
        next.iter_mut().for_each(|x| *x /= norm);
        change = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if change <= PERRON_TOLERANCE {
            let bv = b.mul_vec(&v);
            let lambda = bv.iter().sum::<f64>() / v.iter().sum::<f64>();
            let residual = bv
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - lambda * x).abs())
                .fold(0.0, f64::max);
            if residual <= 1e-11 * lambda {
                return Ok((lambda, v));
            }
        }
    }
    Err(Error::NotConverged {
        iterations: PERRON_MAX_ITER,
        residual: change,
    })
}

/// Perron eigenvalue with left and right eigenvectors of a nonnegative matrix,
/// scaled so that `sum_i u_i v_i = 1`.
pub fn perron_eigenpair(b: &SquareMatrix) -> Result<PerronPair> {
    if b.data.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument(
            "Perron iteration needs a finite nonnegative matrix".into(),
        ));
    }
    let (lambda, mut v) = power_iteration(b)?;
    if lambda <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let (_, mut u) = power_iteration(&b.transpose())?;
    let overlap: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    if !(overlap > 0.0) {
        return Err(Error::NotConverged {
            iterations: PERRON_MAX_ITER,
            residual: overlap,
        });
    }
    let scale = overlap.sqrt();
    u.iter_mut().for_each(|x| *x /= scale);
    v.iter_mut().for_each(|x| *x /= scale);
    Ok(PerronPair { lambda, u, v })
}

/// Ruelle–Bowen reference measure for one network and regularization weight.
#[derive(Debug, Clone)]
pub struct RbPrior {
    shape: Shape,
    alpha: f64,
    weights: SquareMatrix,
    pair: PerronPair,
}

impl RbPrior {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.pair.lambda
    }

    pub fn u(&self) -> &[f64] {
        &self.pair.u
    }

    pub fn v(&self) -> &[f64] {
        &self.pair.v
    }

    pub fn weights(&self) -> &SquareMatrix {
        &self.weights
    }

    pub fn num_nodes(&self) -> usize {
        self.weights.dim()
    }

    /// Position of a node in the prior's node order.
    pub fn node_index(&self, node: NodeId) -> usize {
        let s = self.shape;
        match node.layer {
            Layer::Virtual => 0,
            Layer::Factory => 1 + node.index,
            Layer::Warehouse => 1 + s.factories + node.index,
            Layer::Outlet => 1 + s.factories + s.warehouses + node.index,
        }
    }
}

/// Builds `B` from the symmetrized edges and its Perron data.
pub fn build_rb_prior(net: &Network, alpha: f64) -> Result<RbPrior> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let shape = net.shape();
    let n = 1 + shape.num_nodes();
    let mut weights = SquareMatrix::zeros(n);
    let mut prior = RbPrior {
        shape,
        alpha,
        weights: SquareMatrix::zeros(0),
        pair: PerronPair {
            lambda: 0.0,
            u: Vec::new(),
            v: Vec::new(),
        },
    };
    for (k, edge) in shape.edges().enumerate() {
        let (a, b) = (prior.node_index(edge.from), prior.node_index(edge.to));
        let w = (-net.costs()[k] / alpha).exp();
        weights.set(a, b, w);
        weights.set(b, a, w);
    }
    prior.pair = perron_eigenpair(&weights)?;
    prior.weights = weights;
    Ok(prior)
}

/// Measure of the walk `walk[0] -> .. -> walk[T]` (node indices in prior order).
pub fn rb_path_measure(prior: &RbPrior, walk: &[usize]) -> Result<f64> {
    let n = prior.num_nodes();
    if walk.is_empty() || walk.iter().any(|&x| x >= n) {
        return Err(Error::InvalidArgument(format!(
            "walk must be a nonempty sequence of node indices below {n}"
        )));
    }
    let mut product = 1.0;
    for pair in walk.windows(2) {
        let w = prior.weights.get(pair[0], pair[1]);
        if w == 0.0 {
            return Err(Error::NonAdjacentStep {
                from: pair[0],
                to: pair[1],
            });
        }
        product *= w;
    }
    let steps = (walk.len() - 1) as i32;
    Ok(prior.pair.u[walk[0]]
        * prior.pair.v[walk[walk.len() - 1]]
        * prior.lambda().powi(-steps)
        * product)
}

/// Terms of `KL(P || M_RB)` for a plan supported on `i -> f -> w -> s` walks:
///
/// ```text
/// KL = (E_P[C] - alpha H(P)) / alpha - log u_i - sum_s zeta_s log v_s + T log lambda
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDecomposition {
    /// `(E_P[C] - alpha H(P)) / alpha`, the only plan-dependent term.
    pub objective: f64,
    /// `-log u_i`.
    pub source: f64,
    /// `-sum_s zeta_s log v_s`.
    pub terminal: f64,
    /// `T log lambda`.
    pub eigenvalue: f64,
}

impl KlDecomposition {
    pub fn total(&self) -> f64 {
        self.objective + self.source + self.terminal + self.eigenvalue
    }
}

pub fn kl_decomposition(
    net: &Network,
    demand: &Demand,
    plan: &Plan,
    prior: &RbPrior,
) -> KlDecomposition {
    let alpha = prior.alpha;
    let shape = net.shape();
    let outlet0 = prior.node_index(NodeId::outlet(0));
    KlDecomposition {
        objective: (expected_path_cost(net, plan) - alpha * plan_entropy(plan)) / alpha,
        source: -prior.pair.u[0].ln(),
        terminal: -(0..shape.outlets)
            .filter(|&s| demand.values()[s] > 0.0)
            .map(|s| demand.values()[s] * prior.pair.v[outlet0 + s].ln())
            .sum::<f64>(),
        eigenvalue: PATH_STEPS as f64 * prior.lambda().ln(),
    }
}

/// `sum_x P_x log(P_x / M_RB(i, f, w, s))`, summed directly over paths.
pub fn kl_to_prior(net: &Network, plan: &Plan, prior: &RbPrior) -> Result<f64> {
    let shape = net.shape();
    if plan.shape() != shape || prior.shape != shape {
        return Err(Error::PlanMismatch(
            "plan, prior and network shapes differ".into(),
        ));
    }
    let log_u0 = prior.pair.u[0].ln();
    let log_lambda = prior.lambda().ln();
    let mut kl = 0.0;
    for (k, &p) in plan.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let path = shape.path(k);
        let walk = [
            0,
            prior.node_index(NodeId::factory(path.factory)),
            prior.node_index(NodeId::warehouse(path.warehouse)),
            prior.node_index(NodeId::outlet(path.outlet)),
        ];
        let v_end = prior.pair.v[walk[3]];
        let blocked = walk
            .windows(2)
            .any(|w| prior.weights.get(w[0], w[1]) == 0.0);
        if blocked || v_end <= 0.0 || prior.pair.u[0] <= 0.0 {
            return Err(Error::ZeroPriorMass);
        }
        let log_m = log_u0 + v_end.ln()
            - PATH_STEPS as f64 * log_lambda
            - net.path_cost(&path) / prior.alpha;
        kl += p * (p.ln() - log_m);
    }
    Ok(kl)
}
