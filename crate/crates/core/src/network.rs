//! Layered logistics network: a virtual production node `i`, factories,
//! distribution bases (warehouses) and sales outlets.
//!
//! Edges only run `i -> factory`, `factory -> warehouse` and
//! `warehouse -> outlet`. They are stored densely in a canonical order
//! (production edges, then factory/warehouse pairs, then warehouse/outlet
//! pairs, each block in row-major order of the endpoint indices), and every
//! per-edge quantity in this crate is a `Vec<f64>` in that order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the virtual production node.
pub const VIRTUAL_NODE: &str = "i";

/// Tolerance on `|sum(zeta) - 1|` accepted at load time.
pub const DEMAND_TOLERANCE: f64 = 1e-12;

/// Ratio `r` used for `sigma_e^2 = (r * cost_e)^2` when a document gives no variance.
pub const DEFAULT_SIGMA2_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    Virtual,
    Factory,
    Warehouse,
    Outlet,
}

impl Layer {
    pub fn name(self) -> &'static str {
        match self {
            Layer::Virtual => "virtual",
            Layer::Factory => "factories",
            Layer::Warehouse => "warehouses",
            Layer::Outlet => "outlets",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub layer: Layer,
    pub index: usize,
}

impl NodeId {
    pub const VIRTUAL: NodeId = NodeId {
        layer: Layer::Virtual,
        index: 0,
    };

    pub fn factory(index: usize) -> Self {
        Self {
            layer: Layer::Factory,
            index,
        }
    }

    pub fn warehouse(index: usize) -> Self {
        Self {
            layer: Layer::Warehouse,
            index,
        }
    }

    pub fn outlet(index: usize) -> Self {
        Self {
            layer: Layer::Outlet,
            index,
        }
    }
}

/// A directed edge of the layered graph. The derived ordering is the
/// canonical edge order (layer of the tail, then tail index, then head index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
}

impl Edge {
    /// Builds an edge, rejecting layer pairs outside the layered edge set.
    pub fn new(from: NodeId, to: NodeId) -> Option<Self> {
        let ok = matches!(
            (from.layer, to.layer),
            (Layer::Virtual, Layer::Factory)
                | (Layer::Factory, Layer::Warehouse)
                | (Layer::Warehouse, Layer::Outlet)
        );
        (ok && (from.layer != Layer::Virtual || from.index == 0)).then_some(Self { from, to })
    }

    pub fn production(factory: usize) -> Self {
        Self {
            from: NodeId::VIRTUAL,
            to: NodeId::factory(factory),
        }
    }

    pub fn transport(factory: usize, warehouse: usize) -> Self {
        Self {
            from: NodeId::factory(factory),
            to: NodeId::warehouse(warehouse),
        }
    }

    pub fn delivery(warehouse: usize, outlet: usize) -> Self {
        Self {
            from: NodeId::warehouse(warehouse),
            to: NodeId::outlet(outlet),
        }
    }
}

/// A path `x = (f, w, s)`; the virtual prefix node is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub factory: usize,
    pub warehouse: usize,
    pub outlet: usize,
}

impl Path {
    pub fn new(factory: usize, warehouse: usize, outlet: usize) -> Self {
        Self {
            factory,
            warehouse,
            outlet,
        }
    }

    pub fn edges(&self) -> [Edge; 3] {
        [
            Edge::production(self.factory),
            Edge::transport(self.factory, self.warehouse),
            Edge::delivery(self.warehouse, self.outlet),
        ]
    }
}

/// Layer sizes plus the index arithmetic shared by every dense per-edge and
/// per-path vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub factories: usize,
    pub warehouses: usize,
    pub outlets: usize,
}

impl Shape {
    pub fn new(factories: usize, warehouses: usize, outlets: usize) -> Result<Self> {
        for (n, layer) in [
            (factories, Layer::Factory),
            (warehouses, Layer::Warehouse),
            (outlets, Layer::Outlet),
        ] {
            if n == 0 {
                return Err(Error::EmptyLayer(layer.name()));
            }
        }
        Ok(Self {
            factories,
            warehouses,
            outlets,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.factories + self.factories * self.warehouses + self.warehouses * self.outlets
    }

    pub fn num_paths(&self) -> usize {
        self.factories * self.warehouses * self.outlets
    }

    /// Number of real nodes, excluding the virtual production node.
    pub fn num_nodes(&self) -> usize {
        self.factories + self.warehouses + self.outlets
    }

    /// Paths per outlet, `|X_s| = |F| |W|`.
    pub fn paths_per_outlet(&self) -> usize {
        self.factories * self.warehouses
    }

    pub fn edge_index(&self, edge: &Edge) -> Option<usize> {
        let (f, w, s) = (self.factories, self.warehouses, self.outlets);
        match (edge.from.layer, edge.to.layer) {
            (Layer::Virtual, Layer::Factory) if edge.from.index == 0 && edge.to.index < f => {
                Some(edge.to.index)
            }
            (Layer::Factory, Layer::Warehouse) if edge.from.index < f && edge.to.index < w => {
                Some(f + edge.from.index * w + edge.to.index)
            }
            (Layer::Warehouse, Layer::Outlet) if edge.from.index < w && edge.to.index < s => {
                Some(f + f * w + edge.from.index * s + edge.to.index)
            }
            _ => None,
        }
    }

    pub fn edge(&self, index: usize) -> Edge {
        let (f, w, s) = (self.factories, self.warehouses, self.outlets);
        if index < f {
            Edge::production(index)
        } else if index < f + f * w {
            let k = index - f;
            Edge::transport(k / w, k % w)
        } else {
            assert!(index < self.num_edges(), "edge index {index} out of range");
            let k = index - f - f * w;
            Edge::delivery(k / s, k % s)
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_edges()).map(move |k| self.edge(k))
    }

    /// Edge indices of the production, transport and delivery legs of a path.
    pub fn path_edge_indices(&self, path: &Path) -> [usize; 3] {
        let (f, w, s) = (self.factories, self.warehouses, self.outlets);
        [
            path.factory,
            f + path.factory * w + path.warehouse,
            f + f * w + path.warehouse * s + path.outlet,
        ]
    }

    /// Paths are numbered lexicographically in `(f, w, s)`.
    pub fn path_index(&self, path: &Path) -> usize {
        (path.factory * self.warehouses + path.warehouse) * self.outlets + path.outlet
    }

    pub fn path(&self, index: usize) -> Path {
        let s = index % self.outlets;
        let rest = index / self.outlets;
        Path::new(rest / self.warehouses, rest % self.warehouses, s)
    }

    pub fn paths(&self) -> impl Iterator<Item = Path> + '_ {
        (0..self.num_paths()).map(move |k| self.path(k))
    }
}

/// Node labels per layer; the virtual node is always [`VIRTUAL_NODE`].
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub factories: Vec<String>,
    pub warehouses: Vec<String>,
    pub outlets: Vec<String>,
}

impl Labels {
    pub fn numbered(shape: Shape) -> Self {
        let numbered = |prefix: &str, n: usize| (1..=n).map(|k| format!("{prefix}{k}")).collect();
        Self {
            factories: numbered("f", shape.factories),
            warehouses: numbered("w", shape.warehouses),
            outlets: numbered("s", shape.outlets),
        }
    }

    pub fn node(&self, node: NodeId) -> &str {
        match node.layer {
            Layer::Virtual => VIRTUAL_NODE,
            Layer::Factory => &self.factories[node.index],
            Layer::Warehouse => &self.warehouses[node.index],
            Layer::Outlet => &self.outlets[node.index],
        }
    }

    pub fn find(&self, id: &str) -> Option<NodeId> {
        if id == VIRTUAL_NODE {
            return Some(NodeId::VIRTUAL);
        }
        let lookup = |v: &[String]| v.iter().position(|x| x == id);
        lookup(&self.factories)
            .map(NodeId::factory)
            .or_else(|| lookup(&self.warehouses).map(NodeId::warehouse))
            .or_else(|| lookup(&self.outlets).map(NodeId::outlet))
    }

    pub fn edge(&self, edge: &Edge) -> String {
        format!("{}->{}", self.node(edge.from), self.node(edge.to))
    }
}

/// Per-node planar positions, present when the network was built from geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Positions {
    pub factories: Vec<[f64; 2]>,
    pub warehouses: Vec<[f64; 2]>,
    pub outlets: Vec<[f64; 2]>,
}

impl Positions {
    pub fn node(&self, node: NodeId) -> Option<[f64; 2]> {
        match node.layer {
            Layer::Virtual => None,
            Layer::Factory => Some(self.factories[node.index]),
            Layer::Warehouse => Some(self.warehouses[node.index]),
            Layer::Outlet => Some(self.outlets[node.index]),
        }
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A validated network: nominal edge costs `A_e` and cost variances `sigma_e^2`
/// for every edge, in canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    shape: Shape,
    labels: Labels,
    positions: Option<Positions>,
    cost: Vec<f64>,
    variance: Vec<f64>,
}

impl Network {
    /// Builds a network from dense per-edge vectors with labels `f1.., w1.., s1..`.
    pub fn from_edge_costs(shape: Shape, cost: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        Self::with_labels(shape, Labels::numbered(shape), None, cost, variance)
    }

    pub fn with_labels(
        shape: Shape,
        labels: Labels,
        positions: Option<Positions>,
        cost: Vec<f64>,
        variance: Vec<f64>,
    ) -> Result<Self> {
        let m = shape.num_edges();
        if cost.len() != m || variance.len() != m {
            return Err(Error::InvalidArgument(format!(
                "expected {m} edge costs and variances, got {} and {}",
                cost.len(),
                variance.len()
            )));
        }
        if labels.factories.len() != shape.factories
            || labels.warehouses.len() != shape.warehouses
            || labels.outlets.len() != shape.outlets
        {
            return Err(Error::InvalidArgument(
                "label counts do not match shape".into(),
            ));
        }
        for k in 0..m {
            let name = || labels.edge(&shape.edge(k));
            if !cost[k].is_finite() || !variance[k].is_finite() {
                return Err(Error::NonFinite(name()));
            }
            if variance[k] < 0.0 {
                return Err(Error::NegativeVariance {
                    edge: name(),
                    value: variance[k],
                });
            }
        }
        Ok(Self {
            shape,
            labels,
            positions,
            cost,
            variance,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn positions(&self) -> Option<&Positions> {
        self.positions.as_ref()
    }

    /// Nominal costs `A_e` in canonical edge order.
    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    /// Variances `sigma_e^2` in canonical edge order.
    pub fn variances(&self) -> &[f64] {
        &self.variance
    }

    pub fn cost(&self, edge: &Edge) -> Option<f64> {
        self.shape.edge_index(edge).map(|k| self.cost[k])
    }

    pub fn variance(&self, edge: &Edge) -> Option<f64> {
        self.shape.edge_index(edge).map(|k| self.variance[k])
    }

    pub fn edge_label(&self, index: usize) -> String {
        self.labels.edge(&self.shape.edge(index))
    }

    /// Parses `from->to` into an edge of this network.
    pub fn parse_edge(&self, text: &str) -> Result<Edge> {
        let unknown = || Error::UnknownEdge(text.to_string());
        let (a, b) = text.split_once("->").ok_or_else(unknown)?;
        let from = self.labels.find(a.trim()).ok_or_else(unknown)?;
        let to = self.labels.find(b.trim()).ok_or_else(unknown)?;
        let edge = Edge::new(from, to).ok_or_else(unknown)?;
        self.shape.edge_index(&edge).ok_or_else(unknown)?;
        Ok(edge)
    }

    /// `C_x = A_(i,f) + A_(f,w) + A_(w,s)`.
    pub fn path_cost(&self, path: &Path) -> f64 {
        let [a, b, c] = self.shape.path_edge_indices(path);
        self.cost[a] + self.cost[b] + self.cost[c]
    }

    /// Path costs for every path in path-index order.
    pub fn path_costs(&self) -> Vec<f64> {
        let (nf, nw, ns) = (
            self.shape.factories,
            self.shape.warehouses,
            self.shape.outlets,
        );
        let mut out = Vec::with_capacity(self.shape.num_paths());
        for f in 0..nf {
            let base = self.cost[f];
            for w in 0..nw {
                let fw = base + self.cost[nf + f * nw + w];
                let row = nf + nf * nw + w * ns;
                out.extend(self.cost[row..row + ns].iter().map(|ws| fw + ws));
            }
        }
        out
    }

    pub fn enumerate_paths(&self) -> PathIndex {
        PathIndex::new(self.shape)
    }
}

/// Demand distribution `zeta_s` over outlets.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    zeta: Vec<f64>,
}

impl Demand {
    /// Validates nonnegativity and normalization; sums within
    /// [`DEMAND_TOLERANCE`] of one are renormalized.
    pub fn new(zeta: Vec<f64>) -> Result<Self> {
        if zeta.is_empty() {
            return Err(Error::EmptyLayer(Layer::Outlet.name()));
        }
        for (s, &z) in zeta.iter().enumerate() {
            if !z.is_finite() {
                return Err(Error::NonFinite(format!("demand[{s}]")));
            }
            if z < 0.0 {
                return Err(Error::NegativeDemand {
                    outlet: format!("#{s}"),
                    value: z,
                });
            }
        }
        let total: f64 = zeta.iter().sum();
        if (total - 1.0).abs() > DEMAND_TOLERANCE {
            return Err(Error::DemandNotNormalized(total));
        }
        Ok(Self {
            zeta: zeta.into_iter().map(|z| z / total).collect(),
        })
    }

    pub fn uniform(outlets: usize) -> Self {
        Self {
            zeta: vec![1.0 / outlets as f64; outlets],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.zeta
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }
}

/// All paths of a network with the reverse maps `X_s` and `X_e`.
#[derive(Debug, Clone)]
pub struct PathIndex {
    shape: Shape,
    paths: Vec<Path>,
    by_outlet: Vec<Vec<usize>>,
    by_edge: Vec<Vec<usize>>,
}

impl PathIndex {
    pub fn new(shape: Shape) -> Self {
        let paths: Vec<Path> = shape.paths().collect();
        let mut by_outlet = vec![Vec::with_capacity(shape.paths_per_outlet()); shape.outlets];
        let mut by_edge = vec![Vec::new(); shape.num_edges()];
        for (k, p) in paths.iter().enumerate() {
            by_outlet[p.outlet].push(k);
            for e in shape.path_edge_indices(p) {
                by_edge[e].push(k);
            }
        }
        Self {
            shape,
            paths,
            by_outlet,
            by_edge,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `X_s`: indices of paths ending at `outlet`.
    pub fn to_outlet(&self, outlet: usize) -> &[usize] {
        &self.by_outlet[outlet]
    }

    /// `X_e`: indices of paths that traverse edge number `edge`.
    pub fn through_edge(&self, edge: usize) -> &[usize] {
        &self.by_edge[edge]
    }
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProductionCost {
    Uniform(f64),
    PerFactory(std::collections::BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
}

/// JSON network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub factories: Vec<NodeSpec>,
    pub warehouses: Vec<NodeSpec>,
    pub outlets: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub production_cost: Option<ProductionCost>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_sigma2_ratio: Option<f64>,
    /// Outlet id to weight. Empty means uniform demand; outlets not listed get zero.
    #[serde(default)]
    pub demand: std::collections::BTreeMap<String, f64>,
}

impl NetworkDocument {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network document serializes")
    }
}

impl fmt::Display for NetworkDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Checks a document and materializes a [`Network`] and its [`Demand`].
///
/// Explicit `edges` entries take precedence; otherwise transport costs are the
/// Euclidean distance between endpoint positions and production costs come
/// from `production_cost`. Missing variances default to
/// `(default_sigma2_ratio * cost)^2`.
pub fn validate_network(doc: &NetworkDocument) -> Result<(Network, Demand)> {
    let shape = Shape::new(doc.factories.len(), doc.warehouses.len(), doc.outlets.len())?;
    let ids = |v: &[NodeSpec]| v.iter().map(|n| n.id.clone()).collect::<Vec<_>>();
    let labels = Labels {
        factories: ids(&doc.factories),
        warehouses: ids(&doc.warehouses),
        outlets: ids(&doc.outlets),
    };
    let mut seen = std::collections::HashSet::new();
    seen.insert(VIRTUAL_NODE.to_string());
    for id in labels
        .factories
        .iter()
        .chain(&labels.warehouses)
        .chain(&labels.outlets)
    {
        if id.is_empty() || id.contains("->") || !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }

    let all_positioned = doc
        .factories
        .iter()
        .chain(&doc.warehouses)
        .chain(&doc.outlets)
        .all(|n| n.position.is_some());
    let positions = all_positioned.then(|| {
        let pos = |v: &[NodeSpec]| v.iter().map(|n| n.position.unwrap()).collect::<Vec<_>>();
        Positions {
            factories: pos(&doc.factories),
            warehouses: pos(&doc.warehouses),
            outlets: pos(&doc.outlets),
        }
    });

    let m = shape.num_edges();
    let mut cost: Vec<Option<f64>> = vec![None; m];
    let mut variance: Vec<Option<f64>> = vec![None; m];

    for spec in &doc.edges {
        let from = labels
            .find(&spec.from)
            .ok_or_else(|| Error::UnknownNode(spec.from.clone()))?;
        let to = labels
            .find(&spec.to)
            .ok_or_else(|| Error::UnknownNode(spec.to.clone()))?;
        let edge = Edge::new(from, to).ok_or_else(|| Error::InvalidEdge {
            from: spec.from.clone(),
            to: spec.to.clone(),
        })?;
        let k = shape
            .edge_index(&edge)
            .expect("labels resolve inside the shape");
        if spec.cost.is_some() {
            cost[k] = spec.cost;
        }
        if spec.sigma2.is_some() {
            variance[k] = spec.sigma2;
        }
    }

    for (slot, id) in cost.iter_mut().zip(&labels.factories) {
        if slot.is_none() {
            *slot = match &doc.production_cost {
                Some(ProductionCost::Uniform(c)) => Some(*c),
                Some(ProductionCost::PerFactory(map)) => map.get(id).copied(),
                None => None,
            };
        }
    }
    if let Some(ProductionCost::PerFactory(map)) = &doc.production_cost {
        if let Some(bad) = map.keys().find(|k| !labels.factories.contains(k)) {
            return Err(Error::UnknownNode(bad.clone()));
        }
    }

    for (k, slot) in cost.iter_mut().enumerate().skip(shape.factories) {
        if slot.is_some() {
            continue;
        }
        let edge = shape.edge(k);
        let from = doc_position(doc, edge.from);
        let to = doc_position(doc, edge.to);
        if let (Some(a), Some(b)) = (from, to) {
            *slot = Some(distance(a, b));
        }
    }

    let ratio = doc.default_sigma2_ratio.unwrap_or(DEFAULT_SIGMA2_RATIO);
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "default_sigma2_ratio must be a nonnegative number, got {ratio}"
        )));
    }
    let mut costs = Vec::with_capacity(m);
    let mut variances = Vec::with_capacity(m);
    for k in 0..m {
        let c = cost[k].ok_or_else(|| Error::MissingEdgeCost(labels.edge(&shape.edge(k))))?;
        costs.push(c);
        variances.push(variance[k].unwrap_or((ratio * c) * (ratio * c)));
    }
    let network = Network::with_labels(shape, labels, positions, costs, variances)?;

    let demand = if doc.demand.is_empty() {
        Demand::uniform(shape.outlets)
    } else {
        let mut zeta = vec![0.0; shape.outlets];
        for (id, &w) in &doc.demand {
            let s = network
                .labels
                .outlets
                .iter()
                .position(|o| o == id)
                .ok_or_else(|| Error::UnknownNode(id.clone()))?;
            if w < 0.0 {
                return Err(Error::NegativeDemand {
                    outlet: id.clone(),
                    value: w,
                });
            }
            zeta[s] = w;
        }
        Demand::new(zeta)?
    };
    Ok((network, demand))
}

fn doc_position(doc: &NetworkDocument, node: NodeId) -> Option<[f64; 2]> {
    match node.layer {
        Layer::Virtual => None,
        Layer::Factory => doc.factories[node.index].position,
        Layer::Warehouse => doc.warehouses[node.index].position,
        Layer::Outlet => doc.outlets[node.index].position,
    }
}

/// Production cost written into generated documents.
pub const GENERATED_PRODUCTION_COST: f64 = 1.0;

/// Random geometric instance: positions uniform in `[0, box_size]^2`,
/// Euclidean transport costs, equal production costs and uniform demand.
/// Identical arguments give an identical document.
pub fn generate_random_document(
    factories: usize,
    warehouses: usize,
    outlets: usize,
    seed: u64,
    box_size: f64,
) -> Result<NetworkDocument> {
    use rand::{Rng, SeedableRng};
    let shape = Shape::new(factories, warehouses, outlets)?;
    if !(box_size.is_finite() && box_size > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "box size must be positive, got {box_size}"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let labels = Labels::numbered(shape);
    let mut layer = |ids: &[String]| -> Vec<NodeSpec> {
        ids.iter()
            .map(|id| NodeSpec {
                id: id.clone(),
                position: Some([rng.gen_range(0.0..box_size), rng.gen_range(0.0..box_size)]),
            })
            .collect()
    };
    let factories = layer(&labels.factories);
    let warehouses = layer(&labels.warehouses);
    let outlets = layer(&labels.outlets);
    let weight = 1.0 / shape.outlets as f64;
    Ok(NetworkDocument {
        factories,
        warehouses,
        outlets,
        production_cost: Some(ProductionCost::Uniform(GENERATED_PRODUCTION_COST)),
        edges: Vec::new(),
        default_sigma2_ratio: None,
        demand: labels
            .outlets
            .iter()
            .map(|id| (id.clone(), weight))
            .collect(),
    })
}

pub fn generate_random_network(
    factories: usize,
    warehouses: usize,
    outlets: usize,
    seed: u64,
    box_size: f64,
) -> Result<(Network, Demand)> {
    validate_network(&generate_random_document(
        factories, warehouses, outlets, seed, box_size,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_doc(kf: usize, kw: usize, ks: usize) -> NetworkDocument {
        let shape = Shape::new(kf, kw, ks).unwrap();
        let labels = Labels::numbered(shape);
        let nodes = |v: &[String]| {
            v.iter()
                .map(|id| NodeSpec {
                    id: id.clone(),
                    position: None,
                })
                .collect()
        };
        let edges = shape
            .edges()
            .enumerate()
            .map(|(k, e)| EdgeSpec {
                from: labels.node(e.from).to_string(),
                to: labels.node(e.to).to_string(),
                cost: Some(1.0 + k as f64),
                sigma2: None,
            })
            .collect();
        NetworkDocument {
            factories: nodes(&labels.factories),
            warehouses: nodes(&labels.warehouses),
            outlets: nodes(&labels.outlets),
            production_cost: None,
            edges,
            default_sigma2_ratio: None,
            demand: Default::default(),
        }
    }

    #[test]
    fn explicit_costs_give_35_edges() {
        let (net, demand) = validate_network(&explicit_doc(3, 4, 5)).unwrap();
        assert_eq!(net.shape().num_edges(), 35);
        assert_eq!(demand.values(), &[0.2; 5]);
        // default variance (0.1 * cost)^2
        let c = net.costs()[7];
        assert!((net.variances()[7] - 0.01 * c * c).abs() < 1e-15);
    }

    #[test]
    fn demand_summing_to_point_nine_is_rejected() {
        let mut doc = explicit_doc(1, 1, 2);
        doc.demand.insert("s1".into(), 0.5);
        doc.demand.insert("s2".into(), 0.4);
        match validate_network(&doc) {
            Err(Error::DemandNotNormalized(t)) => assert!((t - 0.9).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn demand_within_tolerance_is_renormalized() {
        let d = Demand::new(vec![0.5 + 4e-13, 0.5]).unwrap();
        assert!((d.values().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_cost_and_negative_variance() {
        let mut doc = explicit_doc(1, 1, 1);
        doc.edges.remove(1);
        assert_eq!(
            validate_network(&doc),
            Err(Error::MissingEdgeCost("f1->w1".into()))
        );
        let mut doc = explicit_doc(1, 1, 1);
        doc.edges[2].sigma2 = Some(-1.0);
        assert!(matches!(
            validate_network(&doc),
            Err(Error::NegativeVariance { .. })
        ));
    }

    #[test]
    fn empty_layer_rejected() {
        let mut doc = explicit_doc(1, 1, 1);
        doc.warehouses.clear();
        assert_eq!(validate_network(&doc), Err(Error::EmptyLayer("warehouses")));
    }

    #[test]
    fn bad_edges_and_ids_rejected() {
        let mut doc = explicit_doc(1, 1, 1);
        doc.edges[0].to = "w1".into();
        assert!(matches!(
            validate_network(&doc),
            Err(Error::InvalidEdge { .. })
        ));
        let mut doc = explicit_doc(1, 1, 1);
        doc.edges[0].to = "nowhere".into();
        assert!(matches!(validate_network(&doc), Err(Error::UnknownNode(_))));
        let mut doc = explicit_doc(2, 1, 1);
        doc.factories[1].id = "f1".into();
        assert!(matches!(validate_network(&doc), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn positions_give_euclidean_costs() {
        // f at (0,0), w at (3,4), s at (3,0): |fw| = 5, |ws| = 4.
        let doc: NetworkDocument = serde_json::from_str(
            r#"{
                "factories": [{"id": "f", "position": [0, 0]}],
                "warehouses": [{"id": "w", "position": [3, 4]}],
                "outlets": [{"id": "s", "position": [3, 0]}],
                "production_cost": 2.5,
                "demand": {"s": 1.0}
            }"#,
        )
        .unwrap();
        let (net, _) = validate_network(&doc).unwrap();
        assert_eq!(net.costs(), &[2.5, 5.0, 4.0]);
        assert_eq!(net.path_cost(&Path::new(0, 0, 0)), 11.5);
    }

    #[test]
    fn per_factory_production_cost() {
        let doc: NetworkDocument = serde_json::from_str(
            r#"{
                "factories": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]}],
                "warehouses": [{"id": "w", "position": [0, 1]}],
                "outlets": [{"id": "s", "position": [0, 2]}],
                "production_cost": {"a": 1.0, "b": 3.0},
                "edges": [{"from": "w", "to": "s", "sigma2": 0.25}]
            }"#,
        )
        .unwrap();
        let (net, _) = validate_network(&doc).unwrap();
        assert_eq!(&net.costs()[..2], &[1.0, 3.0]);
        assert_eq!(net.variance(&Edge::delivery(0, 0)), Some(0.25));
        assert_eq!(net.cost(&Edge::delivery(0, 0)), Some(1.0));
    }

    #[test]
    fn path_cost_sums_three_edges() {
        let shape = Shape::new(1, 1, 1).unwrap();
        let net = Network::from_edge_costs(shape, vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        assert_eq!(net.path_cost(&Path::new(0, 0, 0)), 6.0);
        let zero = Network::from_edge_costs(shape, vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(zero.path_cost(&Path::new(0, 0, 0)), 0.0);
    }

    #[test]
    fn path_index_sizes() {
        let idx = PathIndex::new(Shape::new(3, 4, 5).unwrap());
        assert_eq!(idx.len(), 60);
        assert!((0..5).all(|s| idx.to_outlet(s).len() == 12));

        let idx = PathIndex::new(Shape::new(1, 1, 1).unwrap());
        assert_eq!(idx.len(), 1);
        assert!((0..3).all(|e| idx.through_edge(e).len() == 1));
    }

    #[test]
    fn two_by_two_by_two_transport_edge_membership() {
        let shape = Shape::new(2, 2, 2).unwrap();
        let idx = PathIndex::new(shape);
        let e = shape.edge_index(&Edge::transport(0, 0)).unwrap();
        // exhaustive check against the membership definition
        let expected: Vec<usize> = (0..shape.num_paths())
            .filter(|&k| {
                let p = shape.path(k);
                p.factory == 0 && p.warehouse == 0
            })
            .collect();
        assert_eq!(idx.through_edge(e), expected.as_slice());
        assert_eq!(expected.len(), 2);
    }

    #[test]
    fn edge_indexing_round_trips() {
        let shape = Shape::new(3, 4, 5).unwrap();
        for k in 0..shape.num_edges() {
            assert_eq!(shape.edge_index(&shape.edge(k)), Some(k));
        }
        let edges: Vec<Edge> = shape.edges().collect();
        let mut sorted = edges.clone();
        sorted.sort();
        assert_eq!(edges, sorted, "dense order is the canonical order");
        assert_eq!(shape.edge_index(&Edge::transport(3, 0)), None);
    }

    #[test]
    fn parse_edge_labels() {
        let (net, _) = generate_random_network(3, 4, 5, 1, 10.0).unwrap();
        assert_eq!(net.parse_edge("f1->w4").unwrap(), Edge::transport(0, 3));
        assert_eq!(net.parse_edge("i->f2").unwrap(), Edge::production(1));
        assert!(matches!(
            net.parse_edge("f1->s1"),
            Err(Error::UnknownEdge(_))
        ));
        assert!(matches!(net.parse_edge("f1"), Err(Error::UnknownEdge(_))));
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_random_document(3, 4, 5, 42, 10.0)
            .unwrap()
            .to_json();
        let b = generate_random_document(3, 4, 5, 42, 10.0)
            .unwrap()
            .to_json();
        assert_eq!(a, b);
        let c = generate_random_document(3, 4, 5, 43, 10.0)
            .unwrap()
            .to_json();
        assert_ne!(a, c);
        let (net, _) = generate_random_network(3, 4, 5, 42, 10.0).unwrap();
        assert_eq!(net.shape().num_edges(), 35);
        let (tiny, _) = generate_random_network(1, 1, 1, 7, 10.0).unwrap();
        assert_eq!(tiny.shape().num_edges(), 3);
    }

    #[test]
    fn generated_costs_match_positions() {
        let (net, demand) = generate_random_network(3, 4, 5, 9, 10.0).unwrap();
        let pos = net.positions().unwrap();
        for (k, e) in net.shape().edges().enumerate() {
            let c = net.costs()[k];
            assert!(c > 0.0);
            match (pos.node(e.from), pos.node(e.to)) {
                (Some(a), Some(b)) => assert_eq!(c, distance(a, b)),
                _ => assert_eq!(c, GENERATED_PRODUCTION_COST),
            }
        }
        assert!(demand.values().iter().all(|&z| (z - 0.2).abs() < 1e-15));
    }
}
