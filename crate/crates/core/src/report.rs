//! Plan documents (JSON) and CSV reports.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Network, Path};
use crate::planner::Plan;
use crate::resilience::EdgeRisk;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub factory: String,
    pub warehouse: String,
    pub outlet: String,
    pub probability: f64,
}

/// Serialized plan: one entry per path plus solver metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub alpha: f64,
    pub solver: String,
    pub iterations: usize,
    pub marginal_error: f64,
    pub paths: Vec<PathEntry>,
}

impl PlanDocument {
    pub fn from_plan(
        net: &Network,
        plan: &Plan,
        solver: &str,
        iterations: usize,
        marginal_error: f64,
    ) -> Self {
        let labels = net.labels();
        let shape = net.shape();
        let paths = plan
            .probabilities()
            .iter()
            .enumerate()
            .map(|(k, &probability)| {
                let p = shape.path(k);
                PathEntry {
                    factory: labels.factories[p.factory].clone(),
                    warehouse: labels.warehouses[p.warehouse].clone(),
                    outlet: labels.outlets[p.outlet].clone(),
                    probability,
                }
            })
            .collect();
        Self {
            alpha: plan.alpha(),
            solver: solver.to_string(),
            iterations,
            marginal_error,
            paths,
        }
    }

    /// Resolves path labels against `net`. Paths not listed get zero mass.
    pub fn to_plan(&self, net: &Network) -> Result<Plan> {
        let labels = net.labels();
        let shape = net.shape();
        let find = |ids: &[String], id: &str| {
            ids.iter()
                .position(|x| x == id)
                .ok_or_else(|| Error::PlanMismatch(format!("unknown node `{id}`")))
        };
        let mut probs = vec![0.0; shape.num_paths()];
        let mut seen = HashSet::new();
        for entry in &self.paths {
            let path = Path::new(
                find(&labels.factories, &entry.factory)?,
                find(&labels.warehouses, &entry.warehouse)?,
                find(&labels.outlets, &entry.outlet)?,
            );
            let k = shape.path_index(&path);
            if !seen.insert(k) {
                return Err(Error::PlanMismatch(format!(
                    "path ({}, {}, {}) listed twice",
                    entry.factory, entry.warehouse, entry.outlet
                )));
            }
            probs[k] = entry.probability;
        }
        Plan::new(shape, probs, self.alpha)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan document serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// CSV with an `epsilon` column followed by one column per named series.
pub fn curve_csv(epsilons: &[f64], columns: &[(String, Vec<f64>)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("epsilon".to_string())
        .chain(columns.iter().map(|(name, _)| name.clone()))
        .collect();
    w.write_record(&header).expect("in-memory csv");
    for (i, e) in epsilons.iter().enumerate() {
        let row: Vec<String> = std::iter::once(e.to_string())
            .chain(columns.iter().map(|(_, v)| v[i].to_string()))
            .collect();
        w.write_record(&row).expect("in-memory csv");
    }
    finish(w)
}

/// `edge,phi,sigma2,l_edge_star,rank`; costs multiplied by `scale`.
pub fn edge_risk_csv(net: &Network, ranking: &[EdgeRisk], scale: f64) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["edge", "phi", "sigma2", "l_edge_star", "rank"])
        .expect("in-memory csv");
    for r in ranking {
        w.write_record([
            net.edge_label(r.edge_index),
            r.phi.to_string(),
            r.sigma2.to_string(),
            (scale * r.l_edge_star).to_string(),
            r.rank.to_string(),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub nodes: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["|V|", "mean_seconds", "std_seconds"])
        .expect("in-memory csv");
    for r in rows {
        w.write_record([
            r.nodes.to_string(),
            r.mean_seconds.to_string(),
            r.std_seconds.to_string(),
        ])
        .expect("in-memory csv");
    }
    finish(w)
}
