//! Per-snapshot V2V link structure.
//!
//! Every snapshot yields a distance matrix, a set of candidate links within
//! radio range and a degree-capped spanning forest chosen greedily by link
//! length, so that short links inside the proximity radius are always
//! preferred over long ones.

mod forest;
mod jsonl;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{Snapshot, Timeline};
use crate::Scalar;

pub use forest::{spanning_forest, SpanningForest};
pub use jsonl::{read_forests_jsonl, write_forests_jsonl};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology config: {0}")]
    Config(String),
    #[error("edge endpoint {0:?} is not among the forest vertices")]
    UnknownVertex(String),
    #[error("forest JSON line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// Within the proximity inclusion radius.
    Short,
    /// Beyond the proximity radius but within radio range.
    Long,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig<S> {
    /// Proximity inclusion radius, meters.
    #[serde(rename = "r_p_m")]
    pub proximity_radius: S,
    /// Hard radio range, meters.
    #[serde(rename = "r_max_m")]
    pub max_range: S,
    pub degree_cap: usize,
}

impl<S: Scalar> Default for TopologyConfig<S> {
    fn default() -> Self {
        Self {
            proximity_radius: S::lit(300.0),
            max_range: S::lit(1000.0),
            degree_cap: 4,
        }
    }
}

impl<S: Scalar> TopologyConfig<S> {
    pub fn new(proximity_radius: S, max_range: S, degree_cap: usize) -> Result<Self, TopologyError> {
        let cfg = Self {
            proximity_radius,
            max_range,
            degree_cap,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if !(self.proximity_radius > S::zero()) || !(self.proximity_radius <= self.max_range) {
            return Err(TopologyError::Config(format!(
                "need 0 < r_p ({}) <= r_max ({})",
                self.proximity_radius, self.max_range
            )));
        }
        if !self.max_range.is_finite() {
            return Err(TopologyError::Config("r_max must be finite".into()));
        }
        if self.degree_cap == 0 {
            return Err(TopologyError::Config("degree_cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn classify(&self, length: S) -> EdgeKind {
        if length <= self.proximity_radius {
            EdgeKind::Short
        } else {
            EdgeKind::Long
        }
    }
}

/// Symmetric pairwise Euclidean distances, ids in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<S> {
    ids: Vec<String>,
    d: Vec<S>,
}

impl<S: Scalar> DistanceMatrix<S> {
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.d[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        let n = self.ids.len();
        &self.d[i * n..(i + 1) * n]
    }
}

pub fn distance_matrix<S: Scalar>(snapshot: &Snapshot<S>) -> DistanceMatrix<S> {
    let mut states: Vec<_> = snapshot.states().iter().collect();
    states.sort_by(|a, b| a.vehicle_id.cmp(&b.vehicle_id));
    let n = states.len();
    let mut d = vec![S::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let len = (states[i].pos_x - states[j].pos_x).hypot(states[i].pos_y - states[j].pos_y);
            d[i * n + j] = len;
            d[j * n + i] = len;
        }
    }
    DistanceMatrix {
        ids: states.into_iter().map(|s| s.vehicle_id.clone()).collect(),
        d,
    }
}

/// A feasible V2V link; `u < v` lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateEdge<S> {
    pub u: String,
    pub v: String,
    pub length: S,
    pub kind: EdgeKind,
}

/// All distinct vehicle pairs within radio range, sorted by `(length, u, v)`.
///
/// Distinct vehicles at the same position get a zero-length short link.
pub fn candidate_links<S: Scalar>(m: &DistanceMatrix<S>, cfg: &TopologyConfig<S>) -> Vec<CandidateEdge<S>> {
    let mut edges = Vec::new();
    for i in 0..m.len() {
        for j in (i + 1)..m.len() {
            let length = m.get(i, j);
            if length <= cfg.max_range {
                edges.push(CandidateEdge {
                    u: m.ids[i].clone(),
                    v: m.ids[j].clone(),
                    length,
                    kind: cfg.classify(length),
                });
            }
        }
    }
    edges.sort_by(forest::edge_order);
    edges
}

/// Distance matrix, candidate links and forest for a single snapshot.
pub fn snapshot_forest<S: Scalar>(
    snapshot: &Snapshot<S>,
    cfg: &TopologyConfig<S>,
) -> Result<SpanningForest<S>, TopologyError> {
    let m = distance_matrix(snapshot);
    let edges = candidate_links(&m, cfg);
    spanning_forest(&edges, m.ids(), cfg)
}

/// One forest per snapshot, in time order. Snapshots are processed in
/// parallel; each forest depends only on its own snapshot.
pub fn evolve<S: Scalar>(
    timeline: &Timeline<S>,
    cfg: &TopologyConfig<S>,
) -> Result<Vec<(S, SpanningForest<S>)>, TopologyError> {
    cfg.validate()?;
    timeline
        .snapshots()
        .par_iter()
        .map(|snap| snapshot_forest(snap, cfg).map(|f| (snap.time, f)))
        .collect()
}
