//! Per-snapshot and whole-run topology statistics.

use serde::Serialize;

use crate::routing::reachability_ratio;
use crate::topology::{SpanningForest, TopologyConfig};
use crate::Scalar;

pub const DEFAULT_HISTOGRAM_BINS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnapshotMetrics<S> {
    pub time: S,
    pub vehicles: usize,
    pub edges: usize,
    pub components: usize,
    pub long_links: usize,
    pub reachability: S,
    pub total_length: S,
    pub max_degree: usize,
    /// Chosen link lengths binned evenly over `[0, r_max]`.
    pub histogram: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregates<S> {
    pub snapshots: usize,
    pub mean_vehicles: S,
    pub mean_edges: S,
    pub mean_components: S,
    pub mean_long_links: S,
    pub mean_reachability: S,
    pub min_reachability: S,
    pub max_components: usize,
    pub max_long_links: usize,
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologyMetrics<S> {
    pub bin_width: S,
    pub snapshots: Vec<SnapshotMetrics<S>>,
    /// Absent for an empty run.
    pub aggregates: Option<Aggregates<S>>,
}

pub fn summarize<S: Scalar>(forests: &[(S, SpanningForest<S>)], cfg: &TopologyConfig<S>) -> TopologyMetrics<S> {
    summarize_with_bins(forests, cfg, DEFAULT_HISTOGRAM_BINS)
}

pub fn summarize_with_bins<S: Scalar>(
    forests: &[(S, SpanningForest<S>)],
    cfg: &TopologyConfig<S>,
    bins: usize,
) -> TopologyMetrics<S> {
    let bins = bins.max(1);
    let bin_width = cfg.max_range / S::from_usize(bins).unwrap();
    let snapshots: Vec<SnapshotMetrics<S>> = forests
        .iter()
        .map(|(time, f)| snapshot_metrics(*time, f, bin_width, bins))
        .collect();
    let aggregates = aggregate(&snapshots);
    TopologyMetrics {
        bin_width,
        snapshots,
        aggregates,
    }
}

fn snapshot_metrics<S: Scalar>(time: S, f: &SpanningForest<S>, bin_width: S, bins: usize) -> SnapshotMetrics<S> {
    let mut histogram = vec![0usize; bins];
    for e in f.edges() {
        let bin = (e.length / bin_width).floor().to_usize().unwrap_or(0).min(bins - 1);
        histogram[bin] += 1;
    }
    let max_degree = f.vertices().iter().map(|v| f.degree(v)).max().unwrap_or(0);
    SnapshotMetrics {
        time,
        vehicles: f.vertices().len(),
        edges: f.edges().len(),
        components: f.component_count(),
        long_links: f.long_link_count(),
        reachability: reachability_ratio(f),
        total_length: f.total_length(),
        max_degree,
        histogram,
    }
}

fn aggregate<S: Scalar>(snaps: &[SnapshotMetrics<S>]) -> Option<Aggregates<S>> {
    if snaps.is_empty() {
        return None;
    }
    let n = S::from_usize(snaps.len()).unwrap();
    let mean = |f: &dyn Fn(&SnapshotMetrics<S>) -> S| snaps.iter().fold(S::zero(), |acc, s| acc + f(s)) / n;
    let count = |x: usize| S::from_usize(x).unwrap();
    Some(Aggregates {
        snapshots: snaps.len(),
        mean_vehicles: mean(&|s| count(s.vehicles)),
        mean_edges: mean(&|s| count(s.edges)),
        mean_components: mean(&|s| count(s.components)),
        mean_long_links: mean(&|s| count(s.long_links)),
        mean_reachability: mean(&|s| s.reachability),
        min_reachability: snaps.iter().map(|s| s.reachability).fold(S::one(), S::min),
        max_components: snaps.iter().map(|s| s.components).max().unwrap_or(0),
        max_long_links: snaps.iter().map(|s| s.long_links).max().unwrap_or(0),
        max_degree: snaps.iter().map(|s| s.max_degree).max().unwrap_or(0),
    })
}
