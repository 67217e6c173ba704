//! Source-to-sink routing over a snapshot's spanning forest.
//!
//! Delivery is instantaneous within a connected component; there is no
//! store-and-forward across snapshots.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::topology::SpanningForest;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum RouteError {
    #[error("unknown vehicle id {0:?}")]
    UnknownVehicle(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteStatus {
    Delivered,
    Unreachable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteResult<S> {
    pub status: RouteStatus,
    pub path: Vec<String>,
    pub hops: usize,
    #[serde(rename = "path_length_m")]
    pub path_length: S,
}

impl<S: Scalar> RouteResult<S> {
    fn unreachable() -> Self {
        Self {
            status: RouteStatus::Unreachable,
            path: Vec::new(),
            hops: 0,
            path_length: S::zero(),
        }
    }
}

/// The unique forest path from `src` to `dst`, found by breadth-first search.
pub fn route<S: Scalar>(forest: &SpanningForest<S>, src: &str, dst: &str) -> Result<RouteResult<S>, RouteError> {
    for id in [src, dst] {
        if !forest.contains(id) {
            return Err(RouteError::UnknownVehicle(id.to_owned()));
        }
    }
    let adj = forest.adjacency();
    let mut parent: HashMap<&str, (&str, S)> = HashMap::new();
    let mut queue = VecDeque::from([src]);
    let mut found = src == dst;
    while let Some(node) = queue.pop_front() {
        if found {
            break;
        }
        for &(next, len) in &adj[node] {
            if next == src || parent.contains_key(next) {
                continue;
            }
            parent.insert(next, (node, len));
            if next == dst {
                found = true;
                break;
            }
            queue.push_back(next);
        }
    }
    if !found {
        return Ok(RouteResult::unreachable());
    }

    let mut path = vec![dst.to_owned()];
    let mut path_length = S::zero();
    let mut cur = dst;
    while cur != src {
        let (prev, len) = parent[cur];
        path_length = path_length + len;
        path.push(prev.to_owned());
        cur = prev;
    }
    path.reverse();
    Ok(RouteResult {
        status: RouteStatus::Delivered,
        hops: path.len() - 1,
        path,
        path_length,
    })
}

/// Fraction of ordered vehicle pairs that can reach each other:
/// `Σ s_i (s_i − 1) / (n (n − 1))` over component sizes `s_i`. Defined as 1
/// for fewer than two vehicles.
pub fn reachability_ratio<S: Scalar>(forest: &SpanningForest<S>) -> S {
    let n = forest.vertices().len();
    if n < 2 {
        return S::one();
    }
    let reachable: usize = forest.components().iter().map(|c| c.len() * (c.len() - 1)).sum();
    S::from_usize(reachable).unwrap() / S::from_usize(n * (n - 1)).unwrap()
}
