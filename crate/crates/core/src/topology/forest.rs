use std::cmp::Ordering;
use std::collections::HashMap;

use super::{CandidateEdge, EdgeKind, TopologyConfig, TopologyError};
use crate::Scalar;

/// Degree-capped spanning forest over one snapshot's candidate links.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanningForest<S> {
    vertices: Vec<String>,
    edges: Vec<CandidateEdge<S>>,
    components: Vec<Vec<String>>,
}

impl<S: Scalar> SpanningForest<S> {
    /// Reassembles a forest from its parts, e.g. after deserialization.
    /// Vertices are taken from the components.
    pub fn from_parts(edges: Vec<CandidateEdge<S>>, components: Vec<Vec<String>>) -> Result<Self, TopologyError> {
        let mut vertices: Vec<String> = components.iter().flatten().cloned().collect();
        vertices.sort();
        for e in &edges {
            for end in [&e.u, &e.v] {
                if vertices.binary_search(end).is_err() {
                    return Err(TopologyError::UnknownVertex(end.clone()));
                }
            }
        }
        Ok(Self {
            vertices,
            edges,
            components,
        })
    }

    /// Sorted vertex ids.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Chosen links in selection order, i.e. by `(length, u, v)`.
    pub fn edges(&self) -> &[CandidateEdge<S>] {
        &self.edges
    }

    /// Connected components, each sorted, ordered by their smallest id.
    pub fn components(&self) -> &[Vec<String>] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).is_ok()
    }

    pub fn total_length(&self) -> S {
        self.edges.iter().fold(S::zero(), |acc, e| acc + e.length)
    }

    pub fn long_link_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Long).count()
    }

    pub fn degree(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.u == id || e.v == id).count()
    }

    /// Neighbor lists keyed by vertex id, each sorted.
    pub fn adjacency(&self) -> HashMap<&str, Vec<(&str, S)>> {
        let mut adj: HashMap<&str, Vec<(&str, S)>> = self.vertices.iter().map(|v| (v.as_str(), Vec::new())).collect();
        for e in &self.edges {
            adj.get_mut(e.u.as_str()).unwrap().push((e.v.as_str(), e.length));
            adj.get_mut(e.v.as_str()).unwrap().push((e.u.as_str(), e.length));
        }
        for list in adj.values_mut() {
            list.sort_by(|a, b| a.0.cmp(b.0));
        }
        adj
    }
}

pub(super) fn edge_order<S: Scalar>(a: &CandidateEdge<S>, b: &CandidateEdge<S>) -> Ordering {
    a.length
        .partial_cmp(&b.length)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.u.cmp(&b.u))
        .then_with(|| a.v.cmp(&b.v))
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns false when both already share a set.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Greedy Kruskal-style selection: candidate links are visited in
/// `(length, u, v)` order and accepted unless they would close a cycle or push
/// an endpoint past `cfg.degree_cap`.
///
/// Rejections are permanent (components only merge, degrees only grow), so
/// the result is maximal: no remaining candidate can be added. With a cap of
/// at least `n - 1` this is exactly a minimum spanning forest.
pub fn spanning_forest<S: Scalar>(
    edges: &[CandidateEdge<S>],
    vertices: &[String],
    cfg: &TopologyConfig<S>,
) -> Result<SpanningForest<S>, TopologyError> {
    let mut ids: Vec<String> = vertices.to_vec();
    ids.sort();
    ids.dedup();
    let index = |id: &str| {
        ids.binary_search_by(|v| v.as_str().cmp(id))
            .map_err(|_| TopologyError::UnknownVertex(id.to_owned()))
    };

    let mut order: Vec<(usize, usize, &CandidateEdge<S>)> = edges
        .iter()
        .map(|e| Ok((index(&e.u)?, index(&e.v)?, e)))
        .collect::<Result<_, TopologyError>>()?;
    order.sort_by(|a, b| edge_order(a.2, b.2));

    let mut sets = DisjointSet::new(ids.len());
    let mut degree = vec![0usize; ids.len()];
    let mut chosen = Vec::new();
    for (u, v, e) in order {
        if degree[u] >= cfg.degree_cap || degree[v] >= cfg.degree_cap {
            continue;
        }
        if !sets.union(u, v) {
            continue;
        }
        degree[u] += 1;
        degree[v] += 1;
        chosen.push(e.clone());
    }

    let mut by_root: HashMap<usize, usize> = HashMap::new();
    let mut components: Vec<Vec<String>> = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let root = sets.find(i);
        let slot = *by_root.entry(root).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[slot].push(id.clone());
    }

    Ok(SpanningForest {
        vertices: ids,
        edges: chosen,
        components,
    })
}
