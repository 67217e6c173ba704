//! Independent reference checks for the topology code.
//!
//! Nothing here calls into the forest builder: graphs are handled as plain
//! index pairs, connectivity is found by depth-first search and optima by
//! exhaustive enumeration. Only suitable for tiny instances.

use std::collections::{BTreeSet, HashMap};

use v2vsim_core::topology::{CandidateEdge, EdgeKind, SpanningForest};

/// Undirected weighted edge between vertex indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub long: bool,
}

/// Plane points to the complete graph restricted to `length <= max_range`.
pub fn geometric_edges(points: &[(f64, f64)], proximity: f64, max_range: f64) -> Vec<Edge> {
    let mut edges = Vec::new();
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let length = (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
            if length <= max_range {
                edges.push(Edge {
                    a,
                    b,
                    length,
                    long: length > proximity,
                });
            }
        }
    }
    edges
}

/// Connected components by iterative DFS, as a vertex -> label map.
pub fn component_labels(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = next;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

pub fn component_count(n: usize, edges: &[Edge]) -> usize {
    component_labels(n, edges).into_iter().collect::<BTreeSet<_>>().len()
}

/// An edge set is a forest iff `|E| = n - components`.
pub fn is_forest(n: usize, edges: &[Edge]) -> bool {
    edges.len() + component_count(n, edges) == n
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn ascending_sum(lengths: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = lengths.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Minimum spanning forest by enumerating every edge subset of size
/// `n - components`. Returns the chosen edge indices and the total length,
/// summed in ascending order.
pub fn brute_force_msf(n: usize, edges: &[Edge]) -> (Vec<usize>, f64) {
    let k = n - component_count(n, edges);
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut chosen = Vec::with_capacity(k);
    combinations(edges.len(), k, |idx| {
        chosen.clear();
        chosen.extend(idx.iter().map(|&i| edges[i]));
        if !is_forest(n, &chosen) {
            return;
        }
        let total = ascending_sum(chosen.iter().map(|e| e.length));
        if best.as_ref().is_none_or(|(_, b)| total < *b) {
            best = Some((idx.to_vec(), total));
        }
    });
    best.unwrap_or((Vec::new(), 0.0))
}

/// Lexicographic rank of a forest: fewer components first, then fewer long
/// links, then shorter total length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForestRank {
    pub components: usize,
    pub long_links: usize,
    pub total_length: f64,
}

impl ForestRank {
    pub fn of(n: usize, edges: &[Edge]) -> Self {
        Self {
            components: component_count(n, edges),
            long_links: edges.iter().filter(|e| e.long).count(),
            total_length: ascending_sum(edges.iter().map(|e| e.length)),
        }
    }

    fn better_than(&self, other: &Self) -> bool {
        (self.components, self.long_links)
            .cmp(&(other.components, other.long_links))
            .then(self.total_length.total_cmp(&other.total_length))
            .is_lt()
    }
}

/// Best degree-capped forest over every edge subset that is a forest.
///
/// Include/exclude backtracking over the edge list; a branch is cut as soon
/// as the included edges close a cycle or exceed the cap, so each capped
/// forest is reached exactly once.
pub fn exhaustive_best_forest(n: usize, edges: &[Edge], degree_cap: usize) -> ForestRank {
    assert!(n <= 10, "exhaustive search only for tiny graphs");
    struct Search<'a> {
        n: usize,
        edges: &'a [Edge],
        cap: usize,
        chosen: Vec<Edge>,
        degree: Vec<usize>,
        best: ForestRank,
    }
    impl Search<'_> {
        fn visit(&mut self, i: usize, labels: &[usize]) {
            if i == self.edges.len() {
                let rank = ForestRank::of(self.n, &self.chosen);
                if rank.better_than(&self.best) {
                    self.best = rank;
                }
                return;
            }
            self.visit(i + 1, labels);
            let e = self.edges[i];
            let (la, lb) = (labels[e.a], labels[e.b]);
            if la == lb || self.degree[e.a] >= self.cap || self.degree[e.b] >= self.cap {
                return;
            }
            let merged: Vec<usize> = labels.iter().map(|&l| if l == lb { la } else { l }).collect();
            self.degree[e.a] += 1;
            self.degree[e.b] += 1;
            self.chosen.push(e);
            self.visit(i + 1, &merged);
            self.chosen.pop();
            self.degree[e.a] -= 1;
            self.degree[e.b] -= 1;
        }
    }
    let mut search = Search {
        n,
        edges,
        cap: degree_cap,
        chosen: Vec::with_capacity(n),
        degree: vec![0; n],
        best: ForestRank::of(n, &[]),
    };
    let labels: Vec<usize> = (0..n).collect();
    search.visit(0, &labels);
    search.best
}

/// Converts a forest's string ids back to indices into `ids`.
pub fn forest_edges(forest: &SpanningForest<f64>, ids: &[String]) -> Vec<Edge> {
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    forest
        .edges()
        .iter()
        .map(|e| Edge {
            a: pos[e.u.as_str()],
            b: pos[e.v.as_str()],
            length: e.length,
            long: e.kind == EdgeKind::Long,
        })
        .collect()
}

/// Checks every structural property a forest must have against its candidate
/// links: acyclicity, degree cap, edges drawn from the candidates, component
/// partition induced by the edges, and maximality.
pub fn verify_forest(
    forest: &SpanningForest<f64>,
    candidates: &[CandidateEdge<f64>],
    degree_cap: usize,
) -> Result<(), String> {
    let ids = forest.vertices();
    let n = ids.len();
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let to_edge = |e: &CandidateEdge<f64>| -> Result<Edge, String> {
        Ok(Edge {
            a: *pos.get(e.u.as_str()).ok_or(format!("unknown endpoint {}", e.u))?,
            b: *pos.get(e.v.as_str()).ok_or(format!("unknown endpoint {}", e.v))?,
            length: e.length,
            long: e.kind == EdgeKind::Long,
        })
    };
    let chosen: Vec<Edge> = forest.edges().iter().map(to_edge).collect::<Result<_, _>>()?;

    if !is_forest(n, &chosen) {
        return Err("edge set contains a cycle".into());
    }
    let mut degree = vec![0usize; n];
    for e in &chosen {
        degree[e.a] += 1;
        degree[e.b] += 1;
    }
    if let Some(v) = (0..n).find(|&v| degree[v] > degree_cap) {
        return Err(format!("vertex {} has degree {} > {degree_cap}", ids[v], degree[v]));
    }
    for e in forest.edges() {
        if !candidates.contains(e) {
            return Err(format!("edge {}-{} is not a candidate link", e.u, e.v));
        }
    }

    let labels = component_labels(n, &chosen);
    let mut expected: Vec<Vec<String>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (v, &l) in labels.iter().enumerate() {
        let s = *slot.entry(l).or_insert_with(|| {
            expected.push(Vec::new());
            expected.len() - 1
        });
        expected[s].push(ids[v].clone());
    }
    if expected != forest.components() {
        return Err("components do not match the edge-induced partition".into());
    }

    for c in candidates {
        if forest.edges().contains(c) {
            continue;
        }
        let e = to_edge(c)?;
        let same_component = labels[e.a] == labels[e.b];
        let capped = degree[e.a] >= degree_cap || degree[e.b] >= degree_cap;
        if !same_component && !capped {
            return Err(format!("candidate {}-{} could still be added", c.u, c.v));
        }
    }
    Ok(())
}
