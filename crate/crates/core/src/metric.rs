//! Vertex weightings and the vertex-weighted shortest-path semimetric
//! `dist_ω(u, v) = min_p Σ_{x∈p} ω(x)`, both endpoints included, with
//! `dist_ω(u, u) = 0`.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::{Graph, Vertex};
use crate::{Error, Result};

/// Tolerance on `Σ ω² = 1` for a weighting flagged as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Nonnegative weight per vertex.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VertexWeighting {
    values: Vec<f64>,
    normalized: bool,
}

impl VertexWeighting {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((v, x)) = values.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(Error::Validation(format!("weight {x} at vertex {v} is not a finite nonnegative number")));
        }
        let normalized = (norm_sq(&values) - 1.0).abs() <= NORMALIZATION_TOL;
        Ok(Self { values, normalized })
    }

    /// `ω ≡ 1/√n`.
    pub fn uniform(n: usize) -> Self {
        let x = 1.0 / libm::sqrt(n.max(1) as f64);
        Self { values: vec![x; n], normalized: true }
    }

    /// Rescales to `Σ ω² = 1`. Fails on the zero weighting.
    pub fn normalized(&self) -> Result<Self> {
        let norm = libm::sqrt(norm_sq(&self.values));
        if norm == 0.0 {
            return Err(Error::Validation("cannot normalize the zero weighting".into()));
        }
        let values: Vec<f64> = self.values.iter().map(|x| x / norm).collect();
        let normalized = (norm_sq(&values) - 1.0).abs() <= NORMALIZATION_TOL;
        Ok(Self { values, normalized })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> f64 {
        self.values[v]
    }

    pub fn sum_sq(&self) -> f64 {
        norm_sq(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.sum_sq())
    }

    /// `ω(S) = Σ_{v∈S} ω(v)`.
    pub fn weight_of(&self, set: &[Vertex]) -> f64 {
        set.iter().map(|&v| self.values[v]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }
}

fn norm_sq(values: &[f64]) -> f64 {
    values.iter().map(|x| x * x).sum()
}

/// Result of a single distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistance {
    /// `f64::INFINITY` for disconnected pairs.
    pub length: f64,
    pub connected: bool,
}

/// Cached all-pairs `dist_ω`.
#[derive(Debug, Clone)]
pub struct MetricOracle {
    n: usize,
    weights: VertexWeighting,
    dist: Vec<f64>,
}

impl MetricOracle {
    pub fn new(graph: &Graph, weights: &VertexWeighting) -> Result<Self> {
        let n = graph.n();
        if weights.len() != n {
            return Err(Error::Validation(format!(
                "weighting has {} entries for {n} vertices",
                weights.len()
            )));
        }
        let mut dist = Vec::with_capacity(n * n);
        for s in 0..n {
            dist.extend(shortest_paths(graph, weights.values(), s).dist);
        }
        // the two directions can differ in the last bit
        for u in 0..n {
            for v in u + 1..n {
                let d = dist[u * n + v].min(dist[v * n + u]);
                dist[u * n + v] = d;
                dist[v * n + u] = d;
            }
        }
        Ok(Self { n, weights: weights.clone(), dist })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weights(&self) -> &VertexWeighting {
        &self.weights
    }

    /// Raw distance; `f64::INFINITY` when `u` and `v` are disconnected.
    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> f64 {
        self.dist[u * self.n + v]
    }

    pub fn dist_omega(&self, u: Vertex, v: Vertex) -> PairDistance {
        let length = self.dist(u, v);
        PairDistance { length, connected: length.is_finite() }
    }

    pub fn row(&self, u: Vertex) -> &[f64] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max)
    }

    /// Largest pairwise distance within `set` (0 for sets of size ≤ 1).
    pub fn set_diameter(&self, set: &[Vertex]) -> f64 {
        let mut worst = 0.0f64;
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                worst = worst.max(self.dist(u, v));
            }
        }
        worst
    }

    /// `B(x, R) = {y : dist(x, y) ≤ R}`.
    pub fn ball(&self, x: Vertex, radius: f64) -> Vec<Vertex> {
        (0..self.n).filter(|&y| self.dist(x, y) <= radius).collect()
    }

    /// `min_{s∈S} dist(x, s)`; `f64::INFINITY` for an empty set.
    pub fn dist_to_set(&self, x: Vertex, set: &[Vertex]) -> f64 {
        set.iter().map(|&s| self.dist(x, s)).fold(f64::INFINITY, f64::min)
    }

    /// `min dist(x, y)` over `x ∈ a`, `y ∈ b`, `x ≠ y`.
    pub fn set_distance(&self, a: &[Vertex], b: &[Vertex]) -> f64 {
        let mut best = f64::INFINITY;
        for &x in a {
            for &y in b {
                if x != y {
                    best = best.min(self.dist(x, y));
                }
            }
        }
        best
    }
}

/// Single-source output of [`shortest_paths`].
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub source: Vertex,
    /// `dist[v]` as defined for the semimetric (0 at the source).
    pub dist: Vec<f64>,
    /// Predecessor on a shortest path, `usize::MAX` at the source and for
    /// unreachable vertices.
    pub pred: Vec<Vertex>,
}

impl ShortestPathTree {
    /// Vertices of the recorded shortest path from the source to `target`,
    /// source first. `None` when unreachable.
    pub fn path_to(&self, target: Vertex) -> Option<Vec<Vertex>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v];
            path.push(v);
        }
        path.reverse();
        Some(path)
    }
}

#[derive(PartialEq)]
struct Entry(f64, Vertex);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (distance, vertex)
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source` with vertex costs.
///
/// Equivalent to running Dijkstra on the split-vertex digraph where each
/// vertex `v` becomes an arc `v_in → v_out` of length `weights[v]` and each
/// edge becomes zero-length arcs `u_out → v_in`; entering a vertex pays its
/// weight. The source pays its own weight too, and its own entry is reset to
/// zero afterwards.
pub fn shortest_paths(graph: &Graph, weights: &[f64], source: Vertex) -> ShortestPathTree {
    let n = graph.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = weights[source];
    heap.push(Entry(weights[source], source));
    while let Some(Entry(d, v)) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &u in graph.neighbors(v) {
            let candidate = d + weights[u];
            if candidate < dist[u] {
                dist[u] = candidate;
                pred[u] = v;
                heap.push(Entry(candidate, u));
            }
        }
    }
    dist[source] = 0.0;
    ShortestPathTree { source, dist, pred }
}
