//! Simple undirected graphs, the family generators used by the experiments,
//! the Laplacian `L = D - A` and the closed neighborhood operator `N(S)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::DenseMatrix;
use crate::{Error, Result};

pub type Vertex = usize;

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Neighbor lists are
/// sorted as well, which keeps every traversal in the crate deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adjacency: Vec<Vec<Vertex>>,
    d_max: usize,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::Validation(format!("duplicate edge ({u}, {v})")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let d_max = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self { n, edges, adjacency, d_max })
    }

    /// Same as [`Graph::from_edges`] but silently drops duplicates; used by
    /// the generators where wrap-around can produce repeated pairs.
    fn from_edges_dedup<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let set: BTreeSet<_> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        Self::from_edges(n, set).expect("generator produced a valid edge set")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    #[inline]
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn is_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// `N(S) = S ∪ {u : u ~ v for some v ∈ S}`, sorted.
    pub fn neighborhood(&self, set: &[Vertex]) -> Vec<Vertex> {
        let mut mask = vec![false; self.n];
        for &v in set {
            mask[v] = true;
            for &u in &self.adjacency[v] {
                mask[u] = true;
            }
        }
        mask.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v).collect()
    }

    pub fn laplacian(&self) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for v in 0..self.n {
            l.set(v, v, self.degree(v) as f64);
        }
        for &(u, v) in &self.edges {
            l.set(u, v, -1.0);
            l.set(v, u, -1.0);
        }
        l
    }

    /// `Σ_{u~v} (f(u) - f(v))²`.
    pub fn laplacian_energy(&self, f: &[f64]) -> f64 {
        self.edges.iter().map(|&(u, v)| (f[u] - f[v]) * (f[u] - f[v])).sum()
    }

    /// Component label per vertex, labels assigned in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &u in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Induced subgraph on `vertices` (relabelled in the given order).
    pub fn induced(&self, vertices: &[Vertex]) -> Graph {
        let mut index = BTreeMap::new();
        for (i, &v) in vertices.iter().enumerate() {
            index.insert(v, i);
        }
        let edges = self.edges.iter().filter_map(|(u, v)| {
            Some((*index.get(u)?, *index.get(v)?))
        });
        Graph::from_edges_dedup(vertices.len(), edges)
    }
}

/// Graph families produced by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Path,
    Cycle,
    Grid,
    Torus,
    Star,
    Complete,
    TriangulatedDisk,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Path,
        Family::Cycle,
        Family::Grid,
        Family::Torus,
        Family::Star,
        Family::Complete,
        Family::TriangulatedDisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Grid => "grid",
            Family::Torus => "torus",
            Family::Star => "star",
            Family::Complete => "complete",
            Family::TriangulatedDisk => "triangulated_disk",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Generates a member of `family`.
///
/// `size` holds one entry per dimension: `grid` and `torus` accept `[n]`
/// (square) or `[w, h]`; every other family takes `[n]`, the vertex count
/// (`star(n)` has one center and `n - 1` leaves). Only `triangulated_disk`
/// consumes the seed.
pub fn generate(family: Family, size: &[usize], seed: u64) -> Result<Graph> {
    if size.is_empty() || size.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "{} needs positive sizes, got {size:?}",
            family.name()
        )));
    }
    let two_dims = matches!(family, Family::Grid | Family::Torus);
    if size.len() > if two_dims { 2 } else { 1 } {
        return Err(Error::InvalidParameter(format!(
            "{} takes {} size parameter(s), got {}",
            family.name(),
            if two_dims { "1 or 2" } else { "1" },
            size.len()
        )));
    }
    let n = size[0];
    let graph = match family {
        Family::Path => Graph::from_edges_dedup(n, (1..n).map(|i| (i - 1, i))),
        Family::Cycle => {
            if n < 3 {
                return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
            }
            Graph::from_edges_dedup(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        Family::Grid => {
            let (w, h) = (n, *size.get(1).unwrap_or(&n));
            let mut edges = Vec::new();
            for row in 0..h {
                for col in 0..w {
                    let v = row * w + col;
                    if col + 1 < w {
                        edges.push((v, v + 1));
                    }
                    if row + 1 < h {
                        edges.push((v, v + w));
                    }
                }
            }
            Graph::from_edges_dedup(w * h, edges)
        }
        Family::Torus => {
            let (w, h) = (n, *size.get(1).unwrap_or(&n));
            if w < 3 || h < 3 {
                return Err(Error::InvalidParameter(format!(
                    "torus needs both sides >= 3, got {w}x{h}"
                )));
            }
            let mut edges = Vec::new();
            for row in 0..h {
                for col in 0..w {
                    let v = row * w + col;
                    edges.push((v, row * w + (col + 1) % w));
                    edges.push((v, ((row + 1) % h) * w + col));
                }
            }
            Graph::from_edges_dedup(w * h, edges)
        }
        Family::Star => Graph::from_edges_dedup(n, (1..n).map(|i| (0, i))),
        Family::Complete => {
            Graph::from_edges_dedup(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
        }
        Family::TriangulatedDisk => triangulated_disk(n, seed)?,
    };
    Ok(graph)
}

/// Random combinatorial triangulation of a disk whose outer face is the
/// triangle `0, 1, 2`.
///
/// Vertices are inserted one at a time into a uniformly chosen face; after
/// each insertion the edges opposite the new vertex are flipped while a flip
/// lowers the degree imbalance of the quadrilateral, which keeps degrees
/// bounded the way Delaunay flips do for random point sets.
fn triangulated_disk(n: usize, seed: u64) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "triangulated_disk needs n >= 3, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = Mesh::new(n);
    for v in 3..n {
        let f = rng.gen_range(0..mesh.faces.len());
        let [a, b, c] = mesh.faces[f];
        mesh.replace_face(f, [a, b, v]);
        mesh.push_face([b, c, v]);
        mesh.push_face([c, a, v]);
        let mut pending = vec![(a, b), (b, c), (c, a)];
        while let Some((x, y)) = pending.pop() {
            if let Some((p, q)) = mesh.try_flip(x, y) {
                // the two edges of the new quadrilateral that face the new vertex
                pending.push((x, if p == v { q } else { p }));
                pending.push((y, if p == v { q } else { p }));
            }
        }
    }
    // a few global balancing passes
    for _ in 0..3 {
        let edges: Vec<_> = mesh.edge_faces.keys().copied().collect();
        let mut flipped = false;
        for (x, y) in edges {
            flipped |= mesh.try_flip(x, y).is_some();
        }
        if !flipped {
            break;
        }
    }
    Ok(Graph::from_edges_dedup(n, mesh.edge_faces.keys().copied()))
}

struct Mesh {
    faces: Vec<[usize; 3]>,
    edge_faces: BTreeMap<(usize, usize), Vec<usize>>,
    degree: Vec<usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    fn new(n: usize) -> Self {
        let mut mesh = Self { faces: Vec::new(), edge_faces: BTreeMap::new(), degree: vec![0; n] };
        mesh.push_face([0, 1, 2]);
        mesh
    }

    fn link(&mut self, f: usize) {
        let [a, b, c] = self.faces[f];
        for (x, y) in [(a, b), (b, c), (c, a)] {
            let entry = self.edge_faces.entry(key(x, y)).or_default();
            if entry.is_empty() {
                self.degree[x] += 1;
                self.degree[y] += 1;
            }
            entry.push(f);
        }
    }

    fn unlink(&mut self, f: usize) {
        let [a, b, c] = self.faces[f];
        for (x, y) in [(a, b), (b, c), (c, a)] {
            let k = key(x, y);
            let entry = self.edge_faces.get_mut(&k).expect("edge present");
            entry.retain(|&g| g != f);
            if entry.is_empty() {
                self.edge_faces.remove(&k);
                self.degree[x] -= 1;
                self.degree[y] -= 1;
            }
        }
    }

    fn push_face(&mut self, face: [usize; 3]) {
        self.faces.push(face);
        self.link(self.faces.len() - 1);
    }

    fn replace_face(&mut self, f: usize, face: [usize; 3]) {
        self.unlink(f);
        self.faces[f] = face;
        self.link(f);
    }

    /// Flips interior edge `xy` to `pq` when that strictly reduces the degree
    /// spread; returns the new edge.
    fn try_flip(&mut self, x: usize, y: usize) -> Option<(usize, usize)> {
        let faces = self.edge_faces.get(&key(x, y))?;
        if faces.len() != 2 {
            return None;
        }
        let (f, g) = (faces[0], faces[1]);
        let apex = |face: [usize; 3]| face.into_iter().find(|&w| w != x && w != y);
        let p = apex(self.faces[f])?;
        let q = apex(self.faces[g])?;
        if self.edge_faces.contains_key(&key(p, q)) {
            return None;
        }
        let d = &self.degree;
        // never drop a vertex below degree 3 and only flip towards balance
        if d[x] <= 3 || d[y] <= 3 || d[x] + d[y] <= d[p] + d[q] + 2 {
            return None;
        }
        self.replace_face(f, [p, q, x]);
        self.replace_face(g, [q, p, y]);
        Some((p, q))
    }
}
