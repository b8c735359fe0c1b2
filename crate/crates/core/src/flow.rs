//! Path flows, subset distributions and the congestion / intersection
//! functionals.
//!
//! Intersection convention: `inter(F)` is the expansion
//! `con(F) = Σ_{p,p'} Σ_{x∈p∩p'} F(p)F(p')` over *ordered* path pairs,
//! restricted to pairs whose endpoint sets are disjoint (four distinct
//! endpoints). With this convention `inter(F) ≤ con(F)` term by term, and two
//! unit paths crossing at one vertex contribute 2.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, Vertex};
use crate::{Error, Result};

/// Tolerance for `F[u,v] = Pr[u,v ∈ S]` in [`validate_mu_flow`].
pub const MU_FLOW_TOL: f64 = 1e-9;
/// Tolerance on `Σ Pr = 1` for a [`SubsetDistribution`].
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Maximum number of simple paths the brute-force searches may enumerate.
pub const PATH_ENUMERATION_GUARD: usize = 1_000_000;
/// Host size up to which [`min_intersection_bruteforce`] also minimizes over
/// placements of the demand graph.
pub const PLACEMENT_SEARCH_MAX_HOST: usize = 10;

fn pair(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    (u.min(v), u.max(v))
}

/// Simple path in a host graph, stored as its vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Path(Vec<Vertex>);

impl Path {
    /// Validates: nonempty, no repeated vertex, consecutive vertices adjacent.
    pub fn new(graph: &Graph, vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Validation("empty path".into()));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= graph.n()) {
            return Err(Error::Validation(format!("path vertex {v} out of range")));
        }
        let distinct: BTreeSet<_> = vertices.iter().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::Validation(format!("path {vertices:?} repeats a vertex")));
        }
        if let Some(w) = vertices.windows(2).find(|w| !graph.is_adjacent(w[0], w[1])) {
            return Err(Error::Validation(format!("path step {} - {} is not an edge", w[0], w[1])));
        }
        Ok(Self(vertices))
    }

    pub(crate) fn from_vertices(vertices: Vec<Vertex>) -> Self {
        debug_assert!(!vertices.is_empty());
        Self(vertices)
    }

    #[inline]
    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    /// Number of vertices on the path.
    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Endpoint pair, smaller vertex first.
    pub fn endpoints(&self) -> (Vertex, Vertex) {
        pair(self.0[0], self.0[self.0.len() - 1])
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }
}

/// Nonnegative mass on finitely many paths. Paths with zero mass are not
/// stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flow {
    paths: BTreeMap<Path, f64>,
}

impl Flow {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `mass` to `path`.
    pub fn add(&mut self, path: Path, mass: f64) -> Result<()> {
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::Validation(format!("path mass {mass} is not a finite nonnegative number")));
        }
        if mass > 0.0 {
            *self.paths.entry(path).or_insert(0.0) += mass;
        }
        Ok(())
    }

    pub fn from_paths<I: IntoIterator<Item = (Path, f64)>>(paths: I) -> Result<Self> {
        let mut flow = Self::new();
        for (p, m) in paths {
            flow.add(p, m)?;
        }
        Ok(flow)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Path, f64)> + '_ {
        self.paths.iter().map(|(p, &m)| (p, m))
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn mass(&self, path: &Path) -> f64 {
        self.paths.get(path).copied().unwrap_or(0.0)
    }

    /// Checks every path against `graph`.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        for p in self.paths.keys() {
            Path::new(graph, p.0.clone())?;
        }
        Ok(())
    }

    /// `F[u,v] = Σ_{p∈P_uv} F(p)`.
    pub fn pair_total(&self, u: Vertex, v: Vertex) -> f64 {
        let key = pair(u, v);
        self.paths.iter().filter(|(p, _)| p.endpoints() == key).map(|(_, &m)| m).sum()
    }

    /// All nonzero pair totals, keyed by sorted endpoint pair.
    pub fn pair_totals(&self) -> BTreeMap<(Vertex, Vertex), f64> {
        let mut totals = BTreeMap::new();
        for (p, &m) in &self.paths {
            *totals.entry(p.endpoints()).or_insert(0.0) += m;
        }
        totals
    }

    /// `C_F(v) = Σ_{p∋v} F(p)` for every vertex touched by the flow.
    pub fn vertex_loads(&self) -> BTreeMap<Vertex, f64> {
        let mut loads = BTreeMap::new();
        for (p, &m) in &self.paths {
            for &v in p.vertices() {
                *loads.entry(v).or_insert(0.0) += m;
            }
        }
        loads
    }

    /// `con(F) = Σ_v C_F(v)²`.
    pub fn congestion(&self) -> f64 {
        self.vertex_loads().values().map(|c| c * c).sum()
    }

    /// `inter(F)`, see the module docs for the ordering convention.
    pub fn intersection_number(&self) -> f64 {
        // per vertex: load grouped by the endpoint pair of the paths through it
        let mut groups: BTreeMap<Vertex, BTreeMap<(Vertex, Vertex), f64>> = BTreeMap::new();
        for (p, &m) in &self.paths {
            let e = p.endpoints();
            if e.0 == e.1 {
                continue;
            }
            for &v in p.vertices() {
                *groups.entry(v).or_default().entry(e).or_insert(0.0) += m;
            }
        }
        let mut total = 0.0;
        for loads in groups.values() {
            let loads: Vec<_> = loads.iter().collect();
            for (i, (e, a)) in loads.iter().enumerate() {
                for (f, b) in &loads[i + 1..] {
                    if e.0 != f.0 && e.0 != f.1 && e.1 != f.0 && e.1 != f.1 {
                        total += 2.0 * *a * *b;
                    }
                }
            }
        }
        total
    }

    /// At most one path per endpoint pair.
    pub fn is_integral(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.paths.keys().all(|p| seen.insert(p.endpoints()))
    }

    /// Every pair total lies within `tol` of 0 or 1.
    pub fn is_unit(&self, tol: f64) -> bool {
        self.pair_totals().values().all(|&t| t.abs() <= tol || (t - 1.0).abs() <= tol)
    }
}

/// Finitely supported probability distribution over vertex subsets.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsetDistribution {
    support: Vec<(Vec<Vertex>, f64)>,
}

impl SubsetDistribution {
    /// Sorts each set, merges identical sets and drops zero-probability
    /// entries. Rejects empty sets, repeated vertices, negative
    /// probabilities and totals off 1 by more than [`PROBABILITY_TOL`].
    pub fn new(support: Vec<(Vec<Vertex>, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<Vertex>, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (mut set, p) in support {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Validation(format!("probability {p} is not a finite nonnegative number")));
            }
            if set.is_empty() {
                return Err(Error::Validation("support sets must be nonempty".into()));
            }
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!("support set {set:?} repeats a vertex")));
            }
            total += p;
            if p > 0.0 {
                *merged.entry(set).or_insert(0.0) += p;
            }
        }
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::Validation(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { support: merged.into_iter().collect() })
    }

    pub fn point_mass(set: Vec<Vertex>) -> Result<Self> {
        Self::new(vec![(set, 1.0)])
    }

    /// Uniform over the given sets.
    pub fn uniform(sets: Vec<Vec<Vertex>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Validation("uniform distribution over no sets".into()));
        }
        let p = 1.0 / sets.len() as f64;
        let support: Vec<_> = sets.into_iter().map(|s| (s, p)).collect();
        Self::new(support)
    }

    pub fn support(&self) -> &[(Vec<Vertex>, f64)] {
        &self.support
    }

    /// `E|S|`.
    pub fn mean_size(&self) -> f64 {
        self.support.iter().map(|(s, p)| p * s.len() as f64).sum()
    }

    /// `E|S|² = Σ_{u,v} Pr[u,v ∈ S]` over ordered pairs, diagonal included.
    pub fn mean_size_sq(&self) -> f64 {
        self.support.iter().map(|(s, p)| p * (s.len() * s.len()) as f64).sum()
    }

    /// `Pr[u, v ∈ S]`; with `u == v` this is `Pr[u ∈ S]`.
    pub fn pair_probability(&self, u: Vertex, v: Vertex) -> f64 {
        self.support
            .iter()
            .filter(|(s, _)| s.binary_search(&u).is_ok() && s.binary_search(&v).is_ok())
            .map(|(_, p)| p)
            .sum()
    }

    /// `Pr[u,v ∈ S]` for every unordered pair `u < v` with positive value.
    pub fn pair_probabilities(&self) -> BTreeMap<(Vertex, Vertex), f64> {
        let mut out = BTreeMap::new();
        for (s, p) in &self.support {
            for (i, &u) in s.iter().enumerate() {
                for &v in &s[i + 1..] {
                    *out.entry((u, v)).or_insert(0.0) += p;
                }
            }
        }
        out
    }

    /// `Pr[u ∈ S]` for every vertex in some support set.
    pub fn vertex_probabilities(&self) -> BTreeMap<Vertex, f64> {
        let mut out = BTreeMap::new();
        for (s, p) in &self.support {
            for &u in s {
                *out.entry(u).or_insert(0.0) += p;
            }
        }
        out
    }

    /// True when every support set has exactly `r` elements.
    pub fn all_of_size(&self, r: usize) -> bool {
        self.support.iter().all(|(s, _)| s.len() == r)
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.support.iter().filter_map(|(s, _)| s.last().copied()).max()
    }

    /// `H_μ` on `n` vertices with `w(u,v) = Pr[u,v ∈ S]`.
    pub fn demand_graph(&self, n: usize) -> Result<DemandGraph> {
        DemandGraph::new(n, self.pair_probabilities())
    }
}

/// Edge-weighted demand graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandGraph {
    n: usize,
    weights: BTreeMap<(Vertex, Vertex), f64>,
}

impl DemandGraph {
    /// Zero weights are dropped; pairs are normalized to `(min, max)`.
    pub fn new<I>(n: usize, weighted_edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((Vertex, Vertex), f64)>,
    {
        let mut weights = BTreeMap::new();
        for ((u, v), w) in weighted_edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Validation(format!("invalid demand pair ({u}, {v}) on {n} vertices")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!("demand weight {w} is not a finite nonnegative number")));
            }
            if weights.contains_key(&pair(u, v)) {
                return Err(Error::Validation(format!("duplicate demand pair ({u}, {v})")));
            }
            if w > 0.0 {
                weights.insert(pair(u, v), w);
            }
        }
        Ok(Self { n, weights })
    }

    /// Unit-weighted demand graph.
    pub fn unit<I: IntoIterator<Item = (Vertex, Vertex)>>(n: usize, edges: I) -> Result<Self> {
        Self::new(n, edges.into_iter().map(|e| (e, 1.0)))
    }

    /// Unit-weighted complete graph on `vertices`, inside a vertex set of
    /// size `n`.
    pub fn complete_on(n: usize, vertices: &[Vertex]) -> Result<Self> {
        let edges = vertices.iter().enumerate().flat_map(|(i, &u)| vertices[i + 1..].iter().map(move |&v| (u, v)));
        Self::unit(n, edges)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = ((Vertex, Vertex), f64)> + '_ {
        self.weights.iter().map(|(&e, &w)| (e, w))
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn weight(&self, u: Vertex, v: Vertex) -> f64 {
        self.weights.get(&pair(u, v)).copied().unwrap_or(0.0)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.weights.keys().filter(|(a, b)| *a == v || *b == v).count()
    }

    /// Vertices incident to at least one demand, ascending.
    pub fn active_vertices(&self) -> Vec<Vertex> {
        let set: BTreeSet<_> = self.weights.keys().flat_map(|&(a, b)| [a, b]).collect();
        set.into_iter().collect()
    }

    /// Minimum degree over all `n` vertices.
    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        let mut adjacency = vec![Vec::new(); self.n];
        for &(a, b) in self.weights.keys() {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for s in 0..self.n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &u in &adjacency[v] {
                    if color[u] == u8::MAX {
                        color[u] = 1 - color[v];
                        stack.push(u);
                    } else if color[u] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// True when two demand pairs have four distinct endpoints.
    pub fn has_disjoint_pair(&self) -> bool {
        let edges: Vec<_> = self.weights.keys().collect();
        edges.iter().enumerate().any(|(i, e)| edges[i + 1..].iter().any(|f| disjoint(**e, **f)))
    }
}

fn disjoint(e: (Vertex, Vertex), f: (Vertex, Vertex)) -> bool {
    e.0 != f.0 && e.0 != f.1 && e.1 != f.0 && e.1 != f.1
}

/// Outcome of [`validate_mu_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuFlowCheck {
    pub valid: bool,
    pub max_deviation: f64,
    /// Pair attaining `max_deviation` (`None` when both sides are empty).
    pub worst_pair: Option<(Vertex, Vertex)>,
}

/// Checks `F[u,v] = Pr[u,v ∈ S]` for all `u ≠ v` within [`MU_FLOW_TOL`].
pub fn validate_mu_flow(flow: &Flow, mu: &SubsetDistribution) -> MuFlowCheck {
    validate_mu_flow_with_tol(flow, mu, MU_FLOW_TOL)
}

pub fn validate_mu_flow_with_tol(flow: &Flow, mu: &SubsetDistribution, tol: f64) -> MuFlowCheck {
    let totals = flow.pair_totals();
    let probabilities = mu.pair_probabilities();
    let keys: BTreeSet<_> = totals.keys().chain(probabilities.keys()).filter(|(u, v)| u != v).copied().collect();
    let mut worst = (0.0f64, None);
    for key in keys {
        let dev = (totals.get(&key).copied().unwrap_or(0.0) - probabilities.get(&key).copied().unwrap_or(0.0)).abs();
        if worst.1.is_none() || dev > worst.0 {
            worst = (dev, Some(key));
        }
    }
    MuFlowCheck { valid: worst.0 <= tol, max_deviation: worst.0, worst_pair: worst.1 }
}

/// Randomized rounding of a unit flow: independently for every endpoint pair,
/// keep one path chosen with probability proportional to its mass. Pair
/// totals are preserved exactly.
pub fn round_integral(flow: &Flow, seed: u64) -> Result<Flow> {
    let mut by_pair: BTreeMap<(Vertex, Vertex), Vec<(&Path, f64)>> = BTreeMap::new();
    for (p, m) in flow.iter() {
        by_pair.entry(p.endpoints()).or_default().push((p, m));
    }
    for (key, paths) in &by_pair {
        let total: f64 = paths.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MU_FLOW_TOL {
            return Err(Error::Validation(format!(
                "pair {key:?} carries {total}; rounding needs a unit flow"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounded = Flow::new();
    for paths in by_pair.values() {
        let total: f64 = paths.iter().map(|(_, m)| m).sum();
        let chosen = if paths.len() == 1 {
            paths[0].0
        } else {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = paths[paths.len() - 1].0;
            for &(p, m) in paths {
                acc += m;
                if target < acc {
                    pick = p;
                    break;
                }
            }
            pick
        };
        rounded.add(chosen.clone(), total)?;
    }
    Ok(rounded)
}

/// All simple `u`–`v` paths, in DFS order over sorted neighbor lists. Fails
/// once more than `cap` paths have been found.
pub fn enumerate_simple_paths(graph: &Graph, u: Vertex, v: Vertex, cap: usize) -> Result<Vec<Path>> {
    if u >= graph.n() || v >= graph.n() {
        return Err(Error::InvalidParameter(format!("vertex out of range: ({u}, {v})")));
    }
    let mut out = Vec::new();
    if u == v {
        out.push(Path::from_vertices(vec![u]));
        return Ok(out);
    }
    let mut on_path = vec![false; graph.n()];
    let mut stack = vec![u];
    on_path[u] = true;
    extend_paths(graph, v, &mut stack, &mut on_path, &mut out, cap)?;
    Ok(out)
}

fn extend_paths(
    graph: &Graph,
    target: Vertex,
    stack: &mut Vec<Vertex>,
    on_path: &mut [bool],
    out: &mut Vec<Path>,
    cap: usize,
) -> Result<()> {
    let last = *stack.last().expect("nonempty");
    for &w in graph.neighbors(last) {
        if on_path[w] {
            continue;
        }
        stack.push(w);
        if w == target {
            if out.len() >= cap {
                return Err(Error::ResourceGuard(format!("more than {cap} simple paths")));
            }
            out.push(Path::from_vertices(stack.clone()));
        } else {
            on_path[w] = true;
            extend_paths(graph, target, stack, on_path, out, cap)?;
            on_path[w] = false;
        }
        stack.pop();
    }
    Ok(())
}

/// How demand vertices are mapped into the host.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Demand vertex `i` sits on host vertex `i`.
    Identity,
    /// Minimize over every injective placement of the non-isolated demand
    /// vertices.
    Search,
    /// `Search` when `|V(H)| ≤ |V(G)| ≤ PLACEMENT_SEARCH_MAX_HOST`, else
    /// `Identity`.
    Auto,
}

/// Optimal integral routing found by [`min_intersection_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionOptimum {
    pub value: f64,
    /// Host vertex of each demand vertex (`usize::MAX` for isolated ones).
    pub placement: Vec<Vertex>,
    pub routing: Flow,
}

/// `inter*_G(H)`: exact minimum of `inter(F)` over integral `H`-flows.
///
/// With `unit` set every demand carries mass 1, otherwise the demand weights
/// are routed as path masses. Placement follows [`Placement::Auto`].
pub fn min_intersection_bruteforce(graph: &Graph, demand: &DemandGraph, unit: bool) -> Result<f64> {
    Ok(min_intersection_search(graph, demand, unit, Placement::Auto, None)?.map_or(0.0, |o| o.value))
}

/// True when some integral unit `H`-flow has zero intersection number.
pub fn has_zero_intersection(graph: &Graph, demand: &DemandGraph) -> Result<bool> {
    // cutoff: only strictly-below-smallest-positive routings are accepted
    Ok(min_intersection_search(graph, demand, true, Placement::Auto, Some(f64::MIN_POSITIVE))?.is_some())
}

/// Branch-and-bound search behind [`min_intersection_bruteforce`].
///
/// Returns `None` only when `cutoff` is set and no routing beats it. The
/// total number of enumerated simple paths per placement is limited to
/// [`PATH_ENUMERATION_GUARD`].
pub fn min_intersection_search(
    graph: &Graph,
    demand: &DemandGraph,
    unit: bool,
    placement: Placement,
    cutoff: Option<f64>,
) -> Result<Option<IntersectionOptimum>> {
    if demand.n() > graph.n() {
        return Err(Error::InvalidParameter(format!(
            "demand graph has {} vertices, host only {}",
            demand.n(),
            graph.n()
        )));
    }
    if graph.n() > 128 {
        return Err(Error::InvalidParameter("brute-force search supports hosts with at most 128 vertices".into()));
    }
    let search = match placement {
        Placement::Identity => false,
        Placement::Search => true,
        Placement::Auto => graph.n() <= PLACEMENT_SEARCH_MAX_HOST,
    };
    let active = demand.active_vertices();
    let demands: Vec<(Vertex, Vertex, f64)> =
        demand.edges().map(|((a, b), w)| (a, b, if unit { 1.0 } else { w })).collect();

    let mut state = SearchState {
        graph,
        best: cutoff.unwrap_or(f64::INFINITY),
        witness: None,
        path_cache: BTreeMap::new(),
    };
    let mut seen = BTreeSet::new();
    let mut image = vec![usize::MAX; demand.n()];
    let mut used = vec![false; graph.n()];
    if search {
        place_recursive(&mut state, &active, 0, &mut image, &mut used, &demands, &mut seen)?;
    } else {
        for &v in &active {
            image[v] = v;
        }
        state.solve_placement(&image, &demands, &mut seen)?;
    }
    Ok(state.witness.map(|(value, placement, routing)| IntersectionOptimum { value, placement, routing }))
}

fn place_recursive(
    state: &mut SearchState<'_>,
    active: &[Vertex],
    depth: usize,
    image: &mut Vec<Vertex>,
    used: &mut Vec<bool>,
    demands: &[(Vertex, Vertex, f64)],
    seen: &mut BTreeSet<Vec<(Vertex, Vertex, u64)>>,
) -> Result<()> {
    if state.best == 0.0 && state.witness.is_some() {
        return Ok(());
    }
    if depth == active.len() {
        return state.solve_placement(image, demands, seen);
    }
    for host in 0..state.graph.n() {
        if used[host] {
            continue;
        }
        used[host] = true;
        image[active[depth]] = host;
        place_recursive(state, active, depth + 1, image, used, demands, seen)?;
        used[host] = false;
        image[active[depth]] = usize::MAX;
    }
    Ok(())
}

struct PathInfo {
    mask: u128,
    path: Path,
}

struct SearchState<'g> {
    graph: &'g Graph,
    best: f64,
    witness: Option<(f64, Vec<Vertex>, Flow)>,
    path_cache: BTreeMap<(Vertex, Vertex), Vec<PathInfo>>,
}

impl SearchState<'_> {
    fn solve_placement(
        &mut self,
        image: &[Vertex],
        demands: &[(Vertex, Vertex, f64)],
        seen: &mut BTreeSet<Vec<(Vertex, Vertex, u64)>>,
    ) -> Result<()> {
        let mut mapped: Vec<(Vertex, Vertex, f64)> =
            demands.iter().map(|&(a, b, w)| {
                let (x, y) = pair(image[a], image[b]);
                (x, y, w)
            }).collect();
        mapped.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let key: Vec<_> = mapped.iter().map(|&(a, b, w)| (a, b, w.to_bits())).collect();
        if !seen.insert(key) {
            return Ok(());
        }
        let mut budget = PATH_ENUMERATION_GUARD;
        for &(a, b, _) in &mapped {
            if !self.path_cache.contains_key(&(a, b)) {
                let paths = enumerate_simple_paths(self.graph, a, b, PATH_ENUMERATION_GUARD)?;
                let infos = paths
                    .into_iter()
                    .map(|p| PathInfo { mask: p.vertices().iter().fold(0u128, |m, &v| m | 1u128 << v), path: p })
                    .collect();
                self.path_cache.insert((a, b), infos);
            }
            let count = self.path_cache[&(a, b)].len();
            if count == 0 {
                return Err(Error::Validation(format!("demand pair ({a}, {b}) is disconnected in the host")));
            }
            budget = budget.checked_sub(count).ok_or_else(|| {
                Error::ResourceGuard(format!("more than {PATH_ENUMERATION_GUARD} simple paths over all demand pairs"))
            })?;
        }

        let m = mapped.len();
        // demands with more disjoint partners first, then fewer paths
        let partners = |i: usize| {
            (0..m).filter(|&j| disjoint((mapped[i].0, mapped[i].1), (mapped[j].0, mapped[j].1))).count()
        };
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&i| (core::cmp::Reverse(partners(i)), self.path_cache[&(mapped[i].0, mapped[i].1)].len()));
        let ordered: Vec<(Vertex, Vertex, f64)> = order.iter().map(|&i| mapped[i]).collect();
        let coupling: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let (ei, ej) = ((ordered[i].0, ordered[i].1), (ordered[j].0, ordered[j].1));
                        if disjoint(ei, ej) { 2.0 * ordered[i].2 * ordered[j].2 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();

        let lists: Vec<&Vec<PathInfo>> = ordered.iter().map(|&(a, b, _)| &self.path_cache[&(a, b)]).collect();
        let mut chosen = vec![0usize; m];
        let mut best_choice: Option<Vec<usize>> = None;
        let mut best = self.best;
        branch(&lists, &coupling, 0, 0.0, &mut chosen, &mut best, &mut best_choice);
        if let Some(choice) = best_choice {
            if self.witness.is_none() || best < self.best {
                self.best = best;
                let mut routing = Flow::new();
                for (i, &c) in choice.iter().enumerate() {
                    routing.add(lists[i][c].path.clone(), ordered[i].2)?;
                }
                self.witness = Some((best, image.to_vec(), routing));
            }
        }
        Ok(())
    }
}

fn branch(
    lists: &[&Vec<PathInfo>],
    coupling: &[Vec<f64>],
    level: usize,
    partial: f64,
    chosen: &mut Vec<usize>,
    best: &mut f64,
    best_choice: &mut Option<Vec<usize>>,
) {
    if partial >= *best {
        return;
    }
    let m = lists.len();
    if level == m {
        *best = partial;
        *best_choice = Some(chosen.clone());
        return;
    }
    let increment = |j: usize, mask: u128, chosen: &[usize]| -> f64 {
        (0..level)
            .filter(|&i| coupling[i][j] != 0.0)
            .map(|i| coupling[i][j] * (mask & lists[i][chosen[i]].mask).count_ones() as f64)
            .sum()
    };
    // remaining demands cannot do better than their cheapest path each
    let mut bound = partial;
    for j in level + 1..m {
        bound += lists[j].iter().map(|p| increment(j, p.mask, chosen)).fold(f64::INFINITY, f64::min);
        if bound >= *best {
            return;
        }
    }
    let mut candidates: Vec<(f64, usize)> =
        lists[level].iter().enumerate().map(|(c, p)| (increment(level, p.mask, chosen), c)).collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (inc, c) in candidates {
        if bound + inc >= *best {
            break;
        }
        chosen[level] = c;
        branch(lists, coupling, level + 1, partial + inc, chosen, best, best_choice);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    fn path(g: &Graph, v: &[Vertex]) -> Path {
        Path::new(g, v.to_vec()).unwrap()
    }

    #[test]
    fn path_validation() {
        let g = generate(Family::Path, &[4], 0).unwrap();
        assert!(Path::new(&g, vec![]).is_err());
        assert!(Path::new(&g, vec![0, 2]).is_err());
        assert!(Path::new(&g, vec![0, 1, 0]).is_err());
        assert_eq!(path(&g, &[2, 1, 0]).endpoints(), (0, 2));
    }

    #[test]
    fn pair_total_examples() {
        let g = generate(Family::Cycle, &[4], 0).unwrap();
        let empty = Flow::new();
        assert_eq!(empty.pair_total(0, 2), 0.0);
        let one = Flow::from_paths([(path(&g, &[0, 1, 2]), 1.0)]).unwrap();
        assert_eq!(one.pair_total(0, 2), 1.0);
        assert_eq!(one.pair_total(0, 1), 0.0);
        let two = Flow::from_paths([(path(&g, &[0, 1, 2]), 0.5), (path(&g, &[0, 3, 2]), 0.5)]).unwrap();
        assert_eq!(two.pair_total(2, 0), 1.0);
    }

    #[test]
    fn congestion_examples() {
        let p3 = generate(Family::Path, &[3], 0).unwrap();
        assert_eq!(Flow::from_paths([(path(&p3, &[0, 1, 2]), 1.0)]).unwrap().congestion(), 3.0);
        assert_eq!(Flow::new().congestion(), 0.0);
        let grid = generate(Family::Grid, &[3], 0).unwrap();
        let cross = Flow::from_paths([(path(&grid, &[3, 4, 5]), 1.0), (path(&grid, &[1, 4, 7]), 1.0)]).unwrap();
        assert_eq!(cross.congestion(), 8.0);
        assert_eq!(cross.intersection_number(), 2.0);
    }

    #[test]
    fn intersection_examples() {
        let star = generate(Family::Star, &[5], 0).unwrap();
        let f = Flow::from_paths([(path(&star, &[1, 0, 2]), 1.0), (path(&star, &[3, 0, 4]), 1.0)]).unwrap();
        assert_eq!(f.intersection_number(), 2.0);
        assert!(f.intersection_number() <= f.congestion());
        // triangle demand: every pair of demands shares an endpoint
        let tri = Flow::from_paths([
            (path(&star, &[1, 0, 2]), 1.0),
            (path(&star, &[2, 0, 3]), 1.0),
            (path(&star, &[1, 0, 3]), 1.0),
        ])
        .unwrap();
        assert_eq!(tri.intersection_number(), 0.0);
    }

    #[test]
    fn mu_flow_examples() {
        let k3 = generate(Family::Complete, &[3], 0).unwrap();
        let mu = SubsetDistribution::point_mass(vec![0, 1]).unwrap();
        let f = Flow::from_paths([(path(&k3, &[0, 2, 1]), 1.0)]).unwrap();
        assert!(validate_mu_flow(&f, &mu).valid);

        let all = SubsetDistribution::point_mass(vec![0, 1, 2]).unwrap();
        let edges = Flow::from_paths([
            (path(&k3, &[0, 1]), 1.0),
            (path(&k3, &[1, 2]), 1.0),
            (path(&k3, &[0, 2]), 1.0),
        ])
        .unwrap();
        assert!(validate_mu_flow(&edges, &all).valid);
        let missing = Flow::from_paths([(path(&k3, &[0, 1]), 1.0), (path(&k3, &[1, 2]), 1.0)]).unwrap();
        let check = validate_mu_flow(&missing, &all);
        assert!(!check.valid);
        assert_eq!(check.max_deviation, 1.0);
        assert_eq!(check.worst_pair, Some((0, 2)));
    }

    #[test]
    fn subset_distribution_validation() {
        assert!(SubsetDistribution::new(vec![(vec![0], 0.5)]).is_err());
        assert!(SubsetDistribution::new(vec![(vec![], 1.0)]).is_err());
        assert!(SubsetDistribution::new(vec![(vec![1, 1], 1.0)]).is_err());
        assert!(SubsetDistribution::new(vec![(vec![1], -0.5), (vec![2], 1.5)]).is_err());
        let mu = SubsetDistribution::new(vec![(vec![2, 0], 0.25), (vec![0, 2], 0.25), (vec![1], 0.5)]).unwrap();
        assert_eq!(mu.support().len(), 2);
        assert_eq!(mu.pair_probability(0, 2), 0.5);
        assert_eq!(mu.pair_probability(1, 1), 0.5);
        assert_eq!(mu.mean_size(), 1.5);
        assert_eq!(mu.mean_size_sq(), 2.5);
    }

    #[test]
    fn rounding_keeps_integral_flows() {
        let g = generate(Family::Grid, &[3], 0).unwrap();
        let f = Flow::from_paths([(path(&g, &[0, 1, 2]), 1.0), (path(&g, &[6, 7, 8]), 1.0)]).unwrap();
        for seed in 0..20 {
            assert_eq!(round_integral(&f, seed).unwrap(), f);
        }
        let half = Flow::from_paths([(path(&g, &[0, 1, 2]), 0.5)]).unwrap();
        assert!(round_integral(&half, 0).is_err());
    }

    #[test]
    fn rounding_picks_each_half_path_about_half_the_time() {
        let g = generate(Family::Cycle, &[4], 0).unwrap();
        let a = path(&g, &[0, 1, 2]);
        let f = Flow::from_paths([(a.clone(), 0.5), (path(&g, &[0, 3, 2]), 0.5)]).unwrap();
        let trials = 10_000;
        let hits = (0..trials).filter(|&s| round_integral(&f, s).unwrap().mass(&a) > 0.0).count() as f64;
        let sigma = libm::sqrt(trials as f64 * 0.25);
        assert!((hits - trials as f64 / 2.0).abs() <= 3.0 * sigma, "hits {hits}");
    }

    #[test]
    fn path_enumeration_and_guard() {
        let c4 = generate(Family::Cycle, &[4], 0).unwrap();
        assert_eq!(enumerate_simple_paths(&c4, 0, 2, 10).unwrap().len(), 2);
        assert_eq!(enumerate_simple_paths(&c4, 1, 1, 10).unwrap().len(), 1);
        let k6 = generate(Family::Complete, &[6], 0).unwrap();
        // 1 + 4 + 12 + 24 + 24 = 65 simple paths between two vertices of K6
        assert_eq!(enumerate_simple_paths(&k6, 0, 1, 1000).unwrap().len(), 65);
        assert!(matches!(enumerate_simple_paths(&k6, 0, 1, 64), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn bruteforce_examples() {
        let tree = generate(Family::Star, &[6], 0).unwrap();
        let triangle = DemandGraph::unit(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(min_intersection_bruteforce(&tree, &triangle, true).unwrap(), 0.0);

        let star = generate(Family::Star, &[5], 0).unwrap();
        let matching = DemandGraph::unit(5, [(1, 2), (3, 4)]).unwrap();
        let opt = min_intersection_search(&star, &matching, true, Placement::Identity, None).unwrap().unwrap();
        assert_eq!(opt.value, 2.0);
        assert_eq!(opt.routing.intersection_number(), 2.0);
        // a center endpoint still touches the other path
        assert_eq!(min_intersection_bruteforce(&star, &matching, true).unwrap(), 2.0);

        let p3 = DemandGraph::unit(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(min_intersection_bruteforce(&generate(Family::Grid, &[2], 0).unwrap(), &p3, true).unwrap(), 0.0);
    }

    #[test]
    fn k4_needs_a_crossing_on_a_cycle_host() {
        let c4 = generate(Family::Cycle, &[4], 0).unwrap();
        let k4 = DemandGraph::complete_on(4, &[0, 1, 2, 3]).unwrap();
        let value = min_intersection_bruteforce(&c4, &k4, true).unwrap();
        assert!(value > 0.0);
        assert!(!has_zero_intersection(&c4, &k4).unwrap());
        let opt = min_intersection_search(&c4, &k4, true, Placement::Search, None).unwrap().unwrap();
        assert_eq!(opt.routing.intersection_number(), value);
    }

    #[test]
    fn weighted_demands_scale_the_value() {
        let star = generate(Family::Star, &[5], 0).unwrap();
        let h = DemandGraph::new(5, [((1, 2), 0.5), ((3, 4), 0.25)]).unwrap();
        let weighted = min_intersection_search(&star, &h, false, Placement::Identity, None).unwrap().unwrap();
        assert!((weighted.value - 2.0 * 0.5 * 0.25).abs() < 1e-15);
        let unit = min_intersection_search(&star, &h, true, Placement::Identity, None).unwrap().unwrap();
        assert_eq!(unit.value, 2.0);
    }

    #[test]
    fn demand_graph_properties() {
        let c4 = DemandGraph::unit(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(c4.is_bipartite());
        assert_eq!(c4.min_degree(), 2);
        assert!(c4.has_disjoint_pair());
        let tri = DemandGraph::unit(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(!tri.is_bipartite());
        assert!(!tri.has_disjoint_pair());
        assert!(DemandGraph::unit(3, [(0, 0)]).is_err());
        assert!(DemandGraph::unit(3, [(0, 1), (1, 0)]).is_err());
    }
}
