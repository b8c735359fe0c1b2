//! Spreading weights and subset flows.
//!
//! For a weighting `ω` and a size `r`,
//! `ε_r(G, ω) = min_{|S|=r} (1/r²) Σ_{{u,v}⊆S} dist_ω(u, v) / ‖ω‖`,
//! summing over unordered pairs. The maximum over `ω` equals
//! `(1/r²)·min √con(F)` over flows `F` whose pair totals are
//! `Pr_{S∼μ}[u, v ∈ S]` for a distribution `μ` on `r`-subsets.
//!
//! Both sides are solved numerically: the primal by cutting planes over
//! shortest-path load vectors, the dual by Frank–Wolfe. Both use the
//! same subset oracle, exact by enumeration when `C(n, r)` is at most
//! [`SolverOptions::exact_limit`] and greedy with local search otherwise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::flow::{validate_mu_flow_with_tol, Flow, Path, SubsetDistribution};
use crate::graph::{Graph, Vertex};
use crate::hull::MinNormPoint;
use crate::linalg::{dot, norm_sq};
use crate::metric::{shortest_paths, MetricOracle, ShortestPathTree, VertexWeighting};
use crate::subsets::binomial;
use crate::{Error, Result};

/// Largest `C(n, r)` enumerated exactly by default.
pub const EXACT_SUBSET_LIMIT: u64 = 1_000_000;
/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Pair-total tolerance for the flows returned by [`dual_min_congestion`].
pub const SOLUTION_FLOW_TOL: f64 = 1e-6;


/// Whether a value came from exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolveMode {
    Exact,
    Heuristic,
}

impl SolveMode {
    pub fn name(self) -> &'static str {
        match self {
            SolveMode::Exact => "exact",
            SolveMode::Heuristic => "heuristic",
        }
    }

    fn join(self, other: SolveMode) -> SolveMode {
        if self == SolveMode::Exact && other == SolveMode::Exact {
            SolveMode::Exact
        } else {
            SolveMode::Heuristic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Primal: oracle rounds plus hull corrections. Dual: Frank–Wolfe
    /// iterations.
    pub max_iterations: usize,
    pub exact_limit: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iterations: 50_000, exact_limit: EXACT_SUBSET_LIMIT }
    }
}

/// Solver failure. `NotConverged` carries the best iterate found, which is
/// still feasible.
#[derive(Debug, Clone)]
pub enum SolveError<T> {
    Invalid(Error),
    NotConverged { best: T, iterations: usize, residual: f64 },
}

impl<T> SolveError<T> {
    pub fn into_error(self) -> Error {
        match self {
            SolveError::Invalid(e) => e,
            SolveError::NotConverged { iterations, residual, .. } => {
                Error::NotConverged(format!("{iterations} iterations, residual {residual:.3e}"))
            }
        }
    }

    /// The best iterate, if the solver got that far.
    pub fn best(self) -> Option<T> {
        match self {
            SolveError::Invalid(_) => None,
            SolveError::NotConverged { best, .. } => Some(best),
        }
    }
}

impl<T> From<Error> for SolveError<T> {
    fn from(e: Error) -> Self {
        SolveError::Invalid(e)
    }
}

impl<T> fmt::Display for SolveError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Invalid(e) => write!(f, "{e}"),
            SolveError::NotConverged { iterations, residual, .. } => {
                write!(f, "solver did not converge after {iterations} iterations (residual {residual:.3e})")
            }
        }
    }
}

impl<T: fmt::Debug> core::error::Error for SolveError<T> {}

/// `ω` together with its spreading value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpreadingCertificate {
    /// Normalized copy of the weighting.
    pub weights: VertexWeighting,
    pub r: usize,
    pub epsilon: f64,
    /// Minimizing `r`-subset (lexicographically smallest among ties in exact
    /// mode).
    pub witness_set: Vec<Vertex>,
    /// `Heuristic` means `epsilon` is only an upper estimate of `ε_r(G, ω)`.
    pub mode: SolveMode,
}

/// Best `r`-subset for a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SubsetChoice {
    pub set: Vec<Vertex>,
    /// `Σ_{{u,v}⊆S} d(u, v)`.
    pub sum: f64,
    pub mode: SolveMode,
}

/// Minimizes the unordered pair sum of `dist` (row-major `n × n`) over
/// `r`-subsets.
pub(crate) fn min_subset(dist: &[f64], n: usize, r: usize, exact_limit: u64) -> SubsetChoice {
    if binomial(n, r) <= exact_limit {
        let mut best = (f64::INFINITY, None);
        let mut chosen = Vec::with_capacity(r);
        exact_dfs(dist, n, r, 0, 0.0, &mut chosen, &mut best);
        let set = best.1.unwrap_or_else(|| (0..r).collect());
        let sum = pair_sum(dist, n, &set);
        SubsetChoice { set, sum, mode: SolveMode::Exact }
    } else {
        let (set, sum) = greedy_subset(dist, n, r);
        SubsetChoice { set, sum, mode: SolveMode::Heuristic }
    }
}

fn exact_dfs(
    dist: &[f64],
    n: usize,
    r: usize,
    start: usize,
    partial: f64,
    chosen: &mut Vec<Vertex>,
    best: &mut (f64, Option<Vec<Vertex>>),
) {
    if chosen.len() == r {
        if partial < best.0 {
            *best = (partial, Some(chosen.clone()));
        }
        return;
    }
    let last = n - (r - chosen.len());
    for v in start..=last {
        let add: f64 = chosen.iter().map(|&c| dist[c * n + v]).sum();
        if partial + add >= best.0 {
            continue;
        }
        chosen.push(v);
        exact_dfs(dist, n, r, v + 1, partial + add, chosen, best);
        chosen.pop();
    }
}

fn pair_sum(dist: &[f64], n: usize, set: &[Vertex]) -> f64 {
    let mut sum = 0.0;
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            sum += dist[u * n + v];
        }
    }
    sum
}

/// Nearest-growth from every start vertex, then swap local search on the
/// best few seeds.
fn greedy_subset(dist: &[f64], n: usize, r: usize) -> (Vec<Vertex>, f64) {
    let mut candidates: Vec<(f64, Vec<Vertex>)> = Vec::with_capacity(n);
    let mut cost = vec![0.0; n];
    for s in 0..n {
        let mut set = vec![s];
        let mut inside = vec![false; n];
        inside[s] = true;
        for (v, c) in cost.iter_mut().enumerate() {
            *c = dist[s * n + v];
        }
        let mut sum = 0.0;
        while set.len() < r {
            let (v, c) = (0..n)
                .filter(|&v| !inside[v])
                .map(|v| (v, cost[v]))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("r <= n");
            inside[v] = true;
            set.push(v);
            sum += c;
            for (x, cx) in cost.iter_mut().enumerate() {
                *cx += dist[v * n + x];
            }
        }
        set.sort_unstable();
        candidates.push((sum, set));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    candidates.dedup_by(|a, b| a.1 == b.1);
    let mut best: Option<(f64, Vec<Vertex>)> = None;
    for (_, set) in candidates.into_iter().take(3) {
        let improved = swap_search(dist, n, set);
        let sum = pair_sum(dist, n, &improved);
        let better = match &best {
            None => true,
            Some((b, s)) => sum < *b || (sum == *b && improved < *s),
        };
        if better {
            best = Some((sum, improved));
        }
    }
    let (sum, set) = best.expect("n >= 1");
    (set, sum)
}

fn swap_search(dist: &[f64], n: usize, mut set: Vec<Vertex>) -> Vec<Vertex> {
    let mut inside = vec![false; n];
    for &v in &set {
        inside[v] = true;
    }
    for _ in 0..4 * n {
        // contribution of x to the current set
        let attach: Vec<f64> = (0..n).map(|x| set.iter().map(|&s| dist[s * n + x]).sum()).collect();
        let mut best_move: Option<(f64, usize, Vertex)> = None;
        for (i, &out) in set.iter().enumerate() {
            for add in (0..n).filter(|&x| !inside[x]) {
                let delta = attach[add] - dist[out * n + add] - attach[out];
                if delta < -1e-12 && best_move.is_none_or(|(d, _, _)| delta < d) {
                    best_move = Some((delta, i, add));
                }
            }
        }
        let Some((_, i, add)) = best_move else { break };
        inside[set[i]] = false;
        inside[add] = true;
        set[i] = add;
    }
    set.sort_unstable();
    set
}

fn check_size(n: usize, r: usize) -> Result<()> {
    if r < 2 || r > n {
        return Err(Error::Validation(format!("subset size r = {r} outside [2, {n}]")));
    }
    Ok(())
}

/// `ε_r(G, ω)` with the default exact-enumeration limit.
pub fn epsilon_r(graph: &Graph, weights: &VertexWeighting, r: usize) -> Result<SpreadingCertificate> {
    epsilon_r_with(graph, weights, r, EXACT_SUBSET_LIMIT)
}

pub fn epsilon_r_with(
    graph: &Graph,
    weights: &VertexWeighting,
    r: usize,
    exact_limit: u64,
) -> Result<SpreadingCertificate> {
    check_size(graph.n(), r)?;
    if weights.is_zero() {
        return Err(Error::Validation("ε_r is undefined for the zero weighting".into()));
    }
    let oracle = MetricOracle::new(graph, weights)?;
    let dist: Vec<f64> = (0..graph.n()).flat_map(|u| oracle.row(u).iter().copied()).collect();
    let choice = min_subset(&dist, graph.n(), r, exact_limit);
    Ok(SpreadingCertificate {
        weights: weights.normalized()?,
        r,
        epsilon: choice.sum / ((r * r) as f64 * weights.l2_norm()),
        witness_set: choice.set,
        mode: choice.mode,
    })
}

/// `(1/r²) Σ_{{u,v}⊆S} dist_ω(u, v) / ‖ω‖` for one set, `r = |S|`.
pub fn subset_spread(oracle: &MetricOracle, set: &[Vertex]) -> f64 {
    let r = set.len() as f64;
    let mut sum = 0.0;
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            sum += oracle.dist(u, v);
        }
    }
    sum / (r * r * oracle.weights().l2_norm())
}

fn all_pairs(graph: &Graph, weights: &[f64]) -> (Vec<f64>, Vec<ShortestPathTree>) {
    let n = graph.n();
    let trees: Vec<_> = (0..n).map(|s| shortest_paths(graph, weights, s)).collect();
    let dist = trees.iter().flat_map(|t| t.dist.iter().copied()).collect();
    (dist, trees)
}

/// Values `ψ_S(x) = (1/r²)Σ dist_x` of the active sets and their
/// supergradients (shortest-path indicators).
fn evaluate_sets(graph: &Graph, r: usize, sets: &[Vec<Vertex>], x: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let n = graph.n();
    let scale = 1.0 / (r * r) as f64;
    let mut trees: BTreeMap<Vertex, ShortestPathTree> = BTreeMap::new();
    sets.iter()
        .map(|set| {
            let mut value = 0.0;
            let mut grad = vec![0.0; n];
            for (i, &u) in set.iter().enumerate() {
                let tree = trees.entry(u).or_insert_with(|| shortest_paths(graph, x, u));
                for &v in &set[i + 1..] {
                    value += tree.dist[v];
                    if let Some(path) = tree.path_to(v) {
                        for w in path {
                            grad[w] += scale;
                        }
                    }
                }
            }
            (value * scale, grad)
        })
        .collect()
}

/// Maximizes `ε_r(G, ω)` over normalized `ω`.
///
/// Cutting planes: every oracle call at `x` contributes the linear piece
/// `c·x`, `c` the shortest-path load vector of the minimizing subset, which
/// bounds `ε_r` from above everywhere and is tight at `x`. The maximum of the
/// pieces over the nonnegative unit sphere is `‖p‖` for the minimum-norm
/// point `p` of their convex hull, attained at `p/‖p‖`. The run stops once
/// that model value exceeds the best true value by at most `tol·min(1, ε)`.
pub fn primal_max_spread(
    graph: &Graph,
    r: usize,
    options: &SolverOptions,
) -> core::result::Result<SpreadingCertificate, SolveError<SpreadingCertificate>> {
    primal_counted(graph, r, options).map(|(cert, _)| cert)
}

fn primal_counted(
    graph: &Graph,
    r: usize,
    options: &SolverOptions,
) -> core::result::Result<(SpreadingCertificate, usize), SolveError<SpreadingCertificate>> {
    let n = graph.n();
    check_size(n, r)?;
    let scale = 1.0 / (r * r) as f64;
    let mut x = VertexWeighting::uniform(n).values().to_vec();
    let mut hull = MinNormPoint::new();
    let mut budget = options.max_iterations;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut model_value = f64::INFINITY;
    let mut mode = SolveMode::Exact;
    loop {
        let (dist, _) = all_pairs(graph, &x);
        let choice = min_subset(&dist, n, r, options.exact_limit);
        mode = mode.join(choice.mode);
        let true_value = choice.sum * scale;
        if best.as_ref().is_none_or(|b| true_value > b.0) {
            best = Some((true_value, x.clone()));
        }
        let residual = model_value - true_value;
        if residual <= options.tol * true_value.min(1.0) {
            break;
        }
        if budget == 0 {
            let (_, w) = best.expect("one evaluation done");
            let best = certificate(graph, &w, r, options.exact_limit)?;
            return Err(SolveError::NotConverged { best, iterations: options.max_iterations, residual });
        }
        budget -= 1;
        let piece = evaluate_sets(graph, r, &[choice.set], &x).swap_remove(0).1;
        if hull.contains(&piece) {
            // the model is already tight here; only a heuristic oracle
            // revisits pieces
            break;
        }
        hull.push(piece);
        hull.solve(&mut budget);
        let p = hull.point();
        model_value = libm::sqrt(norm_sq(p));
        x = p.iter().map(|v| v / model_value).collect();
    }
    let (_, w) = best.expect("one evaluation done");
    let mut cert = certificate(graph, &w, r, options.exact_limit)?;
    cert.mode = cert.mode.join(mode);
    Ok((cert, options.max_iterations - budget))
}

fn certificate(graph: &Graph, w: &[f64], r: usize, exact_limit: u64) -> Result<SpreadingCertificate> {
    epsilon_r_with(graph, &VertexWeighting::new(w.to_vec())?, r, exact_limit)
}

/// Frank–Wolfe output: a subset distribution, a matching flow and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFlowSolution {
    pub mu: SubsetDistribution,
    pub flow: Flow,
    pub con: f64,
    /// `√con / r²`.
    pub dual_value: f64,
    /// `√(con − gap) / r²` from the last Frank–Wolfe gap. A valid lower bound
    /// on the optimum in exact mode only.
    pub lower_bound: f64,
    pub iterations: usize,
    pub mode: SolveMode,
}

struct Atom {
    set: Vec<Vertex>,
    paths: Vec<Vec<Vertex>>,
}

/// Minimizes `con(F)` over flows matching some distribution on `r`-subsets.
///
/// The linear oracle prices vertex `v` at `2·C_F(v)` (unit prices in the
/// first round), picks the subset minimizing the total price of shortest
/// routings between its pairs and routes along those paths. Iteration `t`
/// moves by `2/(t+2)`; the run stops when the Frank–Wolfe gap certifies
/// `√con` within relative `tol`.
pub fn dual_min_congestion(
    graph: &Graph,
    r: usize,
    options: &SolverOptions,
) -> core::result::Result<SubsetFlowSolution, SolveError<SubsetFlowSolution>> {
    let n = graph.n();
    check_size(n, r)?;
    if !graph.is_connected() {
        return Err(Error::Validation("subset flows need a connected host".into()).into());
    }
    let mut loads = vec![0.0; n];
    let mut atoms: Vec<Atom> = Vec::new();
    let mut index: BTreeMap<(Vec<Vertex>, Vec<Vec<Vertex>>), usize> = BTreeMap::new();
    let mut raw: Vec<f64> = Vec::new();
    let mut mode = SolveMode::Exact;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut t = 0;
    while t < options.max_iterations {
        let prices: Vec<f64> = if t == 0 { vec![1.0; n] } else { loads.iter().map(|c| 2.0 * c).collect() };
        let (dist, trees) = all_pairs(graph, &prices);
        let choice = min_subset(&dist, n, r, options.exact_limit);
        mode = mode.join(choice.mode);
        let mut paths = Vec::with_capacity(r * (r - 1) / 2);
        let mut atom_loads = vec![0.0; n];
        for (i, &u) in choice.set.iter().enumerate() {
            for &v in &choice.set[i + 1..] {
                let path = trees[u].path_to(v).expect("connected host");
                for &w in &path {
                    atom_loads[w] += 1.0;
                }
                paths.push(path);
            }
        }
        if t > 0 {
            let con = norm_sq(&loads);
            let linear = dot(&prices, &atom_loads);
            gap = 2.0 * con - linear;
            if gap <= 2.0 * options.tol * con {
                converged = true;
                break;
            }
        }
        let gamma = 2.0 / (t as f64 + 2.0);
        for (c, a) in loads.iter_mut().zip(&atom_loads) {
            *c = (1.0 - gamma) * *c + gamma * a;
        }
        // iterate weights: λ_a ∝ Σ (t + 1) over the rounds that picked a
        let key = (choice.set.clone(), paths.clone());
        let id = *index.entry(key).or_insert_with(|| {
            atoms.push(Atom { set: choice.set, paths });
            raw.push(0.0);
            atoms.len() - 1
        });
        raw[id] += t as f64 + 1.0;
        t += 1;
    }
    let solution = assemble(graph, r, &atoms, &raw, gap, t, mode)?;
    if converged {
        Ok(solution)
    } else {
        let residual = if solution.con > 0.0 { gap / (2.0 * solution.con) } else { gap };
        Err(SolveError::NotConverged { best: solution, iterations: t, residual })
    }
}

fn assemble(
    graph: &Graph,
    r: usize,
    atoms: &[Atom],
    raw: &[f64],
    gap: f64,
    iterations: usize,
    mode: SolveMode,
) -> Result<SubsetFlowSolution> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("dual solver needs at least one iteration".into()));
    }
    let total: f64 = raw.iter().sum();
    let mut support: BTreeMap<Vec<Vertex>, f64> = BTreeMap::new();
    let mut flow = Flow::new();
    for (atom, w) in atoms.iter().zip(raw) {
        let lambda = w / total;
        *support.entry(atom.set.clone()).or_insert(0.0) += lambda;
        for p in &atom.paths {
            flow.add(Path::from_vertices(p.clone()), lambda)?;
        }
    }
    // renormalize away rounding in Σλ
    let mass: f64 = support.values().sum();
    let mu = SubsetDistribution::new(support.into_iter().map(|(s, p)| (s, p / mass)).collect())?;
    let check = validate_mu_flow_with_tol(&flow, &mu, SOLUTION_FLOW_TOL);
    if !check.valid {
        return Err(Error::Internal(format!(
            "assembled flow deviates from μ by {} at {:?}",
            check.max_deviation, check.worst_pair
        )));
    }
    flow.validate(graph)?;
    let con = flow.congestion();
    let r2 = (r * r) as f64;
    let lower = if gap.is_finite() { libm::sqrt((con - gap).max(0.0)) / r2 } else { 0.0 };
    Ok(SubsetFlowSolution { mu, flow, con, dual_value: libm::sqrt(con) / r2, lower_bound: lower, iterations, mode })
}

/// Both solvers on one instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualityReport {
    pub r: usize,
    pub epsilon: f64,
    pub dual_value: f64,
    /// `|ε − dual| / max(dual, 1e−12)`.
    pub gap: f64,
    /// Supergradient steps plus Frank–Wolfe rounds.
    pub iterations: usize,
    pub mode: SolveMode,
}

impl DualityReport {
    pub fn summary(&self) -> String {
        format!(
            "r={} epsilon={:.6} dual={:.6} gap={:.3e} mode={}",
            self.r,
            self.epsilon,
            self.dual_value,
            self.gap,
            self.mode.name()
        )
    }
}

/// Runs [`primal_max_spread`] and [`dual_min_congestion`] and compares.
pub fn duality_gap(graph: &Graph, r: usize, options: &SolverOptions) -> Result<DualityReport> {
    let (primal, primal_steps) = primal_counted(graph, r, options).map_err(SolveError::into_error)?;
    let dual = dual_min_congestion(graph, r, options).map_err(SolveError::into_error)?;
    Ok(DualityReport {
        r,
        epsilon: primal.epsilon,
        dual_value: dual.dual_value,
        gap: (primal.epsilon - dual.dual_value).abs() / dual.dual_value.max(1e-12),
        iterations: primal_steps + dual.iterations,
        mode: primal.mode.join(dual.mode),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::subsets::for_each_combination;

    fn edge() -> Graph {
        generate(Family::Path, &[2], 0).unwrap()
    }

    #[test]
    fn epsilon_examples() {
        let p3 = generate(Family::Path, &[3], 0).unwrap();
        let c = epsilon_r(&p3, &VertexWeighting::uniform(3), 2).unwrap();
        assert!((c.epsilon - 1.0 / (2.0 * libm::sqrt(3.0))).abs() < 1e-12);
        assert_eq!(c.witness_set, vec![0, 1]);
        assert_eq!(c.mode, SolveMode::Exact);
        let e = epsilon_r(&edge(), &VertexWeighting::uniform(2), 2).unwrap();
        assert!((e.epsilon - libm::sqrt(2.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_validation() {
        let p3 = generate(Family::Path, &[3], 0).unwrap();
        assert!(epsilon_r(&p3, &VertexWeighting::new(vec![0.0; 3]).unwrap(), 2).is_err());
        assert!(epsilon_r(&p3, &VertexWeighting::uniform(3), 1).is_err());
        assert!(epsilon_r(&p3, &VertexWeighting::uniform(3), 4).is_err());
    }

    #[test]
    fn exact_oracle_matches_plain_enumeration() {
        let g = generate(Family::TriangulatedDisk, &[9], 4).unwrap();
        let w = VertexWeighting::new((0..9).map(|i| 1.0 + (i % 4) as f64).collect()).unwrap();
        let oracle = MetricOracle::new(&g, &w).unwrap();
        for r in 2..=5 {
            let mut best = (f64::INFINITY, Vec::new());
            for_each_combination(9, r, |s| {
                let v = subset_spread(&oracle, s);
                if v < best.0 {
                    best = (v, s.to_vec());
                }
            });
            let c = epsilon_r(&g, &w, r).unwrap();
            assert!((c.epsilon - best.0).abs() < 1e-12);
            assert_eq!(c.witness_set, best.1);
        }
    }

    #[test]
    fn heuristic_oracle_is_flagged_and_feasible() {
        let g = generate(Family::Grid, &[5], 0).unwrap();
        let w = VertexWeighting::uniform(25);
        let exact = epsilon_r(&g, &w, 3).unwrap();
        let heuristic = epsilon_r_with(&g, &w, 3, 10).unwrap();
        assert_eq!(heuristic.mode, SolveMode::Heuristic);
        assert!(heuristic.epsilon >= exact.epsilon - 1e-12);
        let oracle = MetricOracle::new(&g, &w).unwrap();
        assert!((subset_spread(&oracle, &heuristic.witness_set) - heuristic.epsilon).abs() < 1e-12);
    }

    #[test]
    fn primal_on_single_edge() {
        let cert = primal_max_spread(&edge(), 2, &SolverOptions::default()).unwrap();
        assert!((cert.epsilon - libm::sqrt(2.0) / 4.0).abs() < 1e-3);
        assert!((cert.weights.get(0) - cert.weights.get(1)).abs() < 1e-2);
    }

    #[test]
    fn dual_on_single_edge() {
        let sol = dual_min_congestion(&edge(), 2, &SolverOptions::default()).unwrap();
        assert_eq!(sol.con, 2.0);
        assert!((sol.dual_value - libm::sqrt(2.0) / 4.0).abs() < 1e-12);
        assert_eq!(sol.mu.support(), &[(vec![0, 1], 1.0)]);
    }

    #[test]
    fn complete4_gap() {
        let k4 = generate(Family::Complete, &[4], 0).unwrap();
        let report = duality_gap(&k4, 2, &SolverOptions::default()).unwrap();
        assert!(report.gap <= 1e-2, "{report:?}");
        assert!(report.epsilon <= report.dual_value + 1e-3);
    }

    #[test]
    fn primal_dominates_uniform() {
        let g = generate(Family::Path, &[5], 0).unwrap();
        for r in 2..=4 {
            let uniform = epsilon_r(&g, &VertexWeighting::uniform(5), r).unwrap();
            let best = primal_max_spread(&g, r, &SolverOptions::default()).unwrap();
            assert!(best.epsilon >= uniform.epsilon - 1e-12);
        }
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let g = generate(Family::Grid, &[3], 0).unwrap();
        let options = SolverOptions { max_iterations: 3, ..SolverOptions::default() };
        match dual_min_congestion(&g, 3, &options) {
            Err(SolveError::NotConverged { best, iterations, .. }) => {
                assert_eq!(iterations, 3);
                assert!(best.dual_value > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}

