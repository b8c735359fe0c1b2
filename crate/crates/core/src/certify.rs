//! Padded partitions and eigenvalue-bound certificates.
//!
//! A certificate is a list of `k` test vectors with pairwise separated
//! supports; the bound it carries is the largest of their Rayleigh quotients,
//! which dominates `λ_k` regardless of how the vectors were found. The
//! construction follows the bump-function argument:
//!
//! 1. `ε = ε_r(G, ω)` at `r = ⌊n/8k⌋`.
//! 2. Ball-carving partition of the `ω`-metric at diameter `Δ`, padding
//!    `β` measured.
//! 3. Padded cores `{x : pad(x) ≥ Δ/β}` of each cell, minus the heavy set
//!    `H = {ω ≥ ρ}` with `ρ = Δ/(2β)`, packed into `2k` sets `S_i`.
//! 4. `S̃_i = {x : dist_ω(x, S_i) < ρ}`; the `k` sets with smallest
//!    `W(S̃_i) = Σ_{u∈S̃_i} Σ_{v∼u} (ω(u) + ω(v))²` are kept.
//! 5. `f_i(x) = max(0, ρ − dist_ω(x, S_i))` off `H`, zero on `H`.
//!
//! With `Δ = ε/2` this is the textbook construction. At desk scale its
//! precondition `β²/ε² ≤ n/64` rarely holds, so by default a few multiples of
//! `ε/2` are tried and the smallest certified bound wins. Soundness never
//! depends on the scale: every candidate goes through
//! [`disjoint_support_bound`](crate::spectral::disjoint_support_bound).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duality::{epsilon_r_with, SolveMode, EXACT_SUBSET_LIMIT};
use crate::graph::{Graph, Vertex};
use crate::metric::{MetricOracle, VertexWeighting};
use crate::spectral::{disjoint_support_bound, rayleigh, RayleighQuotient, SupportBound};
use crate::{Error, Result};

/// Slack for floating-point comparisons in the invariant checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Partition of `V` into cells of `ω`-diameter at most `delta`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PaddedPartition {
    pub cells: Vec<Vec<Vertex>>,
    pub delta: f64,
    pub measured_beta: f64,
    pub seed: u64,
}

impl PaddedPartition {
    /// `cell_of[x]` is the index of `P(x)`. Fails unless the cells partition
    /// `0..n`.
    pub fn cell_index(&self, n: usize) -> Result<Vec<usize>> {
        cell_index(&self.cells, n)
    }
}

fn cell_index(cells: &[Vec<Vertex>], n: usize) -> Result<Vec<usize>> {
    let mut cell_of = vec![usize::MAX; n];
    for (i, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(Error::Validation(format!("cell {i} is empty")));
        }
        for &x in cell {
            if x >= n {
                return Err(Error::Validation(format!("cell {i} contains vertex {x} outside 0..{n}")));
            }
            if cell_of[x] != usize::MAX {
                return Err(Error::Validation(format!("vertex {x} lies in two cells")));
            }
            cell_of[x] = i;
        }
    }
    if let Some(x) = cell_of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::Validation(format!("vertex {x} is not covered")));
    }
    Ok(cell_of)
}

/// Random-order ball carving: each still unassigned vertex, visited in a
/// seeded random order, claims every unassigned vertex within a radius drawn
/// uniformly from `[Δ/4, Δ/2]`.
pub fn ball_partition(oracle: &MetricOracle, delta: f64, seed: u64) -> Result<PaddedPartition> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("diameter bound Δ = {delta} must be positive and finite")));
    }
    let n = oracle.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut assigned = vec![false; n];
    let mut cells = Vec::new();
    for &x in &order {
        if assigned[x] {
            continue;
        }
        let radius = rng.gen_range(delta / 4.0..=delta / 2.0);
        let cell: Vec<Vertex> = (0..n).filter(|&y| !assigned[y] && oracle.dist(x, y) <= radius).collect();
        for &y in &cell {
            assigned[y] = true;
        }
        cells.push(cell);
    }
    let mut partition = PaddedPartition { cells, delta, measured_beta: f64::INFINITY, seed };
    partition.measured_beta = measure_beta(oracle, &partition.cells, delta)?;
    Ok(partition)
}

/// `pad(x) = dist_ω(x, V ∖ P(x))`, `+∞` when `P(x) = V`.
pub fn pads(oracle: &MetricOracle, cells: &[Vec<Vertex>]) -> Result<Vec<f64>> {
    let n = oracle.n();
    let cell_of = cell_index(cells, n)?;
    Ok((0..n)
        .map(|x| (0..n).filter(|&y| cell_of[y] != cell_of[x]).map(|y| oracle.dist(x, y)).fold(f64::INFINITY, f64::min))
        .collect())
}

/// `β(P, Δ)`: the infimum of `β ≥ 1` such that at least `⌈n/2⌉` vertices
/// have `B(x, Δ/β) ⊆ P(x)`, i.e. `max(1, Δ/p*)` where `p*` is the
/// `⌈n/2⌉`-th largest pad. At the infimum those vertices satisfy
/// `pad(x) ≥ Δ/β`. Returns `+∞` when `p* = 0`.
pub fn measure_beta(oracle: &MetricOracle, cells: &[Vec<Vertex>], delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("diameter bound Δ = {delta} must be positive")));
    }
    for (i, cell) in cells.iter().enumerate() {
        let diam = oracle.set_diameter(cell);
        if diam > delta * (1.0 + CHECK_TOL) {
            return Err(Error::Validation(format!("cell {i} has diameter {diam} > Δ = {delta}")));
        }
    }
    let mut pad = pads(oracle, cells)?;
    let n = pad.len();
    if n == 0 {
        return Ok(1.0);
    }
    pad.sort_by(|a, b| b.total_cmp(a));
    let p_star = pad[n.div_ceil(2) - 1];
    Ok(if p_star == 0.0 {
        f64::INFINITY
    } else if p_star.is_infinite() {
        1.0
    } else {
        (delta / p_star).max(1.0)
    })
}

/// Construction settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertifyOptions {
    /// Multiples `s` of `ε/2` tried as the diameter bound `Δ`.
    pub scales: Vec<f64>,
    /// Fail when `β²/ε² > n/64` instead of recording a flag.
    pub require_precondition: bool,
    /// Cut cores whose light part exceeds the window down to a compact
    /// subset.
    pub truncate_cores: bool,
    /// Exact-enumeration limit for `ε_r`.
    pub exact_limit: u64,
    /// Keep doubling past the last scale until the partition is one cell
    /// when no scale produced a certificate.
    pub extend_scales: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            scales: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            require_precondition: false,
            truncate_cores: true,
            exact_limit: EXACT_SUBSET_LIMIT,
            extend_scales: true,
        }
    }
}

impl CertifyOptions {
    /// Only `Δ = ε/2`, the precondition enforced and no truncation.
    pub fn strict() -> Self {
        Self {
            scales: vec![1.0],
            require_precondition: true,
            truncate_cores: false,
            extend_scales: false,
            ..Self::default()
        }
    }
}

/// Noteworthy facts about how a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CertificateFlag {
    /// Sizes only meet the widened window `[n/16k, n/2k]`.
    Relaxed,
    /// `β²/ε² > n/64` at the winning scale.
    PreconditionViolated,
    /// `ε` came from the greedy subset oracle.
    HeuristicEpsilon,
    /// Winning `Δ` is larger than `ε/2`.
    Scaled,
    /// Some core was cut to fit the window.
    Truncated,
    /// Cores were split into separated chunks.
    Split,
}

impl CertificateFlag {
    pub fn name(self) -> &'static str {
        match self {
            CertificateFlag::Relaxed => "relaxed",
            CertificateFlag::PreconditionViolated => "precondition_violated",
            CertificateFlag::HeuristicEpsilon => "heuristic_epsilon",
            CertificateFlag::Scaled => "scaled",
            CertificateFlag::Truncated => "truncated",
            CertificateFlag::Split => "split",
        }
    }
}

/// One of the `2k` packed sets.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateSet {
    /// `S_i ∖ H`.
    pub core: Vec<Vertex>,
    /// `S̃_i`.
    pub padded: Vec<Vertex>,
    /// `W(S̃_i)`.
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCertificate {
    pub k: usize,
    pub n: usize,
    pub r: usize,
    pub epsilon: f64,
    pub epsilon_mode: SolveMode,
    pub beta: f64,
    /// `Δ = scale·ε/2`.
    pub delta: f64,
    pub scale: f64,
    /// Bump height `Δ/(2β)`.
    pub rho: f64,
    pub seed: u64,
    pub weights: VertexWeighting,
    pub partition: PaddedPartition,
    pub heavy_set: Vec<Vertex>,
    /// All `2k` packed sets.
    pub candidates: Vec<CandidateSet>,
    /// Indices into `candidates` of the `k` sets used, by increasing `W`.
    pub selected: Vec<usize>,
    pub vectors: Vec<Vec<f64>>,
    pub quotients: Vec<RayleighQuotient>,
    pub certified_bound: f64,
    pub exact_lambda_k: Option<f64>,
    pub flags: Vec<CertificateFlag>,
}

impl BoundCertificate {
    /// `S_i ∖ H` of the selected sets.
    pub fn sets(&self) -> Vec<&[Vertex]> {
        self.selected.iter().map(|&i| self.candidates[i].core.as_slice()).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.quotients.iter().map(|q| q.ratio).collect()
    }

    pub fn has_flag(&self, flag: CertificateFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Why one scale produced no certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleAttempt {
    pub scale: f64,
    pub beta: f64,
    pub reason: String,
}

/// Construction failure. Every variant still admits the trivial bound
/// `λ_k ≤ 2·d_max`, see [`CertifyFailure::fallback_bound`].
#[derive(Debug, Clone, PartialEq)]
pub enum CertifyFailure {
    Invalid(Error),
    /// `⌊n/8k⌋ < 2`.
    TooSmall { n: usize, k: usize, trivial_bound: f64 },
    /// Strict mode only.
    PreconditionViolated { beta: f64, epsilon: f64, n: usize, trivial_bound: f64 },
    /// Packing failed at every scale; lists the light core sizes of the last
    /// attempt.
    MergeInfeasible { cell_sizes: Vec<usize>, attempts: Vec<ScaleAttempt>, trivial_bound: f64 },
    /// Some scale packed, but no candidate passed its checks.
    NoCertificate { attempts: Vec<ScaleAttempt>, trivial_bound: f64 },
}

impl CertifyFailure {
    pub fn fallback_bound(&self) -> Option<f64> {
        match self {
            CertifyFailure::Invalid(_) => None,
            CertifyFailure::TooSmall { trivial_bound, .. }
            | CertifyFailure::PreconditionViolated { trivial_bound, .. }
            | CertifyFailure::MergeInfeasible { trivial_bound, .. }
            | CertifyFailure::NoCertificate { trivial_bound, .. } => Some(*trivial_bound),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CertifyFailure::Invalid(e) => format!("{e}"),
            CertifyFailure::TooSmall { n, k, .. } => format!("floor(n/8k) < 2 for n = {n}, k = {k}"),
            CertifyFailure::PreconditionViolated { beta, epsilon, n, .. } => {
                format!("padding precondition violated: beta = {beta}, epsilon = {epsilon}, n = {n}")
            }
            CertifyFailure::MergeInfeasible { cell_sizes, .. } => {
                format!("no packing into 2k sets meets the size window; light core sizes {cell_sizes:?}")
            }
            CertifyFailure::NoCertificate { attempts, .. } => {
                let reasons: Vec<String> =
                    attempts.iter().map(|a| format!("scale {}: {}", a.scale, a.reason)).collect();
                format!("no scale produced a certificate ({})", reasons.join("; "))
            }
        }
    }
}

impl From<Error> for CertifyFailure {
    fn from(e: Error) -> Self {
        CertifyFailure::Invalid(e)
    }
}

enum Attempt {
    Certificate(BoundCertificate),
    Merge(Vec<usize>),
    Rejected(String),
}

/// Builds a certificate for `λ_k` from a normalized weighting.
///
/// `seeds` are tried per scale and the partition with the smallest measured
/// `β` is used. Returns the certificate with the smallest bound over
/// `options.scales`, extended by doubling when `options.extend_scales` is
/// set and nothing was certified yet.
pub fn build_certificate(
    graph: &Graph,
    weights: &VertexWeighting,
    k: usize,
    seeds: &[u64],
    options: &CertifyOptions,
) -> core::result::Result<BoundCertificate, CertifyFailure> {
    let n = graph.n();
    let trivial_bound = 2.0 * graph.d_max() as f64;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k = {k} outside [1, {n}]")).into());
    }
    if seeds.is_empty() || options.scales.is_empty() {
        return Err(Error::InvalidParameter("need at least one seed and one scale".into()).into());
    }
    if weights.len() != n || !weights.is_normalized() {
        return Err(Error::Validation("weighting must have one entry per vertex and Σω² = 1".into()).into());
    }
    let r = n / (8 * k);
    if r < 2 {
        return Err(CertifyFailure::TooSmall { n, k, trivial_bound });
    }
    let spread = epsilon_r_with(graph, weights, r, options.exact_limit)?;
    let epsilon = spread.epsilon;
    let oracle = MetricOracle::new(graph, weights)?;
    let context = Context { graph, oracle: &oracle, weights, k, r, epsilon, epsilon_mode: spread.mode };

    let mut best: Option<BoundCertificate> = None;
    let mut attempts = Vec::new();
    let mut last_sizes = None;
    let mut packed_somewhere = false;
    let mut queue: Vec<f64> = options.scales.clone();
    let mut index = 0;
    let mut all_single = true;
    while index < queue.len() {
        let scale = queue[index];
        index += 1;
        let delta = scale * epsilon / 2.0;
        let mut partitions = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            partitions.push(ball_partition(&oracle, delta, seed)?);
        }
        let min_beta = partitions.iter().map(|p| p.measured_beta).fold(f64::INFINITY, f64::min);
        if scale == 1.0 && options.require_precondition && min_beta * min_beta / (epsilon * epsilon) > n as f64 / 64.0 {
            return Err(CertifyFailure::PreconditionViolated { beta: min_beta, epsilon, n, trivial_bound });
        }
        let mut certified_here = false;
        for partition in partitions {
            let beta = partition.measured_beta;
            if !beta.is_finite() {
                attempts.push(ScaleAttempt { scale, beta, reason: "no padding (β = ∞)".into() });
                continue;
            }
            let precondition = beta * beta / (epsilon * epsilon) <= n as f64 / 64.0;
            let single_cell = partition.cells.len() == 1;
            match context.attempt(partition, scale, precondition, options.truncate_cores)? {
                Attempt::Certificate(cert) => {
                    packed_somewhere = true;
                    certified_here = true;
                    if best.as_ref().is_none_or(|b| cert.certified_bound < b.certified_bound) {
                        best = Some(cert);
                    }
                }
                Attempt::Merge(sizes) => {
                    attempts.push(ScaleAttempt { scale, beta, reason: "size window infeasible".into() });
                    last_sizes = Some(sizes);
                }
                Attempt::Rejected(reason) => {
                    packed_somewhere = true;
                    attempts.push(ScaleAttempt { scale, beta, reason });
                }
            }
            all_single &= single_cell;
        }
        if options.extend_scales && index == queue.len() && best.is_none() && !certified_here && !all_single {
            queue.push(2.0 * scale);
        }
        all_single = true;
    }
    match best {
        Some(cert) => Ok(cert),
        None if !packed_somewhere && last_sizes.is_some() => Err(CertifyFailure::MergeInfeasible {
            cell_sizes: last_sizes.unwrap_or_default(),
            attempts,
            trivial_bound,
        }),
        None => Err(CertifyFailure::NoCertificate { attempts, trivial_bound }),
    }
}

struct Context<'a> {
    graph: &'a Graph,
    oracle: &'a MetricOracle,
    weights: &'a VertexWeighting,
    k: usize,
    r: usize,
    epsilon: f64,
    epsilon_mode: SolveMode,
}

impl Context<'_> {
    fn attempt(&self, partition: PaddedPartition, scale: f64, precondition: bool, truncate: bool) -> Result<Attempt> {
        let n = self.graph.n();
        let k = self.k;
        let beta = partition.measured_beta;
        let delta = partition.delta;
        let rho = delta / (2.0 * beta);
        let heavy: Vec<Vertex> = (0..n).filter(|&v| self.weights.get(v) >= rho).collect();
        let is_heavy = |v: Vertex| self.weights.get(v) >= rho;
        let pad = pads(self.oracle, &partition.cells)?;
        let threshold = delta / beta;

        // light padded cores, one piece per cell
        let mut truncated = false;
        let hi = n as f64 / (4.0 * k as f64);
        let hi_relaxed = n as f64 / (2.0 * k as f64);
        let mut pieces: Vec<Vec<Vertex>> = Vec::new();
        for cell in &partition.cells {
            let core: Vec<Vertex> =
                cell.iter().copied().filter(|&x| pad[x] >= threshold && !is_heavy(x)).collect();
            if core.is_empty() {
                continue;
            }
            pieces.push(core);
        }
        let sizes: Vec<usize> = pieces.iter().map(Vec::len).collect();

        let separation = self.epsilon / (2.0 * beta);
        let mut relaxed = false;
        let mut split = false;
        let mut bins = None;
        let windows = [(n as f64 / (8.0 * k as f64), hi, false), (n as f64 / (16.0 * k as f64), hi_relaxed, true)];
        'windows: for (lo, hi, is_relaxed) in windows {
            let mut items = pieces.clone();
            let mut cut = false;
            if truncate {
                for item in items.iter_mut() {
                    if item.len() as f64 > hi {
                        *item = self.compact_subset(item, &pad, libm::floor(hi) as usize);
                        cut = true;
                    }
                }
            }
            if let Some(b) = pack(&items, 2 * k, lo, hi) {
                bins = Some(b);
                relaxed = is_relaxed;
                truncated = cut;
                break;
            }
            if truncate {
                // chunks whose ρ-neighborhoods stay `separation` apart
                let exclusion = separation + 2.0 * rho;
                let chunk = libm::ceil(lo) as usize;
                let chunks: Vec<Vec<Vertex>> =
                    pieces.iter().flat_map(|core| self.split_core(core, &pad, chunk, exclusion)).collect();
                if let Some(b) = pack(&chunks, 2 * k, lo, hi) {
                    bins = Some(b);
                    relaxed = is_relaxed;
                    split = true;
                    break 'windows;
                }
            }
        }
        let Some(bins) = bins else {
            return Ok(Attempt::Merge(sizes));
        };

        let candidates: Vec<CandidateSet> = bins
            .into_iter()
            .map(|mut core| {
                core.sort_unstable();
                let padded: Vec<Vertex> = (0..n).filter(|&x| self.oracle.dist_to_set(x, &core) < rho).collect();
                let w = w_value(self.graph, self.weights, &padded);
                CandidateSet { core, padded, w }
            })
            .collect();

        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                let d = self.oracle.set_distance(&candidates[i].padded, &candidates[j].padded);
                if d < separation * (1.0 - CHECK_TOL) {
                    return Ok(Attempt::Rejected(format!(
                        "padded sets {i} and {j} at distance {d} < ε/(2β) = {separation}"
                    )));
                }
            }
        }

        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| candidates[a].w.total_cmp(&candidates[b].w).then(a.cmp(&b)));
        let selected: Vec<usize> = order.into_iter().take(k).collect();
        let vectors: Vec<Vec<f64>> = selected
            .iter()
            .map(|&i| {
                let core = &candidates[i].core;
                (0..n)
                    .map(|x| if is_heavy(x) { 0.0 } else { (rho - self.oracle.dist_to_set(x, core)).max(0.0) })
                    .collect()
            })
            .collect();
        let bound = match disjoint_support_bound(self.graph, &vectors)? {
            SupportBound::Certified { bound, .. } => bound,
            SupportBound::Rejected { first, second, witness } => {
                return Ok(Attempt::Rejected(format!(
                    "supports of vectors {first} and {second} touch at vertex {witness}"
                )));
            }
        };
        let quotients = vectors.iter().map(|f| rayleigh(self.graph, f)).collect::<Result<Vec<_>>>()?;

        let mut flags = Vec::new();
        if relaxed {
            flags.push(CertificateFlag::Relaxed);
        }
        if !precondition {
            flags.push(CertificateFlag::PreconditionViolated);
        }
        if self.epsilon_mode == SolveMode::Heuristic {
            flags.push(CertificateFlag::HeuristicEpsilon);
        }
        if scale != 1.0 {
            flags.push(CertificateFlag::Scaled);
        }
        if truncated {
            flags.push(CertificateFlag::Truncated);
        }
        if split {
            flags.push(CertificateFlag::Split);
        }
        Ok(Attempt::Certificate(BoundCertificate {
            k,
            n,
            r: self.r,
            epsilon: self.epsilon,
            epsilon_mode: self.epsilon_mode,
            beta,
            delta,
            scale,
            rho,
            seed: partition.seed,
            weights: self.weights.clone(),
            partition,
            heavy_set: heavy,
            candidates,
            selected,
            vectors,
            quotients,
            certified_bound: bound,
            exact_lambda_k: None,
            flags,
        }))
    }

    /// Greedy chunks of `size` vertices around the best padded remaining
    /// vertex; everything within `exclusion` of a chunk is dropped.
    fn split_core(&self, core: &[Vertex], pad: &[f64], size: usize, exclusion: f64) -> Vec<Vec<Vertex>> {
        let mut remaining = core.to_vec();
        let mut chunks = Vec::new();
        while !remaining.is_empty() {
            let chunk = self.compact_subset(&remaining, pad, size);
            remaining.retain(|&x| self.oracle.dist_to_set(x, &chunk) >= exclusion);
            chunks.push(chunk);
        }
        chunks
    }

    /// The `size` vertices of `core` closest to its best padded vertex.
    fn compact_subset(&self, core: &[Vertex], pad: &[f64], size: usize) -> Vec<Vertex> {
        let center = *core
            .iter()
            .max_by(|&&a, &&b| pad[a].total_cmp(&pad[b]).then(b.cmp(&a)))
            .expect("core nonempty");
        let mut by_distance: Vec<Vertex> = core.to_vec();
        by_distance.sort_by(|&a, &b| self.oracle.dist(center, a).total_cmp(&self.oracle.dist(center, b)).then(a.cmp(&b)));
        by_distance.truncate(size.max(1));
        by_distance.sort_unstable();
        by_distance
    }
}

/// First-fit decreasing into `bins` bins of capacity `hi`. A bin accepts new
/// items first while it is below `lo`; leftovers go into any bin with room.
/// Succeeds when every bin ends with size in `[lo, hi]`.
fn pack(items: &[Vec<Vertex>], bins: usize, lo: f64, hi: f64) -> Option<Vec<Vec<Vertex>>> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].len().cmp(&items[a].len()).then(a.cmp(&b)));
    let mut content: Vec<Vec<Vertex>> = vec![Vec::new(); bins];
    let fits = |bin: &Vec<Vertex>, item: &Vec<Vertex>| (bin.len() + item.len()) as f64 <= hi;
    for &i in &order {
        let item = &items[i];
        let target = content
            .iter()
            .position(|b| (b.len() as f64) < lo && fits(b, item))
            .or_else(|| content.iter().position(|b| fits(b, item)));
        if let Some(t) = target {
            content[t].extend_from_slice(item);
        }
    }
    content.iter().all(|b| (b.len() as f64) >= lo && (b.len() as f64) <= hi).then_some(content)
}

/// `W(S̃) = Σ_{u∈S̃} Σ_{v∼u} (ω(u) + ω(v))²`.
pub fn w_value(graph: &Graph, weights: &VertexWeighting, set: &[Vertex]) -> f64 {
    set.iter()
        .map(|&u| {
            graph
                .neighbors(u)
                .iter()
                .map(|&v| {
                    let s = weights.get(u) + weights.get(v);
                    s * s
                })
                .sum::<f64>()
        })
        .sum()
}

/// One itemized verification result.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }
}

/// Names of the checks run by [`verify_certificate`].
pub const CHECK_NAMES: [&str; 11] = [
    "shape",
    "supports_disjoint",
    "vanishes_on_heavy",
    "plateau_and_support",
    "energy_le_w",
    "norm_ge_plateau",
    "ratios_match",
    "w_sum_le_4dmax",
    "padded_separation",
    "heavy_count",
    "exact_lambda_le_bound",
];

/// Re-derives every claim of a certificate from the graph and the stored
/// weighting. `exact_lambda_k` (or the certificate's own value) enables the
/// final comparison.
pub fn verify_certificate(graph: &Graph, cert: &BoundCertificate, exact_lambda_k: Option<f64>) -> VerificationReport {
    let mut report = VerificationReport { checks: Vec::new() };
    let n = graph.n();
    let shape_ok = cert.n == n
        && cert.weights.len() == n
        && cert.vectors.len() == cert.k
        && cert.selected.len() == cert.k
        && cert.quotients.len() == cert.k
        && cert.selected.iter().all(|&i| i < cert.candidates.len())
        && cert.vectors.iter().all(|f| f.len() == n);
    report.push("shape", shape_ok, format!("k = {}, n = {}", cert.k, n));
    if !shape_ok {
        return report;
    }
    let oracle = match MetricOracle::new(graph, &cert.weights) {
        Ok(o) => o,
        Err(e) => {
            report.push("shape", false, format!("{e}"));
            return report;
        }
    };
    let tol = |x: f64| CHECK_TOL * x.abs().max(1.0);

    // supp(f_i) ∩ N(supp(f_j)) = ∅
    let supports: Vec<Vec<Vertex>> = cert.vectors.iter().map(|f| (0..n).filter(|&x| f[x] != 0.0).collect()).collect();
    let mut touching = None;
    'outer: for i in 0..cert.k {
        let mut near = vec![false; n];
        for x in graph.neighborhood(&supports[i]) {
            near[x] = true;
        }
        for (j, s) in supports.iter().enumerate() {
            if j != i {
                if let Some(&x) = s.iter().find(|&&x| near[x]) {
                    touching = Some((i, j, x));
                    break 'outer;
                }
            }
        }
    }
    report.push(
        "supports_disjoint",
        touching.is_none(),
        touching.map_or_else(|| "pairwise separated".into(), |(i, j, x)| format!("f{i} and f{j} meet at {x}")),
    );

    let rho = cert.rho;
    let heavy: Vec<Vertex> = (0..n).filter(|&v| cert.weights.get(v) >= rho).collect();
    let on_heavy = cert.vectors.iter().enumerate().find_map(|(i, f)| heavy.iter().find(|&&h| f[h] != 0.0).map(|&h| (i, h)));
    report.push(
        "vanishes_on_heavy",
        on_heavy.is_none() && heavy == cert.heavy_set,
        on_heavy.map_or_else(
            || format!("{} heavy vertices", heavy.len()),
            |(i, h)| format!("f{i}({h}) = {} on heavy vertex", cert.vectors[i][h]),
        ),
    );

    let mut plateau_issue = None;
    for (slot, &ci) in cert.selected.iter().enumerate() {
        let cand = &cert.candidates[ci];
        let f = &cert.vectors[slot];
        for x in 0..n {
            let d = oracle.dist_to_set(x, &cand.core);
            let expected = if cert.weights.get(x) >= rho { 0.0 } else { (rho - d).max(0.0) };
            if (f[x] - expected).abs() > tol(rho) || (d >= rho && f[x] != 0.0) {
                plateau_issue = Some((slot, x));
                break;
            }
        }
        if cand.core.iter().any(|&x| cert.weights.get(x) < rho && (f[x] - rho).abs() > tol(rho)) {
            plateau_issue = plateau_issue.or(Some((slot, usize::MAX)));
        }
    }
    report.push(
        "plateau_and_support",
        plateau_issue.is_none(),
        plateau_issue.map_or_else(|| format!("bump height {rho}"), |(i, x)| format!("f{i} wrong at vertex {x}")),
    );

    let w_of: Vec<f64> = cert.candidates.iter().map(|c| w_value(graph, &cert.weights, &c.padded)).collect();
    let mut energy_issue = None;
    let mut norm_issue = None;
    let mut ratio_issue = None;
    let mut recomputed_bound = 0.0f64;
    for (slot, &ci) in cert.selected.iter().enumerate() {
        let f = &cert.vectors[slot];
        let q = match rayleigh(graph, f) {
            Ok(q) => q,
            Err(_) => {
                ratio_issue = Some(slot);
                continue;
            }
        };
        recomputed_bound = recomputed_bound.max(q.ratio);
        if q.energy > w_of[ci] + tol(w_of[ci]) {
            energy_issue = Some((slot, q.energy, w_of[ci]));
        }
        let light_core = cert.candidates[ci].core.iter().filter(|&&x| cert.weights.get(x) < rho).count();
        let floor = rho * rho * light_core as f64;
        if q.norm_sq < floor - tol(floor) {
            norm_issue = Some((slot, q.norm_sq, floor));
        }
        if (q.ratio - cert.quotients[slot].ratio).abs() > tol(q.ratio) {
            ratio_issue = Some(slot);
        }
    }
    report.push(
        "energy_le_w",
        energy_issue.is_none(),
        energy_issue.map_or_else(|| "every energy within W".into(), |(i, e, w)| format!("f{i}: energy {e} > W {w}")),
    );
    report.push(
        "norm_ge_plateau",
        norm_issue.is_none(),
        norm_issue.map_or_else(|| "every norm above ρ²|S∖H|".into(), |(i, m, f)| format!("f{i}: norm {m} < {f}")),
    );
    let bound_ok = (recomputed_bound - cert.certified_bound).abs() <= tol(recomputed_bound);
    report.push(
        "ratios_match",
        ratio_issue.is_none() && bound_ok,
        format!("recomputed max ratio {recomputed_bound}, stored {}", cert.certified_bound),
    );

    let padded_disjoint = {
        let mut seen = vec![false; n];
        cert.candidates.iter().flat_map(|c| c.padded.iter()).all(|&x| !core::mem::replace(&mut seen[x], true))
    };
    let w_sum: f64 = w_of.iter().sum();
    let w_cap = 4.0 * graph.d_max() as f64 * cert.weights.sum_sq();
    report.push(
        "w_sum_le_4dmax",
        padded_disjoint && w_sum <= w_cap + tol(w_cap),
        format!("ΣW = {w_sum}, 4·d_max·Σω² = {w_cap}, padded sets disjoint: {padded_disjoint}"),
    );

    let separation = cert.epsilon / (2.0 * cert.beta);
    let mut closest = f64::INFINITY;
    for i in 0..cert.candidates.len() {
        for j in i + 1..cert.candidates.len() {
            closest = closest.min(oracle.set_distance(&cert.candidates[i].padded, &cert.candidates[j].padded));
        }
    }
    report.push(
        "padded_separation",
        closest >= separation * (1.0 - CHECK_TOL),
        format!("min distance {closest}, required ε/(2β) = {separation}"),
    );

    let heavy_cap = 16.0 * cert.beta * cert.beta / (cert.epsilon * cert.epsilon);
    report.push(
        "heavy_count",
        heavy.len() as f64 <= heavy_cap * (1.0 + CHECK_TOL),
        format!("|H| = {}, 16β²/ε² = {heavy_cap}", heavy.len()),
    );

    match exact_lambda_k.or(cert.exact_lambda_k) {
        Some(lambda) => report.push(
            "exact_lambda_le_bound",
            lambda <= cert.certified_bound,
            format!("λ_k = {lambda}, bound = {}", cert.certified_bound),
        ),
        None => report.push("exact_lambda_le_bound", true, "no exact spectrum supplied".into()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};
    use crate::spectral::laplacian_spectrum;

    fn uniform_oracle(g: &Graph) -> MetricOracle {
        MetricOracle::new(g, &VertexWeighting::uniform(g.n())).unwrap()
    }

    #[test]
    fn large_delta_keeps_diameters() {
        let g = generate(Family::Grid, &[6], 0).unwrap();
        let o = uniform_oracle(&g);
        let diam = o.diameter();
        let mut single = false;
        for seed in 0..40 {
            let p = ball_partition(&o, 2.0 * diam, seed).unwrap();
            assert!(p.cells.iter().all(|c| o.set_diameter(c) <= 2.0 * diam));
            single |= p.cells.len() == 1;
        }
        assert!(single);
    }

    #[test]
    fn tiny_delta_gives_singletons() {
        let g = generate(Family::Path, &[7], 0).unwrap();
        let o = uniform_oracle(&g);
        let p = ball_partition(&o, 0.5 / libm::sqrt(7.0), 3).unwrap();
        assert_eq!(p.cells.len(), 7);
        assert!(ball_partition(&o, 0.0, 0).is_err());
    }

    #[test]
    fn beta_examples() {
        let g = generate(Family::Grid, &[4], 0).unwrap();
        let o = uniform_oracle(&g);
        assert_eq!(measure_beta(&o, &[(0..16).collect()], 10.0).unwrap(), 1.0);

        let zero = MetricOracle::new(&g, &VertexWeighting::new(vec![0.0; 16]).unwrap()).unwrap();
        let singletons: Vec<Vec<Vertex>> = (0..16).map(|v| vec![v]).collect();
        assert_eq!(measure_beta(&zero, &singletons, 1.0).unwrap(), f64::INFINITY);

        // 2×2 blocks of grid(4): the four grid corners are 3 steps from the
        // next block, every other vertex 2 steps
        let step = 0.25;
        let blocks: Vec<Vec<Vertex>> = [(0, 0), (0, 2), (2, 0), (2, 2)]
            .iter()
            .map(|&(r, c)| vec![r * 4 + c, r * 4 + c + 1, (r + 1) * 4 + c, (r + 1) * 4 + c + 1])
            .collect();
        let delta = 3.0 * step;
        let pad = pads(&o, &blocks).unwrap();
        for (v, p) in pad.iter().enumerate() {
            let expected = if [0, 3, 12, 15].contains(&v) { 3.0 } else { 2.0 } * step;
            assert!((p - expected).abs() < 1e-12);
        }
        assert!((measure_beta(&o, &blocks, delta).unwrap() - 1.5).abs() < 1e-12);
        // a 4-vertex cell has diameter 3 steps, so Δ below that is rejected
        assert!(measure_beta(&o, &blocks, 2.0 * step).is_err());
    }

    #[test]
    fn packing_respects_window() {
        let items: Vec<Vec<Vertex>> = vec![vec![0, 1, 2], vec![3, 4], vec![5, 6], vec![7], vec![8]];
        let bins = pack(&items, 3, 2.0, 4.0).unwrap();
        assert!(bins.iter().all(|b| b.len() >= 2 && b.len() <= 4));
        assert!(pack(&items, 5, 2.0, 4.0).is_none());
    }

    #[test]
    fn too_small_reports_trivial_bound() {
        let g = generate(Family::Grid, &[4], 0).unwrap();
        let err = build_certificate(&g, &VertexWeighting::uniform(16), 2, &[0], &CertifyOptions::default()).unwrap_err();
        assert_eq!(err.fallback_bound(), Some(8.0));
        assert!(matches!(err, CertifyFailure::TooSmall { .. }));
    }

    #[test]
    fn certificate_on_grid_is_sound_and_verifies() {
        let g = generate(Family::Grid, &[14], 0).unwrap();
        let spectrum = laplacian_spectrum(&g, false).unwrap();
        for k in 1..=3 {
            let cert = build_certificate(&g, &VertexWeighting::uniform(196), k, &[0, 1, 2, 3], &CertifyOptions::default())
                .unwrap();
            let lambda = spectrum.lambda(k).unwrap();
            assert!(lambda <= cert.certified_bound);
            let report = verify_certificate(&g, &cert, Some(lambda));
            assert!(report.passed(), "{:?}", report.failures());
            for (slot, &i) in cert.selected.iter().enumerate() {
                for &x in &cert.candidates[i].core {
                    assert_eq!(cert.vectors[slot][x], cert.rho);
                }
            }
        }
    }

    #[test]
    fn perturbed_vector_fails_heavy_check() {
        let g = generate(Family::Grid, &[10], 0).unwrap();
        let w: Vec<f64> = (0..100).map(|v| if v == 55 { 5.0 } else { 1.0 }).collect();
        let w = VertexWeighting::new(w).unwrap().normalized().unwrap();
        let mut cert = build_certificate(&g, &w, 1, &[0, 1, 2], &CertifyOptions::default()).unwrap();
        assert!(cert.heavy_set.contains(&55));
        cert.vectors[0][55] = cert.rho;
        let report = verify_certificate(&g, &cert, None);
        assert!(!report.check("vanishes_on_heavy").unwrap().passed);
    }
}
