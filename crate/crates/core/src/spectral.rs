//! Dense symmetric eigensolver, Rayleigh quotients and the disjoint-support
//! eigenvalue bound.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Graph, Vertex};
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Inputs whose `|m_ij - m_ji|` exceeds this are rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Entries with `|f(x)| ≤ SUPPORT_EPS` are treated as exact zeros.
pub const SUPPORT_EPS: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order, eigenvectors (as matrix columns, same
/// order) when requested.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub eigenvectors: Option<DenseMatrix>,
}

impl Spectrum {
    /// `λ_k` with 1-based `k`, as in `λ_1 = 0` for a connected graph.
    pub fn lambda(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.eigenvalues.get(i)).copied()
    }

    pub fn eigenvector(&self, index: usize) -> Option<Vec<f64>> {
        self.eigenvectors.as_ref().map(|m| m.column(index))
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Uses the threshold strategy: during the first three sweeps only
/// off-diagonal entries above `0.2·S/n²` are rotated (`S` the off-diagonal
/// absolute sum); from the fifth sweep on, entries that are negligible
/// against both diagonal entries are zeroed outright.
pub fn eig_symmetric(matrix: &DenseMatrix, with_vectors: bool) -> Result<Spectrum> {
    if !matrix.is_square() {
        return Err(Error::Validation(format!(
            "matrix is {}x{}, expected square",
            matrix.rows(),
            matrix.cols()
        )));
    }
    let asym = matrix.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Validation(format!("matrix is not symmetric (max |a_ij - a_ji| = {asym:e})")));
    }
    let n = matrix.rows();
    let mut a = matrix.clone();
    let mut v = with_vectors.then(|| DenseMatrix::identity(n));
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = n <= 1;
    for sweep in 1..=MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a.get(p, q).abs()).sum();
        if off == 0.0 {
            converged = true;
            break;
        }
        let threshold = if sweep < 4 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set(p, q, 0.0);
                    continue;
                }
                if apq.abs() <= threshold {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + libm::sqrt(1.0 + theta * theta));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a.set(p, q, 0.0);
                let data = a.as_mut_slice();
                for j in 0..p {
                    rotate(data, j * n + p, j * n + q, s, tau);
                }
                for j in p + 1..q {
                    rotate(data, p * n + j, j * n + q, s, tau);
                }
                for j in q + 1..n {
                    rotate(data, p * n + j, q * n + j, s, tau);
                }
                if let Some(v) = v.as_mut() {
                    let data = v.as_mut_slice();
                    for j in 0..n {
                        rotate(data, j * n + p, j * n + q, s, tau);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        return Err(Error::Validation(format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = v.map(|v| {
        let mut sorted = DenseMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                sorted.set(row, col, v.get(row, src));
            }
        }
        sorted
    });
    Ok(Spectrum { eigenvalues, eigenvectors })
}

#[inline]
fn rotate(data: &mut [f64], ij: usize, kl: usize, s: f64, tau: f64) {
    let g = data[ij];
    let h = data[kl];
    data[ij] = g - s * (h + g * tau);
    data[kl] = h + s * (g - h * tau);
}

/// Spectrum of the graph Laplacian.
pub fn laplacian_spectrum(graph: &Graph, with_vectors: bool) -> Result<Spectrum> {
    eig_symmetric(&graph.laplacian(), with_vectors)
}

/// `‖f‖²_L`, `‖f‖²` and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RayleighQuotient {
    pub energy: f64,
    pub norm_sq: f64,
    pub ratio: f64,
}

pub fn rayleigh(graph: &Graph, f: &[f64]) -> Result<RayleighQuotient> {
    if f.len() != graph.n() {
        return Err(Error::Validation(format!("vector has length {}, graph has {} vertices", f.len(), graph.n())));
    }
    let norm_sq: f64 = f.iter().map(|x| x * x).sum();
    if norm_sq == 0.0 {
        return Err(Error::Validation("Rayleigh ratio is undefined for the zero vector".into()));
    }
    let energy = graph.laplacian_energy(f);
    Ok(RayleighQuotient { energy, norm_sq, ratio: energy / norm_sq })
}

/// `supp(f)` after clamping `|f(x)| ≤ SUPPORT_EPS` to zero.
pub fn support(f: &[f64]) -> Vec<Vertex> {
    f.iter().enumerate().filter(|(_, x)| x.abs() > SUPPORT_EPS).map(|(v, _)| v).collect()
}

/// Copy of `f` with sub-`SUPPORT_EPS` entries set to exactly zero.
pub fn clamp_support(f: &[f64]) -> Vec<f64> {
    f.iter().map(|&x| if x.abs() > SUPPORT_EPS { x } else { 0.0 }).collect()
}

/// Outcome of [`disjoint_support_bound`].
#[derive(Debug, Clone, PartialEq)]
pub enum SupportBound {
    /// `λ_k ≤ bound` with `k = ratios.len()`.
    Certified { bound: f64, ratios: Vec<RayleighQuotient> },
    /// `supp(f_first)` meets `N(supp(f_second))` at `witness`.
    Rejected { first: usize, second: usize, witness: Vertex },
}

impl SupportBound {
    pub fn bound(&self) -> Option<f64> {
        match self {
            SupportBound::Certified { bound, .. } => Some(*bound),
            SupportBound::Rejected { .. } => None,
        }
    }
}

/// Upper bound on `λ_k`, `k = fs.len()`, from vectors whose supports are
/// pairwise non-adjacent: `supp(f_i) ∩ N(supp(f_j)) = ∅` for `i ≠ j`.
///
/// Vectors are clamped with [`clamp_support`] before anything is computed,
/// so the ratios refer to exactly the supports that were checked.
pub fn disjoint_support_bound(graph: &Graph, fs: &[Vec<f64>]) -> Result<SupportBound> {
    if fs.is_empty() {
        return Err(Error::Validation("need at least one test vector".into()));
    }
    let clamped: Vec<Vec<f64>> = fs.iter().map(|f| clamp_support(f)).collect();
    let mut ratios = Vec::with_capacity(fs.len());
    for (i, f) in clamped.iter().enumerate() {
        let q = rayleigh(graph, f).map_err(|e| Error::Validation(format!("test vector {i}: {e}")))?;
        ratios.push(q);
    }
    let n = graph.n();
    let masks: Vec<Vec<bool>> = clamped.iter().map(|f| f.iter().map(|&x| x != 0.0).collect()).collect();
    for j in 0..fs.len() {
        let mut near = vec![false; n];
        for v in (0..n).filter(|&v| masks[j][v]) {
            near[v] = true;
            for &u in graph.neighbors(v) {
                near[u] = true;
            }
        }
        for (i, mask) in masks.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(witness) = (0..n).find(|&x| mask[x] && near[x]) {
                return Ok(SupportBound::Rejected { first: i, second: j, witness });
            }
        }
    }
    let bound = ratios.iter().map(|q| q.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(SupportBound::Certified { bound, ratios })
}
