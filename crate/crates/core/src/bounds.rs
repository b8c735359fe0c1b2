//! Closed-form congestion lower bounds.
//!
//! A `(c, a)`-congestion measure guarantees
//! `inter_G(H) ≥ |E(H)|³ / (c·|V(H)|²) − a·|V(H)|` for unit demand graphs
//! `H` routed in hosts of the family. Everything here is plain arithmetic
//! except [`ss_prime_lower`] in brute-force mode.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::flow::{min_intersection_bruteforce, DemandGraph, SubsetDistribution, PLACEMENT_SEARCH_MAX_HOST};
use crate::graph::{Graph, Vertex};
use crate::{Error, Result};

/// Host family for [`family_constants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CongestionFamily {
    Planar,
    Genus(u32),
    MinorFree(u32),
}

/// Constants of a `(c, a)`-congestion measure obtained from a weak bound
/// `|E(H)| ≤ k·|V(H)| + k²` on zero-intersection demand graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CongestionConstants {
    pub c: f64,
    pub a: f64,
    pub k: f64,
    pub family: CongestionFamily,
    /// Constant in the `O(h √log h)` average degree of `K_h`-minor-free
    /// graphs. Only used for [`CongestionFamily::MinorFree`].
    pub c_kt: f64,
}

/// Unstated universal constants, exposed so every report can print them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundConstants {
    /// Leading constant of the subset-flow lower bound.
    pub c1: f64,
    /// Constant on the additive term of the subset-flow lower bound.
    pub c0: f64,
    pub c_kt: f64,
    /// Constant absorbed by `≳` in the light-edge estimate.
    pub claim_lite_factor: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c1: 1e-3, c0: 1.0, c_kt: 4.0, claim_lite_factor: 1.0 / 12.0 }
    }
}

/// `(c, a) = (27k², k)` with `k` chosen per family.
pub fn family_constants(family: CongestionFamily, c_kt: f64) -> Result<CongestionConstants> {
    let k = match family {
        CongestionFamily::Planar => 3.0,
        CongestionFamily::Genus(g) => {
            if g < 1 {
                return Err(Error::Validation("genus must be at least 1 (use planar for genus 0)".into()));
            }
            // smallest k with k·v + k² ≥ 3v + 6(g − 1) for every v ≥ 1
            libm::sqrt(6.0 * g as f64).max(3.0)
        }
        CongestionFamily::MinorFree(h) => {
            if h < 3 {
                return Err(Error::Validation(format!("excluded minor size h = {h} must be at least 3")));
            }
            if !(c_kt.is_finite() && c_kt > 0.0) {
                return Err(Error::Validation(format!("c_KT = {c_kt} must be positive")));
            }
            let h = h as f64;
            2.0 * c_kt * h * libm::sqrt(libm::log(h))
        }
    };
    Ok(CongestionConstants { c: 27.0 * k * k, a: k, k, family, c_kt })
}

/// `nE³ / (c·nV²) − a·nV`, unclamped.
pub fn conmeasure_lower(n_v: usize, n_e: f64, cc: &CongestionConstants) -> f64 {
    let v = n_v as f64;
    n_e * n_e * n_e / (cc.c * v * v) - cc.a * v
}

/// `(1/27)·nE³ / (k²·nV²) − k·nV`, unclamped.
pub fn boost_weak_to_strong(n_v: usize, n_e: f64, k: f64) -> f64 {
    let v = n_v as f64;
    n_e * n_e * n_e / (27.0 * k * k * v * v) - k * v
}

/// Light-edge estimate
/// `factor·(Σ_{F(u,v) ≤ β} F(u,v))³ / (β·c·n²) − 2β²·a·n` with
/// `F(u,v) = Pr[u, v ∈ S]` and `β = √(E|S|²)/n`.
///
/// The light sum runs over ordered pairs `u ≠ v`.
pub fn light_edge_lower(mu: &SubsetDistribution, n: usize, cc: &CongestionConstants, factor: f64) -> Result<f64> {
    check_vertices(mu, n)?;
    let nf = n as f64;
    let beta = libm::sqrt(mu.mean_size_sq()) / nf;
    let light: f64 = mu.pair_probabilities().values().filter(|&&f| f <= beta).map(|f| 2.0 * f).sum();
    Ok(factor * light * light * light / (beta * cc.c * nf * nf) - 2.0 * beta * beta * cc.a * nf)
}

fn check_vertices(mu: &SubsetDistribution, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    match mu.max_vertex() {
        Some(v) if v >= n => Err(Error::Validation(format!("support vertex {v} outside 0..{n}"))),
        _ => Ok(()),
    }
}

/// How [`ss_prime_lower`] evaluates `inter_G(K_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsPrimeMode {
    /// Exact minimum by branch and bound.
    Bruteforce,
    /// [`conmeasure_lower`] with `|E| = m(m−1)/2`, clamped at 0.
    Formula,
}

/// `E_{S,S'∼μ×μ}[inter_G(K_{|S∩S'|})]`.
///
/// In brute-force mode the complete graph sits on `S ∩ S'` itself, or is
/// placed optimally when the host is small enough for the placement search.
pub fn ss_prime_lower(
    graph: &Graph,
    mu: &SubsetDistribution,
    mode: SsPrimeMode,
    cc: &CongestionConstants,
) -> Result<f64> {
    check_vertices(mu, graph.n())?;
    let search = graph.n() <= PLACEMENT_SEARCH_MAX_HOST;
    let mut by_size: BTreeMap<usize, f64> = BTreeMap::new();
    let mut by_set: BTreeMap<Vec<Vertex>, f64> = BTreeMap::new();
    let mut total = 0.0;
    for (s, p) in mu.support() {
        for (t, q) in mu.support() {
            let common: Vec<Vertex> = s.iter().copied().filter(|v| t.binary_search(v).is_ok()).collect();
            let m = common.len();
            let value = if m < 4 {
                0.0
            } else {
                match mode {
                    SsPrimeMode::Formula => conmeasure_lower(m, (m * (m - 1) / 2) as f64, cc).max(0.0),
                    SsPrimeMode::Bruteforce if search => match by_size.get(&m) {
                        Some(&v) => v,
                        None => {
                            let v = complete_on(graph, &common)?;
                            by_size.insert(m, v);
                            v
                        }
                    },
                    SsPrimeMode::Bruteforce => match by_set.get(&common) {
                        Some(&v) => v,
                        None => {
                            let v = complete_on(graph, &common)?;
                            by_set.insert(common, v);
                            v
                        }
                    },
                }
            };
            total += p * q * value;
        }
    }
    Ok(total)
}

fn complete_on(graph: &Graph, vertices: &[Vertex]) -> Result<f64> {
    min_intersection_bruteforce(graph, &DemandGraph::complete_on(graph.n(), vertices)?, true)
}

/// `max(0, C1·(E|S|²)^{5/2}/(c·n) − c0·(a/n)·E|S|²)`.
pub fn subset_flow_lower(mu: &SubsetDistribution, n: usize, cc: &CongestionConstants, c1: f64, c0: f64) -> f64 {
    subset_flow_lower_from_moment(mu.mean_size_sq(), n, cc, c1, c0)
}

/// [`subset_flow_lower`] for a given second moment `E|S|²`.
pub fn subset_flow_lower_from_moment(second_moment: f64, n: usize, cc: &CongestionConstants, c1: f64, c0: f64) -> f64 {
    let nf = n as f64;
    let m = second_moment;
    (c1 * m * m * libm::sqrt(m) / (cc.c * nf) - c0 * cc.a / nf * m).max(0.0)
}
