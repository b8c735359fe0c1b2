//! Small instances on which exhaustive searches are affordable.

use std::collections::BTreeSet;

use lapbound_core::flow::DemandGraph;
use lapbound_core::graph::{generate, Family};
use lapbound_core::minor::{complete_bipartite, is_planar_small};
use lapbound_core::Graph;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SuiteHost {
    pub name: String,
    pub graph: Graph,
    pub planar: bool,
}

/// Labeled graphs on `n` vertices given as a bitmask over the pairs `(i, j)`,
/// `i < j`, in lexicographic order.
fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !prefix.contains(&v) {
                prefix.push(v);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// Smallest relabeled mask, a canonical form for isomorphism classes.
fn canonical(mask: u32, n: usize, pair_list: &[(usize, usize)], perms: &[Vec<usize>]) -> u32 {
    let index = |a: usize, b: usize| {
        let (i, j) = (a.min(b), a.max(b));
        // position of (i, j) in lexicographic order
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    };
    perms
        .iter()
        .map(|p| {
            pair_list
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .fold(0u32, |acc, (_, &(i, j))| acc | 1 << index(p[i], p[j]))
        })
        .min()
        .unwrap_or(0)
}

fn edges_of(mask: u32, pair_list: &[(usize, usize)]) -> Vec<(usize, usize)> {
    pair_list.iter().enumerate().filter(|(bit, _)| mask & (1 << bit) != 0).map(|(_, &e)| e).collect()
}

/// One graph per isomorphism class on `n ≤ 6` vertices satisfying `keep`.
fn classes(n: usize, keep: impl Fn(&Graph) -> bool) -> Vec<Graph> {
    assert!(n <= 6, "class enumeration is limited to 6 vertices");
    let pair_list = pairs(n);
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pair_list.len()) {
        let g = Graph::from_edges(n, edges_of(mask, &pair_list)).expect("distinct pairs");
        if !keep(&g) {
            continue;
        }
        if seen.insert(canonical(mask, n, &pair_list, &perms)) {
            out.push(g);
        }
    }
    out
}

/// All connected graphs on `n ≤ 6` vertices up to isomorphism.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    classes(n, Graph::is_connected)
}

/// Bipartite demand graphs of minimum degree 2 on `4..=max_n` vertices, up
/// to isomorphism.
pub fn bipartite_min_degree_two(max_n: usize) -> Vec<DemandGraph> {
    let mut out = Vec::new();
    for n in 4..=max_n.min(6) {
        for g in classes(n, |g| (0..g.n()).all(|v| g.degree(v) >= 2)) {
            let h = DemandGraph::unit(n, g.edges().iter().copied()).expect("graph edges are valid demands");
            if h.is_bipartite() {
                out.push(h);
            }
        }
    }
    out
}

/// The host suite: every connected graph on up to 6 vertices plus named
/// hosts on 7 and 8 vertices.
pub fn small_hosts() -> Result<Vec<SuiteHost>> {
    let mut hosts = Vec::new();
    for n in 2..=6 {
        for (i, g) in connected_graphs(n).into_iter().enumerate() {
            hosts.push(host(format!("connected{n}_{i}"), g)?);
        }
    }
    for n in [7, 8] {
        hosts.push(host(format!("path{n}"), generate(Family::Path, &[n], 0)?)?);
        hosts.push(host(format!("cycle{n}"), generate(Family::Cycle, &[n], 0)?)?);
        hosts.push(host(format!("star{n}"), generate(Family::Star, &[n], 0)?)?);
        for seed in 0..3 {
            hosts.push(host(format!("disk{n}_s{seed}"), generate(Family::TriangulatedDisk, &[n], seed)?)?);
        }
    }
    hosts.push(host("grid2x4".into(), generate(Family::Grid, &[2, 4], 0)?)?);
    hosts.push(host("k3_4".into(), complete_bipartite(3, 4))?);
    hosts.push(host("wheel7".into(), wheel(7))?);
    Ok(hosts)
}

fn host(name: String, graph: Graph) -> Result<SuiteHost> {
    let planar = is_planar_small(&graph)?;
    Ok(SuiteHost { name, graph, planar })
}

/// Hub `0` joined to a cycle on `1..n`.
pub fn wheel(n: usize) -> Graph {
    let rim = n - 1;
    let edges = (1..n).map(|i| (0, i)).chain((0..rim).map(|i| (1 + i, 1 + (i + 1) % rim)));
    Graph::from_edges(n, edges).expect("wheel edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts_match_known_values() {
        // connected graphs on 1..=6 vertices: 1, 1, 2, 6, 21, 112
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn bipartite_demands() {
        let hs = bipartite_min_degree_two(6);
        assert!(hs.iter().all(|h| h.is_bipartite() && h.min_degree() >= 2));
        // C4, K2,3, then C6, K2,4, K3,3 and friends on six vertices
        assert_eq!(hs.iter().filter(|h| h.n() == 4).count(), 1);
        assert_eq!(hs.iter().filter(|h| h.n() == 5).count(), 1);
        assert!(hs.iter().any(|h| h.n() == 6 && h.edge_count() == 9));
        assert!(hs.iter().any(|h| h.n() == 6 && h.edge_count() == 6));
    }

    #[test]
    fn planarity_flags() {
        let hosts = small_hosts().unwrap();
        let k34 = hosts.iter().find(|h| h.name == "k3_4").unwrap();
        assert!(!k34.planar);
        assert!(hosts.iter().find(|h| h.name == "wheel7").unwrap().planar);
        assert!(hosts.iter().all(|h| h.graph.n() <= 8));
    }
}
