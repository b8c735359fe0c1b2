//! Library results checked against independent computations done here.

use std::f64::consts::PI;

use lapbound_core::bounds::{boost_weak_to_strong, conmeasure_lower, family_constants, subset_flow_lower, CongestionFamily};
use lapbound_core::duality::{dual_min_congestion, epsilon_r, primal_max_spread, SolverOptions};
use lapbound_core::flow::{round_integral, Flow, Path, SubsetDistribution};
use lapbound_core::graph::{generate, Family, Graph};
use lapbound_core::spectral::{disjoint_support_bound, laplacian_spectrum, SupportBound};
use lapbound_core::{MetricOracle, VertexWeighting};

/// Every simple path from `u` to `v`, by plain depth-first search.
fn all_simple_paths(g: &Graph, u: usize, v: usize) -> Vec<Vec<usize>> {
    fn go(g: &Graph, v: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *stack.last().unwrap();
        if last == v {
            out.push(stack.clone());
            return;
        }
        for &w in g.neighbors(last) {
            if !stack.contains(&w) {
                stack.push(w);
                go(g, v, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, v, &mut vec![u], &mut out);
    out
}

fn path_weight(p: &[usize], w: &[f64]) -> f64 {
    p.iter().map(|&x| w[x]).sum()
}

#[test]
fn grid3_corner_distance_by_path_enumeration() {
    let g = generate(Family::Grid, &[3], 0).unwrap();
    let w = VertexWeighting::uniform(9);
    let oracle = MetricOracle::new(&g, &w).unwrap();
    let best = all_simple_paths(&g, 0, 8)
        .iter()
        .map(|p| path_weight(p, w.values()))
        .fold(f64::INFINITY, f64::min);
    assert!((best - 5.0 / 3.0).abs() < 1e-12);
    assert!((oracle.dist(0, 8) - best).abs() < 1e-12);
}

#[test]
fn dijkstra_matches_enumeration_with_uneven_weights() {
    for seed in 0..4 {
        let g = generate(Family::TriangulatedDisk, &[7], seed).unwrap();
        let raw: Vec<f64> = (0..7).map(|i| ((i * 7 + seed as usize * 3) % 5) as f64 * 0.25 + 0.1).collect();
        let oracle = MetricOracle::new(&g, &VertexWeighting::new(raw.clone()).unwrap()).unwrap();
        for u in 0..7 {
            for v in 0..7 {
                let expected = if u == v {
                    0.0
                } else {
                    all_simple_paths(&g, u, v).iter().map(|p| path_weight(p, &raw)).fold(f64::INFINITY, f64::min)
                };
                assert!((oracle.dist(u, v) - expected).abs() < 1e-12, "pair {u},{v}");
            }
        }
    }
}

#[test]
fn path_and_cycle_spectra_match_closed_forms() {
    for n in [4usize, 16, 64] {
        let path = laplacian_spectrum(&generate(Family::Path, &[n], 0).unwrap(), false).unwrap();
        let mut expected: Vec<f64> = (0..n).map(|j| 2.0 - 2.0 * (PI * j as f64 / n as f64).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in path.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "path({n}): {a} vs {b}");
        }
        let cycle = laplacian_spectrum(&generate(Family::Cycle, &[n], 0).unwrap(), false).unwrap();
        let mut expected: Vec<f64> = (0..n).map(|j| 2.0 - 2.0 * (2.0 * PI * j as f64 / n as f64).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in cycle.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "cycle({n}): {a} vs {b}");
        }
    }
}

/// Roots of `det(L − xI)` for the path Laplacian via the tridiagonal
/// recurrence and bisection.
fn path_char_roots(n: usize) -> Vec<f64> {
    let diag: Vec<f64> = (0..n).map(|i| if n == 1 { 0.0 } else if i == 0 || i == n - 1 { 1.0 } else { 2.0 }).collect();
    // number of eigenvalues below x (Sturm count)
    let below = |x: f64| {
        let mut count = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for d in diag.iter().skip(1) {
            let prev = if q == 0.0 { 1e-300 } else { q };
            q = d - x - 1.0 / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    (0..n)
        .map(|j| {
            let (mut lo, mut hi) = (-1.0, 5.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[test]
fn path_closed_form_agrees_with_characteristic_polynomial() {
    for n in 2..=6usize {
        let roots = path_char_roots(n);
        let mut closed: Vec<f64> = (0..n).map(|j| 2.0 - 2.0 * (PI * j as f64 / n as f64).cos()).collect();
        closed.sort_by(f64::total_cmp);
        for (a, b) in roots.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn complete3_spectrum_matches_characteristic_polynomial() {
    // det(L − xI) = −x(x − 3)² for the triangle
    let s = laplacian_spectrum(&generate(Family::Complete, &[3], 0).unwrap(), false).unwrap();
    for (x, e) in s.eigenvalues.iter().zip([0.0, 3.0, 3.0]) {
        assert!((x - e).abs() < 1e-9);
        let poly = -x * (x - 3.0) * (x - 3.0);
        assert!(poly.abs() < 1e-8);
    }
}

#[test]
fn separated_indicators_on_path5() {
    let g = generate(Family::Path, &[5], 0).unwrap();
    let f1 = vec![1.0, 0.0, 0.0, 0.0, 0.0];
    let f2 = vec![0.0, 0.0, 0.0, 1.0, 0.0];
    match disjoint_support_bound(&g, &[f1.clone(), f2.clone()]).unwrap() {
        SupportBound::Certified { bound, .. } => {
            assert_eq!(bound, 2.0);
            let lambda2 = laplacian_spectrum(&g, false).unwrap().lambda(2).unwrap();
            assert!((lambda2 - (2.0 - 2.0 * (PI / 5.0).cos())).abs() < 1e-9);
            assert!(lambda2 <= bound);
        }
        other => panic!("expected a bound, got {other:?}"),
    }
    // the mechanism behind the bound: L-orthogonality
    let lf2 = g.laplacian().mul_vec(&f2);
    assert_eq!(f1.iter().zip(&lf2).map(|(a, b)| a * b).sum::<f64>(), 0.0);
}

#[test]
fn epsilon_path3_by_pair_enumeration() {
    let g = generate(Family::Path, &[3], 0).unwrap();
    let w = [1.0, 1.0, 1.0];
    let norm = (3.0f64).sqrt();
    let mut best = f64::INFINITY;
    for u in 0..3 {
        for v in u + 1..3 {
            let d = all_simple_paths(&g, u, v).iter().map(|p| path_weight(p, &w)).fold(f64::INFINITY, f64::min);
            best = best.min(d / 4.0 / norm);
        }
    }
    let c = epsilon_r(&g, &VertexWeighting::new(w.to_vec()).unwrap(), 2).unwrap();
    assert!((c.epsilon - best).abs() < 1e-12);
    assert!((best - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-12);
}

#[test]
fn primal_on_path3_pairs_matches_lagrange_optimum() {
    // ω = (a, b, a): the worst pair is an edge, so maximize a + b on
    // 2a² + b² = 1, giving b = 2a and ε = 3/(4√6)
    let g = generate(Family::Path, &[3], 0).unwrap();
    let opts = SolverOptions { tol: 1e-6, ..SolverOptions::default() };
    let c = primal_max_spread(&g, 2, &opts).unwrap();
    let expected = 3.0 / (4.0 * 6f64.sqrt());
    assert!((c.epsilon - expected).abs() < 1e-5 * expected, "{}", c.epsilon);
    let w = c.weights.values();
    assert!((w[1] / w[0] - 2.0).abs() < 1e-2 && (w[2] / w[0] - 1.0).abs() < 1e-2, "{w:?}");
    // Frank–Wolfe stalls short of 1e-6, but any iterate is a feasible flow
    let dual = match dual_min_congestion(&g, 2, &opts) {
        Ok(d) => d,
        Err(e) => e.best().unwrap(),
    };
    assert!(c.epsilon <= dual.dual_value * (1.0 + 1e-12));
}

#[test]
fn dual_on_path3_with_all_vertices() {
    // the routing of the three demands is unique on a path, so con is fixed
    let g = generate(Family::Path, &[3], 0).unwrap();
    let mut load = [0.0; 3];
    for (u, v) in [(0, 1), (0, 2), (1, 2)] {
        let paths = all_simple_paths(&g, u, v);
        assert_eq!(paths.len(), 1);
        for &x in &paths[0] {
            load[x] += 1.0;
        }
    }
    let con: f64 = load.iter().map(|l| l * l).sum();
    let sol = dual_min_congestion(&g, 3, &SolverOptions::default()).unwrap();
    assert!((sol.con - con).abs() < 1e-9);
    assert!((sol.dual_value - con.sqrt() / 9.0).abs() < 1e-9);
}

#[test]
fn rounding_mean_matches_bilinear_expectation_on_grid4() {
    let g = generate(Family::Grid, &[4], 0).unwrap();
    // three demand pairs, each split over two or three routes
    let routes: Vec<Vec<(Vec<usize>, f64)>> = vec![
        vec![(vec![0, 1, 2, 3], 0.5), (vec![0, 4, 5, 6, 7, 3], 0.5)],
        vec![(vec![12, 8, 9, 10, 11], 0.25), (vec![12, 13, 9, 5, 6, 10, 11], 0.75)],
        vec![(vec![1, 5, 9, 13], 0.3), (vec![1, 2, 6, 10, 14, 13], 0.3), (vec![1, 5, 6, 10, 9, 13], 0.4)],
    ];
    let mut flow = Flow::new();
    for pair in &routes {
        for (p, m) in pair {
            flow.add(Path::new(&g, p.clone()).unwrap(), *m).unwrap();
        }
    }
    // E[inter(F*)] = Σ over ordered distinct demand pairs of Σ F(p)F(q)|p ∩ q|
    let mut expected = 0.0;
    for (i, a) in routes.iter().enumerate() {
        for (j, b) in routes.iter().enumerate() {
            if i == j {
                continue;
            }
            for (p, mp) in a {
                for (q, mq) in b {
                    expected += mp * mq * p.iter().filter(|x| q.contains(x)).count() as f64;
                }
            }
        }
    }
    assert!((flow.intersection_number() - expected).abs() < 1e-12);

    let trials = 10_000;
    let samples: Vec<f64> =
        (0..trials).map(|s| round_integral(&flow, s).unwrap().intersection_number()).collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let sigma = (var / trials as f64).sqrt();
    assert!((mean - expected).abs() <= 3.0 * sigma.max(1e-12), "mean {mean} expected {expected} sigma {sigma}");
    assert!(samples.iter().cloned().fold(f64::INFINITY, f64::min) <= expected);
}

#[test]
fn closed_form_arithmetic() {
    let planar = family_constants(CongestionFamily::Planar, 4.0).unwrap();
    assert_eq!((planar.c, planar.a), (243.0, 3.0));
    assert!((conmeasure_lower(10, 45.0, &planar) - (45f64.powi(3) / 24_300.0 - 30.0)).abs() < 1e-12);
    assert!((conmeasure_lower(10, 45.0, &planar) + 26.25).abs() < 1e-12);
    // (1/27)·300³/(9·400) − 60
    assert!((boost_weak_to_strong(20, 300.0, 3.0) - (27e6 / 97_200.0 - 60.0)).abs() < 1e-9);
    let genus6 = family_constants(CongestionFamily::Genus(6), 4.0).unwrap();
    assert_eq!((genus6.k, genus6.c, genus6.a), (6.0, 972.0, 6.0));
    let mu = SubsetDistribution::point_mass((0..20).collect()).unwrap();
    assert_eq!(subset_flow_lower(&mu, 100, &planar, 1e-3, 1.0), 0.0);
    let raw = 20f64.powi(5) / (243.0 * 100.0) - 3.0 * 400.0 / 100.0;
    assert!((subset_flow_lower(&mu, 100, &planar, 1.0, 1.0) - raw).abs() < 1e-9);
    assert!((raw - 119.69).abs() < 0.01);
}
