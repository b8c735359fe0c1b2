use lapbound::experiment::{parse_results_csv, results_csv, scaling_svg};
use lapbound::suite::{bipartite_min_degree_two, small_hosts};
use lapbound::{run_experiment, ExperimentConfig, GraphSource};
use lapbound_core::flow::has_zero_intersection;
use lapbound_core::graph::Family;
use lapbound_core::minor::contains_minor;
use lapbound_core::Graph;

fn generated(family: Family, size: usize) -> GraphSource {
    GraphSource::Generated { family, size: vec![size], seed: 0 }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let cov: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn grid12_normalized_eigenvalues_stay_in_a_band() {
    let results = run_experiment(&ExperimentConfig::new(generated(Family::Grid, 12), 2, 12)).unwrap();
    let scaled: Vec<f64> = results.rows.iter().map(|r| r.lambda_exact * r.n as f64 / r.k as f64).collect();
    let max = scaled.iter().copied().fold(f64::MIN, f64::max);
    let min = scaled.iter().copied().fold(f64::MAX, f64::min);
    assert!(max / min <= 10.0, "band {min}..{max}");
    for row in &results.rows {
        if row.certified {
            assert!(row.cert_bound >= row.lambda_exact, "k = {}", row.k);
        }
        assert!(row.flags.iter().all(|f| !f.starts_with("failed_")), "{:?}", row.flags);
    }
    // the table survives its own CSV form
    let parsed = parse_results_csv(&results_csv(&results.rows).unwrap()).unwrap();
    assert_eq!(parsed.len(), results.rows.len());
    for (p, r) in parsed.iter().zip(&results.rows) {
        assert_eq!((p.k, p.lambda_exact, p.cert_bound), (r.k, r.lambda_exact, r.cert_bound));
    }
    let svg = scaling_svg(&results.rows);
    let positive = results.rows.iter().filter(|r| r.normalized_lambda() > 0.0).count();
    assert_eq!(svg.matches("class=\"exact\"").count(), positive);
}

#[test]
fn path64_eigenvalues_grow_quadratically_in_k() {
    let mut config = ExperimentConfig::new(generated(Family::Path, 64), 2, 16);
    config.seeds = vec![0, 1];
    let results = run_experiment(&config).unwrap();
    // λ_k = 2 − 2cos(πj/n) with j = k − 1 since λ_1 = 0; ≈ (πj/n)², slope 2
    // against j
    for r in &results.rows {
        let j = (r.k - 1) as f64;
        assert!((r.lambda_exact - (2.0 - 2.0 * (std::f64::consts::PI * j / 64.0).cos())).abs() < 1e-8);
    }
    let points: Vec<(f64, f64)> =
        results.rows.iter().map(|r| (((r.k - 1) as f64).ln(), r.lambda_exact.ln())).collect();
    let s = slope(&points);
    assert!((1.7..=2.3).contains(&s), "slope {s}");
}

#[test]
fn failed_rows_fall_back_to_the_trivial_bound() {
    let results = run_experiment(&ExperimentConfig::new(generated(Family::Grid, 8), 5, 8)).unwrap();
    for row in &results.rows {
        assert!(!row.certified);
        assert_eq!(row.cert_bound, 2.0 * row.d_max as f64);
        assert!(row.flags.contains(&"fallback".to_string()) && row.flags.contains(&"too_small".to_string()));
        assert!(row.cert_bound >= row.lambda_exact);
    }
}

#[test]
fn zero_intersection_bipartite_demands_are_minors() {
    let demands = bipartite_min_degree_two(6);
    let mut witnessed = 0;
    for host in small_hosts().unwrap().iter().filter(|h| h.graph.n() <= 7) {
        for d in demands.iter().filter(|d| d.n() <= host.graph.n()) {
            if has_zero_intersection(&host.graph, d).unwrap() {
                let h = Graph::from_edges(d.n(), d.edges().map(|(e, _)| e)).unwrap();
                assert!(contains_minor(&host.graph, &h).unwrap(), "{} lacks a minor of {:?}", host.name, h.edges());
                witnessed += 1;
            }
        }
    }
    assert!(witnessed > 50, "only {witnessed} zero-intersection pairs");
}
