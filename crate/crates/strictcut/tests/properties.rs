//! Property tests for the invariants every operation promises.

use proptest::prelude::*;
use strictcut::check::AssertLevel;
use strictcut::graph::{is_strictly_balanced, Coloring, Measure, WeightedGraph};
use strictcut::grid::{grid_split, is_monotone, rectangular_grid};
use strictcut::instances::{generate, greedy_baseline, measure_coloring, replicate_instance, Provenance, Recipe};
use strictcut::multi::multibalcut;
use strictcut::oracle::{in_window, oracle_by_name, ExhaustiveOracle, GreedyOracle};
use strictcut::strict::{partition, ShrinkConfig};

/// (weights, edges) with n vertices in 1..=max_n.
fn graph(max_n: usize, max_w: u32) -> impl Strategy<Value = WeightedGraph> {
    (1..=max_n).prop_flat_map(move |n| {
        let weights = prop::collection::vec(0..=max_w, n);
        let edges = prop::collection::vec((0..n, 0..n, 1u32..=9), 0..=3 * n);
        (weights, edges).prop_map(|(w, e)| {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<_> = e
                .into_iter()
                .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
                .map(|(u, v, c)| (u, v, c as f64))
                .collect();
            WeightedGraph::new(w.into_iter().map(f64::from).collect(), &edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_is_strictly_balanced(g in graph(60, 20), k in 1usize..=9) {
        let config = ShrinkConfig::default().with_level(AssertLevel::Full);
        let report = partition(&g, &GreedyOracle::new(2.0), k, &config).unwrap();
        let balance = is_strictly_balanced(&report.coloring, &Measure::weights_of(&g));
        prop_assert!(balance.holds_within(1e-9), "slack {}", balance.slack());
        prop_assert_eq!(report.oracle.violations, 0);
    }

    #[test]
    fn partition_ignores_weight_scale(g in graph(40, 12), k in 2usize..=6, scale in 1u32..=50) {
        let config = ShrinkConfig::default();
        let scaled = g.with_weights(g.weights().iter().map(|w| w * f64::from(scale)).collect()).unwrap();
        let a = partition(&g, &GreedyOracle::new(2.0), k, &config).unwrap();
        let b = partition(&scaled, &GreedyOracle::new(2.0), k, &config).unwrap();
        prop_assert_eq!(a.coloring.assignment(), b.coloring.assignment());
    }

    #[test]
    fn greedy_baseline_is_strict(g in graph(8, 9), k in 1usize..=5) {
        let chi = greedy_baseline(&g, k).unwrap();
        prop_assert!(measure_coloring(&g, &chi).strictly_balanced);
    }

    #[test]
    fn every_oracle_meets_the_window(g in graph(12, 9), frac in 0.0f64..=1.0, name in prop::sample::select(vec!["exhaustive", "greedy", "separator:exhaustive", "separator:bfs"])) {
        let oracle = oracle_by_name(name, 2.0, None).unwrap();
        let target = frac * g.total_weight();
        let set = oracle.split(&g.full_view(), g.weights(), target).unwrap();
        let w: f64 = set.iter().map(|&v| g.weight(v)).sum();
        prop_assert!(in_window(w, target, g.max_weight()), "{name}: {w} vs {target}");
        prop_assert!(set.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn grid_sets_are_monotone_splits(sides in prop::collection::vec(1usize..=9, 1..=3), costs in prop::collection::vec(1u32..=64, 1..=32), frac in 0.0f64..=1.0) {
        let mut i = 0;
        let grid = rectangular_grid(&sides, 1.0, |_, _| { i += 1; f64::from(costs[i % costs.len()]) }).unwrap();
        let n = grid.base().vertex_count();
        let target = frac * n as f64;
        let report = grid_split(&grid, &vec![1.0; n], target).unwrap();
        prop_assert!(is_monotone(&grid, &report.set));
        prop_assert!(in_window(report.set.len() as f64, target, 1.0));
        prop_assert!(report.depth <= report.depth_bound);
    }

    #[test]
    fn multibalcut_partitions_its_view(g in graph(12, 6), r in 1usize..=3, seed in any::<u64>()) {
        let n = g.vertex_count();
        let measures: Vec<Vec<f64>> = (0..r).map(|j| (0..n).map(|v| ((seed >> (v % 60)) as usize + j * v) as f64 % 7.0).collect()).collect();
        let stack: Vec<&[f64]> = measures.iter().map(Vec::as_slice).collect();
        let members: Vec<usize> = (0..n).collect();
        let two = multibalcut(&g, &members, &ExhaustiveOracle::new(2.0), &stack, AssertLevel::Full).unwrap();
        let mut both = two.first.clone();
        both.extend(&two.second);
        both.sort_unstable();
        prop_assert_eq!(both, members);
    }

    #[test]
    fn class_boundaries_count_each_cut_edge_twice(g in graph(30, 5), k in 1usize..=5, seed in any::<u64>()) {
        let assignment: Vec<usize> = (0..g.vertex_count()).map(|v| ((seed >> (v % 61)) as usize ^ v) % k).collect();
        let chi = Coloring::new(&g, k, assignment.clone()).unwrap();
        let cut: f64 = g.edge_list().iter().filter(|e| assignment[e.0] != assignment[e.1]).map(|e| e.2).sum();
        let m = measure_coloring(&g, &chi);
        prop_assert!((m.avg_boundary * k as f64 - 2.0 * cut).abs() < 1e-9);
        prop_assert!(m.max_boundary <= 2.0 * cut + 1e-9);
    }

    #[test]
    fn replication_multiplies_the_instance(seed in any::<u64>(), n in 5usize..=30, k in 4usize..=23) {
        let base = generate(&Provenance { seed, recipe: Recipe::BoundedDegree { n, max_degree: 4, weight_max: 5, cost_max: 5 } }).unwrap();
        let copies = replicate_instance(&base, k).unwrap();
        let norm = |g: &WeightedGraph| g.costs().iter().map(|c| c * c).sum::<f64>();
        prop_assert_eq!(copies.copies, k / 4);
        prop_assert_eq!(copies.graph.vertex_count(), n * (k / 4));
        prop_assert!((norm(&copies.graph) - (k / 4) as f64 * norm(&base.graph)).abs() < 1e-9);
        prop_assert!(copies.graph.edge_list().iter().all(|e| e.0 / n == e.1 / n));
    }
}
