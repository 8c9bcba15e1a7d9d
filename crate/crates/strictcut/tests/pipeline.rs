use strictcut::check::AssertLevel;
use strictcut::graph::{is_strictly_balanced, Measure, WeightedGraph};
use strictcut::instances::{entry_instance, greedy_baseline, run_corpus, Manifest};
use strictcut::oracle::{oracle_by_name, split_cost_measure, GreedyOracle};
use strictcut::strict::{partition, shrink, ShrinkConfig};

const MANIFEST: &str = include_str!("../../../corpus/manifest.json");

fn path(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
    WeightedGraph::new(vec![1.0; n], &edges).unwrap()
}

#[test]
fn frozen_corpus_reproduces() {
    let manifest = Manifest::parse(MANIFEST).unwrap();
    assert!(!manifest.entries.is_empty());
    for outcome in run_corpus(&manifest) {
        let outcome = outcome.unwrap();
        assert!(outcome.hash_matches, "{}: instance hash changed", outcome.name);
        for c in &outcome.comparisons {
            assert!(c.ok, "{}: {} moved from {:?} to {:?}", c.entry, c.metric, c.frozen, c.current);
        }
    }
}

#[test]
fn partition_beats_greedy_on_the_corpus() {
    let manifest = Manifest::parse(MANIFEST).unwrap();
    for entry in &manifest.entries {
        let bundle = entry_instance(entry).unwrap();
        let grid = bundle.dim.map(|d| (d, bundle.coords.clone()));
        let oracle = oracle_by_name(&entry.oracle, entry.p, grid).unwrap();
        let report = partition(&bundle.graph, oracle.as_ref(), entry.k, &ShrinkConfig::new(entry.epsilon).unwrap()).unwrap();
        let greedy = greedy_baseline(&bundle.graph, entry.k).unwrap();
        assert!(report.max_boundary < greedy.max_boundary(), "{}", entry.name);
    }
}

#[test]
fn recursion_shrinks_when_weights_are_tiny() {
    // avg = 1250 ≥ ε^-5 = 1024 with unit weights.
    let g = path(2500);
    let config = ShrinkConfig::new(0.25).unwrap().with_level(AssertLevel::Full);
    let report = partition(&g, &GreedyOracle::new(2.0), 2, &config).unwrap();
    assert!(!report.recursion.shrinks.is_empty());
    assert!(is_strictly_balanced(&report.coloring, &Measure::weights_of(&g)).holds_within(1e-9));
    assert_eq!(report.coloring.class_weights(), &[1250.0, 1250.0]);
}

#[test]
fn oversized_class_is_cut_down_into_the_buffer() {
    // ε = 0.45: one class above M/2·avg, every other class above ε·avg,
    // so the cut parts go through buffer reduction rather than add-to.
    let (k, avg) = (100, 55);
    let n = k * avg;
    let g = path(n);
    let big = 28 * avg;
    let mut classes = vec![(0..big).collect::<Vec<_>>()];
    let rest = (n - big) / (k - 1);
    for c in 0..k - 1 {
        let start = big + c * rest;
        let end = if c == k - 2 { n } else { start + rest };
        classes.push((start..end).collect());
    }
    let config = ShrinkConfig::new(0.45).unwrap().with_level(AssertLevel::Full);
    let pi = split_cost_measure(&g, 1.0, 2.0).unwrap();
    let out = shrink(&g, &GreedyOracle::new(2.0), &classes, g.weights(), pi.values(), &config).unwrap();
    let r = &out.report;
    assert!(r.cut_downs >= 1);
    assert_eq!(r.add_tos, 0);
    assert_eq!(r.buffer_reductions, r.cut_downs);
    assert_eq!(r.sources, vec![0]);
    assert!(!r.sinks.contains(&0));
    assert!(r.size_after < r.size_before);
}
