//! Splitting-set oracles.
//!
//! An oracle receives a view W, host-indexed weights w and a target w* and
//! returns U ⊆ W with |w(U) - w*| ≤ max_W w / 2 and, ideally, small ∂_W U.

mod estimate;
mod exhaustive;
mod greedy;
mod separator;

pub use estimate::{estimate_splittability, split_ratio};
pub use exhaustive::{exhaustive_split, exhaustive_split_capped, ExhaustiveOracle, EXHAUSTIVE_CAP};
pub use greedy::{greedy_split, GreedyOracle};
pub use separator::{
    separator_to_split, BfsSeparator, ExhaustiveSeparator, SeparatorOracle, SeparatorRoutine, SEPARATOR_CAP,
};

use crate::check::{slack_for, FLOAT_SLACK};
use crate::error::{Error, Result};
use crate::graph::{Measure, Scope, SubgraphView, WeightedGraph};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

pub trait SplitOracle: Send + Sync {
    fn name(&self) -> String;

    /// Advertised s with ∂_W U ≤ s·‖c|W‖_p, if the oracle promises one.
    fn quality(&self) -> Option<f64> {
        None
    }

    fn p(&self) -> f64;

    /// Returns a sorted w*-splitting subset of `view`.
    fn split(&self, view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>>;
}

/// Validates `(weights, target)` against `view`; returns `(w(W), max_W w)`.
pub(crate) fn check_request(view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<(f64, f64)> {
    let n = view.host().vertex_count();
    if weights.len() != n {
        return Err(Error::Parameter(format!("weights cover {} vertices, host has {n}", weights.len())));
    }
    let total = view.sum(weights);
    if !target.is_finite() || target < 0.0 || target > total + slack_for(total) {
        return Err(Error::Parameter(format!("target {target} outside [0, {total}]")));
    }
    Ok((total, view.max(weights)))
}

/// |w - target| ≤ max/2 up to float slack.
pub fn in_window(weight: f64, target: f64, max_weight: f64) -> bool {
    (weight - target).abs() <= max_weight / 2.0 + FLOAT_SLACK
}

/// π(v) = s^p · Σ_{e∋v} c(e)^p / 2.
pub fn split_cost_measure(graph: &WeightedGraph, s: f64, p: f64) -> Result<Measure> {
    if !(s >= 0.0 && s.is_finite()) || p.is_nan() || p <= 1.0 || p.is_infinite() {
        return Err(Error::Parameter(format!("need s >= 0 and finite p > 1, got s={s}, p={p}")));
    }
    let sp = s.powf(p);
    let values = (0..graph.vertex_count())
        .map(|v| sp * graph.neighbors(v).iter().map(|&(_, e)| graph.cost(e).powf(p)).sum::<f64>() / 2.0)
        .collect();
    Measure::new(values)
}

/// Call statistics gathered by [`Instrumented`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleStats {
    pub calls: u64,
    pub violations: u64,
    /// Largest observed ∂_W U / ‖c|W‖_p (0/0 counts as 0).
    pub max_ratio: f64,
}

/// Wrapper that checks every returned set against the oracle contract.
pub struct Instrumented<'a> {
    inner: &'a dyn SplitOracle,
    calls: AtomicU64,
    violations: AtomicU64,
    max_ratio_bits: AtomicU64,
    first_violation: Mutex<Option<String>>,
}

impl<'a> Instrumented<'a> {
    pub fn new(inner: &'a dyn SplitOracle) -> Self {
        Instrumented {
            inner,
            calls: AtomicU64::new(0),
            violations: AtomicU64::new(0),
            max_ratio_bits: AtomicU64::new(0f64.to_bits()),
            first_violation: Mutex::new(None),
        }
    }

    pub fn stats(&self) -> OracleStats {
        OracleStats {
            calls: self.calls.load(Ordering::Relaxed),
            violations: self.violations.load(Ordering::Relaxed),
            max_ratio: f64::from_bits(self.max_ratio_bits.load(Ordering::Relaxed)),
        }
    }

    pub fn first_violation(&self) -> Option<String> {
        self.first_violation.lock().unwrap().clone()
    }

    fn record_violation(&self, witness: String) -> Error {
        self.violations.fetch_add(1, Ordering::Relaxed);
        let mut slot = self.first_violation.lock().unwrap();
        if slot.is_none() {
            *slot = Some(witness.clone());
        }
        Error::OracleMisbehavior { routine: self.inner.name(), witness }
    }
}

impl SplitOracle for Instrumented<'_> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn quality(&self) -> Option<f64> {
        self.inner.quality()
    }

    fn p(&self) -> f64 {
        self.inner.p()
    }

    fn split(&self, view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let (_, max_w) = check_request(view, weights, target)?;
        let set = self.inner.split(view, weights, target)?;
        if let Some(&v) = set.iter().find(|&&v| !view.contains(v)) {
            return Err(self.record_violation(format!("returned vertex {v} outside the view")));
        }
        if set.windows(2).any(|p| p[0] >= p[1]) {
            return Err(self.record_violation("returned set not sorted and duplicate-free".into()));
        }
        let w: f64 = set.iter().map(|&v| weights[v]).sum();
        if !in_window(w, target, max_w) {
            return Err(self.record_violation(format!(
                "w(U) = {w}, target {target}, max weight {max_w}, |U| = {}, |W| = {}",
                set.len(),
                view.len()
            )));
        }
        let cut = view.boundary_cost(&set, Scope::View)?;
        let norm = view.cost_norm(self.p())?;
        let ratio = if cut == 0.0 { 0.0 } else { cut / norm };
        self.max_ratio_bits.fetch_max(ratio.to_bits(), Ordering::Relaxed);
        Ok(set)
    }
}

/// Names accepted by [`oracle_by_name`].
pub const ORACLE_NAMES: &[&str] = &["exhaustive", "greedy", "separator:exhaustive", "separator:bfs", "grid"];

/// Builds an oracle from its name; `grid` needs coordinates.
pub fn oracle_by_name(name: &str, p: f64, grid: Option<(usize, Vec<i32>)>) -> Result<Box<dyn SplitOracle>> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    Ok(match name {
        "exhaustive" => Box::new(ExhaustiveOracle::new(p)),
        "greedy" => Box::new(GreedyOracle::new(p)),
        "separator:exhaustive" => Box::new(SeparatorOracle::new(Box::new(ExhaustiveSeparator::default()), p)),
        "separator:bfs" => Box::new(SeparatorOracle::new(Box::new(BfsSeparator), p)),
        "grid" => {
            let (dim, coords) =
                grid.ok_or_else(|| Error::Parameter("the grid oracle needs coordinates in the input".into()))?;
            Box::new(crate::grid::GridOracle::new(dim, coords, p))
        }
        other => {
            return Err(Error::Parameter(format!("unknown oracle '{other}'; expected one of {ORACLE_NAMES:?}")))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_cost_measure_examples() {
        let edge = WeightedGraph::new(vec![1.0; 2], &[(0, 1, 2.0)]).unwrap();
        let pi = split_cost_measure(&edge, 1.0, 2.0).unwrap();
        assert_eq!(pi.values(), &[2.0, 2.0]);
        assert_eq!(pi.total(), 4.0);
        let empty = WeightedGraph::new(vec![1.0; 3], &[]).unwrap();
        assert_eq!(split_cost_measure(&empty, 1.0, 2.0).unwrap().total(), 0.0);
        let tri = WeightedGraph::new(vec![1.0; 3], &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let pi = split_cost_measure(&tri, 1.0, 2.0).unwrap();
        // Each vertex: (1 + 1) / 2.
        assert_eq!(pi.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(pi.total(), 3.0);
    }

    #[test]
    fn split_cost_measure_total_matches_norm() {
        let g = WeightedGraph::new(vec![1.0; 4], &[(0, 1, 3.0), (1, 2, 1.5), (2, 3, 2.0)]).unwrap();
        let pi = split_cost_measure(&g, 2.0, 3.0).unwrap();
        let norm = g.full_view().cost_norm(3.0).unwrap();
        let expect = 8.0 * norm.powi(3);
        assert!((pi.total() - expect).abs() <= 1e-9 * expect);
    }

    struct Liar;
    impl SplitOracle for Liar {
        fn name(&self) -> String {
            "liar".into()
        }
        fn p(&self) -> f64 {
            2.0
        }
        fn split(&self, view: &SubgraphView<'_>, _: &[f64], _: f64) -> Result<Vec<usize>> {
            Ok(view.members().to_vec())
        }
    }

    #[test]
    fn instrumented_counts_violations() {
        let g = WeightedGraph::new(vec![1.0; 4], &[(0, 1, 1.0)]).unwrap();
        let liar = Liar;
        let wrapped = Instrumented::new(&liar);
        let err = wrapped.split(&g.full_view(), g.weights(), 1.0).unwrap_err();
        assert!(matches!(err, Error::OracleMisbehavior { .. }));
        assert_eq!(wrapped.split(&g.full_view(), g.weights(), 4.0).unwrap().len(), 4);
        let stats = wrapped.stats();
        assert_eq!((stats.calls, stats.violations), (2, 1));
        assert!(wrapped.first_violation().unwrap().contains("w(U) = 4"));
    }

    #[test]
    fn rejects_out_of_range_targets() {
        let g = WeightedGraph::new(vec![1.0; 2], &[]).unwrap();
        let o = GreedyOracle::new(2.0);
        let w = Instrumented::new(&o);
        assert!(matches!(w.split(&g.full_view(), g.weights(), 3.0), Err(Error::Parameter(_))));
        assert!(matches!(w.split(&g.full_view(), g.weights(), -1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn registry_knows_every_name() {
        for name in ORACLE_NAMES {
            let grid = (*name == "grid").then(|| (1, vec![0]));
            assert_eq!(oracle_by_name(name, 2.0, grid).unwrap().name(), *name);
        }
        assert!(oracle_by_name("grid", 2.0, None).is_err());
        assert!(oracle_by_name("magic", 2.0, None).is_err());
    }
}
