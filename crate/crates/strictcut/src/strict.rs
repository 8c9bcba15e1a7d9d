//! Strict balancing by shrink-and-conquer: weakly balanced colorings become
//! almost strictly balanced, then strictly balanced by greedy bin packing.

use crate::check::{ensure, ensure_le, slack_for, AssertLevel};
use crate::error::{Error, Result};
use crate::graph::{
    difference, mask_of, max_over, max_weighted_degree, p_norm, strict_balance_report, sum_over, union, BalanceReport,
    Coloring, Scope, SubgraphView, WeightedGraph,
};
use crate::multi::{balance_boundary, split_at_least};
use crate::oracle::{split_cost_measure, Instrumented, OracleStats, SplitOracle};
use std::collections::VecDeque;

/// Constants of the shrinking procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkConfig {
    pub epsilon: f64,
    /// ε^-5.
    pub m: f64,
    /// Cap on parts a class may receive (and on bin-packing changes per class).
    pub max_class_changes: usize,
    pub level: AssertLevel,
}

impl ShrinkConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
        }
        let e5 = epsilon.powi(5);
        let m = 1.0 / e5;
        if 1.0 - epsilon + 3.0 * e5 >= 1.0 || 1.0 - epsilon - e5 < 0.5 || m <= 2.0 + 6.0 * epsilon {
            return Err(Error::Parameter(format!("epsilon {epsilon} violates the shrinking inequalities")));
        }
        Ok(ShrinkConfig {
            epsilon,
            m,
            max_class_changes: (2.0 / epsilon).floor() as usize + 2,
            level: AssertLevel::default(),
        })
    }

    pub fn with_level(mut self, level: AssertLevel) -> Self {
        self.level = level;
        self
    }

    pub fn with_max_class_changes(mut self, cap: usize) -> Self {
        self.max_class_changes = cap;
        self
    }
}

impl Default for ShrinkConfig {
    fn default() -> Self {
        ShrinkConfig::new(0.1).expect("0.1 satisfies the inequalities")
    }
}

/// Output of [`iterative_partition`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeParts {
    pub parts: Vec<Vec<usize>>,
    /// Sum of the cuts made, each measured inside the remainder it split.
    pub cut: f64,
    pub observed_quality: f64,
}

/// Partitions `members` into parts of Ψ-weight in [ψ*, 3ψ*] by repeatedly
/// splitting off a part of weight at least ψ*. Returns {W} when Ψ(W) < ψ*.
pub fn iterative_partition(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    psi: &[f64],
    psi_star: f64,
    level: AssertLevel,
) -> Result<IterativeParts> {
    let max = max_over(psi, members);
    if psi_star.is_nan() || psi_star < 0.0 || max > psi_star {
        return Err(Error::Parameter(format!("max Ψ = {max} exceeds ψ* = {psi_star}")));
    }
    let total = sum_over(psi, members);
    let mut rest = members.to_vec();
    let mut parts = Vec::new();
    let (mut cut, mut observed) = (0.0, 0.0f64);
    if psi_star > 0.0 {
        while sum_over(psi, &rest) > 3.0 * psi_star {
            let (part, ratio) = split_at_least(g, &rest, oracle, psi, psi_star)?;
            cut += SubgraphView::new(g, &rest)?.boundary_cost(&part, Scope::View)?;
            observed = observed.max(ratio);
            rest = difference(&rest, &part);
            parts.push(part);
        }
    }
    parts.push(rest);
    if level.cheap() && total >= psi_star && psi_star > 0.0 {
        let slack = slack_for(total);
        for (i, part) in parts.iter().enumerate() {
            let w = sum_over(psi, part);
            ensure("part weight in [ψ*, 3ψ*]", w >= psi_star - slack && w <= 3.0 * psi_star + slack, || {
                format!("part {i}: Ψ = {w}, ψ* = {psi_star}")
            })?;
        }
        let l = parts.len() as f64;
        ensure("part count", l >= total / (3.0 * psi_star) - slack && l <= total / psi_star + slack, || {
            format!("{l} parts for Ψ(W) = {total}, ψ* = {psi_star}")
        })?;
        let pi = split_cost_measure(g, 1.0, oracle.p())?;
        let bound = l * observed * sum_over(pi.values(), members).powf(1.0 / oracle.p());
        ensure_le("total cut of the partition", cut, bound, || format!("{l} parts, observed s = {observed}"))?;
    }
    Ok(IterativeParts { parts, cut, observed_quality: observed })
}

fn fractions_within(phis: &[&[f64]], part: &[usize], totals: &[f64], factor: f64) -> bool {
    phis.iter().zip(totals).all(|(phi, &t)| sum_over(phi, part) <= factor * t + slack_for(t))
}

/// Pigeonhole selection: the lowest-index part carrying at most an r/ℓ
/// fraction of every measure.
fn light_part(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    psi: &[f64],
    part_star: f64,
    phis: &[&[f64]],
    level: AssertLevel,
) -> Result<Vec<usize>> {
    let parts = iterative_partition(g, members, oracle, psi, part_star, level)?.parts;
    let totals: Vec<f64> = phis.iter().map(|phi| sum_over(phi, members)).collect();
    let factor = phis.len() as f64 / parts.len() as f64;
    if let Some(p) = parts.iter().find(|p| fractions_within(phis, p, &totals, factor)) {
        return Ok(p.clone());
    }
    let worst = |p: &Vec<usize>| {
        phis.iter().zip(&totals).map(|(phi, &t)| if t > 0.0 { sum_over(phi, p) / t } else { 0.0 }).fold(0.0, f64::max)
    };
    let best = parts.iter().min_by(|a, b| worst(a).total_cmp(&worst(b))).expect("at least one part");
    Ok(best.clone())
}

fn check_window(psi: &[f64], u: &[usize], psi_star: f64, lo: f64, hi: f64, what: &str) -> Result<()> {
    let ratio = sum_over(psi, u) / psi_star;
    if ratio < lo - slack_for(hi) || ratio > hi + slack_for(hi) {
        return Err(Error::Parameter(format!("{what}: Ψ(U)/Ψ* = {ratio} outside [{lo}, {hi}]")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn checked_part(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    psi: &[f64],
    psi_star: f64,
    phis: &[&[f64]],
    epsilon: f64,
    fraction: f64,
    level: AssertLevel,
) -> Result<Vec<usize>> {
    let x = light_part(g, members, oracle, psi, epsilon * psi_star, phis, level)?;
    if level.cheap() {
        let w = sum_over(psi, &x);
        ensure_le("part weight at least εΨ*", epsilon * psi_star, w, String::new)?;
        ensure_le("part weight at most 3εΨ*", w, 3.0 * epsilon * psi_star, String::new)?;
        for (j, phi) in phis.iter().enumerate() {
            ensure_le("part carries a small fraction", sum_over(phi, &x), fraction * sum_over(phi, members), || {
                format!("measure {}, fraction {fraction}", j + 1)
            })?;
        }
    }
    Ok(x)
}

/// X ⊆ U with ε ≤ Ψ(X)/Ψ* ≤ 3ε carrying at most a 6rε/M fraction of each
/// measure, for M/2 ≤ Ψ(U)/Ψ* ≤ M.
pub fn cheap_part(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    psi: &[f64],
    psi_star: f64,
    phis: &[&[f64]],
    config: &ShrinkConfig,
) -> Result<Vec<usize>> {
    check_window(psi, members, psi_star, config.m / 2.0, config.m, "cheap part")?;
    let fraction = 6.0 * phis.len() as f64 * config.epsilon / config.m;
    checked_part(g, members, oracle, psi, psi_star, phis, config.epsilon, fraction, config.level)
}

/// As [`cheap_part`] for ½ ≤ Ψ(U)/Ψ* ≤ M, with fraction 6rε.
pub fn costly_part(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    psi: &[f64],
    psi_star: f64,
    phis: &[&[f64]],
    config: &ShrinkConfig,
) -> Result<Vec<usize>> {
    check_window(psi, members, psi_star, 0.5, config.m, "costly part")?;
    let fraction = 6.0 * phis.len() as f64 * config.epsilon;
    checked_part(g, members, oracle, psi, psi_star, phis, config.epsilon, fraction, config.level)
}

/// X ⊆ U with εΨ* ≤ Ψ(X) ≤ εΨ* + max Ψ whose complement keeps at most a
/// (1 - ε/(3r)·Ψ*/Ψ(U)) fraction of each measure, for ε ≤ Ψ(U)/Ψ* ≤ M.
pub fn heavy_part(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    psi: &[f64],
    psi_star: f64,
    phis: &[&[f64]],
    config: &ShrinkConfig,
) -> Result<Vec<usize>> {
    let eps = config.epsilon;
    check_window(psi, members, psi_star, eps, config.m, "heavy part")?;
    let max_psi = psi.iter().copied().fold(0.0, f64::max);
    let total = sum_over(psi, members);
    let lo = eps * psi_star;
    let r = phis.len().max(1) as f64;
    let x = if total <= lo + max_psi {
        members.to_vec()
    } else {
        let parts = iterative_partition(g, members, oracle, psi, lo / (3.0 * r), config.level)?.parts;
        let mut chosen: Vec<usize> = Vec::new();
        for phi in phis {
            let best = (0..parts.len())
                .max_by(|&a, &b| sum_over(phi, &parts[a]).total_cmp(&sum_over(phi, &parts[b])).then(b.cmp(&a)))
                .expect("at least one part");
            if !chosen.contains(&best) {
                chosen.push(best);
            }
        }
        let mut bar: Vec<usize> = Vec::new();
        for &i in &chosen {
            bar = union(&bar, &parts[i]);
        }
        let have = sum_over(psi, &bar);
        if have >= lo {
            bar
        } else {
            let rest = difference(members, &bar);
            let (top, _) = split_at_least(g, &rest, oracle, psi, lo - have)?;
            union(&bar, &top)
        }
    };
    if config.level.cheap() {
        let w = sum_over(psi, &x);
        ensure_le("heavy part at least εΨ*", lo, w, String::new)?;
        ensure_le("heavy part at most εΨ* + max Ψ", w, lo + max_psi, String::new)?;
        let keep = 1.0 - eps / (3.0 * r) * psi_star / total;
        let rest = difference(members, &x);
        for (j, phi) in phis.iter().enumerate() {
            ensure_le("complement loses a fixed fraction", sum_over(phi, &rest), keep * sum_over(phi, members), || {
                format!("measure {}", j + 1)
            })?;
        }
    }
    Ok(x)
}

/// How a buffered part was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartKind {
    Cheap,
    Costly,
}

/// Statistics of one [`shrink`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkReport {
    pub size_before: usize,
    pub size_after: usize,
    pub average: f64,
    pub cut_downs: usize,
    pub add_tos: usize,
    pub costly_parts: usize,
    pub buffer_reductions: usize,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    pub max_receives: usize,
    pub max_source_changes: usize,
    /// Max π over classes before and after (π with unit s).
    pub pi_before: f64,
    pub pi_after: f64,
}

/// The two colorings returned by [`shrink`], as class lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Shrunk {
    pub first: Vec<Vec<usize>>,
    pub second: Vec<Vec<usize>>,
    pub report: ShrinkReport,
}

fn graph_size(g: &WeightedGraph, members: &[usize]) -> Result<usize> {
    let view = SubgraphView::new(g, members)?;
    Ok(members.len() + view.induced_edges().count())
}

/// c(δ(v) ∩ δ(U)) for v ∈ U, zero elsewhere.
fn boundary_proxy(g: &WeightedGraph, class: &[usize]) -> Result<Vec<f64>> {
    let inside = mask_of(g.vertex_count(), class)?;
    let mut values = vec![0.0; g.vertex_count()];
    for &v in class {
        values[v] = g.neighbors(v).iter().filter(|&&(u, _)| !inside[u]).map(|&(_, e)| g.cost(e)).sum();
    }
    Ok(values)
}

struct Buffered {
    set: Vec<usize>,
    origin: usize,
    kind: PartKind,
}

/// Splits a coloring of W (given by classes) into an almost strictly
/// balanced coloring of W₀ and a weakly balanced coloring of W₁ = W ∖ W₀.
pub fn shrink(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    classes: &[Vec<usize>],
    psi: &[f64],
    pi: &[f64],
    config: &ShrinkConfig,
) -> Result<Shrunk> {
    let k = classes.len();
    let eps = config.epsilon;
    let level = config.level;
    let members: Vec<usize> = classes.iter().fold(Vec::new(), |acc, c| union(&acc, c));
    let total = sum_over(psi, &members);
    let star = total / k as f64;
    let max_psi = psi.iter().copied().fold(0.0, f64::max);
    let max_class = classes.iter().map(|c| sum_over(psi, c)).fold(0.0, f64::max);
    if star <= 0.0 || max_class > config.m * star + slack_for(max_class) || max_psi > eps.powi(5) * star {
        return Err(Error::Parameter(format!(
            "shrink needs max class ≤ MΨ* and max Ψ ≤ ε^5Ψ*; got {max_class}, {max_psi}, Ψ* = {star}"
        )));
    }
    let inside = mask_of(g.vertex_count(), &members)?;
    let deg: Vec<f64> =
        (0..g.vertex_count()).map(|v| g.neighbors(v).iter().filter(|&&(u, _)| inside[u]).count() as f64).collect();
    let measures = |class: &[usize]| -> Result<Vec<f64>> { boundary_proxy(g, class) };

    let mut tent: Vec<Vec<usize>> = classes.to_vec();
    let mut buffer: VecDeque<Buffered> = VecDeque::new();
    let mut is_source = vec![false; k];
    let mut is_sink = vec![false; k];
    let mut receives = vec![0usize; k];
    let mut source_changes = vec![0usize; k];
    let (mut cut_downs, mut add_tos, mut costly, mut reductions) = (0, 0, 0, 0);

    // CutDown.
    while let Some(i) = (0..k).find(|&i| sum_over(psi, &tent[i]) > config.m / 2.0 * star) {
        let proxy = measures(&tent[i])?;
        let x = cheap_part(g, &tent[i], oracle, psi, star, &[pi, &deg, &proxy], config)?;
        tent[i] = difference(&tent[i], &x);
        is_source[i] = true;
        source_changes[i] += 1;
        cut_downs += 1;
        buffer.push_back(Buffered { set: x, origin: i, kind: PartKind::Cheap });
    }
    // AddTo.
    for j in 0..k {
        if sum_over(psi, &tent[j]) >= eps * star {
            continue;
        }
        let part = match buffer.pop_front() {
            Some(b) => b,
            None => {
                let need = (0.5f64).max(4.0 * eps) * star;
                let donor = (0..k)
                    .find(|&i| i != j && !is_sink[i] && sum_over(psi, &tent[i]) >= need)
                    .ok_or_else(|| Error::Internal {
                        check: "a donor color exists",
                        witness: format!("color {j} below εΨ* with an empty buffer"),
                    })?;
                let proxy = measures(&tent[donor])?;
                let x = costly_part(g, &tent[donor], oracle, psi, star, &[pi, &deg, &proxy], config)?;
                tent[donor] = difference(&tent[donor], &x);
                is_source[donor] = true;
                source_changes[donor] += 1;
                costly += 1;
                Buffered { set: x, origin: donor, kind: PartKind::Costly }
            }
        };
        debug_assert!(part.origin != j || part.kind == PartKind::Cheap);
        tent[j] = union(&tent[j], &part.set);
        is_sink[j] = true;
        receives[j] += 1;
        add_tos += 1;
    }
    // ReduceBuffer.
    while let Some(part) = buffer.pop_front() {
        let j = (0..k).find(|&j| sum_over(psi, &tent[j]) <= star + slack_for(star)).ok_or_else(|| Error::Internal {
            check: "a class at most Ψ* exists",
            witness: format!("{} parts left in the buffer", buffer.len() + 1),
        })?;
        tent[j] = union(&tent[j], &part.set);
        is_sink[j] = true;
        receives[j] += 1;
        reductions += 1;
    }
    if level.cheap() {
        for (i, class) in tent.iter().enumerate() {
            let w = sum_over(psi, class);
            ensure_le("shrunk class at least εΨ*", eps * star, w, || format!("color {i}"))?;
            ensure_le("shrunk class at most M/2·Ψ*", w, config.m / 2.0 * star, || format!("color {i}"))?;
        }
        let both = (0..k).find(|&i| is_source[i] && is_sink[i]);
        ensure("Source ∩ Sink = ∅", both.is_none(), || format!("color {}", both.unwrap_or(0)))?;
        let max_recv = receives.iter().copied().max().unwrap_or(0);
        ensure("sink receives few parts", max_recv <= config.max_class_changes, || {
            format!("{max_recv} > {}", config.max_class_changes)
        })?;
        let max_src = source_changes.iter().copied().max().unwrap_or(0) as f64;
        ensure_le("source changes", max_src, config.m / eps + 1.0, String::new)?;
        let sizes: usize = tent.iter().map(Vec::len).sum();
        ensure("tentative coloring is total", sizes == members.len(), || format!("{sizes} vs {}", members.len()))?;
    }

    // Carve the heavy parts.
    let mut first = Vec::with_capacity(k);
    let mut second = Vec::with_capacity(k);
    for class in &tent {
        let proxy = measures(class)?;
        let x = heavy_part(g, class, oracle, psi, star, &[pi, &deg, &proxy], config)?;
        second.push(difference(class, &x));
        first.push(x);
    }
    let w1: Vec<usize> = second.iter().fold(Vec::new(), |acc, c| union(&acc, c));
    let size_before = graph_size(g, &members)?;
    let size_after = graph_size(g, &w1)?;
    if level.cheap() {
        for (i, x) in first.iter().enumerate() {
            let excess = sum_over(psi, x) - eps * star;
            ensure_le("first coloring at least εΨ*", 0.0, excess + slack_for(star), || format!("color {i}"))?;
            ensure_le("first coloring at most εΨ* + max Ψ", excess, max_psi, || format!("color {i}"))?;
        }
        let avg1 = sum_over(psi, &w1) / k as f64;
        let max1 = second.iter().map(|c| sum_over(psi, c)).fold(0.0, f64::max);
        ensure_le("second coloring weakly balanced", max1, config.m * avg1, String::new)?;
        ensure_le("graph shrinks", size_after as f64, (1.0 - eps.powi(10)) * size_before as f64, || {
            format!("{size_after} of {size_before}")
        })?;
    }
    let pi_max = |cs: &[Vec<usize>]| cs.iter().map(|c| sum_over(pi, c)).fold(0.0, f64::max);
    let report = ShrinkReport {
        size_before,
        size_after,
        average: star,
        cut_downs,
        add_tos,
        costly_parts: costly,
        buffer_reductions: reductions,
        sources: (0..k).filter(|&i| is_source[i]).collect(),
        sinks: (0..k).filter(|&i| is_sink[i]).collect(),
        max_receives: receives.iter().copied().max().unwrap_or(0),
        max_source_changes: source_changes.iter().copied().max().unwrap_or(0),
        pi_before: pi_max(classes),
        pi_after: pi_max(&second),
    };
    Ok(Shrunk { first, second, report })
}

/// Per-class bookkeeping of a bin-packing pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BinPackTrace {
    pub parts: usize,
    /// Emitted plus received parts per color.
    pub changes: Vec<usize>,
    /// Whether the all-items greedy fallback ran.
    pub degenerate: bool,
}

impl BinPackTrace {
    pub fn max_changes(&self) -> usize {
        self.changes.iter().copied().max().unwrap_or(0)
    }
}

/// Cuts a part of weight in [lo, hi] off `class` for bin packing.
fn cut_part(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    class: &[usize],
    weights: &[f64],
    lo: f64,
    hi: f64,
) -> Result<Vec<usize>> {
    if let Some(&v) = class.iter().find(|&&v| weights[v] >= lo) {
        return Ok(vec![v]);
    }
    if sum_over(weights, class) <= hi {
        return Ok(class.to_vec());
    }
    Ok(split_at_least(g, class, oracle, weights, lo)?.0)
}

fn lowest_min(totals: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, t) in totals.enumerate() {
        if t < best.1 {
            best = (i, t);
        }
    }
    best.0
}

/// Repairs `first` so that its direct sum with a coloring of class weights
/// `second_weights` is almost strictly balanced around `w_star`.
/// `m` is the maximum vertex weight; `cap` bounds the per-color changes.
#[allow(clippy::too_many_arguments)]
pub fn conquer_binpack1(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    first: &[Vec<usize>],
    second_weights: &[f64],
    weights: &[f64],
    w_star: f64,
    m: f64,
    cap: Option<usize>,
    level: AssertLevel,
) -> Result<(Vec<Vec<usize>>, BinPackTrace)> {
    let k = first.len();
    if second_weights.len() != k {
        return Err(Error::Parameter("second coloring has a different k".into()));
    }
    if let Some(i) = (0..k).find(|&i| second_weights[i] > w_star - m + slack_for(w_star)) {
        return Err(Error::Parameter(format!("class {i} of the second coloring exceeds w* - max w")));
    }
    let mut classes = first.to_vec();
    let mut changes = vec![0usize; k];
    let mut buffer: VecDeque<Vec<usize>> = VecDeque::new();
    let total = |c: &[Vec<usize>], i: usize| sum_over(weights, &c[i]) + second_weights[i];
    while let Some(i) = (0..k).find(|&i| total(&classes, i) > w_star) {
        let x = if sum_over(weights, &classes[i]) < m + max_over(weights, &classes[i]) / 2.0 {
            classes[i].clone()
        } else {
            split_at_least(g, &classes[i], oracle, weights, m)?.0
        };
        if x.is_empty() {
            return Err(Error::Internal { check: "binpack part is nonempty", witness: format!("color {i}") });
        }
        classes[i] = difference(&classes[i], &x);
        changes[i] += 1;
        buffer.push_back(x);
    }
    let parts = buffer.len();
    while let Some(i) = (0..k).find(|&i| total(&classes, i) < w_star - 2.0 * m) {
        let x = buffer.pop_front().ok_or_else(|| Error::Internal {
            check: "buffer nonempty while a class is light",
            witness: format!("color {i}"),
        })?;
        classes[i] = union(&classes[i], &x);
        changes[i] += 1;
    }
    while let Some(x) = buffer.pop_front() {
        let i = lowest_min((0..k).map(|i| total(&classes, i)));
        classes[i] = union(&classes[i], &x);
        changes[i] += 1;
    }
    let trace = BinPackTrace { parts, changes, degenerate: false };
    if level.cheap() {
        for i in 0..k {
            let dev = (total(&classes, i) - w_star).abs();
            ensure_le("direct sum almost strictly balanced", dev, 2.0 * m, || format!("color {i}"))?;
        }
        if let Some(cap) = cap {
            ensure("binpack changes per class", trace.max_changes() <= cap, || {
                format!("{} > {cap}", trace.max_changes())
            })?;
        }
    }
    Ok((classes, trace))
}

/// Turns any k-coloring into a strictly balanced one: cut parts of weight in
/// [m/2, m] off classes above average and pack them greedily.
pub fn strictify_binpack2(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    classes: &[Vec<usize>],
    weights: &[f64],
    m: f64,
    cap: Option<usize>,
    level: AssertLevel,
) -> Result<(Vec<Vec<usize>>, BinPackTrace)> {
    let k = classes.len();
    let members: Vec<usize> = classes.iter().fold(Vec::new(), |acc, c| union(&acc, c));
    let w_star = sum_over(weights, &members) / k as f64;
    let mut changes = vec![0usize; k];
    let mut out = classes.to_vec();
    let mut degenerate = false;
    let mut parts = 0;
    if w_star < m / 2.0 {
        degenerate = true;
        let mut order = members.clone();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        out = vec![Vec::new(); k];
        let mut loads = vec![0.0; k];
        for v in order {
            let i = lowest_min(loads.iter().copied());
            out[i].push(v);
            loads[i] += weights[v];
        }
        for c in &mut out {
            c.sort_unstable();
        }
    } else {
        let mut buffer: VecDeque<Vec<usize>> = VecDeque::new();
        while let Some(i) = (0..k).find(|&i| sum_over(weights, &out[i]) > w_star) {
            let x = cut_part(g, oracle, &out[i], weights, m / 2.0, m)?;
            if x.is_empty() {
                return Err(Error::Internal { check: "binpack part is nonempty", witness: format!("color {i}") });
            }
            out[i] = difference(&out[i], &x);
            changes[i] += 1;
            buffer.push_back(x);
        }
        parts = buffer.len();
        let floor = w_star - (1.0 - 1.0 / k as f64) * m;
        while let Some(i) = (0..k).find(|&i| sum_over(weights, &out[i]) < floor) {
            let x = buffer.pop_front().ok_or_else(|| Error::Internal {
                check: "buffer nonempty while a class is light",
                witness: format!("color {i}"),
            })?;
            out[i] = union(&out[i], &x);
            changes[i] += 1;
        }
        while let Some(x) = buffer.pop_front() {
            let i = lowest_min(out.iter().map(|c| sum_over(weights, c)));
            out[i] = union(&out[i], &x);
            changes[i] += 1;
        }
    }
    let trace = BinPackTrace { parts, changes, degenerate };
    if level.cheap() {
        let sums: Vec<f64> = out.iter().map(|c| sum_over(weights, c)).collect();
        let report = strict_balance_report(&sums, m);
        ensure("strict balance", report.holds_within(slack_for(w_star + m)), || {
            format!("deviation {} > tolerance {}", report.max_abs_deviation, report.tolerance)
        })?;
        if let (Some(cap), false) = (cap, degenerate) {
            ensure("binpack changes per class", trace.max_changes() <= cap, || {
                format!("{} > {cap}", trace.max_changes())
            })?;
        }
    }
    Ok((out, trace))
}

/// Statistics of the shrink-and-conquer recursion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecursionReport {
    pub shrinks: Vec<ShrinkReport>,
    pub conquers: Vec<BinPackTrace>,
    /// Whether the base case had to fall back to strict packing.
    pub packed_base: bool,
}

/// Turns a weakly balanced coloring (as classes) into an almost strictly
/// balanced one, recursing on the shrunk part while max w ≤ ε^5·avg.
#[allow(clippy::too_many_arguments)]
pub fn almost_strict(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    classes: &[Vec<usize>],
    weights: &[f64],
    pi: &[f64],
    m: f64,
    config: &ShrinkConfig,
    report: &mut RecursionReport,
) -> Result<Vec<Vec<usize>>> {
    let k = classes.len();
    let members: Vec<usize> = classes.iter().fold(Vec::new(), |acc, c| union(&acc, c));
    let avg = sum_over(weights, &members) / k as f64;
    if avg <= 0.0 {
        return Ok(classes.to_vec());
    }
    if avg < m {
        report.packed_base = true;
        return Ok(strictify_binpack2(g, oracle, classes, weights, m, None, config.level)?.0);
    }
    if m > config.epsilon.powi(5) * avg {
        let zeros = vec![0.0; k];
        let (out, trace) = conquer_binpack1(g, oracle, classes, &zeros, weights, avg, m, None, config.level)?;
        report.conquers.push(trace);
        return Ok(out);
    }
    let shrunk = shrink(g, oracle, classes, weights, pi, config)?;
    report.shrinks.push(shrunk.report.clone());
    let second = almost_strict(g, oracle, &shrunk.second, weights, pi, m, config, report)?;
    let second_weights: Vec<f64> = second.iter().map(|c| sum_over(weights, c)).collect();
    if config.level.cheap() {
        let w0: Vec<usize> = shrunk.first.iter().fold(Vec::new(), |acc, c| union(&acc, c));
        let w1: Vec<usize> = difference(&members, &w0);
        let (avg0, avg1) = (sum_over(weights, &w0) / k as f64, sum_over(weights, &w1) / k as f64);
        for (i, (&w, first)) in second_weights.iter().zip(&shrunk.first).enumerate() {
            ensure_le("recursed class below avg - max w", w, avg - m, || format!("color {i}"))?;
            let d0 = (sum_over(weights, first) - avg0).abs();
            let d1 = (w - avg1).abs();
            ensure_le("first coloring near its average", d0, CONQUER_SLACK * m, || format!("color {i}"))?;
            ensure_le("second coloring near its average", d1, CONQUER_SLACK * m, || format!("color {i}"))?;
        }
    }
    let (first, trace) = conquer_binpack1(
        g,
        oracle,
        &shrunk.first,
        &second_weights,
        weights,
        avg,
        m,
        Some(config.max_class_changes),
        config.level,
    )?;
    report.conquers.push(trace);
    Ok(first.iter().zip(&second).map(|(a, b)| union(a, b)).collect())
}

/// Deviation allowance, in units of max w, for the inputs of the conquer phase.
pub const CONQUER_SLACK: f64 = 4.0;

/// Result of [`partition`].
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub coloring: Coloring,
    pub balance: BalanceReport,
    pub max_boundary: f64,
    pub avg_boundary: f64,
    pub stage_one_max_boundary: f64,
    pub almost_strict_max_boundary: f64,
    /// s·(q·k^{-1/p}·‖c‖_p + Δ_c) with s the worst observed oracle ratio.
    pub reference: f64,
    pub oracle: OracleStats,
    pub recursion: RecursionReport,
    pub strict_pack: BinPackTrace,
}

fn q_of(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Strictly balanced k-coloring with small maximum boundary cost.
pub fn partition(g: &WeightedGraph, oracle: &dyn SplitOracle, k: usize, config: &ShrinkConfig) -> Result<PartitionReport> {
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    let n = g.vertex_count();
    let inst = Instrumented::new(oracle);
    let top = g.max_weight();
    let scaled: Vec<f64> = if top > 0.0 { g.weights().iter().map(|&w| w / top).collect() } else { g.weights().to_vec() };
    let h = g.with_weights(scaled)?;
    let w = h.weights().to_vec();
    let m = h.max_weight();
    let level = config.level;

    let (chi, boundary) = if k == 1 {
        (Coloring::new(&h, 1, vec![0; n])?, None)
    } else {
        let (chi, rep) = balance_boundary(&h, &inst, &[&w], k, level)?;
        (chi, Some(rep))
    };
    let stage_one_max_boundary = chi.max_boundary();
    let pi = split_cost_measure(&h, 1.0, inst.p())?;
    let mut recursion = RecursionReport::default();
    let (almost, strict, strict_pack) = if k == 1 {
        (chi.classes(), chi.classes(), BinPackTrace { changes: vec![0], ..Default::default() })
    } else {
        let almost = almost_strict(&h, &inst, &chi.classes(), &w, pi.values(), m, config, &mut recursion)?;
        let cap = (!recursion.packed_base).then_some(config.max_class_changes);
        let (strict, trace) = strictify_binpack2(&h, &inst, &almost, &w, m, cap, level)?;
        (almost, strict, trace)
    };
    let almost_strict_max_boundary = Coloring::from_classes(&h, &almost)?.max_boundary();
    let coloring = Coloring::from_classes(g, &strict)?;
    let balance = strict_balance_report(coloring.class_weights(), top);
    if level.cheap() {
        let slack = slack_for(g.total_weight() + top);
        ensure("output strictly balanced", balance.holds_within(slack), || {
            format!("deviation {} > tolerance {}", balance.max_abs_deviation, balance.tolerance)
        })?;
    }
    let stats = inst.stats();
    let p = inst.p();
    let s = boundary.as_ref().map_or(0.0, |b| b.observed_quality).max(stats.max_ratio);
    let reference =
        s * (q_of(p) * (k as f64).powf(-1.0 / p) * p_norm(g.costs().iter().copied(), p)? + max_weighted_degree(g));
    Ok(PartitionReport {
        max_boundary: coloring.max_boundary(),
        avg_boundary: coloring.avg_boundary(),
        coloring,
        balance,
        stage_one_max_boundary,
        almost_strict_max_boundary,
        reference,
        oracle: stats,
        recursion,
        strict_pack,
    })
}
