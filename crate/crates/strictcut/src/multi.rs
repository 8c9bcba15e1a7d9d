//! Multi-balanced colorings: the recursive multi-measure 2-coloring, the
//! Move-based rebalancer and boundary-cost balancing on top of them.

use crate::check::{ensure, ensure_le, slack_for, AssertLevel};
use crate::error::{Error, Result};
use crate::graph::{
    difference, mask_of, max_over, max_weighted_degree, p_norm, sum_over, union, Coloring, Scope, SubgraphView,
    WeightedGraph,
};
use crate::oracle::{split_cost_measure, SplitOracle};
use std::collections::BTreeSet;

/// Largest supported measure stack; bounds grow like 2^r.
pub const MAX_MEASURES: usize = 8;

/// Result of [`multibalcut`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoColoring {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    /// Cost of the edges of G[W] joining the two classes.
    pub cut: f64,
    /// Largest ∂_X U / ‖c|X‖_p over the oracle calls made (0 if all cuts were free).
    pub observed_quality: f64,
    pub oracle_calls: usize,
}

/// Calls the oracle on G[members] and reports the set and its cut ratio.
pub(crate) fn split_in(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    values: &[f64],
    target: f64,
) -> Result<(Vec<usize>, f64)> {
    let view = SubgraphView::new(g, members)?;
    let target = target.clamp(0.0, view.sum(values));
    let set = oracle.split(&view, values, target)?;
    let cut = view.boundary_cost(&set, Scope::View)?;
    let ratio = if cut == 0.0 { 0.0 } else { cut / view.cost_norm(oracle.p())? };
    Ok((set, ratio))
}

/// U ⊆ members with lo ≤ Φ(U) ≤ lo + max Φ, via the shifted symmetric target.
pub(crate) fn split_at_least(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    values: &[f64],
    lo: f64,
) -> Result<(Vec<usize>, f64)> {
    split_in(g, members, oracle, values, lo + max_over(values, members) / 2.0)
}

fn check_stack(g: &WeightedGraph, stack: &[&[f64]]) -> Result<()> {
    if stack.len() > MAX_MEASURES {
        return Err(Error::Parameter(format!("{} measures exceed the cap of {MAX_MEASURES}", stack.len())));
    }
    if let Some(bad) = stack.iter().position(|m| m.len() != g.vertex_count()) {
        return Err(Error::Parameter(format!("measure {} does not cover the vertex set", bad + 1)));
    }
    Ok(())
}

/// 2-colors G[W] so that every class carries at most ¾(Φ_j(W) + 2^{r-j}·max Φ_j)
/// of each measure (½(Φ_1(W) + 2^{r-1}·max Φ_1) for the first) and the cut is at
/// most (2^r - 1)·s·‖c|W‖_p, where s is the worst ratio the oracle produced.
/// `stack[0]` is the first measure.
pub fn multibalcut(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    stack: &[&[f64]],
    level: AssertLevel,
) -> Result<TwoColoring> {
    if stack.is_empty() {
        return Err(Error::Parameter("multibalcut needs at least one measure".into()));
    }
    check_stack(g, stack)?;
    let mut calls = 0;
    let (first, second, s) = cut_rec(g, members, oracle, stack, level, &mut calls)?;
    let view = SubgraphView::new(g, members)?;
    let cut = view.boundary_cost(&first, Scope::View)?;
    Ok(TwoColoring { first, second, cut, observed_quality: s, oracle_calls: calls })
}

type Halves = (Vec<usize>, Vec<usize>, f64);

fn cut_rec(
    g: &WeightedGraph,
    members: &[usize],
    oracle: &dyn SplitOracle,
    stack: &[&[f64]],
    level: AssertLevel,
    calls: &mut usize,
) -> Result<Halves> {
    if members.is_empty() {
        return Ok((Vec::new(), Vec::new(), 0.0));
    }
    let r = stack.len();
    let last = stack[r - 1];
    let (u1, mut s) = split_in(g, members, oracle, last, sum_over(last, members) / 2.0)?;
    *calls += 1;
    let u2 = difference(members, &u1);
    let (first, second) = if r == 1 {
        (u1, u2)
    } else {
        let (mut a1, mut b1, s1) = cut_rec(g, &u1, oracle, &stack[..r - 1], level, calls)?;
        let (mut a2, mut b2, s2) = cut_rec(g, &u2, oracle, &stack[..r - 1], level, calls)?;
        s = s.max(s1).max(s2);
        // Class b of the half U_b gets at most half of U_b's last measure.
        if sum_over(last, &a1) > sum_over(last, &u1) / 2.0 {
            std::mem::swap(&mut a1, &mut b1);
        }
        if sum_over(last, &b2) > sum_over(last, &u2) / 2.0 {
            std::mem::swap(&mut a2, &mut b2);
        }
        (union(&a1, &a2), union(&b1, &b2))
    };
    if level.cheap() {
        check_cut_bounds(g, members, stack, &first, &second, s, oracle.p())?;
    }
    Ok((first, second, s))
}

fn check_cut_bounds(
    g: &WeightedGraph,
    members: &[usize],
    stack: &[&[f64]],
    first: &[usize],
    second: &[usize],
    s: f64,
    p: f64,
) -> Result<()> {
    let r = stack.len();
    for (j, phi) in stack.iter().enumerate() {
        let total = sum_over(phi, members);
        let max = max_over(phi, members);
        let shift = 2f64.powi((r - 1 - j) as i32);
        let bound = if j == 0 { 0.5 * (total + shift * max) } else { 0.75 * (total + shift * max) };
        for class in [first, second] {
            ensure_le("multibalcut class measure", sum_over(phi, class), bound, || {
                format!("measure {} of {r}, |W| = {}", j + 1, members.len())
            })?;
        }
    }
    let view = SubgraphView::new(g, members)?;
    let cut = view.boundary_cost(first, Scope::View)?;
    let bound = (2f64.powi(r as i32) - 1.0) * s * view.cost_norm(p)?;
    ensure_le("multibalcut cut cost", cut, bound, || format!("r = {r}, observed s = {s}"))
}

/// Lifecycle of a color in the rebalancer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorState {
    Untouched,
    Pending,
    Finished,
}

/// One application of Move to a color.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveRecord {
    pub color: usize,
    /// Depth of the color in the forest of Moves.
    pub depth: usize,
    /// The tentative class X(i) at the time of the Move.
    pub tentative: Vec<usize>,
    /// The final class of the color.
    pub kept: Vec<usize>,
    /// The two light colors receiving the remainder, if the color was heavy.
    pub children: Option<[usize; 2]>,
}

/// Everything the rebalancer decided, for external verification.
#[derive(Debug, Clone, PartialEq)]
pub struct RebalanceTrace {
    pub k: usize,
    /// Size of the measure stack handed to [`multibalcut`].
    pub stack_size: usize,
    pub average: f64,
    pub max_value: f64,
    pub heavy_threshold: f64,
    pub initial_classes: Vec<Vec<usize>>,
    pub initially_pending: Vec<usize>,
    pub moves: Vec<MoveRecord>,
    /// V_in per color (empty for roots).
    pub inflow: Vec<Vec<usize>>,
    /// V_out per color (empty unless the color was heavy).
    pub outflow: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    /// Cost of monochromatic boundary edges of V_in, when a reference coloring was given.
    pub monochrome_inflow: Vec<f64>,
    pub observed_quality: f64,
}

impl RebalanceTrace {
    /// Depth of the deepest node in the tree rooted at `root`.
    pub fn tree_depth(&self, root: usize) -> usize {
        let mut best = 0;
        for m in &self.moves {
            let mut x = m.color;
            while let Some(p) = self.parent[x] {
                x = p;
            }
            if x == root {
                best = best.max(m.depth);
            }
        }
        // Leaves never move when they become medium on creation, so count children too.
        for (c, p) in self.parent.iter().enumerate() {
            if p.is_some() {
                let mut x = c;
                let mut d = 0;
                while let Some(q) = self.parent[x] {
                    x = q;
                    d += 1;
                }
                if x == root {
                    best = best.max(d);
                }
            }
        }
        best
    }
}

/// Options for [`move_rebalance`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RebalanceOptions<'a> {
    pub level: AssertLevel,
    /// Reference coloring whose monochromatic edges define the dynamic measure
    /// appended to the stack at Move time.
    pub monochrome: Option<&'a [usize]>,
}

struct Rebalancer<'a> {
    g: &'a WeightedGraph,
    oracle: &'a dyn SplitOracle,
    psi: &'a [f64],
    others: &'a [&'a [f64]],
    opts: RebalanceOptions<'a>,
    k: usize,
    stack_size: usize,
    average: f64,
    max_psi: f64,
    threshold: f64,
    original: Vec<Vec<usize>>,
    inflow: Vec<Vec<usize>>,
    outflow: Vec<Vec<usize>>,
    kept: Vec<Option<Vec<usize>>>,
    tent_psi: Vec<f64>,
    state: Vec<ColorState>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    excess: Vec<f64>,
    mono_inflow: Vec<f64>,
    moves: Vec<MoveRecord>,
    observed: f64,
}

impl Rebalancer<'_> {
    fn is_light(&self, i: usize) -> bool {
        self.tent_psi[i] < self.average
    }

    fn is_heavy(&self, i: usize) -> bool {
        self.tent_psi[i] >= self.threshold
    }

    fn tentative(&self, i: usize) -> Vec<usize> {
        match self.state[i] {
            ColorState::Untouched => self.original[i].clone(),
            ColorState::Pending => union(&self.original[i], &self.inflow[i]),
            ColorState::Finished => self.kept[i].clone().expect("finished colors keep a class"),
        }
    }

    /// Φ^(r+1) at Move time: cost of monochromatic edges leaving V_in(i), per endpoint in V_in(i).
    fn dynamic_measure(&self, i: usize, mono: &[usize]) -> Result<Vec<f64>> {
        let n = self.g.vertex_count();
        let mut values = vec![0.0; n];
        let inside = mask_of(n, &self.inflow[i])?;
        for &v in &self.inflow[i] {
            values[v] = self
                .g
                .neighbors(v)
                .iter()
                .filter(|&&(u, _)| !inside[u] && mono[u] == mono[v])
                .map(|&(_, e)| self.g.cost(e))
                .sum();
        }
        Ok(values)
    }

    fn run(&mut self) -> Result<()> {
        let mut pending: BTreeSet<usize> = (0..self.k).filter(|&i| self.state[i] == ColorState::Pending).collect();
        while let Some(i) = pending.pop_first() {
            let x = self.tentative(i);
            if !self.is_heavy(i) {
                self.state[i] = ColorState::Finished;
                self.moves.push(MoveRecord {
                    color: i,
                    depth: self.depth[i],
                    tentative: x.clone(),
                    kept: x.clone(),
                    children: None,
                });
                self.kept[i] = Some(x);
            } else {
                let light: Vec<usize> = (0..self.k)
                    .filter(|&c| self.state[c] == ColorState::Untouched && self.is_light(c))
                    .take(2)
                    .collect();
                if light.len() < 2 {
                    return Err(Error::Internal {
                        check: "fewer than two light colors for a heavy color",
                        witness: format!("color {i}, Ψ(tent) = {}, avg = {}", self.tent_psi[i], self.average),
                    });
                }
                let (kept, ratio) = split_at_least(self.g, &x, self.oracle, self.psi, self.average)?;
                self.observed = self.observed.max(ratio);
                let rest = difference(&x, &kept);
                let dynamic = match self.opts.monochrome {
                    Some(mono) => Some(self.dynamic_measure(i, mono)?),
                    None => None,
                };
                let mut stack: Vec<&[f64]> = vec![self.psi];
                stack.extend_from_slice(self.others);
                if let Some(d) = &dynamic {
                    stack.push(d);
                }
                let two = multibalcut(self.g, &rest, self.oracle, &stack, self.opts.level)?;
                self.observed = self.observed.max(two.observed_quality);
                self.tent_psi[i] = sum_over(self.psi, &kept);
                self.state[i] = ColorState::Finished;
                self.outflow[i] = rest;
                for (x_b, part) in [(light[0], two.first), (light[1], two.second)] {
                    self.inflow[x_b] = part;
                    self.tent_psi[x_b] = sum_over(self.psi, &self.original[x_b]) + sum_over(self.psi, &self.inflow[x_b]);
                    self.state[x_b] = ColorState::Pending;
                    self.parent[x_b] = Some(i);
                    self.depth[x_b] = self.depth[i] + 1;
                    self.excess[x_b] = self.tent_psi[x_b] - self.average;
                    if let Some(mono) = self.opts.monochrome {
                        self.mono_inflow[x_b] = self.dynamic_measure(x_b, mono)?.iter().sum();
                    }
                    pending.insert(x_b);
                }
                self.moves.push(MoveRecord {
                    color: i,
                    depth: self.depth[i],
                    tentative: x,
                    kept: kept.clone(),
                    children: Some([light[0], light[1]]),
                });
                self.kept[i] = Some(kept);
                if self.opts.level.cheap() {
                    self.check_move(i, [light[0], light[1]])?;
                }
            }
            if self.opts.level.cheap() {
                self.check_partitions()?;
            }
        }
        Ok(())
    }

    fn check_move(&self, i: usize, children: [usize; 2]) -> Result<()> {
        let slack = slack_for(self.average + self.max_psi);
        // The finished color is medium, the receivers are no longer light.
        ensure("Move keeps avg <= Ψ(U)", self.tent_psi[i] >= self.average - slack, || {
            format!("color {i}: Ψ(U) = {} < avg {}", self.tent_psi[i], self.average)
        })?;
        ensure_le("Move keeps Ψ(U) <= avg + max", self.tent_psi[i], self.average + self.max_psi, || {
            format!("color {i}")
        })?;
        let r = self.stack_size as i32;
        for x in children {
            ensure("receiver is not light", self.tent_psi[x] >= self.average - slack, || {
                format!("color {x}: Ψ(tent) = {} < avg {}", self.tent_psi[x], self.average)
            })?;
            // Excess at least halves along each arc.
            let bound = self.excess_of(i) / 2.0 + 2f64.powi(r - 2) * self.max_psi;
            ensure_le("excess halves along arcs", self.excess[x], bound, || format!("arc {i} -> {x}"))?;
        }
        Ok(())
    }

    fn excess_of(&self, i: usize) -> f64 {
        if self.parent[i].is_some() {
            self.excess[i]
        } else {
            sum_over(self.psi, &self.original[i]) - self.average
        }
    }

    /// Tentative classes partition V, states match weight bands, |Light| ≥ 2|Heavy|.
    fn check_partitions(&self) -> Result<()> {
        let n = self.g.vertex_count();
        let slack = slack_for(self.average + self.max_psi);
        let sizes: usize = (0..self.k).map(|i| self.tentative_len(i)).sum();
        ensure("tentative classes cover V", sizes == n, || format!("{sizes} members for {n} vertices"))?;
        if self.opts.level.full() {
            let mut seen = vec![false; n];
            for i in 0..self.k {
                for v in self.tentative(i) {
                    ensure("tentative classes are disjoint", !seen[v], || format!("vertex {v} twice"))?;
                    seen[v] = true;
                }
            }
        }
        let (mut light, mut heavy) = (0usize, 0usize);
        for i in 0..self.k {
            let psi = self.tent_psi[i];
            let state = self.state[i];
            if psi < self.average - slack {
                light += 1;
                ensure("Light ⊆ Untouched", state == ColorState::Untouched, || format!("color {i} is {state:?}"))?;
            }
            if psi >= self.threshold + slack {
                heavy += 1;
                ensure("Heavy ⊆ Pending", state == ColorState::Pending, || format!("color {i} is {state:?}"))?;
            }
            if state == ColorState::Finished {
                ensure("Finished ⊆ Medium", psi >= self.average - slack && psi < self.threshold + slack, || {
                    format!("color {i}: Ψ = {psi}")
                })?;
            }
        }
        ensure("|Light| >= 2|Heavy|", light >= 2 * heavy, || format!("{light} light, {heavy} heavy"))
    }

    fn tentative_len(&self, i: usize) -> usize {
        match self.state[i] {
            ColorState::Untouched => self.original[i].len(),
            ColorState::Pending => self.original[i].len() + self.inflow[i].len(),
            ColorState::Finished => self.kept[i].as_ref().map_or(0, Vec::len),
        }
    }
}

/// Rebalances `chi` with respect to `psi` by Moves from heavy to light colors,
/// keeping the measures in `others` within a constant factor of their previous
/// maxima. Returns the new coloring and the full trace.
pub fn move_rebalance(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    chi: &Coloring,
    psi: &[f64],
    others: &[&[f64]],
    opts: RebalanceOptions<'_>,
) -> Result<(Coloring, RebalanceTrace)> {
    let k = chi.k();
    let stack_size = 1 + others.len() + usize::from(opts.monochrome.is_some());
    let mut all: Vec<&[f64]> = vec![psi];
    all.extend_from_slice(others);
    check_stack(g, &all)?;
    if stack_size > MAX_MEASURES {
        return Err(Error::Parameter(format!("{stack_size} measures exceed the cap of {MAX_MEASURES}")));
    }
    if let Some(mono) = opts.monochrome {
        if mono.len() != g.vertex_count() {
            return Err(Error::Parameter("reference coloring does not cover the vertex set".into()));
        }
    }
    let original = chi.classes();
    let total: f64 = psi.iter().sum();
    let max_psi = psi.iter().copied().fold(0.0, f64::max);
    let average = total / k as f64;
    let threshold = 3.0 * average + 2f64.powi(stack_size as i32) * max_psi;
    let tent_psi: Vec<f64> = original.iter().map(|c| sum_over(psi, c)).collect();
    let state: Vec<ColorState> = tent_psi
        .iter()
        .map(|&x| if total > 0.0 && x >= threshold { ColorState::Pending } else { ColorState::Untouched })
        .collect();
    let initially_pending: Vec<usize> = (0..k).filter(|&i| state[i] == ColorState::Pending).collect();
    let mut rb = Rebalancer {
        g,
        oracle,
        psi,
        others,
        opts,
        k,
        stack_size,
        average,
        max_psi,
        threshold,
        original,
        inflow: vec![Vec::new(); k],
        outflow: vec![Vec::new(); k],
        kept: vec![None; k],
        tent_psi,
        state,
        parent: vec![None; k],
        depth: vec![0; k],
        excess: vec![0.0; k],
        mono_inflow: vec![0.0; k],
        moves: Vec::new(),
        observed: 0.0,
    };
    rb.run()?;

    let mut assignment = chi.assignment().to_vec();
    for (i, kept) in rb.kept.iter().enumerate() {
        if let Some(kept) = kept {
            for &v in kept {
                assignment[v] = i;
            }
        }
    }
    let result = Coloring::new(g, k, assignment)?;
    let trace = RebalanceTrace {
        k,
        stack_size,
        average,
        max_value: max_psi,
        heavy_threshold: threshold,
        initial_classes: rb.original.clone(),
        initially_pending,
        moves: rb.moves.clone(),
        inflow: rb.inflow.clone(),
        outflow: rb.outflow.clone(),
        parent: rb.parent.clone(),
        monochrome_inflow: rb.mono_inflow.clone(),
        observed_quality: rb.observed,
    };
    if opts.level.cheap() {
        check_outcome(&trace, &result, psi, others)?;
    }
    Ok((result, trace))
}

fn check_outcome(trace: &RebalanceTrace, result: &Coloring, psi: &[f64], others: &[&[f64]]) -> Result<()> {
    let classes = result.classes();
    let slack = slack_for(trace.average + trace.max_value);
    for (i, class) in classes.iter().enumerate() {
        let w = sum_over(psi, class);
        ensure("rebalanced class is not heavy", w < trace.heavy_threshold + slack, || {
            format!("color {i}: Ψ = {w}, threshold {}", trace.heavy_threshold)
        })?;
    }
    // Conservation: χ⁻¹(i) ⊔ V_in(i) = χ̂⁻¹(i) ⊔ V_out(i), and V_out(i) = V_in(x₁) ⊔ V_in(x₂).
    for m in &trace.moves {
        let i = m.color;
        let lhs = trace.initial_classes[i].len() + trace.inflow[i].len();
        let rhs = classes[i].len() + trace.outflow[i].len();
        ensure("conservation of color classes", lhs == rhs, || format!("color {i}: {lhs} vs {rhs}"))?;
        if let Some([x1, x2]) = m.children {
            let sizes = trace.inflow[x1].len() + trace.inflow[x2].len();
            ensure("V_out splits into the children's V_in", sizes == trace.outflow[i].len(), || {
                format!("color {i}")
            })?;
            let out = union(&trace.inflow[x1], &trace.inflow[x2]);
            ensure("V_out splits into the children's V_in", out == trace.outflow[i], || format!("color {i}"))?;
        }
        let lhs_set = union(&trace.initial_classes[i], &trace.inflow[i]);
        let rhs_set = union(&classes[i], &trace.outflow[i]);
        ensure("conservation of color classes", lhs_set == rhs_set, || format!("color {i}"))?;
    }
    // Depth of each nontrivial tree.
    for &s in &trace.initially_pending {
        let d = trace.tree_depth(s) as f64;
        let w = sum_over(psi, &trace.initial_classes[s]);
        ensure_le("forest depth", d, (w / trace.average).log2(), || format!("root {s}"))?;
    }
    // Carried measures grow at most fourfold.
    let r = trace.stack_size as i32;
    for (j, phi) in others.iter().enumerate() {
        let before = phi_max(phi, &trace.initial_classes);
        let after = phi_max(phi, &classes);
        let max_value = phi.iter().copied().fold(0.0, f64::max);
        let bound = 4.0 * before + 3.0 * 2f64.powi(r - 2 - j as i32) * max_value;
        ensure_le("carried measure grows at most fourfold", after, bound, || format!("measure {}", j + 2))?;
    }
    Ok(())
}

fn phi_max(phi: &[f64], classes: &[Vec<usize>]) -> f64 {
    classes.iter().map(|c| sum_over(phi, c)).fold(0.0, f64::max)
}

/// Per-measure balance summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureBalance {
    pub max_class: f64,
    pub average: f64,
    pub max_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiBalanceReport {
    pub traces: Vec<RebalanceTrace>,
    pub balance: Vec<MeasureBalance>,
    pub avg_boundary: f64,
    /// q·k^{-1/p}·s·‖c‖_p with s the worst observed oracle ratio.
    pub reference: f64,
    pub observed_quality: f64,
}

/// Recursive oracle bisection into k classes; targets w(W)·⌈k/2⌉/k.
#[allow(clippy::too_many_arguments)]
fn bisect(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    members: &[usize],
    k: usize,
    first: usize,
    unit: &[f64],
    assignment: &mut [usize],
    observed: &mut f64,
) -> Result<()> {
    if k == 1 {
        for &v in members {
            assignment[v] = first;
        }
        return Ok(());
    }
    let half = k.div_ceil(2);
    let mut values = g.weights();
    if sum_over(values, members) == 0.0 {
        values = unit;
    }
    let target = sum_over(values, members) * half as f64 / k as f64;
    let (u, ratio) = split_in(g, members, oracle, values, target)?;
    *observed = observed.max(ratio);
    let rest = difference(members, &u);
    bisect(g, oracle, &u, half, first, unit, assignment, observed)?;
    bisect(g, oracle, &rest, k - half, first + half, unit, assignment, observed)
}

fn q_of(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// A k-coloring balanced with respect to every measure in `measures`:
/// recursive bisection, then one rebalancing pass per measure, the first
/// measure last.
pub fn multibalance(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    measures: &[&[f64]],
    k: usize,
    level: AssertLevel,
) -> Result<(Coloring, MultiBalanceReport)> {
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    check_stack(g, measures)?;
    let n = g.vertex_count();
    let mut assignment = vec![0; n];
    let mut observed = 0.0;
    if k > 1 {
        let all: Vec<usize> = (0..n).collect();
        let unit = vec![1.0; n];
        bisect(g, oracle, &all, k, 0, &unit, &mut assignment, &mut observed)?;
    }
    let mut chi = Coloring::new(g, k, assignment)?;
    let mut traces = Vec::new();
    if k > 1 {
        for j in (0..measures.len()).rev() {
            let (next, trace) = move_rebalance(
                g,
                oracle,
                &chi,
                measures[j],
                &measures[j + 1..],
                RebalanceOptions { level, monochrome: None },
            )?;
            observed = f64::max(observed, trace.observed_quality);
            traces.push(trace);
            chi = next;
        }
    }
    let classes = chi.classes();
    let balance = measures
        .iter()
        .map(|phi| MeasureBalance {
            max_class: phi_max(phi, &classes),
            average: phi.iter().sum::<f64>() / k as f64,
            max_value: phi.iter().copied().fold(0.0, f64::max),
        })
        .collect();
    let p = oracle.p();
    let reference = q_of(p) * (k as f64).powf(-1.0 / p) * observed * p_norm(g.costs().iter().copied(), p)?;
    let report =
        MultiBalanceReport { traces, balance, avg_boundary: chi.avg_boundary(), reference, observed_quality: observed };
    Ok((chi, report))
}

/// Outcome of [`balance_boundary`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub stage_one: MultiBalanceReport,
    pub stage_one_max_boundary: f64,
    pub stage_one_avg_boundary: f64,
    pub max_boundary: f64,
    pub trace: Option<RebalanceTrace>,
    /// s·(q·k^{-1/p}·‖c‖_p + Δ_c) with s the worst observed oracle ratio.
    pub reference: f64,
    pub observed_quality: f64,
}

/// A k-coloring balanced for `user` measures and the splitting cost measure,
/// whose maximum boundary cost is balanced by treating boundary cost as a measure.
pub fn balance_boundary(
    g: &WeightedGraph,
    oracle: &dyn SplitOracle,
    user: &[&[f64]],
    k: usize,
    level: AssertLevel,
) -> Result<(Coloring, BoundaryReport)> {
    let p = oracle.p();
    let pi = split_cost_measure(g, 1.0, p)?;
    let mut stack: Vec<&[f64]> = vec![pi.values()];
    stack.extend_from_slice(user);
    if stack.len() + 2 > MAX_MEASURES {
        return Err(Error::Parameter(format!("at most {} user measures", MAX_MEASURES - 3)));
    }
    let (chi, stage_one) = multibalance(g, oracle, &stack, k, level)?;
    let stage_one_max_boundary = chi.max_boundary();
    let stage_one_avg_boundary = chi.avg_boundary();
    let mut observed = stage_one.observed_quality;
    let (result, trace) = if k > 1 {
        let psi: Vec<f64> = (0..g.vertex_count())
            .map(|v| {
                g.neighbors(v).iter().filter(|&&(u, _)| chi.color(u) != chi.color(v)).map(|&(_, e)| g.cost(e)).sum()
            })
            .collect();
        let (next, trace) = move_rebalance(
            g,
            oracle,
            &chi,
            &psi,
            &stack,
            RebalanceOptions { level, monochrome: Some(chi.assignment()) },
        )?;
        observed = observed.max(trace.observed_quality);
        (next, Some(trace))
    } else {
        (chi, None)
    };
    let reference = observed
        * (q_of(p) * (k as f64).powf(-1.0 / p) * p_norm(g.costs().iter().copied(), p)? + max_weighted_degree(g));
    let report = BoundaryReport {
        stage_one,
        stage_one_max_boundary,
        stage_one_avg_boundary,
        max_boundary: result.max_boundary(),
        trace,
        reference,
        observed_quality: observed,
    };
    Ok((result, report))
}
