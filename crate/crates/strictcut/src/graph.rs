//! Weighted graphs, induced views, measures, colorings and the strict-balance predicate.

use crate::error::{Error, Result};

/// Undirected graph with nonnegative edge costs and vertex weights.
///
/// Vertex ids are `0..n`, edge ids `0..m`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, usize)>>,
    ends: Vec<(usize, usize)>,
    costs: Vec<f64>,
    weights: Vec<f64>,
}

fn check_value(kind: &str, id: usize, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Parameter(format!("{kind} {id} has invalid value {x}")));
    }
    Ok(())
}

impl WeightedGraph {
    /// Builds a graph from vertex weights and `(u, v, cost)` triples.
    pub fn new(weights: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = weights.len();
        for (v, &w) in weights.iter().enumerate() {
            check_value("vertex weight", v, w)?;
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut ends = Vec::with_capacity(edges.len());
        let mut costs = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for (e, &(u, v, c)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Domain(format!("edge {e} = ({u},{v}) references a vertex >= {n}")));
            }
            if u == v {
                return Err(Error::Parameter(format!("edge {e} is a self-loop at {u}")));
            }
            check_value("edge cost", e, c)?;
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::Parameter(format!("edge {e} duplicates ({},{})", key.0, key.1)));
            }
            adj[u].push((v, e));
            adj[v].push((u, e));
            ends.push(key);
            costs.push(c);
        }
        Ok(WeightedGraph { adj, ends, costs, weights })
    }

    /// Same topology and costs, different vertex weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.vertex_count() {
            return Err(Error::Parameter(format!(
                "expected {} weights, got {}",
                self.vertex_count(),
                weights.len()
            )));
        }
        for (v, &w) in weights.iter().enumerate() {
            check_value("vertex weight", v, w)?;
        }
        Ok(WeightedGraph { weights, ..self.clone() })
    }

    /// Same topology and weights, different edge costs.
    pub fn with_costs(&self, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != self.edge_count() {
            return Err(Error::Parameter(format!("expected {} costs, got {}", self.edge_count(), costs.len())));
        }
        for (e, &c) in costs.iter().enumerate() {
            check_value("edge cost", e, c)?;
        }
        Ok(WeightedGraph { costs, ..self.clone() })
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.costs.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn cost(&self, e: usize) -> f64 {
        self.costs[e]
    }

    /// Endpoints of edge `e`, smaller id first.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// `(neighbor, edge id)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Weighted degree c(δ(v)).
    pub fn vertex_cost(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, e)| self.costs[e]).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Edges as `(u, v, cost)` triples in id order.
    pub fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        self.ends.iter().zip(&self.costs).map(|(&(u, v), &c)| (u, v, c)).collect()
    }

    pub fn full_view(&self) -> SubgraphView<'_> {
        SubgraphView {
            host: self,
            members: (0..self.vertex_count()).collect(),
            mask: vec![true; self.vertex_count()],
        }
    }

    pub fn view(&self, members: &[usize]) -> Result<SubgraphView<'_>> {
        SubgraphView::new(self, members)
    }

    /// Host boundary cost c(δ(U)).
    pub fn boundary_cost(&self, set: &[usize]) -> Result<f64> {
        let mask = mask_of(self.vertex_count(), set)?;
        Ok(cut_with_mask(self, set, &mask, None))
    }
}

/// Membership bitmap of `set` over `0..n`.
pub fn mask_of(n: usize, set: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &v in set {
        if v >= n {
            return Err(Error::Domain(format!("vertex {v} outside 0..{n}")));
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Cost of edges leaving `set`; when `within` is given, only edges whose other
/// endpoint lies in `within` count.
pub(crate) fn cut_with_mask(g: &WeightedGraph, set: &[usize], in_set: &[bool], within: Option<&[bool]>) -> f64 {
    let mut total = 0.0;
    for &v in set {
        for &(u, e) in g.neighbors(v) {
            if in_set[u] {
                continue;
            }
            if within.is_none_or(|w| w[u]) {
                total += g.cost(e);
            }
        }
    }
    total
}

/// Sum of `values` over `set`.
pub fn sum_over(values: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&v| values[v]).sum()
}

/// Maximum of `values` over `set`, 0 on the empty set.
pub fn max_over(values: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&v| values[v]).fold(0.0, f64::max)
}

/// Sorted, duplicate-free copy of `set`.
pub fn normalized(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Elements of sorted `a` not in sorted `b`.
pub fn difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j >= b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

/// Union of two sorted sets.
pub fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i >= a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

/// Which edges count when measuring a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Only edges induced by the view.
    View,
    /// Every edge of the host graph.
    Host,
}

/// Vertex subset W of a host graph, seen as the induced subgraph G[W].
#[derive(Debug, Clone)]
pub struct SubgraphView<'g> {
    host: &'g WeightedGraph,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl<'g> SubgraphView<'g> {
    pub fn new(host: &'g WeightedGraph, members: &[usize]) -> Result<Self> {
        let n = host.vertex_count();
        let mut mask = vec![false; n];
        let mut sorted = Vec::with_capacity(members.len());
        for &v in members {
            if v >= n {
                return Err(Error::Domain(format!("vertex {v} outside 0..{n}")));
            }
            if mask[v] {
                return Err(Error::Domain(format!("vertex {v} listed twice")));
            }
            mask[v] = true;
            sorted.push(v);
        }
        sorted.sort_unstable();
        Ok(SubgraphView { host, members: sorted, mask })
    }

    pub fn host(&self) -> &'g WeightedGraph {
        self.host
    }

    /// Members in increasing id order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.mask.len() && self.mask[v]
    }

    /// Ids of edges with both endpoints in W.
    pub fn induced_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().flat_map(move |&v| {
            self.host.neighbors(v).iter().filter(move |&&(u, _)| u > v && self.mask[u]).map(|&(_, e)| e)
        })
    }

    /// Induced neighbors of a member.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.host.neighbors(v).iter().copied().filter(move |&(u, _)| self.mask[u])
    }

    /// ‖c|W‖_p over the induced edges.
    pub fn cost_norm(&self, p: f64) -> Result<f64> {
        p_norm(self.induced_edges().map(|e| self.host.cost(e)), p)
    }

    /// Degree within G[W].
    pub fn induced_degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    pub fn sum(&self, values: &[f64]) -> f64 {
        sum_over(values, &self.members)
    }

    pub fn max(&self, values: &[f64]) -> f64 {
        max_over(values, &self.members)
    }

    /// c(δ(U)) counted inside the view or inside the host.
    pub fn boundary_cost(&self, set: &[usize], scope: Scope) -> Result<f64> {
        let n = self.host.vertex_count();
        let mut in_set = vec![false; n];
        for &v in set {
            let ok = match scope {
                Scope::View => self.contains(v),
                Scope::Host => v < n,
            };
            if !ok {
                return Err(Error::Domain(format!("vertex {v} outside the {scope:?} domain")));
            }
            in_set[v] = true;
        }
        Ok(match scope {
            Scope::View => cut_with_mask(self.host, set, &in_set, Some(&self.mask)),
            Scope::Host => cut_with_mask(self.host, set, &in_set, None),
        })
    }
}

/// Nonnegative vertex function with cached total and maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    values: Vec<f64>,
    total: f64,
    max_value: f64,
}

impl Measure {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (v, &x) in values.iter().enumerate() {
            check_value("measure value", v, x)?;
        }
        let total = values.iter().sum();
        let max_value = values.iter().copied().fold(0.0, f64::max);
        Ok(Measure { values, total, max_value })
    }

    pub fn zero(n: usize) -> Self {
        Measure { values: vec![0.0; n], total: 0.0, max_value: 0.0 }
    }

    pub fn weights_of(g: &WeightedGraph) -> Self {
        Measure::new(g.weights().to_vec()).expect("graph weights are validated")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Average class measure ‖Φ‖₁/k.
    pub fn average(&self, k: usize) -> f64 {
        self.total / k as f64
    }

    pub fn sum_over(&self, set: &[usize]) -> f64 {
        sum_over(&self.values, set)
    }

    /// Per-class sums under an assignment.
    pub fn class_sums(&self, k: usize, assignment: &[usize]) -> Vec<f64> {
        let mut sums = vec![0.0; k];
        for (v, &c) in assignment.iter().enumerate() {
            sums[c] += self.values[v];
        }
        sums
    }
}

const RECOMPUTE_PERIOD: u64 = 1 << 16;

/// Total k-coloring with maintained class weights and host boundary costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Coloring {
    k: usize,
    assignment: Vec<usize>,
    class_weights: Vec<f64>,
    class_boundary: Vec<f64>,
    mutations: u64,
}

impl Coloring {
    pub fn new(g: &WeightedGraph, k: usize, assignment: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("k must be positive".into()));
        }
        if assignment.len() != g.vertex_count() {
            return Err(Error::Domain(format!(
                "coloring covers {} vertices, graph has {}",
                assignment.len(),
                g.vertex_count()
            )));
        }
        if let Some((v, &c)) = assignment.iter().enumerate().find(|(_, &c)| c >= k) {
            return Err(Error::Domain(format!("vertex {v} has color {c} >= k = {k}")));
        }
        let mut col =
            Coloring { k, assignment, class_weights: vec![0.0; k], class_boundary: vec![0.0; k], mutations: 0 };
        col.recompute(g);
        Ok(col)
    }

    /// Builds a coloring from explicit classes; they must partition the vertex set.
    pub fn from_classes(g: &WeightedGraph, classes: &[Vec<usize>]) -> Result<Self> {
        let n = g.vertex_count();
        let mut assignment = vec![usize::MAX; n];
        for (c, class) in classes.iter().enumerate() {
            for &v in class {
                if v >= n {
                    return Err(Error::Domain(format!("vertex {v} outside 0..{n}")));
                }
                if assignment[v] != usize::MAX {
                    return Err(Error::Domain(format!("vertex {v} appears in two classes")));
                }
                assignment[v] = c;
            }
        }
        if let Some(v) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Domain(format!("vertex {v} is uncolored")));
        }
        Coloring::new(g, classes.len(), assignment)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn color(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn class_boundary(&self) -> &[f64] {
        &self.class_boundary
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            classes[c].push(v);
        }
        classes
    }

    /// Moves `v` to `color`, updating aggregates incrementally.
    pub fn recolor(&mut self, g: &WeightedGraph, v: usize, color: usize) -> Result<()> {
        if color >= self.k {
            return Err(Error::Domain(format!("color {color} >= k = {}", self.k)));
        }
        if v >= self.assignment.len() {
            return Err(Error::Domain(format!("vertex {v} outside the coloring")));
        }
        let old = self.assignment[v];
        if old == color {
            return Ok(());
        }
        self.class_weights[old] -= g.weight(v);
        self.class_weights[color] += g.weight(v);
        for &(u, e) in g.neighbors(v) {
            let cu = self.assignment[u];
            let c = g.cost(e);
            if cu != old {
                self.class_boundary[old] -= c;
                self.class_boundary[cu] -= c;
            }
            if cu != color {
                self.class_boundary[color] += c;
                self.class_boundary[cu] += c;
            }
        }
        self.assignment[v] = color;
        self.mutations += 1;
        if self.mutations.is_multiple_of(RECOMPUTE_PERIOD) {
            self.recompute(g);
        }
        Ok(())
    }

    /// Recomputes every aggregate from scratch.
    pub fn recompute(&mut self, g: &WeightedGraph) {
        self.class_weights = vec![0.0; self.k];
        self.class_boundary = vec![0.0; self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            self.class_weights[c] += g.weight(v);
        }
        for e in 0..g.edge_count() {
            let (u, v) = g.endpoints(e);
            let (cu, cv) = (self.assignment[u], self.assignment[v]);
            if cu != cv {
                self.class_boundary[cu] += g.cost(e);
                self.class_boundary[cv] += g.cost(e);
            }
        }
    }

    pub fn max_boundary(&self) -> f64 {
        self.class_boundary.iter().copied().fold(0.0, f64::max)
    }

    pub fn avg_boundary(&self) -> f64 {
        self.class_boundary.iter().sum::<f64>() / self.k as f64
    }
}

/// p-norm of a cost multiset; `p = f64::INFINITY` gives the maximum.
pub fn p_norm(values: impl IntoIterator<Item = f64>, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    let vals: Vec<f64> = values.into_iter().collect();
    let max = vals.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    // Scaling by the maximum keeps the powers in range.
    let s: f64 = vals.iter().map(|&x| (x / max).powf(p)).sum();
    Ok(max * s.powf(1.0 / p))
}

/// Per-class report of the strict balance condition.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub k: usize,
    pub average: f64,
    /// (1 - 1/k) times the maximum vertex weight.
    pub tolerance: f64,
    /// Signed deviation of each class from the average.
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
    /// Whether the condition holds exactly.
    pub balanced: bool,
    /// Tolerance minus worst deviation, computed as (budget - max|k·w_i - W|)/k.
    pub exact_slack: f64,
}

impl BalanceReport {
    /// Tolerance minus worst deviation; negative when violated.
    pub fn slack(&self) -> f64 {
        self.exact_slack
    }

    pub fn holds_within(&self, abs_slack: f64) -> bool {
        self.max_abs_deviation <= self.tolerance + abs_slack
    }
}

/// Strict balance report from class weights and the maximum vertex weight.
pub fn strict_balance_report(class_weights: &[f64], max_weight: f64) -> BalanceReport {
    let k = class_weights.len();
    let total: f64 = class_weights.iter().sum();
    let kf = k as f64;
    let average = total / kf;
    let deviations: Vec<f64> = class_weights.iter().map(|&w| w - average).collect();
    let max_abs_deviation = deviations.iter().map(|d| d.abs()).fold(0.0, f64::max);
    // Multiplied through by k so integer inputs compare exactly.
    let budget = (kf - 1.0) * max_weight;
    let worst = class_weights.iter().map(|&w| (kf * w - total).abs()).fold(0.0, f64::max);
    BalanceReport {
        k,
        average,
        tolerance: (1.0 - 1.0 / kf) * max_weight,
        deviations,
        max_abs_deviation,
        balanced: worst <= budget,
        exact_slack: if k == 0 { 0.0 } else { (budget - worst) / kf },
    }
}

/// Checks max_i |w(class_i) - ‖w‖₁/k| ≤ (1 - 1/k)·max w.
pub fn is_strictly_balanced(coloring: &Coloring, weights: &Measure) -> BalanceReport {
    let sums = weights.class_sums(coloring.k(), coloring.assignment());
    strict_balance_report(&sums, weights.max_value())
}

/// Maximum weighted degree Δ_c.
pub fn max_weighted_degree(g: &WeightedGraph) -> f64 {
    (0..g.vertex_count()).map(|v| g.vertex_cost(v)).fold(0.0, f64::max)
}

/// max over incident (u, e) of c(δ(u)) / c(e); 1 for edgeless graphs.
pub fn local_fluctuation(g: &WeightedGraph) -> Result<f64> {
    if let Some(e) = (0..g.edge_count()).find(|&e| g.cost(e) == 0.0) {
        return Err(Error::Parameter(format!("edge {e} has zero cost")));
    }
    let mut best: f64 = 1.0;
    for v in 0..g.vertex_count() {
        let tau = g.vertex_cost(v);
        for &(_, e) in g.neighbors(v) {
            best = best.max(tau / g.cost(e));
        }
    }
    Ok(best)
}
