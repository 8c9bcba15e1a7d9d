//! Grid graphs in Z^d, coarse quotients and monotone splitting sets.

use crate::check::slack_for;
use crate::error::{Error, Result};
use crate::graph::{SubgraphView, WeightedGraph};
use crate::oracle::{check_request, in_window, SplitOracle};
use std::collections::{BTreeMap, HashSet};

/// Weighted graph whose vertices are distinct points of Z^d and whose edges
/// join points at ℓ1-distance 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    dim: usize,
    coords: Vec<i32>,
    base: WeightedGraph,
}

fn validate_points(dim: usize, coords: &[i32], n: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Parameter("grid dimension must be positive".into()));
    }
    if coords.len() != n * dim {
        return Err(Error::Parameter(format!("expected {} coordinates, got {}", n * dim, coords.len())));
    }
    Ok(())
}

/// Dimension along which `a` and `b` differ, if they are grid neighbors.
fn step_dim(a: &[i32], b: &[i32]) -> Option<usize> {
    let mut dim = None;
    for (j, (&x, &y)) in a.iter().zip(b).enumerate() {
        match (x as i64 - y as i64).abs() {
            0 => {}
            1 if dim.is_none() => dim = Some(j),
            _ => return None,
        }
    }
    dim
}

impl GridGraph {
    pub fn new(base: WeightedGraph, dim: usize, coords: Vec<i32>) -> Result<Self> {
        validate_points(dim, &coords, base.vertex_count())?;
        let mut seen = HashSet::with_capacity(base.vertex_count());
        for v in 0..base.vertex_count() {
            if !seen.insert(&coords[v * dim..(v + 1) * dim]) {
                return Err(Error::Parameter(format!("vertex {v} repeats a coordinate")));
            }
        }
        for e in 0..base.edge_count() {
            let (u, v) = base.endpoints(e);
            if step_dim(&coords[u * dim..(u + 1) * dim], &coords[v * dim..(v + 1) * dim]).is_none() {
                return Err(Error::Parameter(format!("edge {e} does not join neighboring grid points")));
            }
            if base.cost(e) <= 0.0 {
                return Err(Error::Parameter(format!("edge {e} has nonpositive cost")));
            }
        }
        Ok(GridGraph { dim, coords, base })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> &WeightedGraph {
        &self.base
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn point(&self, v: usize) -> &[i32] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    /// max c / min c; 1 for edgeless grids.
    pub fn fluctuation(&self) -> f64 {
        let costs = self.base.costs();
        if costs.is_empty() {
            return 1.0;
        }
        let max = costs.iter().copied().fold(0.0, f64::max);
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Quotient of a grid under x ↦ ⌊(x + α - 1)/ℓ⌋ componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraph {
    pub ell: i64,
    pub alpha: i64,
    /// Cell coordinates in lexicographic order.
    pub cells: Vec<Vec<i64>>,
    /// Member vertex ids of each cell.
    pub members: Vec<Vec<usize>>,
    /// Summed cost of edges between two cells, keyed by cell indices.
    pub arc_costs: BTreeMap<(usize, usize), f64>,
}

impl CoarseGraph {
    pub fn total_arc_cost(&self) -> f64 {
        self.arc_costs.values().sum()
    }
}

fn cell_of(point: &[i32], ell: i64, alpha: i64) -> Vec<i64> {
    point.iter().map(|&x| (x as i64 + alpha - 1).div_euclid(ell)).collect()
}

fn check_ell_alpha(ell: i64, alpha: i64) -> Result<()> {
    if ell < 1 {
        return Err(Error::Parameter(format!("cell side must be positive, got {ell}")));
    }
    if !(1..=ell).contains(&alpha) {
        return Err(Error::Parameter(format!("offset {alpha} outside 1..={ell}")));
    }
    Ok(())
}

pub fn coarsen(grid: &GridGraph, ell: i64, alpha: i64) -> Result<CoarseGraph> {
    check_ell_alpha(ell, alpha)?;
    let mut by_cell: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for v in 0..grid.base.vertex_count() {
        by_cell.entry(cell_of(grid.point(v), ell, alpha)).or_default().push(v);
    }
    let mut index = vec![0; grid.base.vertex_count()];
    let mut cells = Vec::with_capacity(by_cell.len());
    let mut members = Vec::with_capacity(by_cell.len());
    for (i, (cell, vs)) in by_cell.into_iter().enumerate() {
        for &v in &vs {
            index[v] = i;
        }
        cells.push(cell);
        members.push(vs);
    }
    let mut arc_costs = BTreeMap::new();
    for (u, v, c) in grid.base.edge_list() {
        let (a, b) = (index[u], index[v]);
        if a != b {
            *arc_costs.entry((a.min(b), a.max(b))).or_insert(0.0) += c;
        }
    }
    Ok(CoarseGraph { ell, alpha, cells, members, arc_costs })
}

/// The unique α ∈ [1, ℓ] for which a unit step from `lower` to `lower + 1`
/// crosses a cell border.
fn crossing_alpha(lower: i64, ell: i64) -> i64 {
    match (-lower).rem_euclid(ell) {
        0 => ell,
        a => a,
    }
}

/// Crossing cost per α (index α - 1) for edges given as (lower coordinate, cost).
fn crossing_costs(edges: impl Iterator<Item = (i64, f64)>, ell: i64) -> Vec<f64> {
    let mut per = vec![0.0; ell as usize];
    for (lower, c) in edges {
        per[(crossing_alpha(lower, ell) - 1) as usize] += c;
    }
    per
}

fn argmin_alpha(per: &[f64]) -> i64 {
    let mut best = 0;
    for (i, &c) in per.iter().enumerate() {
        if c < per[best] {
            best = i;
        }
    }
    best as i64 + 1
}

/// The ℓ-coarse quotient of least total arc cost, lowest α on ties.
pub fn cheap_coarse(grid: &GridGraph, ell: i64) -> Result<CoarseGraph> {
    check_ell_alpha(ell, 1)?;
    let per = crossing_costs(
        grid.base.edge_list().into_iter().map(|(u, v, c)| {
            let (pu, pv) = (grid.point(u), grid.point(v));
            let j = step_dim(pu, pv).expect("validated grid edge");
            (pu[j].min(pv[j]) as i64, c)
        }),
        ell,
    );
    coarsen(grid, ell, argmin_alpha(&per))
}

/// True iff no point outside `set` is componentwise ≤ a point of `set`.
pub fn is_monotone(grid: &GridGraph, set: &[usize]) -> bool {
    let n = grid.base.vertex_count();
    let mut in_set = vec![false; n];
    for &v in set {
        if v < n {
            in_set[v] = true;
        }
    }
    points_monotone(grid.dim, &grid.coords, &(0..n).collect::<Vec<_>>(), &in_set)
}

/// Monotonicity of the marked subset among `verts` (host ids into `coords`).
fn points_monotone(d: usize, coords: &[i32], verts: &[usize], in_set: &[bool]) -> bool {
    let inside = verts.iter().filter(|&&v| in_set[v]).count();
    if inside == 0 || inside == verts.len() {
        return true;
    }
    let pt = |v: usize| &coords[v * d..(v + 1) * d];
    let mut order = verts.to_vec();
    order.sort_by(|&a, &b| pt(a).cmp(pt(b)));
    if order[..inside].iter().all(|&v| in_set[v]) {
        return true;
    }
    match d {
        1 => {
            let max_in = verts.iter().filter(|&&v| in_set[v]).map(|&v| pt(v)[0]).max().unwrap();
            verts.iter().filter(|&&v| !in_set[v]).all(|&v| pt(v)[0] > max_in)
        }
        2 => {
            // Descending first coordinate; members first among equals.
            order.sort_by(|&a, &b| pt(b)[0].cmp(&pt(a)[0]).then(in_set[b].cmp(&in_set[a])));
            let mut best: Option<i32> = None;
            for v in order {
                let p = pt(v);
                if in_set[v] {
                    best = Some(best.map_or(p[1], |b| b.max(p[1])));
                } else if best.is_some_and(|b| b >= p[1]) {
                    return false;
                }
            }
            true
        }
        _ => {
            let (ins, outs): (Vec<usize>, Vec<usize>) = verts.iter().partition(|&&v| in_set[v]);
            !outs.iter().any(|&x| ins.iter().any(|&y| pt(x).iter().zip(pt(y)).all(|(a, b)| a <= b)))
        }
    }
}

/// Stable LSD radix sort of `items` by their `d` integer keys.
fn radix_sort_by_keys(items: &mut Vec<usize>, keys: &[i64], d: usize) {
    let mut buf = vec![0usize; items.len()];
    for j in (0..d).rev() {
        for shift in [0u32, 8, 16, 24] {
            let digit = |i: usize| ((((keys[i * d + j] as i32) as u32) ^ 0x8000_0000) >> shift & 0xff) as usize;
            let mut count = [0usize; 257];
            for &i in items.iter() {
                count[digit(i) + 1] += 1;
            }
            for b in 0..256 {
                count[b + 1] += count[b];
            }
            for &i in items.iter() {
                let slot = &mut count[digit(i)];
                buf[*slot] = i;
                *slot += 1;
            }
            std::mem::swap(items, &mut buf);
        }
    }
}

/// Right-hand side of the unfolded cost bound for a cost multiset.
pub fn unfolded_bound(d: usize, costs: &[f64]) -> f64 {
    let df = d as f64;
    let max_c = costs.iter().copied().fold(0.0, f64::max);
    let top = (max_c + 1.0).log2().floor() as i32;
    let mut sum = 0.0;
    for i in 0..=top {
        let floor = 2f64.powi(i) - 1.0;
        let mass: f64 = costs.iter().filter(|&&c| c >= floor).sum();
        sum += 2f64.powf(i as f64 / df) * mass.powf(1.0 - 1.0 / df);
    }
    2f64.powi(d as i32) * df.powf(1.0 / df) * (max_c + 1.0 + sum)
}

/// Per-level record of a grid split.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub ell: i64,
    pub alpha: i64,
    /// Total crossing cost of the chosen quotient, in level units.
    pub arc_cost: f64,
    /// Edges of the chosen cell cut by the recursive set.
    pub cell_cut_edges: usize,
    /// d·ℓ^(d-1).
    pub cell_cut_cap: f64,
    /// Boundary of this level's set in level units.
    pub boundary: f64,
    pub unfolded_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSplitReport {
    pub set: Vec<usize>,
    /// Levels with ℓ > 1, outermost first.
    pub levels: Vec<LevelRecord>,
    pub depth: usize,
    /// ⌊log2(max c + 1)⌋ + 1 for the normalized costs.
    pub depth_bound: usize,
    /// Minimum cost used for normalization.
    pub scale: f64,
    /// ∂_W U in original costs.
    pub boundary: f64,
    pub monotone: bool,
}

struct LevelEdge {
    u: usize,
    v: usize,
    c: f64,
    lower: i64,
}

struct Splitter<'a> {
    d: usize,
    coords: &'a [i32],
    weights: &'a [f64],
    max_w: f64,
    records: Vec<LevelRecord>,
}

fn cut_of(edges: &[LevelEdge], in_set: &[bool]) -> (f64, usize) {
    edges.iter().filter(|e| in_set[e.u] != in_set[e.v]).fold((0.0, 0), |(c, k), e| (c + e.c, k + 1))
}

impl Splitter<'_> {
    fn key(&self, v: usize) -> &[i32] {
        &self.coords[v * self.d..(v + 1) * self.d]
    }

    /// Splitting set among `verts` (host ids; local index = position).
    fn run(&mut self, verts: &[usize], edges: &[LevelEdge], target: f64) -> Result<Vec<bool>> {
        let n = verts.len();
        let total: f64 = verts.iter().map(|&v| self.weights[v]).sum();
        if target >= total {
            return Ok(vec![true; n]);
        }
        let d = self.d;
        let df = d as f64;
        let mass: f64 = edges.iter().map(|e| e.c).sum();
        let mut ell = ((mass / df).powf(1.0 / df).ceil() as i64).max(1);
        ell = ell.min(edges.len() as i64 + 1);
        let alpha = if ell > 1 { argmin_alpha(&crossing_costs(edges.iter().map(|e| (e.lower, e.c)), ell)) } else { 1 };

        let mut keys = vec![0i64; n * d];
        for (i, &v) in verts.iter().enumerate() {
            for (j, &x) in self.key(v).iter().enumerate() {
                keys[i * d + j] = (x as i64 + alpha - 1).div_euclid(ell);
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        radix_sort_by_keys(&mut order, &keys, d);
        let same_cell = |a: usize, b: usize| keys[a * d..(a + 1) * d] == keys[b * d..(b + 1) * d];

        // Prefix of whole cells up to the first cell that overshoots.
        let mut in_set = vec![false; n];
        let mut acc = 0.0;
        let mut start = 0;
        let mut cell = Vec::new();
        while start < n {
            let mut end = start + 1;
            while end < n && same_cell(order[start], order[end]) {
                end += 1;
            }
            let w: f64 = order[start..end].iter().map(|&i| self.weights[verts[i]]).sum();
            if acc + w > target {
                cell = order[start..end].to_vec();
                break;
            }
            for &i in &order[start..end] {
                in_set[i] = true;
            }
            acc += w;
            start = end;
        }
        if cell.is_empty() {
            return Ok(in_set);
        }
        if ell == 1 {
            let v = cell[0];
            if !in_window(acc, target, self.max_w) {
                in_set[v] = true;
            }
            return Ok(in_set);
        }

        let mut local = vec![usize::MAX; n];
        for (k, &i) in cell.iter().enumerate() {
            local[i] = k;
        }
        let sub_verts: Vec<usize> = cell.iter().map(|&i| verts[i]).collect();
        let sub_edges: Vec<LevelEdge> = edges
            .iter()
            .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX && e.c > 1.0)
            .map(|e| LevelEdge { u: local[e.u], v: local[e.v], c: (e.c - 1.0) / 2.0, lower: e.lower })
            .collect();
        let record_at = self.records.len();
        self.records.push(LevelRecord {
            ell,
            alpha,
            arc_cost: 0.0,
            cell_cut_edges: 0,
            cell_cut_cap: 0.0,
            boundary: 0.0,
            unfolded_bound: 0.0,
        });
        let sub = self.run(&sub_verts, &sub_edges, target - acc)?;
        for (k, &i) in cell.iter().enumerate() {
            in_set[i] = sub[k];
        }

        let arc_cost: f64 = edges.iter().filter(|e| !same_cell(e.u, e.v)).map(|e| e.c).sum();
        let in_cell_sub = |e: &&LevelEdge| local[e.u] != usize::MAX && local[e.v] != usize::MAX;
        let cell_cut_edges = edges.iter().filter(in_cell_sub).filter(|e| in_set[e.u] != in_set[e.v]).count();
        let cell_cut_cap = df * (ell as f64).powi(d as i32 - 1);
        let (boundary, _) = cut_of(edges, &in_set);
        let (sub_boundary, _) = cut_of(&sub_edges, &sub);
        let costs: Vec<f64> = edges.iter().map(|e| e.c).collect();
        let bound = unfolded_bound(d, &costs);
        self.records[record_at] = LevelRecord {
            ell,
            alpha,
            arc_cost,
            cell_cut_edges,
            cell_cut_cap,
            boundary,
            unfolded_bound: bound,
        };
        if cell_cut_edges as f64 > cell_cut_cap {
            return Err(Error::ContractViolation {
                check: "monotone cell cut",
                witness: format!("{cell_cut_edges} cut edges in a cell of side {ell}, cap {cell_cut_cap}"),
            });
        }
        let accounted = arc_cost + cell_cut_edges as f64 + 2.0 * sub_boundary;
        if boundary > accounted + slack_for(accounted) {
            return Err(Error::ContractViolation {
                check: "grid level accounting",
                witness: format!("boundary {boundary} exceeds {arc_cost} + {cell_cut_edges} + 2·{sub_boundary}"),
            });
        }
        if boundary > bound + slack_for(bound) {
            return Err(Error::ContractViolation {
                check: "unfolded grid bound",
                witness: format!("boundary {boundary} exceeds {bound} at side {ell}"),
            });
        }
        Ok(in_set)
    }
}

/// Monotone splitting set of the induced grid on `view`, with per-level records.
pub fn grid_split_view(
    view: &SubgraphView<'_>,
    dim: usize,
    coords: &[i32],
    weights: &[f64],
    target: f64,
) -> Result<GridSplitReport> {
    let host = view.host();
    validate_points(dim, coords, host.vertex_count())?;
    let (total, max_w) = check_request(view, weights, target)?;
    let target = target.min(total);
    let verts = view.members().to_vec();
    let mut local = vec![usize::MAX; host.vertex_count()];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let pt = |v: usize| &coords[v * dim..(v + 1) * dim];
    let mut seen = HashSet::with_capacity(verts.len());
    for &v in &verts {
        if !seen.insert(pt(v)) {
            return Err(Error::Parameter(format!("vertex {v} repeats a coordinate")));
        }
    }
    let mut edges = Vec::new();
    for e in view.induced_edges() {
        let (u, v) = host.endpoints(e);
        let j = step_dim(pt(u), pt(v))
            .ok_or_else(|| Error::Parameter(format!("edge {e} does not join neighboring grid points")))?;
        let c = host.cost(e);
        if c <= 0.0 {
            return Err(Error::Parameter(format!("edge {e} has nonpositive cost")));
        }
        edges.push(LevelEdge { u: local[u], v: local[v], c, lower: pt(u)[j].min(pt(v)[j]) as i64 });
    }
    let scale = edges.iter().map(|e| e.c).fold(f64::INFINITY, f64::min);
    let scale = if scale.is_finite() { scale } else { 1.0 };
    for e in &mut edges {
        e.c /= scale;
    }
    let max_c = edges.iter().map(|e| e.c).fold(0.0, f64::max);
    let mut splitter = Splitter { d: dim, coords, weights, max_w, records: Vec::new() };
    let in_set = splitter.run(&verts, &edges, target)?;
    let set: Vec<usize> = verts.iter().zip(&in_set).filter(|(_, &b)| b).map(|(&v, _)| v).collect();
    let (normalized_boundary, _) = cut_of(&edges, &in_set);
    let mut host_mask = vec![false; host.vertex_count()];
    for &v in &set {
        host_mask[v] = true;
    }
    let monotone = points_monotone(dim, coords, &verts, &host_mask);
    let depth_bound = (max_c + 1.0).log2().floor() as usize + 1;
    let report = GridSplitReport {
        set,
        depth: splitter.records.len(),
        levels: splitter.records,
        depth_bound,
        scale,
        boundary: normalized_boundary * scale,
        monotone,
    };
    let w: f64 = report.set.iter().map(|&v| weights[v]).sum();
    if !in_window(w, target, max_w) {
        return Err(Error::ContractViolation {
            check: "grid split weight window",
            witness: format!("w(U) = {w}, target {target}, max weight {max_w}"),
        });
    }
    if !report.monotone {
        return Err(Error::ContractViolation { check: "grid split monotone", witness: format!("{:?}", report.set) });
    }
    if report.depth > report.depth_bound {
        return Err(Error::ContractViolation {
            check: "grid split depth",
            witness: format!("depth {} exceeds {}", report.depth, report.depth_bound),
        });
    }
    Ok(report)
}

pub fn grid_split(grid: &GridGraph, weights: &[f64], target: f64) -> Result<GridSplitReport> {
    grid_split_view(&grid.base.full_view(), grid.dim, &grid.coords, weights, target)
}

/// Oracle adapter over a host graph with coordinates.
#[derive(Debug, Clone)]
pub struct GridOracle {
    dim: usize,
    coords: Vec<i32>,
    p: f64,
}

impl GridOracle {
    pub fn new(dim: usize, coords: Vec<i32>, p: f64) -> Self {
        GridOracle { dim, coords, p }
    }
}

impl SplitOracle for GridOracle {
    fn name(&self) -> String {
        "grid".into()
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn split(&self, view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
        Ok(grid_split_view(view, self.dim, &self.coords, weights, target)?.set)
    }
}

/// Rectangular grid with the given side lengths and costs from `cost(u, v)`.
pub fn rectangular_grid(sides: &[usize], weight: f64, mut cost: impl FnMut(usize, usize) -> f64) -> Result<GridGraph> {
    let d = sides.len();
    let n: usize = sides.iter().product();
    let mut coords = Vec::with_capacity(n * d);
    for v in 0..n {
        let mut r = v;
        for &s in sides.iter().rev() {
            coords.push((r % s) as i32);
            r /= s;
        }
        let start = coords.len() - d;
        coords[start..].reverse();
    }
    let mut edges = Vec::new();
    for v in 0..n {
        let mut stride = 1;
        for j in (0..d).rev() {
            if (coords[v * d + j] as usize) + 1 < sides[j] {
                let u = v + stride;
                edges.push((v, u, cost(v, u)));
            }
            stride *= sides[j];
        }
    }
    GridGraph::new(WeightedGraph::new(vec![weight; n], &edges)?, d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Scope;

    fn line(points: &[i32]) -> GridGraph {
        let edges: Vec<_> = (1..points.len()).map(|i| (i - 1, i, 1.0)).collect();
        GridGraph::new(WeightedGraph::new(vec![1.0; points.len()], &edges).unwrap(), 1, points.to_vec()).unwrap()
    }

    #[test]
    fn coarsen_examples() {
        let g = line(&[0, 1, 2, 3]);
        let q = coarsen(&g, 2, 1).unwrap();
        assert_eq!(q.cells, vec![vec![0], vec![1]]);
        assert_eq!(q.members, vec![vec![0, 1], vec![2, 3]]);
        let g = line(&[-1]);
        assert_eq!(coarsen(&g, 2, 2).unwrap().cells, vec![vec![0]]);
        let sq = rectangular_grid(&[2, 2], 1.0, |_, _| 1.0).unwrap();
        let q = coarsen(&sq, 1, 1).unwrap();
        assert!(q.members.iter().all(|m| m.len() == 1));
        assert!(coarsen(&sq, 2, 3).is_err());
        assert!(coarsen(&sq, 2, 0).is_err());
    }

    #[test]
    fn cheap_coarse_examples() {
        let g = line(&[0, 1, 2, 3]);
        assert_eq!(coarsen(&g, 2, 1).unwrap().total_arc_cost(), 1.0);
        assert_eq!(coarsen(&g, 2, 2).unwrap().total_arc_cost(), 2.0);
        let q = cheap_coarse(&g, 2).unwrap();
        assert_eq!(q.alpha, 1);
        assert!(q.total_arc_cost() <= 3.0 / 2.0);
        assert_eq!(cheap_coarse(&line(&[5]), 3).unwrap().total_arc_cost(), 0.0);
        assert_eq!(cheap_coarse(&g, 1).unwrap().total_arc_cost(), 3.0);
    }

    #[test]
    fn crossing_costs_sum_to_total() {
        let g = rectangular_grid(&[5, 4], 1.0, |u, v| ((u * 7 + v) % 5 + 1) as f64).unwrap();
        let total: f64 = g.base().costs().iter().sum();
        for ell in 1..6 {
            let sum: f64 = (1..=ell).map(|a| coarsen(&g, ell, a).unwrap().total_arc_cost()).sum();
            assert_eq!(sum, total);
        }
    }

    #[test]
    fn monotone_examples() {
        let g = line(&[0, 1, 2]);
        assert!(!is_monotone(&g, &[2]));
        assert!(is_monotone(&g, &[0, 1]));
        assert!(is_monotone(&g, &[]));
        assert!(is_monotone(&g, &[0, 1, 2]));
        let sq = rectangular_grid(&[3, 3], 1.0, |_, _| 1.0).unwrap();
        // Points (0,0),(0,1),(1,0) form a staircase.
        assert!(is_monotone(&sq, &[0, 1, 3]));
        assert!(!is_monotone(&sq, &[0, 4]));
    }

    #[test]
    fn radix_sort_handles_negatives() {
        let keys = vec![3, -1, 0, -5, 2, 2, -1, 7];
        let mut items: Vec<usize> = (0..4).collect();
        radix_sort_by_keys(&mut items, &keys, 2);
        assert_eq!(items, vec![3, 1, 2, 0]);
    }

    #[test]
    fn square_split() {
        let sq = rectangular_grid(&[2, 2], 1.0, |_, _| 1.0).unwrap();
        let r = grid_split(&sq, sq.base().weights(), 2.0).unwrap();
        assert_eq!(r.set.len(), 2);
        assert!(r.monotone);
        assert!(sq.base().boundary_cost(&r.set).unwrap() <= 2.0);
        assert!(grid_split(&sq, sq.base().weights(), 0.0).unwrap().set.is_empty());
    }

    #[test]
    fn path_takes_leading_points() {
        let g = line(&(0..10).collect::<Vec<_>>());
        for t in 0..=10 {
            let r = grid_split(&g, g.base().weights(), t as f64).unwrap();
            assert_eq!(r.set, (0..t).collect::<Vec<_>>());
            assert!(g.base().full_view().boundary_cost(&r.set, Scope::View).unwrap() <= 1.0);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let g = WeightedGraph::new(vec![1.0; 2], &[(0, 1, 1.0)]).unwrap();
        assert!(GridGraph::new(g.clone(), 1, vec![0, 2]).is_err());
        assert!(GridGraph::new(g.clone(), 1, vec![0, 0]).is_err());
        let z = WeightedGraph::new(vec![1.0; 2], &[(0, 1, 0.0)]).unwrap();
        assert!(GridGraph::new(z, 1, vec![0, 1]).is_err());
    }

    #[test]
    fn heavy_costs_respect_level_checks() {
        let g = rectangular_grid(&[12, 12], 1.0, |u, v| ((u * 31 + v * 17) % 1024 + 1) as f64).unwrap();
        let r = grid_split(&g, g.base().weights(), 50.0).unwrap();
        assert!(r.depth <= r.depth_bound);
        assert!(r.levels.iter().all(|l| l.cell_cut_edges as f64 <= l.cell_cut_cap));
    }
}
