//! Instance generators, coloring metrics, the greedy baseline, per-copy
//! lower-bound certificates and the regression corpus.

use crate::check::slack_for;
use crate::error::{Error, Result};
use crate::graph::{local_fluctuation, strict_balance_report, Coloring, WeightedGraph};
use crate::grid::rectangular_grid;
use crate::io::write_graph;
use crate::oracle::oracle_by_name;
use crate::par::map_range;
use crate::strict::{partition, ShrinkConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Generator parameters, tagged by generator name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Recipe {
    /// Random graph with degrees at most `max_degree`, integer weights and costs.
    BoundedDegree { n: usize, max_degree: usize, weight_max: u32, cost_max: u32 },
    /// Rectangular grid with integer costs in 1..=cost_max.
    Grid { sides: Vec<usize>, weight_max: u32, cost_max: u32 },
    /// Random d-regular graph with unit weights and costs.
    Regular { n: usize, degree: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub recipe: Recipe,
}

/// A generated graph with the metadata that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceBundle {
    pub graph: WeightedGraph,
    pub dim: Option<usize>,
    pub coords: Vec<i32>,
    pub provenance: Provenance,
    /// Number of disjoint copies of the generated graph.
    pub copies: usize,
    pub lower_bound: Option<f64>,
}

impl InstanceBundle {
    /// Vertices per copy.
    pub fn copy_size(&self) -> usize {
        self.graph.vertex_count() / self.copies
    }

    /// SHA-256 of the graph in the text format.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(write_graph(&self.graph, self.dim, &self.coords).as_bytes()))
    }
}

fn bounded_degree(rng: &mut ChaCha8Rng, n: usize, max_degree: usize, weight_max: u32, cost_max: u32) -> Result<WeightedGraph> {
    let mut degree = vec![0; n];
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    if n >= 2 {
        for _ in 0..n * max_degree / 2 {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u == v || degree[u] >= max_degree || degree[v] >= max_degree || !seen.insert((u.min(v), u.max(v))) {
                continue;
            }
            degree[u] += 1;
            degree[v] += 1;
            edges.push((u, v, rng.gen_range(1..=cost_max) as f64));
        }
    }
    let weights = (0..n).map(|_| rng.gen_range(1..=weight_max) as f64).collect();
    WeightedGraph::new(weights, &edges)
}

fn regular(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<WeightedGraph> {
    if !(n * d).is_multiple_of(2) || d >= n {
        return Err(Error::Parameter(format!("no {d}-regular graph on {n} vertices")));
    }
    'attempt: for _ in 0..1000 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        while !stubs.is_empty() {
            let mut paired = false;
            for _ in 0..50 {
                let i = rng.gen_range(0..stubs.len());
                let j = rng.gen_range(0..stubs.len());
                let (u, v) = (stubs[i], stubs[j]);
                if i != j && u != v && !seen.contains(&(u.min(v), u.max(v))) {
                    seen.insert((u.min(v), u.max(v)));
                    edges.push((u, v, 1.0));
                    let (hi, lo) = (i.max(j), i.min(j));
                    stubs.swap_remove(hi);
                    stubs.swap_remove(lo);
                    paired = true;
                    break;
                }
            }
            if !paired {
                continue 'attempt;
            }
        }
        return WeightedGraph::new(vec![1.0; n], &edges);
    }
    Err(Error::Internal { check: "regular graph sampling", witness: format!("n = {n}, d = {d}") })
}

/// Builds the instance described by `provenance`; bit-exact for a given seed.
pub fn generate(provenance: &Provenance) -> Result<InstanceBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(provenance.seed);
    let (graph, dim, coords) = match &provenance.recipe {
        Recipe::BoundedDegree { n, max_degree, weight_max, cost_max } => {
            if *weight_max == 0 || *cost_max == 0 {
                return Err(Error::Parameter("weight_max and cost_max must be positive".into()));
            }
            (bounded_degree(&mut rng, *n, *max_degree, *weight_max, *cost_max)?, None, Vec::new())
        }
        Recipe::Grid { sides, weight_max, cost_max } => {
            if *weight_max == 0 || *cost_max == 0 {
                return Err(Error::Parameter("weight_max and cost_max must be positive".into()));
            }
            let grid = rectangular_grid(sides, 1.0, |_, _| rng.gen_range(1..=*cost_max) as f64)?;
            let weights = (0..grid.base().vertex_count()).map(|_| rng.gen_range(1..=*weight_max) as f64).collect();
            (grid.base().with_weights(weights)?, Some(sides.len()), grid.coords().to_vec())
        }
        Recipe::Regular { n, degree } => (regular(&mut rng, *n, *degree)?, None, Vec::new()),
    };
    Ok(InstanceBundle { graph, dim, coords, provenance: provenance.clone(), copies: 1, lower_bound: None })
}

/// ⌊k/4⌋ disjoint copies of `base`; copy i owns vertex ids [i·n₀, (i+1)·n₀).
/// Grid copies are shifted along the first axis so the union stays a grid graph.
pub fn replicate_instance(base: &InstanceBundle, k: usize) -> Result<InstanceBundle> {
    if k < 4 {
        return Err(Error::Parameter(format!("replication needs k >= 4, got {k}")));
    }
    let copies = k / 4;
    let g = &base.graph;
    let n0 = g.vertex_count();
    let mut weights = Vec::with_capacity(n0 * copies);
    let mut edges = Vec::with_capacity(g.edge_count() * copies);
    let mut coords = Vec::with_capacity(base.coords.len() * copies);
    let span = match base.dim {
        Some(d) if n0 > 0 => {
            let xs = (0..n0).map(|v| base.coords[v * d]);
            xs.clone().max().unwrap_or(0) - xs.min().unwrap_or(0) + 2
        }
        _ => 0,
    };
    for i in 0..copies {
        weights.extend_from_slice(g.weights());
        edges.extend(g.edge_list().into_iter().map(|(u, v, c)| (u + i * n0, v + i * n0, c)));
        if let Some(d) = base.dim {
            for v in 0..n0 {
                coords.push(base.coords[v * d] + span * i as i32);
                coords.extend_from_slice(&base.coords[v * d + 1..(v + 1) * d]);
            }
        }
    }
    Ok(InstanceBundle {
        graph: WeightedGraph::new(weights, &edges)?,
        dim: base.dim,
        coords,
        provenance: base.provenance.clone(),
        copies: copies * base.copies,
        lower_bound: None,
    })
}

/// Measured quality of a coloring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringMetrics {
    pub k: usize,
    pub max_boundary: f64,
    pub avg_boundary: f64,
    pub class_weights: Vec<f64>,
    /// Tolerance minus worst deviation; negative when the balance condition fails.
    pub eq1_slack: f64,
    pub strictly_balanced: bool,
    /// Max class weight at most twice the average.
    pub roughly_balanced: bool,
}

pub fn measure_coloring(g: &WeightedGraph, coloring: &Coloring) -> ColoringMetrics {
    let weights = coloring.class_weights().to_vec();
    let report = strict_balance_report(&weights, g.max_weight());
    let max_class = weights.iter().copied().fold(0.0, f64::max);
    ColoringMetrics {
        k: coloring.k(),
        max_boundary: coloring.max_boundary(),
        avg_boundary: coloring.avg_boundary(),
        eq1_slack: report.slack(),
        strictly_balanced: report.balanced,
        roughly_balanced: max_class <= 2.0 * report.average + slack_for(max_class),
        class_weights: weights,
    }
}

/// Heaviest vertex first onto the lightest class (lowest id on ties).
pub fn greedy_baseline(g: &WeightedGraph, k: usize) -> Result<Coloring> {
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    let mut order: Vec<usize> = (0..g.vertex_count()).collect();
    order.sort_by(|&a, &b| g.weight(b).total_cmp(&g.weight(a)).then(a.cmp(&b)));
    let mut loads = vec![0.0f64; k];
    let mut assignment = vec![0; g.vertex_count()];
    for v in order {
        let i = (0..k).min_by(|&a, &b| loads[a].total_cmp(&loads[b]).then(a.cmp(&b))).expect("k > 0");
        assignment[v] = i;
        loads[i] += g.weight(v);
    }
    Coloring::new(g, k, assignment)
}

/// Certificate for one copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyCertificate {
    pub copy: usize,
    /// Colors on the first side of the bipartition.
    pub first_side: Vec<usize>,
    pub first_weight: f64,
    pub second_weight: f64,
    /// Cost of copy edges joining the two sides.
    pub certificate: f64,
    /// Σ over classes of the within-copy boundary cost.
    pub within_copy_boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub copies: Vec<CopyCertificate>,
    pub min_certificate: Option<f64>,
    /// Local fluctuation of the instance; None when some edge cost is zero.
    pub local_fluctuation: Option<f64>,
    /// Why the certificate was skipped, if it was.
    pub skipped: Option<String>,
}

/// Per copy: split the colors into two sides of at most 2/3 of the copy
/// weight each and certify the cost of copy edges between the sides.
pub fn lower_bound_report(bundle: &InstanceBundle, coloring: &Coloring) -> Result<LowerBoundReport> {
    let g = &bundle.graph;
    if coloring.assignment().len() != g.vertex_count() {
        return Err(Error::Parameter("coloring does not match the instance".into()));
    }
    let fluct = local_fluctuation(g).ok();
    let metrics = measure_coloring(g, coloring);
    if !metrics.roughly_balanced {
        return Ok(LowerBoundReport {
            copies: Vec::new(),
            min_certificate: None,
            local_fluctuation: fluct,
            skipped: Some("coloring is not roughly balanced (max class > 2·avg)".into()),
        })
    }
    let k = coloring.k();
    let n0 = bundle.copy_size();
    let mut out = Vec::with_capacity(bundle.copies);
    for copy in 0..bundle.copies {
        let range = copy * n0..(copy + 1) * n0;
        let mut class_w = vec![0.0; k];
        for v in range.clone() {
            class_w[coloring.color(v)] += g.weight(v);
        }
        let total: f64 = class_w.iter().sum();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| class_w[b].total_cmp(&class_w[a]).then(a.cmp(&b)));
        let mut side = vec![false; k];
        let (mut first, mut second) = (0.0, 0.0);
        for c in order {
            if first <= second {
                side[c] = true;
                first += class_w[c];
            } else {
                second += class_w[c];
            }
        }
        let bound = 2.0 / 3.0 * total + slack_for(total);
        if first > bound || second > bound {
            return Err(Error::ContractViolation {
                check: "color bipartition within 2/3",
                witness: format!("copy {copy}: sides {first} and {second} of {total}"),
            });
        }
        let (mut certificate, mut bichromatic) = (0.0, 0.0);
        for v in range {
            for &(u, e) in g.neighbors(v) {
                if u > v {
                    let (cu, cv) = (coloring.color(u), coloring.color(v));
                    if cu != cv {
                        bichromatic += g.cost(e);
                    }
                    if side[cu] != side[cv] {
                        certificate += g.cost(e);
                    }
                }
            }
        }
        let within = 2.0 * bichromatic;
        if certificate > within + slack_for(within) {
            return Err(Error::ContractViolation {
                check: "certificate at most the within-copy boundary",
                witness: format!("copy {copy}: {certificate} > {within}"),
            });
        }
        out.push(CopyCertificate {
            copy,
            first_side: (0..k).filter(|&c| side[c]).collect(),
            first_weight: first,
            second_weight: second,
            certificate,
            within_copy_boundary: within,
        });
    }
    let min_certificate = out.iter().map(|c| c.certificate).reduce(f64::min);
    Ok(LowerBoundReport { copies: out, min_certificate, local_fluctuation: fluct, skipped: None })
}

/// Relative tolerance for regression comparisons.
pub const REGRESSION_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub provenance: Provenance,
    /// Run on ⌊k/4⌋ copies of the generated graph.
    #[serde(default)]
    pub replicate: bool,
    pub k: usize,
    pub oracle: String,
    pub p: f64,
    pub epsilon: f64,
    /// SHA-256 of the (replicated) graph text.
    pub hash: String,
    pub frozen: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    /// Constant C of the strictification budget max ∂ + C·max π^{1/p} + C·Δ_c.
    pub strictify_budget: f64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

/// The instance an entry runs on.
pub fn entry_instance(entry: &ManifestEntry) -> Result<InstanceBundle> {
    let base = generate(&entry.provenance)?;
    if entry.replicate {
        replicate_instance(&base, entry.k)
    } else {
        Ok(base)
    }
}

/// Current metrics of an entry: partition boundary costs, the greedy
/// baseline, and for replicated entries the avg boundary over the certificate.
pub fn entry_metrics(entry: &ManifestEntry) -> Result<(String, BTreeMap<String, f64>)> {
    let bundle = entry_instance(entry)?;
    let grid = bundle.dim.map(|d| (d, bundle.coords.clone()));
    let oracle = oracle_by_name(&entry.oracle, entry.p, grid)?;
    let config = ShrinkConfig::new(entry.epsilon)?;
    let report = partition(&bundle.graph, oracle.as_ref(), entry.k, &config)?;
    let greedy = greedy_baseline(&bundle.graph, entry.k)?;
    let mut metrics = BTreeMap::new();
    metrics.insert("max_boundary".to_string(), report.max_boundary);
    metrics.insert("avg_boundary".to_string(), report.avg_boundary);
    metrics.insert("greedy_max_boundary".to_string(), greedy.max_boundary());
    if entry.replicate {
        let lb = lower_bound_report(&bundle, &report.coloring)?;
        if let Some(c) = lb.min_certificate.filter(|&c| c > 0.0) {
            metrics.insert("lower_bound_ratio".to_string(), report.avg_boundary / c);
        }
    }
    Ok((bundle.hash(), metrics))
}

/// One metric compared against its frozen value.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub entry: String,
    pub metric: String,
    pub frozen: Option<f64>,
    pub current: Option<f64>,
    pub relative_change: f64,
    pub ok: bool,
}

fn compare(entry: &str, metric: &str, frozen: Option<f64>, current: Option<f64>) -> Comparison {
    let (relative_change, ok) = match (frozen, current) {
        (Some(0.0), Some(c)) => (if c == 0.0 { 0.0 } else { f64::INFINITY }, c.abs() <= slack_for(0.0)),
        (Some(f), Some(c)) => {
            let r = (c - f) / f.abs();
            (r, r.abs() <= REGRESSION_TOLERANCE)
        }
        _ => (f64::NAN, false),
    };
    Comparison { entry: entry.to_string(), metric: metric.to_string(), frozen, current, relative_change, ok }
}

/// Outcome of re-running one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryOutcome {
    pub name: String,
    pub hash_matches: bool,
    pub metrics: BTreeMap<String, f64>,
    pub comparisons: Vec<Comparison>,
}

impl EntryOutcome {
    pub fn ok(&self) -> bool {
        self.hash_matches && self.comparisons.iter().all(|c| c.ok)
    }
}

/// Re-runs every entry (in parallel when enabled); results follow entry order.
pub fn run_corpus(manifest: &Manifest) -> Vec<Result<EntryOutcome>> {
    map_range(manifest.entries.len(), |i| {
        let entry = &manifest.entries[i];
        let (hash, metrics) = entry_metrics(entry)?;
        let mut names: Vec<&String> = entry.frozen.keys().chain(metrics.keys()).collect();
        names.sort();
        names.dedup();
        let comparisons = names
            .into_iter()
            .map(|m| compare(&entry.name, m, entry.frozen.get(m).copied(), metrics.get(m).copied()))
            .collect();
        Ok(EntryOutcome { name: entry.name.clone(), hash_matches: hash == entry.hash, metrics, comparisons })
    })
}

/// Copy of `manifest` with hashes and frozen metrics set to current values.
pub fn freeze_manifest(manifest: &Manifest) -> Result<Manifest> {
    let outcomes = run_corpus(manifest);
    let mut out = manifest.clone();
    for (entry, outcome) in out.entries.iter_mut().zip(outcomes) {
        let outcome = outcome?;
        entry.hash = entry_instance(entry)?.hash();
        entry.frozen = outcome.metrics;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> InstanceBundle {
        let g = WeightedGraph::new(vec![1.0; 3], &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap();
        InstanceBundle {
            graph: g,
            dim: None,
            coords: Vec::new(),
            provenance: Provenance { seed: 0, recipe: Recipe::Regular { n: 3, degree: 2 } },
            copies: 1,
            lower_bound: None,
        }
    }

    #[test]
    fn replication_counts() {
        let t = triangle();
        assert!(replicate_instance(&t, 3).is_err());
        let one = replicate_instance(&t, 4).unwrap();
        assert_eq!(one.graph, t.graph);
        let two = replicate_instance(&t, 8).unwrap();
        assert_eq!((two.graph.vertex_count(), two.graph.edge_count(), two.copies), (6, 6, 2));
        let sq = |g: &WeightedGraph| g.costs().iter().map(|c| c * c).sum::<f64>();
        assert_eq!(sq(&t.graph), 14.0);
        assert_eq!(sq(&replicate_instance(&t, 9).unwrap().graph), 28.0);
    }

    #[test]
    fn metrics_examples() {
        let g = WeightedGraph::new(vec![1.0; 2], &[(0, 1, 1.0)]).unwrap();
        let m = measure_coloring(&g, &Coloring::new(&g, 2, vec![0, 1]).unwrap());
        assert_eq!((m.max_boundary, m.avg_boundary), (1.0, 1.0));
        let m = measure_coloring(&g, &Coloring::new(&g, 2, vec![0, 0]).unwrap());
        assert_eq!(m.max_boundary, 0.0);
        let c4 = WeightedGraph::new(vec![1.0; 4], &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let m = measure_coloring(&c4, &Coloring::new(&c4, 2, vec![0, 1, 0, 1]).unwrap());
        assert_eq!(m.max_boundary, 4.0);
    }

    #[test]
    fn greedy_examples() {
        let g = WeightedGraph::new(vec![1.0; 10], &[]).unwrap();
        let mut sizes = greedy_baseline(&g, 4).unwrap().class_weights().to_vec();
        sizes.sort_by(f64::total_cmp);
        assert_eq!(sizes, vec![2.0, 2.0, 3.0, 3.0]);
        let g = WeightedGraph::new(vec![5.0, 3.0, 3.0, 3.0], &[]).unwrap();
        let c = greedy_baseline(&g, 2).unwrap();
        assert_eq!(c.class_weights(), &[8.0, 6.0]);
        assert!(measure_coloring(&g, &c).strictly_balanced);
    }

    #[test]
    fn generators_are_reproducible() {
        for recipe in [
            Recipe::BoundedDegree { n: 40, max_degree: 4, weight_max: 100, cost_max: 10 },
            Recipe::Grid { sides: vec![5, 4], weight_max: 1, cost_max: 8 },
            Recipe::Regular { n: 30, degree: 4 },
        ] {
            let p = Provenance { seed: 11, recipe };
            let a = generate(&p).unwrap();
            assert_eq!(a, generate(&p).unwrap());
            assert_eq!(a.hash(), generate(&p).unwrap().hash());
        }
        let r = generate(&Provenance { seed: 3, recipe: Recipe::Regular { n: 50, degree: 4 } }).unwrap();
        assert!((0..50).all(|v| r.graph.degree(v) == 4));
    }

    #[test]
    fn single_edge_certificate() {
        let g = WeightedGraph::new(vec![1.0; 2], &[(0, 1, 3.0)]).unwrap();
        let bundle = InstanceBundle { graph: g.clone(), ..triangle() };
        let c = Coloring::new(&g, 4, vec![0, 1]).unwrap();
        let rep = lower_bound_report(&bundle, &c).unwrap();
        assert_eq!(rep.min_certificate, Some(3.0));
        let mono = Coloring::new(&g, 4, vec![0, 0]).unwrap();
        assert!(lower_bound_report(&bundle, &mono).unwrap().skipped.is_some());
    }
}
