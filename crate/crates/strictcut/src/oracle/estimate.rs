use super::exhaustive_split;
use crate::error::Result;
use crate::graph::{Scope, SubgraphView, WeightedGraph};
use crate::par::map_range;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLE_CAP: usize = 12;

/// Optimal ∂_W U over ‖c|W‖_p for one request; 0 when the cut is free.
pub fn split_ratio(view: &SubgraphView<'_>, weights: &[f64], target: f64, p: f64) -> Result<f64> {
    let u = exhaustive_split(view, weights, target)?;
    let cut = view.boundary_cost(&u, Scope::View)?;
    if cut == 0.0 {
        return Ok(0.0);
    }
    Ok(cut / view.cost_norm(p)?)
}

/// Random connected-ish vertex set of at most `SAMPLE_CAP` vertices.
fn sample_view(g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.vertex_count();
    let size = rng.gen_range(1..=n.min(SAMPLE_CAP));
    let mut in_set = vec![false; n];
    let mut set = Vec::with_capacity(size);
    let mut frontier = Vec::new();
    while set.len() < size {
        let v = if frontier.is_empty() {
            let free: Vec<usize> = (0..n).filter(|&v| !in_set[v]).collect();
            *free.choose(rng).expect("size is at most n")
        } else {
            frontier.swap_remove(rng.gen_range(0..frontier.len()))
        };
        if in_set[v] {
            continue;
        }
        in_set[v] = true;
        set.push(v);
        frontier.extend(g.neighbors(v).iter().map(|&(u, _)| u).filter(|&u| !in_set[u]));
    }
    set
}

/// Lower bound on the p-splittability: the largest optimal ratio over
/// `trials` random (W, w, w*) triples. Deterministic in `seed`.
pub fn estimate_splittability(g: &WeightedGraph, p: f64, trials: usize, seed: u64) -> Result<f64> {
    if g.vertex_count() == 0 {
        return Ok(0.0);
    }
    let ratios = map_range(trials, |t| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let members = sample_view(g, &mut rng);
        let view = SubgraphView::new(g, &members)?;
        let mut weights = vec![0.0; g.vertex_count()];
        for &v in &members {
            weights[v] = rng.gen_range(0..=8) as f64;
        }
        let total = view.sum(&weights) as u64;
        let target = rng.gen_range(0..=total) as f64;
        split_ratio(&view, &weights, target, p)
    });
    ratios.into_iter().try_fold(0.0, |acc, r| Ok(f64::max(acc, r?)))
}
