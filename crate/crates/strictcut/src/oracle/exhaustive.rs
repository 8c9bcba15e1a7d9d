use super::{check_request, in_window, SplitOracle};
use crate::error::{Error, Result};
use crate::graph::SubgraphView;

/// Largest view the exhaustive oracle accepts by default.
pub const EXHAUSTIVE_CAP: usize = 24;

/// Optimal oracle by enumeration; only for tiny views.
#[derive(Debug, Clone)]
pub struct ExhaustiveOracle {
    p: f64,
    cap: usize,
}

impl ExhaustiveOracle {
    pub fn new(p: f64) -> Self {
        ExhaustiveOracle { p, cap: EXHAUSTIVE_CAP }
    }

    pub fn with_cap(p: f64, cap: usize) -> Self {
        ExhaustiveOracle { p, cap: cap.min(63) }
    }
}

impl SplitOracle for ExhaustiveOracle {
    fn name(&self) -> String {
        "exhaustive".into()
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn split(&self, view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
        exhaustive_split_capped(view, weights, target, self.cap)
    }
}

pub fn exhaustive_split(view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
    exhaustive_split_capped(view, weights, target, EXHAUSTIVE_CAP)
}

/// Is set `a` lexicographically smaller than `b` as sorted position lists?
fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let i = (a ^ b).trailing_zeros();
    let above = !((2u64 << i).wrapping_sub(1));
    if a >> i & 1 == 1 {
        b & above != 0
    } else {
        a & above == 0
    }
}

#[derive(Clone, Copy)]
struct Best {
    cut: f64,
    dev: f64,
    mask: u64,
}

struct Search {
    weights: Vec<f64>,
    earlier: Vec<Vec<(usize, f64)>>,
    suffix: Vec<f64>,
    target: f64,
    max_w: f64,
    best: Option<Best>,
}

impl Search {
    fn offer(&mut self, cut: f64, weight: f64, mask: u64) {
        if !in_window(weight, self.target, self.max_w) {
            return;
        }
        let cand = Best { cut, dev: (weight - self.target).abs(), mask };
        let better = match self.best {
            None => true,
            Some(b) => {
                cand.cut < b.cut
                    || (cand.cut == b.cut && (cand.dev < b.dev || (cand.dev == b.dev && lex_less(mask, b.mask))))
            }
        };
        if better {
            self.best = Some(cand);
        }
    }

    fn dfs(&mut self, i: usize, mask: u64, weight: f64, cut: f64) {
        if let Some(b) = self.best {
            if cut > b.cut {
                return;
            }
        }
        let half = self.max_w / 2.0;
        if weight > self.target + half + 1e-9 || weight + self.suffix[i] < self.target - half - 1e-9 {
            return;
        }
        if i == self.weights.len() {
            self.offer(cut, weight, mask);
            return;
        }
        let mut to_in = 0.0;
        let mut to_out = 0.0;
        for &(j, c) in &self.earlier[i] {
            if mask >> j & 1 == 1 {
                to_in += c;
            } else {
                to_out += c;
            }
        }
        self.dfs(i + 1, mask | 1 << i, weight + self.weights[i], cut + to_out);
        self.dfs(i + 1, mask, weight, cut + to_in);
    }
}

/// Minimum-∂_W splitting set; ties go to smaller |w(U) - w*|, then to the
/// lexicographically smallest id list.
pub fn exhaustive_split_capped(
    view: &SubgraphView<'_>,
    weights: &[f64],
    target: f64,
    cap: usize,
) -> Result<Vec<usize>> {
    let cap = cap.min(63);
    if view.len() > cap {
        return Err(Error::Size { what: "exhaustive oracle view", size: view.len(), cap });
    }
    let (total, max_w) = check_request(view, weights, target)?;
    let members = view.members();
    let host = view.host();
    let mut pos = vec![usize::MAX; host.vertex_count()];
    for (i, &v) in members.iter().enumerate() {
        pos[v] = i;
    }
    let earlier = members
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            host.neighbors(v)
                .iter()
                .filter(|&&(u, _)| pos[u] < i)
                .map(|&(u, e)| (pos[u], host.cost(e)))
                .collect()
        })
        .collect();
    let local: Vec<f64> = members.iter().map(|&v| weights[v]).collect();
    let mut suffix = vec![0.0; local.len() + 1];
    for i in (0..local.len()).rev() {
        suffix[i] = suffix[i + 1] + local[i];
    }
    let mut search = Search {
        weights: local,
        earlier,
        suffix,
        target: target.min(total),
        max_w,
        best: None,
    };
    search.dfs(0, 0, 0.0, 0.0);
    let best = search.best.ok_or_else(|| Error::Internal {
        check: "exhaustive oracle feasibility",
        witness: format!("no splitting set for target {target} on {} vertices", members.len()),
    })?;
    Ok((0..members.len()).filter(|&i| best.mask >> i & 1 == 1).map(|i| members[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Scope, WeightedGraph};

    fn path(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        WeightedGraph::new(vec![1.0; n], &edges).unwrap()
    }

    #[test]
    fn lex_order_matches_sorted_lists() {
        let sets = |m: u64| (0..6).filter(|i| m >> i & 1 == 1).collect::<Vec<u64>>();
        for a in 0..64u64 {
            for b in 0..64u64 {
                assert_eq!(lex_less(a, b), sets(a) < sets(b), "{a:b} vs {b:b}");
            }
        }
    }

    #[test]
    fn path_of_four_splits_in_the_middle() {
        let g = path(4);
        let u = exhaustive_split(&g.full_view(), g.weights(), 2.0).unwrap();
        assert_eq!(u, vec![0, 1]);
        assert_eq!(g.full_view().boundary_cost(&u, Scope::View).unwrap(), 1.0);
    }

    #[test]
    fn extreme_targets() {
        let g = path(5);
        let view = g.view(&[1, 2, 3]).unwrap();
        assert_eq!(exhaustive_split(&view, g.weights(), 0.0).unwrap(), Vec::<usize>::new());
        assert_eq!(exhaustive_split(&view, g.weights(), 3.0).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn enforces_cap_and_range() {
        let g = path(30);
        assert!(matches!(exhaustive_split(&g.full_view(), g.weights(), 1.0), Err(Error::Size { .. })));
        let g = path(3);
        assert!(matches!(exhaustive_split(&g.full_view(), g.weights(), 4.0), Err(Error::Parameter(_))));
    }
}
