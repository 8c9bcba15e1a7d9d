use super::{check_request, SplitOracle};
use crate::error::Result;
use crate::graph::SubgraphView;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Region-growing oracle with one improvement sweep. Promises no quality.
#[derive(Debug, Clone)]
pub struct GreedyOracle {
    p: f64,
}

impl GreedyOracle {
    pub fn new(p: f64) -> Self {
        GreedyOracle { p }
    }
}

impl SplitOracle for GreedyOracle {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn split(&self, view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
        greedy_split(view, weights, target)
    }
}

/// Min-heap entry: smaller cut change first, then lower id.
#[derive(PartialEq)]
struct Entry {
    delta: f64,
    v: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.delta.total_cmp(&self.delta).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Grows a region from the lowest id, always adding the frontier vertex that
/// increases ∂_W U least, until w(U) ≥ w* - max w / 2. Then one sweep of
/// single-vertex moves over boundary vertices that strictly lower the cut
/// and keep the weight window.
pub fn greedy_split(view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
    let (total, max_w) = check_request(view, weights, target)?;
    let target = target.min(total);
    let lo = target - max_w / 2.0;
    let hi = target + max_w / 2.0;
    if lo <= 0.0 {
        return Ok(Vec::new());
    }
    let host = view.host();
    let n = host.vertex_count();
    let mut in_u = vec![false; n];
    // c(δ_W(v)) and cost from v into U.
    let mut deg = vec![0.0; n];
    let mut conn = vec![0.0; n];
    for &v in view.members() {
        deg[v] = view.neighbors(v).map(|(_, e)| host.cost(e)).sum();
    }
    let mut heap = BinaryHeap::new();
    let mut next_fresh = 0;
    let members = view.members();
    let mut weight = 0.0;
    'grow: while weight < lo {
        let v = loop {
            match heap.pop() {
                Some(Entry { delta, v }) if !in_u[v] && delta == deg[v] - 2.0 * conn[v] => break v,
                Some(_) => continue,
                None => {
                    while next_fresh < members.len() && in_u[members[next_fresh]] {
                        next_fresh += 1;
                    }
                    match members.get(next_fresh) {
                        Some(&v) => break v,
                        None => break 'grow,
                    }
                }
            }
        };
        in_u[v] = true;
        weight += weights[v];
        for (u, e) in view.neighbors(v) {
            if !in_u[u] {
                conn[u] += host.cost(e);
                heap.push(Entry { delta: deg[u] - 2.0 * conn[u], v: u });
            }
        }
    }

    let boundary: Vec<usize> =
        members.iter().copied().filter(|&v| view.neighbors(v).any(|(u, _)| in_u[u] != in_u[v])).collect();
    for v in boundary {
        let (mut same, mut other) = (0.0, 0.0);
        for (u, e) in view.neighbors(v) {
            if in_u[u] == in_u[v] {
                same += host.cost(e);
            } else {
                other += host.cost(e);
            }
        }
        let new_weight = if in_u[v] { weight - weights[v] } else { weight + weights[v] };
        if same < other && new_weight >= lo && new_weight <= hi {
            in_u[v] = !in_u[v];
            weight = new_weight;
        }
    }
    Ok(members.iter().copied().filter(|&v| in_u[v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Scope, WeightedGraph};
    use crate::oracle::exhaustive_split;

    fn path(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        WeightedGraph::new(vec![1.0; n], &edges).unwrap()
    }

    #[test]
    fn zero_target_is_empty() {
        let g = path(4);
        assert!(greedy_split(&g.full_view(), g.weights(), 0.0).unwrap().is_empty());
    }

    #[test]
    fn path_of_six_takes_a_prefix() {
        let g = path(6);
        let view = g.full_view();
        let u = greedy_split(&view, g.weights(), 3.0).unwrap();
        assert_eq!(u, vec![0, 1, 2]);
        let best = exhaustive_split(&view, g.weights(), 3.0).unwrap();
        let cut = |s: &[usize]| view.boundary_cost(s, Scope::View).unwrap();
        assert_eq!(cut(&u), 1.0);
        assert_eq!(cut(&u), cut(&best));
    }

    #[test]
    fn single_vertex_view() {
        let g = WeightedGraph::new(vec![2.5], &[]).unwrap();
        assert_eq!(greedy_split(&g.full_view(), g.weights(), 2.5).unwrap(), vec![0]);
    }

    #[test]
    fn jumps_between_components() {
        let g = WeightedGraph::new(vec![1.0; 4], &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let u = greedy_split(&g.full_view(), g.weights(), 4.0).unwrap();
        assert_eq!(u, vec![0, 1, 2, 3]);
    }
}
