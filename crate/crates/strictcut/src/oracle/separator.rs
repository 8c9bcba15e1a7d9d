use super::{check_request, SplitOracle};
use crate::error::{Error, Result};
use crate::graph::{difference, normalized, union, SubgraphView, WeightedGraph};

/// Largest view the exhaustive separator accepts.
pub const SEPARATOR_CAP: usize = 16;

/// Produces balanced separations of induced subgraphs.
pub trait SeparatorRoutine: Send + Sync {
    fn name(&self) -> String;

    /// Returns `(A, B)` with A ∪ B = W, no induced edge between A∖B and B∖A,
    /// and μ(A∖B), μ(B∖A) ≤ 2/3·μ(W). `measure` and `cost` are host-indexed;
    /// the routine should keep cost(A ∩ B) small.
    fn separate(&self, view: &SubgraphView<'_>, measure: &[f64], cost: &[f64]) -> Result<(Vec<usize>, Vec<usize>)>;
}

/// Connected components of G[W ∖ Z] in local indices, each sorted.
fn components(adj: &[Vec<usize>], removed: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = removed.to_vec();
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Cheapest separator by enumeration: minimum cost(Z), then |Z|, then the
/// lexicographically smallest Z. Components are packed largest-first onto
/// the lighter side.
#[derive(Debug, Clone)]
pub struct ExhaustiveSeparator {
    pub cap: usize,
}

impl Default for ExhaustiveSeparator {
    fn default() -> Self {
        ExhaustiveSeparator { cap: SEPARATOR_CAP }
    }
}

impl SeparatorRoutine for ExhaustiveSeparator {
    fn name(&self) -> String {
        "exhaustive".into()
    }

    fn separate(&self, view: &SubgraphView<'_>, measure: &[f64], cost: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
        let n = view.len();
        if n > self.cap.min(30) {
            return Err(Error::Size { what: "exhaustive separator view", size: n, cap: self.cap.min(30) });
        }
        let members = view.members();
        let host = view.host();
        let mut pos = vec![usize::MAX; host.vertex_count()];
        for (i, &v) in members.iter().enumerate() {
            pos[v] = i;
        }
        let adj: Vec<Vec<usize>> = members.iter().map(|&v| view.neighbors(v).map(|(u, _)| pos[u]).collect()).collect();
        let mu: Vec<f64> = members.iter().map(|&v| measure[v]).collect();
        let tau: Vec<f64> = members.iter().map(|&v| cost[v]).collect();
        let limit = 2.0 / 3.0 * mu.iter().sum::<f64>() + 1e-9;

        let mut best: Option<(f64, u32, u32, Vec<Vec<usize>>)> = None;
        for z in 0u32..(1u32 << n) {
            let z_cost: f64 = (0..n).filter(|&i| z >> i & 1 == 1).map(|i| tau[i]).sum();
            let size = z.count_ones();
            if let Some((bc, bs, bz, _)) = &best {
                let worse = z_cost > *bc
                    || (z_cost == *bc && (size > *bs || (size == *bs && !lex_less32(z, *bz))));
                if worse {
                    continue;
                }
            }
            let removed: Vec<bool> = (0..n).map(|i| z >> i & 1 == 1).collect();
            let comps = components(&adj, &removed);
            if comps.iter().all(|c| c.iter().map(|&i| mu[i]).sum::<f64>() <= limit) {
                best = Some((z_cost, size, z, comps));
            }
        }
        let (_, _, z, mut comps) = best.expect("Z = W is always a valid separator");
        let weight = |c: &Vec<usize>| c.iter().map(|&i| mu[i]).sum::<f64>();
        comps.sort_by(|a, b| weight(b).total_cmp(&weight(a)).then(a[0].cmp(&b[0])));
        let sep: Vec<usize> = (0..n).filter(|&i| z >> i & 1 == 1).map(|i| members[i]).collect();
        let (mut a, mut b) = (sep.clone(), sep);
        let (mut wa, mut wb) = (0.0, 0.0);
        for c in &comps {
            let cw = weight(c);
            if wa <= wb {
                a.extend(c.iter().map(|&i| members[i]));
                wa += cw;
            } else {
                b.extend(c.iter().map(|&i| members[i]));
                wb += cw;
            }
        }
        Ok((normalized(&a), normalized(&b)))
    }
}

fn lex_less32(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let i = (a ^ b).trailing_zeros();
    let above = !((2u64 << i).wrapping_sub(1)) as u32;
    if a >> i & 1 == 1 {
        b & above != 0
    } else {
        a & above == 0
    }
}

/// Breadth-first layering: the shortest BFS prefix holding a third of the
/// measure, with its last vertex and its frontier toward the suffix as separator.
#[derive(Debug, Clone, Copy, Default)]
pub struct BfsSeparator;

impl SeparatorRoutine for BfsSeparator {
    fn name(&self) -> String {
        "bfs".into()
    }

    fn separate(&self, view: &SubgraphView<'_>, measure: &[f64], _cost: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
        let host = view.host();
        let mut seen = vec![false; host.vertex_count()];
        let mut order = Vec::with_capacity(view.len());
        for &s in view.members() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let start = order.len();
            order.push(s);
            let mut head = start;
            while head < order.len() {
                let v = order[head];
                head += 1;
                for (u, _) in view.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        order.push(u);
                    }
                }
            }
        }
        let total = view.sum(measure);
        let mut acc = 0.0;
        let mut cut = order.len();
        for (i, &v) in order.iter().enumerate() {
            acc += measure[v];
            if acc >= total / 3.0 {
                cut = i + 1;
                break;
            }
        }
        let cut = cut.max(1).min(order.len());
        let mut in_suffix = vec![false; host.vertex_count()];
        for &v in &order[cut..] {
            in_suffix[v] = true;
        }
        let prefix = &order[..cut];
        let mut sep: Vec<usize> =
            prefix.iter().copied().filter(|&v| view.neighbors(v).any(|(u, _)| in_suffix[u])).collect();
        if let Some(&last) = prefix.last() {
            sep.push(last);
        }
        let a = normalized(prefix);
        let b = union(&normalized(&sep), &normalized(&order[cut..]));
        Ok((a, b))
    }
}

/// Splitting oracle built on a separator routine.
pub struct SeparatorOracle {
    sep: Box<dyn SeparatorRoutine>,
    p: f64,
}

impl SeparatorOracle {
    pub fn new(sep: Box<dyn SeparatorRoutine>, p: f64) -> Self {
        SeparatorOracle { sep, p }
    }
}

impl SplitOracle for SeparatorOracle {
    fn name(&self) -> String {
        format!("separator:{}", self.sep.name())
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn split(&self, view: &SubgraphView<'_>, weights: &[f64], target: f64) -> Result<Vec<usize>> {
        separator_to_split(view, weights, target, self.sep.as_ref(), self.p)
    }
}

struct Splitter<'a> {
    host: &'a WeightedGraph,
    weights: &'a [f64],
    tau: Vec<f64>,
    pi: Vec<f64>,
    sep: &'a dyn SeparatorRoutine,
    max_w: f64,
}

type Separation = (Vec<usize>, Vec<usize>);

impl Splitter<'_> {
    fn weight(&self, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.weights[v]).sum()
    }

    fn misbehaved(&self, witness: String) -> Error {
        Error::OracleMisbehavior { routine: format!("separator:{}", self.sep.name()), witness }
    }

    fn check_separation(&self, view: &SubgraphView<'_>, measure: &[f64], a: &[usize], b: &[usize]) -> Result<()> {
        if union(a, b) != view.members() {
            return Err(self.misbehaved(format!("A ∪ B differs from W (|W| = {})", view.len())));
        }
        let a_only = difference(a, b);
        let b_only = difference(b, a);
        let mut side = vec![0u8; self.host.vertex_count()];
        for &v in &a_only {
            side[v] = 1;
        }
        for &v in &b_only {
            side[v] = 2;
        }
        for &v in &a_only {
            if let Some((u, _)) = view.neighbors(v).find(|&(u, _)| side[u] == 2) {
                return Err(self.misbehaved(format!("edge {v}-{u} joins A∖B and B∖A")));
            }
        }
        let total = view.sum(measure);
        let limit = 2.0 / 3.0 * total + crate::check::slack_for(total);
        for (name, part) in [("A∖B", &a_only), ("B∖A", &b_only)] {
            let m: f64 = part.iter().map(|&v| measure[v]).sum();
            if m > limit {
                return Err(self.misbehaved(format!("{name} carries {m} of {total}")));
            }
        }
        Ok(())
    }

    /// Separation (A0, B0) of G[W] with w(A0∖B0) ≤ max(0, t) and w(A0) ≥ t,
    /// where t = target - max w / 2.
    fn run(&self, members: &[usize], target: f64, depth: usize) -> Result<Separation> {
        if members.iter().all(|&v| self.pi[v] == 0.0) {
            return Ok((members.to_vec(), members.to_vec()));
        }
        let view = SubgraphView::new(self.host, members)?;
        let mut measure = if depth.is_multiple_of(2) {
            self.pi.clone()
        } else {
            let mut deg = vec![0.0; self.host.vertex_count()];
            for &v in members {
                deg[v] = view.induced_degree(v) as f64;
            }
            deg
        };
        if view.sum(&measure) == 0.0 {
            measure = vec![1.0; self.host.vertex_count()];
        }
        let (a, b) = self.sep.separate(&view, &measure, &self.tau)?;
        let (a, b) = (normalized(&a), normalized(&b));
        self.check_separation(&view, &measure, &a, &b)?;
        let a_only = difference(&a, &b);
        let b_only = difference(&b, &a);
        let shared = difference(&a, &a_only);
        let threshold = target - self.max_w / 2.0;
        let w_a = self.weight(&a);
        if threshold < self.weight(&a_only) {
            let (a1, b1) = self.run(&a_only, target, depth + 1)?;
            Ok((union(&a1, &shared), union(&b1, &b)))
        } else if threshold <= w_a {
            Ok((a, b))
        } else {
            let (a1, b1) = self.run(&b_only, target - w_a, depth + 1)?;
            Ok((union(&a, &a1), union(&b1, &shared)))
        }
    }
}

/// Splitting set from recursive balanced separations. The final set is
/// A0∖B0 plus separator vertices, cheapest first, until the weight reaches
/// w* - max w / 2.
pub fn separator_to_split(
    view: &SubgraphView<'_>,
    weights: &[f64],
    target: f64,
    sep: &dyn SeparatorRoutine,
    p: f64,
) -> Result<Vec<usize>> {
    let (total, max_w) = check_request(view, weights, target)?;
    let target = target.min(total);
    let host = view.host();
    let tau: Vec<f64> = (0..host.vertex_count()).map(|v| host.vertex_cost(v)).collect();
    let pi = tau.iter().map(|t| t.powf(p)).collect();
    let splitter = Splitter { host, weights, tau, pi, sep, max_w };
    let (a0, b0) = splitter.run(view.members(), target, 0)?;
    let mut set = difference(&a0, &b0);
    let mut separator = difference(&a0, &set);
    separator.sort_by(|&u, &v| splitter.tau[u].total_cmp(&splitter.tau[v]).then(u.cmp(&v)));
    let threshold = target - max_w / 2.0;
    let mut weight = splitter.weight(&set);
    for v in separator {
        if weight >= threshold {
            break;
        }
        set.push(v);
        weight += weights[v];
    }
    Ok(normalized(&set))
}
