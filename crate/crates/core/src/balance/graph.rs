use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{laplacian_solve, DenseMatrix, DenseVector};

/// Subdomain adjacency graph with one observation count per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessorGraph {
    p: usize,
    edges: Vec<(usize, usize)>,
    loads: Vec<u64>,
}

impl ProcessorGraph {
    /// Edges are unordered; duplicates collapse. Fails on self-loops,
    /// out-of-range vertices or a disconnected graph.
    pub fn new(p: usize, edges: &[(usize, usize)], loads: Vec<u64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        if loads.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} loads for {p} vertices",
                loads.len()
            )));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            if a >= p || b >= p {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) outside 0..{p}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let g = Self {
            p,
            edges: set.into_iter().collect(),
            loads,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.p];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbours(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn loads(&self) -> &[u64] {
        &self.loads
    }

    pub fn total_load(&self) -> u64 {
        self.loads.iter().sum()
    }

    pub fn with_loads(&self, loads: Vec<u64>) -> Result<Self> {
        if loads.len() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "{} loads for {} vertices",
                loads.len(),
                self.p
            )));
        }
        Ok(Self {
            loads,
            ..self.clone()
        })
    }

    /// Adjacent vertices of `i`, ascending.
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.p).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn mean_load(&self) -> f64 {
        self.total_load() as f64 / self.p as f64
    }
}

/// `L = D − A`: degrees on the diagonal, −1 on edges.
pub fn build_laplacian(g: &ProcessorGraph) -> DenseMatrix {
    let mut l = DenseMatrix::zeros(g.p(), g.p());
    for &(a, b) in g.edges() {
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] = -1.0;
        l[(b, a)] = -1.0;
    }
    l
}

/// `b_i = l_i − l̄`, formed as `(p·l_i − Σl) / p` so the numerators sum to zero exactly.
pub fn compute_imbalance(g: &ProcessorGraph) -> DenseVector {
    let p = g.p() as i128;
    let total = g.total_load() as i128;
    g.loads()
        .iter()
        .map(|&l| (p * l as i128 - total) as f64 / p as f64)
        .collect::<Vec<_>>()
        .into()
}

/// Nearest integer, halves rounded away from zero. Values within `1e-9` of a
/// half-integer are treated as exact halves.
pub fn round_flow(v: f64) -> i64 {
    let a = v.abs();
    let frac = a - a.floor();
    let snapped = if (frac - 0.5).abs() < 1e-9 {
        a.floor() + 0.5
    } else {
        a
    };
    (snapped.round() as i64) * if v < 0.0 { -1 } else { 1 }
}

/// Potentials and integer edge flows from one scheduling step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceSchedule {
    pub lambda: DenseVector,
    /// Edges `(i, j)` with `i < j`, parallel to `delta`.
    pub edges: Vec<(usize, usize)>,
    /// `δ_{i,j}` for each edge; positive means `i` sends to `j`.
    pub delta: Vec<i64>,
}

impl BalanceSchedule {
    /// Rounds `λ_i − λ_j` on every edge of `g`.
    pub fn from_potentials(g: &ProcessorGraph, lambda: DenseVector) -> Self {
        let delta = g
            .edges()
            .iter()
            .map(|&(a, b)| round_flow(lambda[a] - lambda[b]))
            .collect();
        Self {
            lambda,
            edges: g.edges().to_vec(),
            delta,
        }
    }

    /// `δ_{i,j}` with `δ_{j,i} = −δ_{i,j}`; `None` off the edge set.
    pub fn delta(&self, i: usize, j: usize) -> Option<i64> {
        let key = (i.min(j), i.max(j));
        let k = self.edges.iter().position(|&e| e == key)?;
        Some(if i < j { self.delta[k] } else { -self.delta[k] })
    }

    pub fn is_idle(&self) -> bool {
        self.delta.iter().all(|&d| d == 0)
    }

    /// Directed transfers `(from, to, amount)` with `amount > 0`, in edge order.
    pub fn flows(&self) -> Vec<(usize, usize, u64)> {
        self.edges
            .iter()
            .zip(&self.delta)
            .filter(|(_, &d)| d != 0)
            .map(|(&(a, b), &d)| {
                if d > 0 {
                    (a, b, d as u64)
                } else {
                    (b, a, d.unsigned_abs())
                }
            })
            .collect()
    }
}

/// Solves `Lλ = b` on the graph and rounds the edge differences.
pub fn schedule(g: &ProcessorGraph) -> Result<BalanceSchedule> {
    let lambda = laplacian_solve(&build_laplacian(g), &compute_imbalance(g))?;
    Ok(BalanceSchedule::from_potentials(g, lambda))
}

/// Loads after applying every flow of `s` (no geometry).
pub fn apply_flows(g: &ProcessorGraph, s: &BalanceSchedule) -> Result<Vec<u64>> {
    let mut loads: Vec<i128> = g.loads().iter().map(|&l| l as i128).collect();
    for (from, to, amount) in s.flows() {
        loads[from] -= amount as i128;
        loads[to] += amount as i128;
    }
    if let Some(v) = loads.iter().position(|&l| l < 0) {
        return Err(Error::InsufficientLoad {
            from: v,
            to: v,
            needed: (-loads[v]) as u64,
            held: g.loads()[v],
        });
    }
    Ok(loads.into_iter().map(|l| l as u64).collect())
}

/// `min / max` of the loads.
pub fn balance_metric(loads: &[u64]) -> Result<f64> {
    if loads.is_empty() {
        return Err(Error::InvalidArgument("no loads".into()));
    }
    if let Some(i) = loads.iter().position(|&l| l == 0) {
        return Err(Error::ZeroLoad(i));
    }
    let min = *loads.iter().min().unwrap();
    let max = *loads.iter().max().unwrap();
    Ok(min as f64 / max as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_small_graphs() {
        let g = ProcessorGraph::new(2, &[(0, 1)], vec![1, 1]).unwrap();
        assert_eq!(build_laplacian(&g).as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        let g = ProcessorGraph::new(3, &[(1, 0), (1, 2)], vec![0; 3]).unwrap();
        assert_eq!(
            build_laplacian(&g).as_slice(),
            &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]
        );
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(
            ProcessorGraph::new(3, &[(0, 1)], vec![0; 3]),
            Err(Error::Disconnected)
        ));
        assert!(ProcessorGraph::new(2, &[(0, 0), (0, 1)], vec![0; 2]).is_err());
        assert!(ProcessorGraph::new(2, &[(0, 2)], vec![0; 2]).is_err());
        let g = ProcessorGraph::new(3, &[(0, 1), (1, 0), (2, 1)], vec![0; 3]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn imbalance_examples() {
        let g = ProcessorGraph::new(2, &[(0, 1)], vec![1000, 500]).unwrap();
        assert_eq!(&compute_imbalance(&g)[..], &[250.0, -250.0]);
        let g = ProcessorGraph::new(3, &[(0, 1), (1, 2)], vec![7; 3]).unwrap();
        assert_eq!(&compute_imbalance(&g)[..], &[0.0; 3]);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_flow(0.5), 1);
        assert_eq!(round_flow(-0.5), -1);
        assert_eq!(round_flow(2.5 - 1e-12), 3);
        assert_eq!(round_flow(-2.5 + 1e-12), -3);
        assert_eq!(round_flow(0.49), 0);
        assert_eq!(round_flow(-1.7), -2);
    }

    #[test]
    fn two_node_schedule() {
        let g = ProcessorGraph::new(2, &[(0, 1)], vec![1000, 500]).unwrap();
        let s = schedule(&g).unwrap();
        assert!((s.lambda[0] - 125.0).abs() < 1e-9);
        assert_eq!(s.delta(0, 1), Some(250));
        assert_eq!(s.delta(1, 0), Some(-250));
        assert_eq!(apply_flows(&g, &s).unwrap(), vec![750, 750]);
    }

    #[test]
    fn metric_examples() {
        assert_eq!(balance_metric(&[375; 4]).unwrap(), 1.0);
        assert!((balance_metric(&[129, 128]).unwrap() - 0.992_248).abs() < 1e-6);
        assert!(matches!(balance_metric(&[3, 0]), Err(Error::ZeroLoad(1))));
    }
}
