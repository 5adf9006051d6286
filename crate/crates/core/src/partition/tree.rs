//! Regression tree used as a hard partitioner.
//!
//! The tree grows best-first: at every step the leaf whose best split lowers
//! the squared error the most is split, until `k` leaves exist or no leaf can
//! be split. Leaves are then numbered left to right.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{Assigner, Partitioning};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "node", rename_all = "snake_case"))]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { id: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionTree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
    pub leaves: usize,
    pub dim: usize,
}

impl RegressionTree {
    pub fn route(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { id } => return id,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// Leaf index of every row of `q`.
pub fn tree_route(tree: &RegressionTree, q: &Matrix) -> Result<Vec<usize>> {
    if q.cols() != tree.dim {
        return Err(Error::shape(format!(
            "queries have dimension {} but the tree was grown on {}",
            q.cols(),
            tree.dim
        )));
    }
    Ok(q.row_iter().map(|x| tree.route(x)).collect())
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best admissible split of `rows`, lowest feature then lowest threshold on
/// equal gain.
fn best_split(x: &Matrix, y: &[f64], rows: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = rows.len();
    if n < 2 * min_leaf {
        return None;
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &i| (a.min(y[i]), b.max(y[i])));
    if lo == hi {
        return None;
    }
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / n as f64;
    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for f in 0..x.cols() {
        order.sort_by(|&a, &b| x[(a, f)].total_cmp(&x[(b, f)]).then(a.cmp(&b)));
        // centered totals make the parent term vanish
        let total: f64 = order.iter().map(|&i| y[i] - mean).sum();
        let mut left = 0.0;
        for pos in 0..n - 1 {
            left += y[order[pos]] - mean;
            let (a, b) = (x[(order[pos], f)], x[(order[pos + 1], f)]);
            let nl = pos + 1;
            let nr = n - nl;
            if a == b || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right = total - left;
            let gain = left * left / nl as f64 + right * right / nr as f64 - total * total / n as f64;
            if gain > 0.0 && best.map_or(true, |s| gain > s.gain) {
                let mid = 0.5 * (a + b);
                let threshold = if mid >= b { a } else { mid };
                best = Some(SplitChoice { feature: f, threshold, gain });
            }
        }
    }
    best
}

/// Grows a tree with at most `k` leaves, each holding at least `min_leaf`
/// rows, and returns the leaf clusters. Fewer than `k` leaves are returned
/// when no further split is admissible.
pub fn tree_partition(x: &Matrix, y: &[f64], k: usize, min_leaf: usize) -> Result<Partitioning> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::shape(format!("{n} rows but {} targets", y.len())));
    }
    if k == 0 || n == 0 {
        return Err(Error::parameter(format!("tree needs k >= 1 and data, got k = {k}, n = {n}")));
    }
    if min_leaf < 2 {
        return Err(Error::parameter(format!("minimum leaf size must be at least 2, got {min_leaf}")));
    }

    struct Open {
        node: usize,
        rows: Vec<usize>,
        split: Option<SplitChoice>,
    }

    let mut nodes = vec![Node::Leaf { id: 0 }];
    let all: Vec<usize> = (0..n).collect();
    let mut open = vec![Open { node: 0, split: best_split(x, y, &all, min_leaf), rows: all }];

    while open.len() < k {
        // earliest-created node wins ties; nodes are created in increasing order
        let mut pick: Option<usize> = None;
        for (idx, o) in open.iter().enumerate() {
            if let Some(s) = o.split {
                let better = match pick {
                    None => true,
                    Some(p) => {
                        let ps = open[p].split.unwrap();
                        s.gain > ps.gain || (s.gain == ps.gain && o.node < open[p].node)
                    }
                };
                if better {
                    pick = Some(idx);
                }
            }
        }
        let Some(p) = pick else { break };
        let Open { node, rows, split } = open.swap_remove(p);
        let s = split.unwrap();
        let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| x[(i, s.feature)] <= s.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { id: 0 });
        nodes.push(Node::Leaf { id: 0 });
        nodes[node] = Node::Split { feature: s.feature, threshold: s.threshold, left, right };
        open.push(Open { node: left, split: best_split(x, y, &l_rows, min_leaf), rows: l_rows });
        open.push(Open { node: right, split: best_split(x, y, &r_rows, min_leaf), rows: r_rows });
    }

    // number leaves left to right
    let mut next_id = 0;
    let mut leaf_of_node = vec![usize::MAX; nodes.len()];
    let mut stack = vec![0usize];
    while let Some(at) = stack.pop() {
        match nodes[at] {
            Node::Split { left, right, .. } => {
                stack.push(right);
                stack.push(left);
            }
            Node::Leaf { .. } => {
                nodes[at] = Node::Leaf { id: next_id };
                leaf_of_node[at] = next_id;
                next_id += 1;
            }
        }
    }
    let mut clusters = vec![Vec::new(); next_id];
    for o in open {
        let mut rows = o.rows;
        rows.sort_unstable();
        clusters[leaf_of_node[o.node]] = rows;
    }
    let tree = RegressionTree { nodes, leaves: next_id, dim: x.cols() };
    Ok(Partitioning { clusters, assigner: Assigner::Tree { tree } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_of(p: &Partitioning) -> &RegressionTree {
        match &p.assigner {
            Assigner::Tree { tree } => tree,
            _ => unreachable!(),
        }
    }

    #[test]
    fn step_function_splits_at_jump() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]]).unwrap();
        let y = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        let p = tree_partition(&x, &y, 2, 2).unwrap();
        assert_eq!(p.clusters, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let t = tree_of(&p);
        assert_eq!(t.nodes[0], Node::Split { feature: 0, threshold: 2.5, left: 1, right: 2 });
    }

    #[test]
    fn constant_target_is_not_split() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let p = tree_partition(&x, &[4.0; 4], 3, 2).unwrap();
        assert_eq!(p.k(), 1);
    }

    #[test]
    fn min_leaf_respected() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]]).unwrap();
        let y = [10.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let p = tree_partition(&x, &y, 2, 3).unwrap();
        assert_eq!(p.clusters, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        // both features separate y identically
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).unwrap();
        let y = [0.0, 0.0, 1.0, 1.0];
        let p = tree_partition(&x, &y, 2, 2).unwrap();
        assert!(matches!(tree_of(&p).nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn best_first_order() {
        // left half has a big jump, right half a small one
        let x: Vec<[f64; 1]> = (0..8).map(|i| [i as f64]).collect();
        let x = Matrix::from_rows(&x).unwrap();
        let y = [0.0, 0.0, 20.0, 20.0, 100.0, 100.0, 101.0, 101.0];
        let p = tree_partition(&x, &y, 3, 2).unwrap();
        assert_eq!(p.clusters, vec![vec![0, 1], vec![2, 3], vec![4, 5, 6, 7]]);
    }

    #[test]
    fn routing_matches_training_leaves() {
        let rows: Vec<[f64; 2]> = (0..60)
            .map(|i| {
                let t = i as f64;
                [(t * 0.7).sin() * 3.0, (t * 0.3).cos() * 2.0]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[0] + 3.0 * r[1]).collect();
        let p = tree_partition(&x, &y, 5, 4).unwrap();
        assert!(p.covers(60) && p.is_disjoint());
        let route = tree_route(tree_of(&p), &x).unwrap();
        for (leaf, c) in p.clusters.iter().enumerate() {
            for &i in c {
                assert_eq!(route[i], leaf);
            }
            assert!(c.len() >= 4);
        }
    }

    #[test]
    fn threshold_stays_between_close_values() {
        let a = 1.0_f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = Matrix::from_rows(&[[a], [a], [b], [b]]).unwrap();
        let p = tree_partition(&x, &[0.0, 0.0, 1.0, 1.0], 2, 2).unwrap();
        assert_eq!(p.clusters, vec![vec![0, 1], vec![2, 3]]);
        assert!(matches!(tree_of(&p).nodes[0], Node::Split { threshold, .. } if threshold == a));
    }
}
