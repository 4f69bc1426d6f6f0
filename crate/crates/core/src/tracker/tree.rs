//! Three-level probability tree over blobs at t−2 (roots), t−1 (children)
//! and t (leaves).
//!
//! * level 2: `P(j|i)` is the combined score of edge `(i, j)` divided by the
//!   sum over every permitted edge;
//! * level 3: `P(k|i,j)` is the triple score of `(i, j, k)` divided by the
//!   sum over all leaves hanging under root `i`;
//! * leaf posterior: `P(j|i)·P(k|i,j)·P(i)`, normalized over all leaves.

use crate::features::{
    combined_score, movement_angle, normalize_feature, speed_feature, FeatureConfig, Observation,
};

use super::matrix::Link;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub root: usize,
    pub child: usize,
    pub conditional: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub root: usize,
    pub child: usize,
    pub leaf: usize,
    pub conditional: f64,
    pub posterior: f64,
}

/// An identity chain `(i, j, k)` picked by [`ProbabilityTree::assign`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    pub root: usize,
    pub child: usize,
    pub leaf: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTree {
    num_roots: usize,
    num_children: usize,
    edges: Vec<Edge>,
    /// Dense `num_roots × num_children` index into `edges`.
    edge_index: Vec<Option<usize>>,
    leaves: Vec<Leaf>,
    has_posteriors: bool,
}

impl ProbabilityTree {
    /// Build from raw (non-negative) scores. Leaves whose `(root, child)`
    /// pair is not an edge are ignored.
    pub fn from_scores(
        num_roots: usize,
        num_children: usize,
        edge_scores: &[(usize, usize, f64)],
        leaf_scores: &[(usize, usize, usize, f64)],
    ) -> Self {
        let mut edge_index = vec![None; num_roots * num_children];
        let total: f64 = edge_scores.iter().map(|e| e.2).sum();
        let edges: Vec<Edge> = edge_scores
            .iter()
            .enumerate()
            .map(|(n, &(root, child, score))| {
                edge_index[root * num_children + child] = Some(n);
                Edge {
                    root,
                    child,
                    conditional: if total > 0.0 { score / total } else { 0.0 },
                }
            })
            .collect();

        let kept: Vec<_> = leaf_scores
            .iter()
            .copied()
            .filter(|&(i, j, _, _)| edge_index[i * num_children + j].is_some())
            .collect();
        let mut per_root = vec![0.0; num_roots];
        for &(i, _, _, s) in &kept {
            per_root[i] += s;
        }
        let leaves = kept
            .into_iter()
            .map(|(root, child, leaf, s)| Leaf {
                root,
                child,
                leaf,
                conditional: if per_root[root] > 0.0 {
                    s / per_root[root]
                } else {
                    0.0
                },
                posterior: 0.0,
            })
            .collect();

        Self {
            num_roots,
            num_children,
            edges,
            edge_index,
            leaves,
            has_posteriors: false,
        }
    }

    pub fn num_roots(&self) -> usize {
        self.num_roots
    }

    pub fn num_children(&self) -> usize {
        self.num_children
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn edge(&self, root: usize, child: usize) -> Option<&Edge> {
        self.edge_index[root * self.num_children + child].map(|n| &self.edges[n])
    }

    /// True when posteriors were computed and at least one leaf carries mass.
    pub fn is_populated(&self) -> bool {
        self.has_posteriors
    }

    /// Bayes update of every leaf. Returns `false` (and leaves every
    /// posterior at zero) when the normalizing sum vanishes.
    pub fn compute_posteriors(&mut self, priors: &[f64]) -> bool {
        assert_eq!(priors.len(), self.num_roots, "one prior per root");
        let mut total = 0.0;
        for n in 0..self.leaves.len() {
            let leaf = self.leaves[n];
            let edge = self
                .edge(leaf.root, leaf.child)
                .expect("leaf under an edge");
            let p = edge.conditional * leaf.conditional * priors[leaf.root];
            self.leaves[n].posterior = p;
            total += p;
        }
        if total > 0.0 && total.is_finite() {
            for leaf in &mut self.leaves {
                leaf.posterior /= total;
            }
            self.has_posteriors = true;
        } else {
            for leaf in &mut self.leaves {
                leaf.posterior = 0.0;
            }
            self.has_posteriors = false;
        }
        self.has_posteriors
    }

    /// Priors for the children: the summed incoming conditionals, with
    /// children lacking any incoming edge given the smallest positive sum,
    /// then renormalized to one.
    pub fn update_priors(&self) -> Vec<f64> {
        let mut raw = vec![0.0; self.num_children];
        let mut reached = vec![false; self.num_children];
        for e in &self.edges {
            raw[e.child] += e.conditional;
            reached[e.child] = true;
        }
        let floor = raw
            .iter()
            .zip(&reached)
            .filter(|&(&p, &r)| r && p > 0.0)
            .map(|(&p, _)| p)
            .fold(f64::INFINITY, f64::min);
        let floor = if floor.is_finite() { floor } else { 1.0 };
        for (p, &r) in raw.iter_mut().zip(&reached) {
            if !r || *p <= 0.0 {
                *p = floor;
            }
        }
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.iter_mut().for_each(|p| *p /= total);
        }
        raw
    }

    /// Greedy maximum-posterior assignment: take the most probable leaf,
    /// discard every leaf sharing any of its blobs, repeat. Ties go to the
    /// lexicographically smallest `(i, j, k)`.
    pub fn assign(&self) -> Vec<Match> {
        if !self.has_posteriors {
            return Vec::new();
        }
        let mut order: Vec<&Leaf> = self.leaves.iter().filter(|l| l.posterior > 0.0).collect();
        order.sort_by(|a, b| {
            b.posterior
                .total_cmp(&a.posterior)
                .then((a.root, a.child, a.leaf).cmp(&(b.root, b.child, b.leaf)))
        });
        let mut used_root = vec![false; self.num_roots];
        let mut used_child = vec![false; self.num_children];
        let mut used_leaf: Vec<usize> = Vec::new();
        let mut matches = Vec::new();
        for l in order {
            if used_root[l.root] || used_child[l.child] || used_leaf.contains(&l.leaf) {
                continue;
            }
            used_root[l.root] = true;
            used_child[l.child] = true;
            used_leaf.push(l.leaf);
            matches.push(Match {
                root: l.root,
                child: l.child,
                leaf: l.leaf,
            });
        }
        matches
    }
}

/// Assemble the tree for one step from observations at t−2, t−1 and t.
/// `low` links t−2 to t−1 and `high` links t−1 to t.
pub fn build_probability_tree(
    roots: &[Observation],
    children: &[Observation],
    leaves: &[Observation],
    low: &Link,
    high: &Link,
    config: &FeatureConfig,
) -> ProbabilityTree {
    let mut edge_scores = Vec::new();
    let mut leaf_scores = Vec::new();
    for (i, root) in roots.iter().enumerate() {
        for (j, child) in children.iter().enumerate() {
            if !low.possible.get(j, i) {
                continue;
            }
            edge_scores.push((i, j, low.features.score(j, i, config)));
            for (k, leaf) in leaves.iter().enumerate() {
                if !high.possible.get(k, j) {
                    continue;
                }
                let (a, b, c) = (root.centroid, child.centroid, leaf.centroid);
                let angle =
                    normalize_feature(movement_angle(a, b, c, config.w1), config.caps.angle);
                let speed = normalize_feature(speed_feature(a, b, c, config.w2), config.caps.speed);
                let triple = high.features.cell(k, j).with_motion(angle, speed);
                leaf_scores.push((i, j, k, combined_score(&triple, &config.weights)));
            }
        }
    }
    ProbabilityTree::from_scores(roots.len(), children.len(), &edge_scores, &leaf_scores)
}
