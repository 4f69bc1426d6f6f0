//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use pedtrack::frames::BinaryMask;
use pedtrack::tracker::ProbabilityTree;
use rand::Rng;

/// Raw scores for one randomized tree.
#[derive(Debug, Clone)]
pub struct RandomTree {
    pub roots: usize,
    pub children: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub leaves: Vec<(usize, usize, usize, f64)>,
    pub priors: Vec<f64>,
}

impl RandomTree {
    pub fn generate<R: Rng>(rng: &mut R, max_blobs: usize) -> Self {
        let roots = rng.gen_range(1..=max_blobs);
        let children = rng.gen_range(1..=max_blobs);
        let leaf_count = rng.gen_range(1..=max_blobs);
        let mut edges = Vec::new();
        let mut leaves = Vec::new();
        for i in 0..roots {
            for j in 0..children {
                if rng.gen_bool(0.7) {
                    edges.push((i, j, rng.gen_range(0.01..10.0)));
                    for k in 0..leaf_count {
                        if rng.gen_bool(0.7) {
                            leaves.push((i, j, k, rng.gen_range(0.01..10.0)));
                        }
                    }
                }
            }
        }
        let priors = (0..roots).map(|_| rng.gen_range(0.01..1.0)).collect();
        Self {
            roots,
            children,
            edges,
            leaves,
            priors,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.edges.iter_mut().for_each(|e| e.2 *= factor);
        out.leaves.iter_mut().for_each(|l| l.3 *= factor);
        out
    }

    pub fn build(&self) -> ProbabilityTree {
        let mut tree =
            ProbabilityTree::from_scores(self.roots, self.children, &self.edges, &self.leaves);
        tree.compute_posteriors(&self.priors);
        tree
    }
}

/// `((i, j, k), P(j|i), P(k|i,j), posterior)` per leaf.
pub type OracleRow = ((usize, usize, usize), f64, f64, f64);

/// Posterior of every leaf computed straight from the definitions: edge
/// conditional over all edges, leaf conditional over all leaves of the same
/// root, product with the root prior, normalized over every leaf.
pub fn brute_posteriors(t: &RandomTree) -> Vec<OracleRow> {
    let edge_total: f64 = t.edges.iter().map(|e| e.2).sum();
    let mut rows = Vec::new();
    for &(i, j, k, s) in &t.leaves {
        let edge = t.edges.iter().find(|e| e.0 == i && e.1 == j).unwrap().2;
        let root_total: f64 = t.leaves.iter().filter(|l| l.0 == i).map(|l| l.3).sum();
        let p_edge = edge / edge_total;
        let p_leaf = s / root_total;
        rows.push(((i, j, k), p_edge, p_leaf, p_edge * p_leaf * t.priors[i]));
    }
    let z: f64 = rows.iter().map(|r| r.3).sum();
    rows.iter_mut().for_each(|r| r.3 /= z);
    rows
}

/// Greedy assignment by exhaustive rescans: repeatedly pick the best
/// remaining compatible chain.
pub fn greedy_oracle(leaves: &[((usize, usize, usize), f64)]) -> Vec<(usize, usize, usize)> {
    let mut chosen: Vec<(usize, usize, usize)> = Vec::new();
    loop {
        let mut best: Option<((usize, usize, usize), f64)> = None;
        for &(key, p) in leaves {
            if p <= 0.0 {
                continue;
            }
            let clash = chosen
                .iter()
                .any(|c| c.0 == key.0 || c.1 == key.1 || c.2 == key.2);
            if clash {
                continue;
            }
            best = match best {
                None => Some((key, p)),
                Some((bk, bp)) if p > bp || (p == bp && key < bk) => Some((key, p)),
                keep => keep,
            };
        }
        match best {
            Some((key, _)) => chosen.push(key),
            None => return chosen,
        }
    }
}

pub fn random_mask<R: Rng>(rng: &mut R, max_side: usize, density: f64) -> BinaryMask {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::from_bits(w, h, bits).unwrap()
}

/// 8-connected component labels by flood fill; `None` for background.
pub fn flood_labels(mask: &BinaryMask) -> Vec<Option<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![None; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start].is_some() {
            continue;
        }
        let mut stack = vec![start];
        labels[start] = Some(next);
        while let Some(p) = stack.pop() {
            let (x, y) = ((p % w) as i64, (p / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if mask.bits()[q] && labels[q].is_none() {
                        labels[q] = Some(next);
                        stack.push(q);
                    }
                }
            }
        }
        next += 1;
    }
    labels
}
