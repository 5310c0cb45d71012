use rayon::prelude::*;

use super::params::{Growth, TrainParams};
use super::{BinMap, BinnedMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x <= threshold` (equivalently `bin <= bin`) go left.
    Split {
        feature: usize,
        bin: u8,
        threshold: f64,
        /// Direction taken by NaN.
        default_left: bool,
        left: usize,
        right: usize,
        gain: f64,
        count: usize,
    },
    Leaf {
        weight: f64,
        count: usize,
    },
}

/// Regression tree stored as a flat node array with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight, .. } => return *weight,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let x = row[*feature];
                    let go_left = if x.is_nan() { *default_left } else { x <= *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_binned(&self, binned: &BinnedMatrix, row: usize) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight, .. } => return *weight,
                Node::Split {
                    feature,
                    bin,
                    left,
                    right,
                    ..
                } => {
                    i = if binned.get(row, *feature) <= *bin { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Longest root-to-leaf path, counted in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf reached by a binned row.
    pub fn leaf_index_binned(&self, binned: &BinnedMatrix, row: usize) -> usize {
        let mut i = 0;
        while let Node::Split {
            feature,
            bin,
            left,
            right,
            ..
        } = &self.nodes[i]
        {
            i = if binned.get(row, *feature) <= *bin { *left } else { *right };
        }
        i
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDecision {
    pub feature: usize,
    /// Rows with bin index `<= bin` go left.
    pub bin: u8,
    pub gain: f64,
    pub left_grad: f64,
    pub left_hess: f64,
    pub left_count: usize,
    pub right_grad: f64,
    pub right_hess: f64,
    pub right_count: usize,
}

/// Newton leaf value `−G / (H + λ)`, zero when the denominator vanishes.
pub fn leaf_weight(grad: f64, hess: f64, lambda: f64) -> f64 {
    let d = hess + lambda;
    if d > 0.0 {
        -grad / d
    } else {
        0.0
    }
}

fn score(grad: f64, hess: f64, lambda: f64) -> Option<f64> {
    let d = hess + lambda;
    (d > 0.0).then(|| grad * grad / d)
}

fn best_for_feature(
    feature: usize,
    rows: &[usize],
    g: &[f64],
    h: &[f64],
    binned: &BinnedMatrix,
    totals: (f64, f64, f64),
    params: &TrainParams,
) -> Option<SplitDecision> {
    let n_bins = binned.n_bins[feature];
    if n_bins < 2 {
        return None;
    }
    let col = binned.column(feature);
    let mut hist = vec![(0.0f64, 0.0f64, 0usize); n_bins];
    for &r in rows {
        let slot = &mut hist[col[r] as usize];
        slot.0 += g[r];
        slot.1 += h[r];
        slot.2 += 1;
    }
    let (g_total, h_total, parent) = totals;
    let lambda = params.lambda_l2;
    let n = rows.len();
    let mut best: Option<SplitDecision> = None;
    let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
    for (b, &(hg, hh, hc)) in hist.iter().enumerate().take(n_bins - 1) {
        gl += hg;
        hl += hh;
        nl += hc;
        let nr = n - nl;
        if nl < params.min_samples_leaf || nr < params.min_samples_leaf {
            continue;
        }
        let (gr, hr) = (g_total - gl, h_total - hl);
        let (Some(sl), Some(sr)) = (score(gl, hl, lambda), score(gr, hr, lambda)) else {
            continue;
        };
        let gain = 0.5 * (sl + sr - parent);
        if best.is_none_or(|d| gain > d.gain) {
            best = Some(SplitDecision {
                feature,
                bin: b as u8,
                gain,
                left_grad: gl,
                left_hess: hl,
                left_count: nl,
                right_grad: gr,
                right_hess: hr,
                right_count: nr,
            });
        }
    }
    best
}

/// Best histogram split of `rows` over every feature and bin boundary.
///
/// Returns `None` when no candidate respects `min_samples_leaf` or the best
/// gain is not positive. Ties keep the lowest feature, then the lowest bin.
pub fn find_best_split(
    rows: &[usize],
    g: &[f64],
    h: &[f64],
    binned: &BinnedMatrix,
    params: &TrainParams,
) -> Option<SplitDecision> {
    if rows.len() < 2 * params.min_samples_leaf {
        return None;
    }
    let g_total: f64 = rows.iter().map(|&r| g[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| h[r]).sum();
    let parent = score(g_total, h_total, params.lambda_l2)?;
    let totals = (g_total, h_total, parent);
    let per_feature: Vec<Option<SplitDecision>> = (0..binned.cols)
        .into_par_iter()
        .map(|f| best_for_feature(f, rows, g, h, binned, totals, params))
        .collect();
    let mut best: Option<SplitDecision> = None;
    for d in per_feature.into_iter().flatten() {
        if best.is_none_or(|b| d.gain > b.gain) {
            best = Some(d);
        }
    }
    best.filter(|d| d.gain > 0.0)
}

struct Pending {
    node: usize,
    depth: usize,
    rows: Vec<usize>,
    split: Option<SplitDecision>,
}

fn leaf_for(rows: &[usize], g: &[f64], h: &[f64], lambda: f64) -> Node {
    let gs: f64 = rows.iter().map(|&r| g[r]).sum();
    let hs: f64 = rows.iter().map(|&r| h[r]).sum();
    Node::Leaf {
        weight: leaf_weight(gs, hs, lambda),
        count: rows.len(),
    }
}

fn partition(rows: &[usize], binned: &BinnedMatrix, d: &SplitDecision) -> (Vec<usize>, Vec<usize>) {
    let col = binned.column(d.feature);
    rows.iter().partition(|&&r| col[r] <= d.bin)
}

/// Grows one tree over `rows` according to `params.growth`.
///
/// `g` and `h` are indexed by absolute row number; rows outside `rows` are
/// ignored. Split thresholds are taken from `bin_map` so the tree can score
/// raw feature rows.
pub fn grow_tree(
    rows: &[usize],
    g: &[f64],
    h: &[f64],
    binned: &BinnedMatrix,
    bin_map: &BinMap,
    params: &TrainParams,
) -> Tree {
    let lambda = params.lambda_l2;
    let mut nodes = vec![leaf_for(rows, g, h, lambda)];
    let split_node = |nodes: &mut Vec<Node>, p: &Pending, d: &SplitDecision| {
        let left = nodes.len();
        nodes.push(Node::Leaf {
            weight: leaf_weight(d.left_grad, d.left_hess, lambda),
            count: d.left_count,
        });
        nodes.push(Node::Leaf {
            weight: leaf_weight(d.right_grad, d.right_hess, lambda),
            count: d.right_count,
        });
        nodes[p.node] = Node::Split {
            feature: d.feature,
            bin: d.bin,
            threshold: bin_map.thresholds[d.feature][d.bin as usize],
            default_left: true,
            left,
            right: left + 1,
            gain: d.gain,
            count: p.rows.len(),
        };
        left
    };
    let root = Pending {
        node: 0,
        depth: 0,
        rows: rows.to_vec(),
        split: None,
    };
    match params.growth {
        Growth::DepthWise => {
            let mut level = vec![root];
            while !level.is_empty() {
                let mut next = Vec::new();
                for p in level {
                    if p.depth >= params.max_depth {
                        continue;
                    }
                    let Some(d) = find_best_split(&p.rows, g, h, binned, params) else {
                        continue;
                    };
                    let left = split_node(&mut nodes, &p, &d);
                    let (lr, rr) = partition(&p.rows, binned, &d);
                    next.push(Pending { node: left, depth: p.depth + 1, rows: lr, split: None });
                    next.push(Pending { node: left + 1, depth: p.depth + 1, rows: rr, split: None });
                }
                level = next;
            }
        }
        Growth::LeafWise => {
            let evaluate = |mut p: Pending| {
                if p.depth < params.max_depth {
                    p.split = find_best_split(&p.rows, g, h, binned, params);
                }
                p
            };
            let mut open = vec![evaluate(root)];
            let mut leaves = 1;
            while leaves < params.max_leaves {
                let mut pick: Option<usize> = None;
                for (i, p) in open.iter().enumerate() {
                    let Some(d) = p.split else { continue };
                    let better = match pick {
                        None => true,
                        Some(j) => {
                            let (q, e) = (&open[j], open[j].split.unwrap());
                            d.gain > e.gain || (d.gain == e.gain && p.node < q.node)
                        }
                    };
                    if better {
                        pick = Some(i);
                    }
                }
                let Some(i) = pick else { break };
                let p = open.swap_remove(i);
                let d = p.split.unwrap();
                let left = split_node(&mut nodes, &p, &d);
                let (lr, rr) = partition(&p.rows, binned, &d);
                open.push(evaluate(Pending { node: left, depth: p.depth + 1, rows: lr, split: None }));
                open.push(evaluate(Pending { node: left + 1, depth: p.depth + 1, rows: rr, split: None }));
                leaves += 1;
            }
        }
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{build_bin_map, logistic_grad_hess, MatrixView};

    fn params(min_leaf: usize) -> TrainParams {
        TrainParams {
            min_samples_leaf: min_leaf,
            max_depth: 3,
            ..TrainParams::default()
        }
    }

    fn grads(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        y.iter().map(|&l| logistic_grad_hess(l, 0.0)).unzip()
    }

    #[test]
    fn pure_node_has_no_split() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let view = MatrixView::new(&x, 1).unwrap();
        let bm = build_bin_map(view, 255).unwrap();
        let binned = bm.apply(view).unwrap();
        let (g, h) = grads(&[1.0; 40]);
        let rows: Vec<usize> = (0..40).collect();
        assert!(find_best_split(&rows, &g, &h, &binned, &params(1)).is_none());
        let tree = grow_tree(&rows, &g, &h, &binned, &bm, &params(1));
        assert_eq!(tree.nodes.len(), 1);
        let w = leaf_weight(-20.0, 10.0, 1.0);
        assert_eq!(tree.nodes[0], Node::Leaf { weight: w, count: 40 });
    }

    #[test]
    fn leaf_weight_arithmetic() {
        assert_eq!(leaf_weight(2.0, 4.0, 1.0), -0.4);
        assert_eq!(leaf_weight(1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn sign_split_lands_on_zero() {
        let x: Vec<f64> = (-20..20).map(|i| i as f64 + 0.5).collect();
        let y: Vec<f64> = x.iter().map(|&v| (v > 0.0) as u8 as f64).collect();
        let view = MatrixView::new(&x, 1).unwrap();
        let bm = build_bin_map(view, 255).unwrap();
        let binned = bm.apply(view).unwrap();
        let (g, h) = grads(&y);
        let rows: Vec<usize> = (0..40).collect();
        let d = find_best_split(&rows, &g, &h, &binned, &params(1)).unwrap();
        assert_eq!(bm.thresholds[0][d.bin as usize], 0.0);
        assert_eq!((d.left_count, d.right_count), (20, 20));
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..30).map(|i| (i >= 27) as u8 as f64).collect();
        let view = MatrixView::new(&x, 1).unwrap();
        let bm = build_bin_map(view, 255).unwrap();
        let binned = bm.apply(view).unwrap();
        let (g, h) = grads(&y);
        let rows: Vec<usize> = (0..30).collect();
        let d = find_best_split(&rows, &g, &h, &binned, &params(10)).unwrap();
        assert!(d.left_count >= 10 && d.right_count >= 10);
        assert!(find_best_split(&rows, &g, &h, &binned, &params(16)).is_none());
    }

    #[test]
    fn leaf_wise_respects_leaf_budget() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| ((v as usize / 25) % 2) as f64).collect();
        let view = MatrixView::new(&x, 1).unwrap();
        let bm = build_bin_map(view, 255).unwrap();
        let binned = bm.apply(view).unwrap();
        let (g, h) = grads(&y);
        let rows: Vec<usize> = (0..200).collect();
        for budget in [1, 2, 3, 5, 8] {
            let p = TrainParams {
                growth: Growth::LeafWise,
                max_leaves: budget,
                max_depth: 10,
                min_samples_leaf: 5,
                ..TrainParams::default()
            };
            let t = grow_tree(&rows, &g, &h, &binned, &bm, &p);
            assert_eq!(t.leaf_count(), budget);
        }
        let p = TrainParams { max_depth: 2, min_samples_leaf: 5, ..TrainParams::default() };
        let t = grow_tree(&rows, &g, &h, &binned, &bm, &p);
        assert!(t.depth() <= 2);
        assert!((2..=4).contains(&t.leaf_count()));
    }

    #[test]
    fn raw_and_binned_prediction_agree() {
        let x: Vec<f64> = (0..100).map(|i| ((i * 13) % 17) as f64 * 0.3 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| (v > 0.5) as u8 as f64).collect();
        let view = MatrixView::new(&x, 2).unwrap();
        let bm = build_bin_map(view, 255).unwrap();
        let binned = bm.apply(view).unwrap();
        let (g, h) = grads(&y[..50]);
        let rows: Vec<usize> = (0..50).collect();
        let t = grow_tree(&rows, &g, &h, &binned, &bm, &params(3));
        for r in 0..50 {
            assert_eq!(t.predict(view.row(r)), t.predict_binned(&binned, r));
        }
        // NaN follows the left branch, the same way bin 0 does.
        let nan_row = [f64::NAN, f64::NAN];
        let low_row = [f64::MIN, f64::MIN];
        assert_eq!(t.predict(&nan_row), t.predict(&low_row));
    }
}
