//! Histogram-based gradient boosting on depth-limited trees.
//!
//! Features are quantized into at most `max_bins` quantile bins once per
//! fit; each tree level then scans per-bin gradient/hessian histograms
//! for the best variance-gain split. Entirely deterministic: ties break
//! toward the lower feature index and bin.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct HgbParams {
    pub max_bins: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    pub l2: f64,
}

impl Default for HgbParams {
    fn default() -> Self {
        Self {
            max_bins: 256,
            max_depth: 3,
            learning_rate: 0.1,
            n_trees: 100,
            min_samples_leaf: 1,
            l2: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HgbLoss {
    Squared,
    Softmax { n_classes: usize },
}

#[derive(Debug, Clone)]
enum Node {
    Split {
        feature: usize,
        /// Go left when the feature's bin index is <= this.
        bin: u16,
        /// Raw-value threshold equivalent to `bin`, for prediction.
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { value: f64 },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct HgbModel {
    params: HgbParams,
    loss: HgbLoss,
    base: Vec<f64>,
    /// trees[round][class]; a single class for squared loss.
    trees: Vec<Vec<Tree>>,
    pub train_loss_per_round: Vec<f64>,
}

/// Per-feature quantile bin edges (midpoints between distinct values).
fn bin_edges(values: &mut Vec<f64>, max_bins: usize) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    if values.len() <= 1 {
        return Vec::new();
    }
    if values.len() <= max_bins {
        return values
            .windows(2)
            .map(|w| w[0] + (w[1] - w[0]) / 2.0)
            .collect();
    }
    let mut edges: Vec<f64> = (1..max_bins)
        .map(|i| {
            let h = i as f64 / max_bins as f64 * (values.len() - 1) as f64;
            let lo = h.floor() as usize;
            values[lo] + (h - lo as f64) * (values[lo + 1] - values[lo])
        })
        .collect();
    edges.dedup();
    edges
}

fn bin_of(edges: &[f64], v: f64) -> u16 {
    edges.partition_point(|&e| e < v) as u16
}

struct SplitChoice {
    feature: usize,
    bin: u16,
    gain: f64,
}

struct TreeBuilder<'a> {
    binned: &'a [Vec<u16>], // per feature, per row
    n_bins: &'a [usize],
    edges: &'a [Vec<f64>],
    g: &'a [f64],
    h: &'a [f64],
    params: &'a HgbParams,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.params.l2)
    }

    fn best_split(&self, rows: &[u32], g_sum: f64, h_sum: f64) -> Option<SplitChoice> {
        let parent = g_sum * g_sum / (h_sum + self.params.l2);
        let mut best: Option<SplitChoice> = None;
        for (f, bins) in self.binned.iter().enumerate() {
            let nb = self.n_bins[f];
            if nb < 2 {
                continue;
            }
            let mut hist = vec![(0.0f64, 0.0f64, 0u32); nb];
            for &r in rows {
                let b = bins[r as usize] as usize;
                let slot = &mut hist[b];
                slot.0 += self.g[r as usize];
                slot.1 += self.h[r as usize];
                slot.2 += 1;
            }
            let total: u32 = rows.len() as u32;
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0u32);
            for b in 0..nb - 1 {
                gl += hist[b].0;
                hl += hist[b].1;
                cl += hist[b].2;
                let cr = total - cl;
                if (cl as usize) < self.params.min_samples_leaf
                    || (cr as usize) < self.params.min_samples_leaf
                    || cl == 0
                    || cr == 0
                {
                    continue;
                }
                let gr = g_sum - gl;
                let hr = h_sum - hl;
                let gain = gl * gl / (hl + self.params.l2) + gr * gr / (hr + self.params.l2)
                    - parent;
                if gain > best.as_ref().map_or(1e-12, |b| b.gain + 1e-12) {
                    best = Some(SplitChoice {
                        feature: f,
                        bin: b as u16,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<u32>, depth: usize) -> usize {
        let g_sum: f64 = rows.iter().map(|&r| self.g[r as usize]).sum();
        let h_sum: f64 = rows.iter().map(|&r| self.h[r as usize]).sum();
        let leaf = self.leaf_value(g_sum, h_sum);
        if depth >= self.params.max_depth || rows.len() < 2 * self.params.min_samples_leaf {
            self.nodes.push(Node::Leaf { value: leaf });
            return self.nodes.len() - 1;
        }
        let Some(split) = self.best_split(&rows, g_sum, h_sum) else {
            self.nodes.push(Node::Leaf { value: leaf });
            return self.nodes.len() - 1;
        };
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
            .into_iter()
            .partition(|&r| self.binned[split.feature][r as usize] <= split.bin);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 }); // placeholder
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[slot] = Node::Split {
            feature: split.feature,
            bin: split.bin,
            threshold: self.edges[split.feature][split.bin as usize],
            left,
            right,
        };
        slot
    }
}

/// Fit a boosted ensemble. `y` holds targets for squared loss and class
/// indices (as f64) for softmax.
pub fn fit_hgb(
    x: &[Vec<f64>],
    y: &[f64],
    params: &HgbParams,
    loss: HgbLoss,
) -> Result<HgbModel> {
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::InvalidInput(
            "fit_hgb needs >= 2 aligned rows".into(),
        ));
    }
    assert!(params.max_depth >= 1 && params.max_bins >= 2);
    let n = x.len();
    let d = x[0].len();

    let n_classes = match loss {
        HgbLoss::Squared => 1,
        HgbLoss::Softmax { n_classes } => {
            let mut seen = std::collections::BTreeSet::new();
            for &v in y {
                let c = v as usize;
                if v.fract() != 0.0 || c >= n_classes {
                    return Err(Error::InvalidInput(format!("bad class label {v}")));
                }
                seen.insert(c);
            }
            if seen.len() < 2 {
                return Err(Error::DegenerateTarget(
                    "softmax needs >= 2 observed classes".into(),
                ));
            }
            n_classes
        }
    };

    // quantize features
    let mut edges: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut binned: Vec<Vec<u16>> = Vec::with_capacity(d);
    for f in 0..d {
        let mut col: Vec<f64> = x.iter().map(|row| row[f]).collect();
        let e = bin_edges(&mut col, params.max_bins);
        binned.push(x.iter().map(|row| bin_of(&e, row[f])).collect());
        edges.push(e);
    }
    let n_bins: Vec<usize> = edges.iter().map(|e| e.len() + 1).collect();

    let base = match loss {
        HgbLoss::Squared => vec![y.iter().sum::<f64>() / n as f64],
        HgbLoss::Softmax { .. } => vec![0.0; n_classes],
    };
    let mut scores = vec![base.clone(); n]; // per row, per class
    let mut trees: Vec<Vec<Tree>> = Vec::new();
    let mut losses = Vec::new();
    let mut g = vec![0.0f64; n];
    let mut h = vec![0.0f64; n];

    for _round in 0..params.n_trees {
        let mut round_trees = Vec::with_capacity(n_classes);
        let mut round_effect = false;
        for k in 0..n_classes {
            match loss {
                HgbLoss::Squared => {
                    for i in 0..n {
                        g[i] = scores[i][0] - y[i];
                        h[i] = 1.0;
                    }
                }
                HgbLoss::Softmax { .. } => {
                    for i in 0..n {
                        let row = &scores[i];
                        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let z: f64 = row.iter().map(|s| (s - m).exp()).sum();
                        let p = (row[k] - m).exp() / z;
                        g[i] = p - ((y[i] as usize == k) as u8 as f64);
                        h[i] = (p * (1.0 - p)).max(1e-12);
                    }
                }
            }
            let mut builder = TreeBuilder {
                binned: &binned,
                n_bins: &n_bins,
                edges: &edges,
                g: &g,
                h: &h,
                params,
                nodes: Vec::new(),
            };
            builder.grow((0..n as u32).collect(), 0);
            let tree = Tree {
                nodes: builder.nodes,
            };
            if tree.nodes.len() > 1
                || matches!(&tree.nodes[0], Node::Leaf { value } if value.abs() > 1e-12)
            {
                round_effect = true;
            }
            for (i, row) in x.iter().enumerate() {
                scores[i][k] += params.learning_rate * tree.predict(row);
            }
            round_trees.push(tree);
        }
        if !round_effect {
            break; // nothing left to fit
        }
        trees.push(round_trees);
        let loss_now = match loss {
            HgbLoss::Squared => {
                scores
                    .iter()
                    .zip(y)
                    .map(|(s, &t)| (s[0] - t) * (s[0] - t))
                    .sum::<f64>()
                    / n as f64
            }
            HgbLoss::Softmax { .. } => {
                let mut nll = 0.0;
                for (row, &t) in scores.iter().zip(y) {
                    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let z: f64 = row.iter().map(|s| (s - m).exp()).sum();
                    nll -= row[t as usize] - m - z.ln();
                }
                nll / n as f64
            }
        };
        losses.push(loss_now);
    }

    Ok(HgbModel {
        params: params.clone(),
        loss,
        base,
        trees,
        train_loss_per_round: losses,
    })
}

impl HgbModel {
    fn raw_scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.base.clone();
        for round in &self.trees {
            for (k, tree) in round.iter().enumerate() {
                s[k] += self.params.learning_rate * tree.predict(x);
            }
        }
        s
    }

    /// Regression prediction (squared loss).
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.raw_scores(x)[0]
    }

    /// Class probabilities (softmax loss).
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        assert!(matches!(self.loss, HgbLoss::Softmax { .. }));
        let raw = self.raw_scores(x);
        let m = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = raw.iter().map(|s| (s - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }

    pub fn predict_class(&self, x: &[f64]) -> usize {
        self.predict_proba(x)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }
}
