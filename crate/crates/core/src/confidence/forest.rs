//! Random-forest training and prediction.
//!
//! Every tree bootstraps the balanced sample set. At each node a random
//! subset of samples is scored against uniformly drawn thresholds on every
//! feature channel; the split with the best information gain wins. Leaves
//! store the positive fraction. All randomness flows from per-tree seeds
//! derived from one root seed, so results are reproducible regardless of
//! how training is scheduled.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::confidence::{ConfidenceError, FeatureMatrix, ForestHyper, ForestModel, Node, Tree};
use crate::grid::Grid;
use crate::labelgen::{Label, LabelImage};
use crate::math::derive_seed;
use crate::ConfidenceMap;

/// Draws per-frame balanced samples: each frame contributes
/// `min(positives, negatives)` rows of both classes, sampled without
/// replacement with a frame-derived seed. Ignore pixels never enter; frames
/// missing one class contribute nothing.
pub fn balance_samples(
    features: &FeatureMatrix,
    labels: &[&LabelImage],
    seed: u64,
) -> Result<(FeatureMatrix, Vec<u8>), ConfidenceError> {
    let mut keep: Vec<(usize, u8)> = Vec::new();
    let mut frames: Vec<u32> = features.frame_ids.clone();
    frames.sort_unstable();
    frames.dedup();

    for &frame in &frames {
        let label_img = labels
            .get(frame as usize)
            .ok_or(ConfidenceError::InvalidArgument(
                "missing label image for frame",
            ))?;
        let mut pos: Vec<usize> = Vec::new();
        let mut neg: Vec<usize> = Vec::new();
        for i in 0..features.n_samples() {
            if features.frame_ids[i] != frame {
                continue;
            }
            let (x, y) = features.pixels[i];
            if x as usize >= label_img.width() || y as usize >= label_img.height() {
                return Err(ConfidenceError::SizeMismatch);
            }
            match label_img.at(x as usize, y as usize) {
                Label::Positive => pos.push(i),
                Label::Negative => neg.push(i),
                Label::Ignore => {}
            }
        }
        let k = pos.len().min(neg.len());
        if k == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, frame as u64));
        let mut chosen: Vec<(usize, u8)> = Vec::with_capacity(2 * k);
        for (rows, target) in [(&pos, 1u8), (&neg, 0u8)] {
            let picked = rand::seq::index::sample(&mut rng, rows.len(), k);
            for idx in picked.iter() {
                chosen.push((rows[idx], target));
            }
        }
        chosen.sort_unstable_by_key(|&(row, _)| row);
        keep.extend(chosen);
    }

    let nf = features.n_features;
    let mut out = FeatureMatrix {
        names: features.names.clone(),
        width: features.width,
        height: features.height,
        n_features: nf,
        values: Vec::with_capacity(keep.len() * nf),
        pixels: Vec::with_capacity(keep.len()),
        frame_ids: Vec::with_capacity(keep.len()),
    };
    let mut targets = Vec::with_capacity(keep.len());
    for (row, target) in keep {
        out.values.extend_from_slice(features.row(row));
        out.pixels.push(features.pixels[row]);
        out.frame_ids.push(features.frame_ids[row]);
        targets.push(target);
    }
    Ok((out, targets))
}

#[inline]
fn entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }
}

/// Trains a forest on balanced samples with binary targets.
///
/// Requires at least `2·min_leaf` samples and both classes present; fully
/// deterministic given `seed`.
pub fn train_forest(
    features: &FeatureMatrix,
    targets: &[u8],
    hyper: &ForestHyper,
    seed: u64,
) -> Result<ForestModel, ConfidenceError> {
    let n = features.n_samples();
    if n != targets.len() {
        return Err(ConfidenceError::InvalidArgument(
            "targets must align with feature rows",
        ));
    }
    if n < 2 * hyper.min_leaf {
        return Err(ConfidenceError::InvalidArgument(
            "too few samples for the requested min_leaf",
        ));
    }
    if features.n_features == 0 || features.n_features > u16::MAX as usize {
        return Err(ConfidenceError::InvalidArgument(
            "feature count out of range",
        ));
    }
    let positives = targets.iter().filter(|&&t| t == 1).count();
    if positives == 0 || positives == n {
        return Err(ConfidenceError::DegenerateModel);
    }

    let trees: Vec<Tree> = (0..hyper.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let bootstrap: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();
            let mut builder = TreeBuilder {
                features,
                targets,
                hyper,
                rng,
                nodes: Vec::new(),
            };
            builder.build(bootstrap, 0);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();

    Ok(ForestModel {
        hyper: *hyper,
        seed,
        n_features: features.n_features,
        trees,
    })
}

struct TreeBuilder<'a> {
    features: &'a FeatureMatrix,
    targets: &'a [u8],
    hyper: &'a ForestHyper,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, indices: Vec<u32>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let n = indices.len();
        let pos = indices
            .iter()
            .filter(|&&i| self.targets[i as usize] == 1)
            .count();
        let prob = pos as f32 / n as f32;
        self.nodes.push(Node::Leaf { prob });

        if depth >= self.hyper.max_depth
            || n < 2 * self.hyper.min_leaf
            || pos == 0
            || pos == n
        {
            return id;
        }

        let Some((feature, threshold)) = self.best_split(&indices) else {
            return id;
        };

        let mut left: Vec<u32> = Vec::new();
        let mut right: Vec<u32> = Vec::new();
        for &i in &indices {
            if self.features.row(i as usize)[feature as usize] < threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        if left.len() < self.hyper.min_leaf || right.len() < self.hyper.min_leaf {
            return id;
        }
        drop(indices);
        let left_id = self.build(left, depth + 1);
        let right_id = self.build(right, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature,
            threshold,
            left: left_id,
            right: right_id,
        };
        id
    }

    /// Scores `thresholds_per_feature` uniform draws on every channel over a
    /// random node subsample; returns the split with the best entropy gain.
    fn best_split(&mut self, indices: &[u32]) -> Option<(u16, f32)> {
        let n = indices.len();
        let sample: Vec<u32> = if n <= self.hyper.node_samples {
            indices.to_vec()
        } else {
            rand::seq::index::sample(&mut self.rng, n, self.hyper.node_samples)
                .iter()
                .map(|k| indices[k])
                .collect()
        };
        let ns = sample.len();
        let pos_total = sample
            .iter()
            .filter(|&&i| self.targets[i as usize] == 1)
            .count();
        let parent = entropy(pos_total as f64 / ns as f64);

        let mut best: Option<(f64, u16, f32)> = None;
        let mut column: Vec<(f32, bool)> = Vec::with_capacity(ns);
        for f in 0..self.features.n_features {
            column.clear();
            column.extend(sample.iter().map(|&i| {
                (
                    self.features.row(i as usize)[f],
                    self.targets[i as usize] == 1,
                )
            }));
            column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let lo = column[0].0;
            let hi = column[ns - 1].0;
            if lo == hi {
                continue;
            }
            // Prefix positive counts for O(log n) gain per threshold.
            let mut prefix_pos: Vec<u32> = Vec::with_capacity(ns + 1);
            prefix_pos.push(0);
            for &(_, is_pos) in &column {
                prefix_pos.push(prefix_pos.last().unwrap() + is_pos as u32);
            }
            for _ in 0..self.hyper.thresholds_per_feature {
                let theta: f32 = self.rng.random_range(lo..hi);
                let nl = column.partition_point(|&(v, _)| v < theta);
                if nl == 0 || nl == ns {
                    continue;
                }
                let pl = prefix_pos[nl] as f64;
                let nr = ns - nl;
                let pr = pos_total as f64 - pl;
                let gain = parent
                    - (nl as f64 * entropy(pl / nl as f64)
                        + nr as f64 * entropy(pr / nr as f64))
                        / ns as f64;
                if best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, f as u16, theta));
                }
            }
        }
        best.filter(|&(g, _, _)| g > 0.0).map(|(_, f, t)| (f, t))
    }
}

/// Mean leaf probability across trees for every row.
pub fn predict_rows(model: &ForestModel, features: &FeatureMatrix) -> Result<Vec<f64>, ConfidenceError> {
    if features.n_features != model.n_features {
        return Err(ConfidenceError::DimensionMismatch {
            model: model.n_features,
            input: features.n_features,
        });
    }
    let inv = 1.0 / model.trees.len() as f64;
    Ok((0..features.n_samples())
        .map(|i| {
            let row = features.row(i);
            model
                .trees
                .iter()
                .map(|t| t.predict(row) as f64)
                .sum::<f64>()
                * inv
        })
        .collect())
}

/// Confidence map of one frame: mean leaf probability per feature row,
/// zero at pixels that produced no features.
pub fn predict_confidence(
    model: &ForestModel,
    features: &FeatureMatrix,
) -> Result<ConfidenceMap, ConfidenceError> {
    let probs = predict_rows(model, features)?;
    let mut map: ConfidenceMap = Grid::filled(features.width, features.height, 0.0);
    for (i, &(x, y)) in features.pixels.iter().enumerate() {
        *map.at_mut(x as usize, y as usize) = probs[i];
    }
    Ok(map)
}
