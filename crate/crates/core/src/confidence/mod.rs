//! Per-pixel confidence features and a seeded random-forest classifier.
//!
//! Features are computed from the cost volume, both disparity maps, and the
//! image; labels come from the consistency pipeline. Training balances
//! classes per image, then fits fully deterministic trees: bootstrap per
//! tree, entropy-scored splits over randomly drawn per-feature thresholds,
//! leaves storing the positive-class fraction.

mod features;
mod forest;

pub use features::extract_features;
pub use forest::{balance_samples, predict_confidence, predict_rows, train_forest};

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfidenceError {
    #[error("input sizes do not match")]
    SizeMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("training data contains a single class")]
    DegenerateModel,
    #[error("feature count mismatch: model has {model}, input has {input}")]
    DimensionMismatch { model: usize, input: usize },
}

/// Dense per-sample feature rows with their pixel provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// One name per feature channel, in column order.
    pub names: Vec<String>,
    /// Dimensions of the source frame (used to rebuild confidence maps).
    pub width: usize,
    pub height: usize,
    pub n_features: usize,
    /// Row-major `n_samples × n_features`, no non-finite values.
    pub values: Vec<f32>,
    /// Pixel of each row in its source frame.
    pub pixels: Vec<(u32, u32)>,
    /// Source frame of each row.
    pub frame_ids: Vec<u32>,
}

impl FeatureMatrix {
    pub fn n_samples(&self) -> usize {
        self.frame_ids.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Concatenates per-frame matrices (same feature channels required).
    pub fn concat(parts: &[FeatureMatrix]) -> Result<FeatureMatrix, ConfidenceError> {
        let first = parts.first().ok_or(ConfidenceError::InvalidArgument(
            "cannot concatenate zero matrices",
        ))?;
        let mut out = FeatureMatrix {
            names: first.names.clone(),
            width: first.width,
            height: first.height,
            n_features: first.n_features,
            values: Vec::new(),
            pixels: Vec::new(),
            frame_ids: Vec::new(),
        };
        for part in parts {
            if part.names != first.names {
                return Err(ConfidenceError::InvalidArgument(
                    "feature channels differ between matrices",
                ));
            }
            out.values.extend_from_slice(&part.values);
            out.pixels.extend_from_slice(&part.pixels);
            out.frame_ids.extend_from_slice(&part.frame_ids);
        }
        Ok(out)
    }

    /// Rows whose frame id equals `frame`.
    pub fn frame_rows(&self, frame: u32) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.frame_ids[i] == frame)
            .collect()
    }
}

/// Forest training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestHyper {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Samples drawn per node for split scoring.
    pub node_samples: usize,
    /// Random thresholds drawn per feature channel.
    pub thresholds_per_feature: usize,
}

impl Default for ForestHyper {
    fn default() -> Self {
        ForestHyper {
            n_trees: 20,
            max_depth: 20,
            min_leaf: 100,
            node_samples: 2000,
            thresholds_per_feature: 500,
        }
    }
}

/// A binary decision-tree node; indices point into the owning tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: u16,
        threshold: f32,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Positive-class fraction of the training samples in this leaf.
        prob: f32,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf probability for one feature row.
    pub fn predict(&self, row: &[f32]) -> f32 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { prob } => return prob,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

/// A trained random forest together with its training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub hyper: ForestHyper,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}
