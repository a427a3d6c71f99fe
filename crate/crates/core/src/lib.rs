//! Core algorithms for self-supervised stereo training-data generation.
//!
//! Given calibrated stereo rigs observing a static scene from several
//! viewpoints, depth maps produced by the same stereo matcher can be checked
//! against each other: measurements confirmed from sufficiently different
//! observation angles vote for consistency, while free-space violations and
//! occlusions vote against it. The resulting per-pixel labels
//! (positive / negative / ignore) serve as training data for learned
//! confidence measures without any ground truth.
//!
//! Module map:
//!
//! - [`math`], [`grid`] — small fixed-size linear algebra and dense 2-D storage.
//! - [`geometry`] — rectified stereo rigs, projection, two-view triangulation
//!   with first-order covariance propagation, Mahalanobis distances,
//!   observation angles.
//! - [`scene`] — analytic test scenes: ray-cast ground-truth depth, procedural
//!   textures, arc camera trajectories, seeded error injection.
//! - [`stereo`] — census cost volumes, winner-take-all disparity, optional
//!   semi-global aggregation, disparity/depth conversion.
//! - [`labelgen`] — the three-stage labeling pipeline (support assessment,
//!   consistency voting, outlier detection via an augmented depth map).
//! - [`confidence`] — per-pixel confidence features and a seeded
//!   random-forest classifier.
//! - [`eval`] — bad-pixel masks, sparsification curves, AUSC, label
//!   accuracy/coverage.
//!
//! The crate is `no_std`-compatible (requires `alloc`); every operation is a
//! pure function of its inputs and deterministic given explicit seeds.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod confidence;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod labelgen;
pub mod math;
pub mod scene;
pub mod stereo;

pub use geometry::{CameraIntrinsics, CameraSide, GeometryError, PointWithUncertainty, StereoRig};
pub use grid::Grid;
pub use labelgen::{Label, LabelImage, LabelParams};

/// Per-pixel depth in scene units; `0.0` marks an invalid pixel.
pub type DepthMap = Grid<f64>;
/// Per-pixel disparity in pixels; `0.0` marks an invalid pixel.
pub type DisparityMap = Grid<f64>;
/// 8-bit grayscale image.
pub type GrayImage = Grid<u8>;
/// Per-pixel probability in `[0, 1]` that the measurement is correct.
pub type ConfidenceMap = Grid<f64>;

/// Sentinel marking invalid depth/disparity values in maps and files.
pub const INVALID: f64 = 0.0;
