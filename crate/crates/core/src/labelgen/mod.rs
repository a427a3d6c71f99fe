//! Three-stage label generation from mutually observing depth maps.
//!
//! Stage 1 collects per-pixel *support*: a measurement confirmed from enough
//! distinct observation angles (Mahalanobis-gated against the more certain of
//! the two covariances) activates angular bins. Stage 2 lets supported, more
//! accurate reference measurements vote for or against each query pixel;
//! free-space violations and occlusions vote negatively. Stage 3 recovers
//! outliers the voting cannot reach by comparing against an *augmented* depth
//! map that prefers the smallest sufficiently plausible depth per pixel.
//!
//! The result is a per-pixel {Positive, Negative, Ignore} image suitable as
//! training data for confidence measures; no ground truth is involved.

mod outliers;
mod support;
mod voting;

pub use outliers::{augment_depth, stage3_negatives, trivial_outliers};
pub use support::{assess_support, lift_depth_map};
pub use voting::vote_consistency;

use alloc::vec::Vec;

use crate::geometry::{project_point, CameraSide, PointWithUncertainty, StereoRig};
use crate::grid::Grid;
use crate::math::Vec3;
use crate::DepthMap;

/// Per-pixel training label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Label {
    #[default]
    Ignore,
    Positive,
    Negative,
}

pub type LabelImage = Grid<Label>;

/// Per-pixel lifted measurement; `None` where the depth map is invalid.
pub type PointGrid = Grid<Option<PointWithUncertainty>>;

/// Activated angular bins and their count for one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SupportCell {
    /// Bit k set when a reference with observation angle in
    /// [k·α_min, (k+1)·α_min) passed the gates; bit 0 can never be set
    /// because the angle gate requires α_diff > α_min.
    pub bins: u64,
    pub support: u16,
}

pub type SupportMap = Grid<SupportCell>;

/// Accumulated votes for one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoteCell {
    pub vote_sum: f64,
    pub n_votes: u32,
}

pub type VoteMap = Grid<VoteCell>;

/// Which reading of the stage-3 tolerance formulas to use. The uncertainty
/// `u` is a covariance eigenvalue, so `Distance` treats √u as a standard
/// deviation; `InverseLiteral` keeps the 1/√u form verbatim even though it is
/// dimensionally an inverse distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderMode {
    #[default]
    Distance,
    InverseLiteral,
}

/// Tunable thresholds of the labeling pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelParams {
    /// Minimum observation-angle difference in degrees; also the angular bin
    /// width of the support histogram.
    pub alpha_min: f64,
    /// Consistency tolerance as a multiple of the σ bound.
    pub sigma_max: f64,
    /// Isotropic image-noise standard deviation in pixels.
    pub sigma_px: f64,
    /// Minimum positive votes for an augmented-depth candidate.
    pub min_augment_votes: u32,
    pub border_mode: BorderMode,
}

impl Default for LabelParams {
    fn default() -> Self {
        LabelParams {
            alpha_min: 10.0,
            sigma_max: 2.0,
            sigma_px: 1.0,
            min_augment_votes: 3,
            border_mode: BorderMode::Distance,
        }
    }
}

/// Projects a world point into a rig's left camera; returns the nearest
/// pixel and the depth along the optical axis when it lands inside the
/// image in front of the camera.
pub(crate) fn nearest_pixel_in(rig: &StereoRig, point: Vec3) -> Option<(usize, usize, f64)> {
    let ([u, v], z) = project_point(point, rig, CameraSide::Left);
    if z <= 0.0 || !u.is_finite() || !v.is_finite() {
        return None;
    }
    let (xi, yi) = (round_to_i64(u), round_to_i64(v));
    if xi < 0
        || yi < 0
        || xi as usize >= rig.intrinsics.width
        || yi as usize >= rig.intrinsics.height
    {
        return None;
    }
    Some((xi as usize, yi as usize, z))
}

#[inline]
fn round_to_i64(v: f64) -> i64 {
    #[cfg(not(feature = "std"))]
    use num_traits::Float;
    v.round() as i64
}

/// Depth of a lifted point along a rig's left optical axis.
#[inline]
pub(crate) fn depth_in(rig: &StereoRig, point: Vec3) -> f64 {
    rig.world_to_camera(point, CameraSide::Left).z
}

/// Shared state for labeling every frame of a dataset.
///
/// All metric inputs (translations, baselines, depths) are normalized by the
/// first rig's baseline on entry. Every gate in the pipeline is invariant
/// under uniform scaling of the scene, so this canonicalization makes the
/// output labels bit-identical across similar datasets instead of merely
/// close.
pub struct LabelPipeline {
    rigs: Vec<StereoRig>,
    depths: Vec<DepthMap>,
    lifted: Vec<PointGrid>,
    supports: Vec<SupportMap>,
    params: LabelParams,
    scale: f64,
}

/// Per-stage outputs for one query frame, mainly for inspection and dumps.
pub struct StageOutputs {
    pub votes: VoteMap,
    pub stage2: LabelImage,
    pub trivial: Grid<bool>,
    /// Augmented depth map in the original (un-normalized) scene units.
    pub augmented: DepthMap,
    pub stage3: Grid<bool>,
    pub labels: LabelImage,
}

impl LabelPipeline {
    /// Lifts all depth maps and computes their support maps.
    ///
    /// Panics when `rigs` is empty or `rigs` and `depths` disagree in length.
    pub fn new(rigs: &[StereoRig], depths: &[DepthMap], params: LabelParams) -> Self {
        assert!(!rigs.is_empty(), "at least one rig required");
        assert_eq!(rigs.len(), depths.len(), "one depth map per rig");
        let scale = rigs[0].baseline;
        let rigs: Vec<StereoRig> = rigs.iter().map(|r| normalize_rig(r, scale)).collect();
        let depths: Vec<DepthMap> = depths.iter().map(|d| d.map(|&z| z / scale)).collect();
        let lifted: Vec<PointGrid> = rigs
            .iter()
            .zip(depths.iter())
            .map(|(rig, depth)| lift_depth_map(depth, rig, &params))
            .collect();
        let supports: Vec<SupportMap> = (0..rigs.len())
            .map(|q| assess_support(q, &rigs, &lifted, &params))
            .collect();
        LabelPipeline {
            rigs,
            depths,
            lifted,
            supports,
            params,
            scale,
        }
    }

    pub fn n_frames(&self) -> usize {
        self.rigs.len()
    }

    /// Support map of one frame (bins and counts are scale-free).
    pub fn support(&self, index: usize) -> &SupportMap {
        &self.supports[index]
    }

    /// Labels one query frame.
    pub fn labels(&self, query_index: usize) -> LabelImage {
        self.run(query_index).labels
    }

    /// Labels one query frame, keeping all intermediate products.
    pub fn run(&self, query_index: usize) -> StageOutputs {
        let (votes, stage2) = vote_consistency(
            query_index,
            &self.rigs,
            &self.lifted,
            &self.supports,
            &self.params,
        );
        let trivial = trivial_outliers(&self.depths[query_index], &self.rigs[query_index]);
        let augmented = augment_depth(query_index, &self.rigs, &self.lifted, &self.params);
        let stage3 = stage3_negatives(
            &self.depths[query_index],
            &augmented,
            &self.rigs[query_index],
            &self.params,
        );

        let mut labels = stage2.clone();
        for (x, y, label) in stage2.enumerate() {
            if *label == Label::Ignore && (*trivial.at(x, y) || *stage3.at(x, y)) {
                *labels.at_mut(x, y) = Label::Negative;
            }
        }

        StageOutputs {
            votes,
            stage2,
            trivial,
            augmented: augmented.map(|&z| z * self.scale),
            stage3,
            labels,
        }
    }
}

fn normalize_rig(rig: &StereoRig, scale: f64) -> StereoRig {
    StereoRig {
        intrinsics: rig.intrinsics,
        rotation: rig.rotation,
        translation: Vec3::new(
            rig.translation.x / scale,
            rig.translation.y / scale,
            rig.translation.z / scale,
        ),
        baseline: rig.baseline / scale,
    }
}

/// Labels one query frame of a dataset.
///
/// Stage-2 labels take precedence; stage-3 negatives (including trivial
/// outliers) only fill pixels stage 2 left Ignore; pixels with invalid query
/// depth stay Ignore. Prefer [`LabelPipeline`] when labeling several frames
/// of the same dataset — this convenience wrapper recomputes the shared
/// lift/support state on every call.
pub fn generate_labels(
    rigs: &[StereoRig],
    depths: &[DepthMap],
    query_index: usize,
    params: &LabelParams,
) -> LabelImage {
    LabelPipeline::new(rigs, depths, *params).labels(query_index)
}

#[cfg(test)]
mod tests;
