//! Stage 3: outlier detection for regions the voting could not reach.
//!
//! Trivial outliers lie behind the camera or miss the second stereo camera.
//! The remaining unlabeled pixels are compared against an augmented depth
//! map built from all reference measurements splatting into the query view:
//! the smallest depth candidate that wins a relaxed voting round (every
//! measurement may vote, support fixed to 1, at least `min_augment_votes`
//! agreeing voters) replaces the pixel; query depths significantly in front
//! of it become negatives.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use crate::geometry::{triangulate_covariance, StereoRig};
use crate::grid::Grid;
use crate::labelgen::{depth_in, nearest_pixel_in, BorderMode, LabelParams, PointGrid};
use crate::DepthMap;

/// Pixels whose stored measurement lies behind the camera or whose
/// corresponding point cannot be seen by the right camera of its own rig.
pub fn trivial_outliers(depth: &DepthMap, rig: &StereoRig) -> Grid<bool> {
    let k = &rig.intrinsics;
    let fxb = k.fx * rig.baseline;
    Grid::from_fn(depth.width(), depth.height(), |x, y| {
        let z = *depth.at(x, y);
        if z == 0.0 {
            return false;
        }
        if z < 0.0 {
            return true;
        }
        // Rectified pair: the right-camera row is unchanged and the column
        // shifts by the disparity.
        let u_right = x as f64 - fxb / z;
        !(0.0..k.width as f64).contains(&u_right)
    })
}

/// A reference measurement projected into one query pixel.
struct GatherEntry {
    depth_along_query: f64,
    u: f64,
    sqrt_i: f64,
}

fn gather_into_query(
    query_index: usize,
    rigs: &[StereoRig],
    lifted: &[PointGrid],
) -> Vec<Vec<GatherEntry>> {
    let rig_q = &rigs[query_index];
    let (w, h) = (
        rig_q.intrinsics.width,
        rig_q.intrinsics.height,
    );
    let mut gathered: Vec<Vec<GatherEntry>> = Vec::new();
    gathered.resize_with(w * h, Vec::new);
    for (r, grid_r) in lifted.iter().enumerate() {
        if r == query_index {
            continue;
        }
        for y in 0..grid_r.height() {
            for x in 0..grid_r.width() {
                let Some(p_r) = grid_r.at(x, y) else {
                    continue;
                };
                let Some((qx, qy, z_in_q)) = nearest_pixel_in(rig_q, p_r.position) else {
                    continue;
                };
                gathered[qy * w + qx].push(GatherEntry {
                    depth_along_query: z_in_q,
                    u: p_r.u,
                    sqrt_i: p_r.i.sqrt(),
                });
            }
        }
    }
    gathered
}

/// Consistency border between a candidate and a voter under the configured
/// dimensional reading.
#[inline]
fn vote_border(u_a: f64, u_b: f64, params: &LabelParams) -> f64 {
    match params.border_mode {
        BorderMode::Distance => (u_a.sqrt() + u_b.sqrt()) * params.sigma_max,
        BorderMode::InverseLiteral => (1.0 / u_a.sqrt() + 1.0 / u_b.sqrt()) * params.sigma_max,
    }
}

/// Builds the augmented depth map for one query frame.
///
/// All reference points splatting into a pixel become depth candidates,
/// sorted ascending. Voters within the border distance of a candidate count
/// positively (weight √i, support fixed to 1), everything else counts as a
/// contradiction. The first candidate with a positive net score and at least
/// `min_augment_votes` positive votes wins; otherwise the original depth is
/// kept.
pub fn augment_depth(
    query_index: usize,
    rigs: &[StereoRig],
    lifted: &[PointGrid],
    params: &LabelParams,
) -> DepthMap {
    let rig_q = &rigs[query_index];
    let query_grid = &lifted[query_index];
    let (w, h) = (query_grid.width(), query_grid.height());
    let gathered = gather_into_query(query_index, rigs, lifted);

    Grid::from_fn(w, h, |x, y| {
        let original = query_grid
            .at(x, y)
            .as_ref()
            .map(|p| depth_in(rig_q, p.position))
            .unwrap_or(0.0);

        let entries = &gathered[y * w + x];
        if entries.is_empty() {
            return original;
        }
        // Ascending depth; the stable sort keeps the deterministic gather
        // order on exact ties.
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| {
            entries[a]
                .depth_along_query
                .partial_cmp(&entries[b].depth_along_query)
                .unwrap()
        });

        for &c in &order {
            let cand = &entries[c];
            let mut net = 0.0f64;
            let mut positive = 0u32;
            for voter in entries.iter() {
                let border = vote_border(cand.u, voter.u, params);
                if (voter.depth_along_query - cand.depth_along_query).abs() <= border {
                    net += voter.sqrt_i;
                    positive += 1;
                } else {
                    net -= voter.sqrt_i;
                }
            }
            if net > 0.0 && positive >= params.min_augment_votes {
                return cand.depth_along_query;
            }
        }
        original
    })
}

/// Pixels whose query depth undercuts the augmented depth by more than the
/// tolerance derived from the augmented point's single-rig uncertainty.
///
/// The caller restricts this mask to pixels stage 2 left unlabeled.
pub fn stage3_negatives(
    depth: &DepthMap,
    augmented: &DepthMap,
    rig: &StereoRig,
    params: &LabelParams,
) -> Grid<bool> {
    let fxb = rig.intrinsics.fx * rig.baseline;
    Grid::from_fn(depth.width(), depth.height(), |x, y| {
        let z = *depth.at(x, y);
        let z_aug = *augmented.at(x, y);
        if z <= 0.0 || z_aug <= 0.0 || z >= z_aug {
            return false;
        }
        // Uncertainty of the augmented depth as if it were observed by the
        // query rig alone.
        let Ok(p_aug) =
            triangulate_covariance(rig, [x as f64, y as f64], fxb / z_aug, params.sigma_px)
        else {
            return false;
        };
        let tolerance = match params.border_mode {
            BorderMode::Distance => params.sigma_max * p_aug.u.sqrt(),
            BorderMode::InverseLiteral => params.sigma_max / p_aug.u.sqrt(),
        };
        z_aug - z > tolerance
    })
}
