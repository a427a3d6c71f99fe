//! Stage 2: consistency voting.
//!
//! Supported reference measurements that are more accurate than the query
//! measurement vote √i_ref · support_ref: positively when they agree within
//! the query's Mahalanobis tolerance, negatively when they contradict it
//! through occlusion (backward lookup along the reference ray) or free-space
//! violation (forward splat along the query ray).

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use crate::geometry::{mahalanobis, StereoRig};
use crate::grid::Grid;
use crate::labelgen::{
    depth_in, nearest_pixel_in, Label, LabelImage, LabelParams, PointGrid, SupportMap, VoteCell,
    VoteMap,
};
use crate::math::Vec3;

/// A reference point splatted into the query view.
struct SplatEntry {
    position: Vec3,
    depth_along_query: f64,
    u_ref: f64,
    weight: f64,
}

/// Collects all votes for one query frame and derives the stage-2 labels:
/// Positive/Negative by the sign of the vote sum, Ignore when no votes were
/// cast (or they cancel exactly, which has no sign).
pub fn vote_consistency(
    query_index: usize,
    rigs: &[StereoRig],
    lifted: &[PointGrid],
    supports: &[SupportMap],
    params: &LabelParams,
) -> (VoteMap, LabelImage) {
    let query_grid = &lifted[query_index];
    let rig_q = &rigs[query_index];
    let (w, h) = (query_grid.width(), query_grid.height());

    // Forward splat: gather eligible reference points per query pixel in a
    // fixed (reference rig, row-major pixel) order so accumulation below is
    // deterministic.
    let mut splats: Vec<Vec<SplatEntry>> = Vec::new();
    splats.resize_with(w * h, Vec::new);
    for (r, grid_r) in lifted.iter().enumerate() {
        if r == query_index {
            continue;
        }
        for y in 0..grid_r.height() {
            for x in 0..grid_r.width() {
                let Some(p_r) = grid_r.at(x, y) else {
                    continue;
                };
                let support_ref = supports[r].at(x, y).support;
                if support_ref < 1 {
                    continue;
                }
                let Some((qx, qy, z_in_q)) = nearest_pixel_in(rig_q, p_r.position) else {
                    continue;
                };
                splats[qy * w + qx].push(SplatEntry {
                    position: p_r.position,
                    depth_along_query: z_in_q,
                    u_ref: p_r.u,
                    weight: p_r.i.sqrt() * support_ref as f64,
                });
            }
        }
    }

    let mut votes: VoteMap = Grid::filled(w, h, VoteCell::default());
    let mut labels: LabelImage = Grid::filled(w, h, Label::Ignore);

    for y in 0..h {
        for x in 0..w {
            let Some(p_q) = query_grid.at(x, y) else {
                continue;
            };
            let ray_tolerance = params.sigma_max * p_q.u.sqrt();
            let mut cell = VoteCell::default();

            // Backward pass: look up each reference at the projection of the
            // query point; agreement votes up, occlusion votes down.
            for (r, rig_r) in rigs.iter().enumerate() {
                if r == query_index {
                    continue;
                }
                let Some((rx, ry, z_q_in_ref)) = nearest_pixel_in(rig_r, p_q.position) else {
                    continue;
                };
                let Some(p_r) = lifted[r].at(rx, ry) else {
                    continue;
                };
                let support_ref = supports[r].at(rx, ry).support;
                if support_ref < 1 || !(p_r.u < p_q.u) {
                    continue;
                }
                let Ok(dist) = mahalanobis(p_q.position, p_r.position, &p_q.covariance) else {
                    continue;
                };
                let weight = p_r.i.sqrt() * support_ref as f64;
                if dist <= params.sigma_max {
                    cell.vote_sum += weight;
                    cell.n_votes += 1;
                } else {
                    // The query point would hide the reference's own surface:
                    // it sits in front of the stored depth along the
                    // reference ray.
                    let z_ref_stored = depth_in(rig_r, p_r.position);
                    if z_q_in_ref < z_ref_stored - ray_tolerance {
                        cell.vote_sum -= weight;
                        cell.n_votes += 1;
                    }
                }
            }

            // Forward pass: splatted reference points in front of the query
            // measurement violate its free space.
            let z_q = depth_in(rig_q, p_q.position);
            for entry in &splats[y * w + x] {
                if !(entry.u_ref < p_q.u) {
                    continue;
                }
                if entry.depth_along_query >= z_q - ray_tolerance {
                    continue;
                }
                let Ok(dist) = mahalanobis(p_q.position, entry.position, &p_q.covariance) else {
                    continue;
                };
                if dist > params.sigma_max {
                    cell.vote_sum -= entry.weight;
                    cell.n_votes += 1;
                }
            }

            if cell.n_votes > 0 {
                *labels.at_mut(x, y) = if cell.vote_sum > 0.0 {
                    Label::Positive
                } else if cell.vote_sum < 0.0 {
                    Label::Negative
                } else {
                    Label::Ignore
                };
            }
            *votes.at_mut(x, y) = cell;
        }
    }

    (votes, labels)
}
