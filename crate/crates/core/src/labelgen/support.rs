//! Stage 1: lifting depth maps to 3-D points with covariance and assessing
//! which measurements are supported from sufficiently different viewpoints.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::geometry::{mahalanobis, observation_angle_deg, triangulate_covariance, StereoRig};
use crate::grid::Grid;
use crate::labelgen::{nearest_pixel_in, LabelParams, PointGrid, SupportCell, SupportMap};
use crate::DepthMap;

/// Triangulates every valid depth pixel into a world point with propagated
/// covariance. Invalid pixels (and the rare degenerate triangulation) yield
/// `None`.
pub fn lift_depth_map(depth: &DepthMap, rig: &StereoRig, params: &LabelParams) -> PointGrid {
    let fxb = rig.intrinsics.fx * rig.baseline;
    Grid::from_fn(depth.width(), depth.height(), |x, y| {
        let z = *depth.at(x, y);
        if z <= 0.0 {
            return None;
        }
        let disparity = fxb / z;
        triangulate_covariance(rig, [x as f64, y as f64], disparity, params.sigma_px).ok()
    })
}

/// Stage-1 support for one query frame.
///
/// A reference measurement found at the projection of the query point may
/// activate an angular bin when the observation-angle difference exceeds
/// `alpha_min` and the two points agree within `sigma_max` under the
/// Mahalanobis distance of whichever covariance carries the smaller
/// uncertainty. The support is the number of distinct activated bins, which
/// caps the influence of any single observation direction.
pub fn assess_support(
    query_index: usize,
    rigs: &[StereoRig],
    lifted: &[PointGrid],
    params: &LabelParams,
) -> SupportMap {
    let query_grid = &lifted[query_index];
    let c_query = rigs[query_index].center();
    let centers: alloc::vec::Vec<_> = rigs.iter().map(|r| r.center()).collect();

    Grid::from_fn(query_grid.width(), query_grid.height(), |x, y| {
        let Some(p_q) = query_grid.at(x, y) else {
            return SupportCell::default();
        };
        let mut bins = 0u64;
        for (r, rig_r) in rigs.iter().enumerate() {
            if r == query_index {
                continue;
            }
            let Some((rx, ry, _)) = nearest_pixel_in(rig_r, p_q.position) else {
                continue;
            };
            let Some(p_r) = lifted[r].at(rx, ry) else {
                continue;
            };
            let Ok(alpha) = observation_angle_deg(p_q.position, centers[r], c_query) else {
                continue;
            };
            if alpha <= params.alpha_min {
                continue;
            }
            let gate_cov = if p_q.u <= p_r.u {
                &p_q.covariance
            } else {
                &p_r.covariance
            };
            let Ok(dist) = mahalanobis(p_q.position, p_r.position, gate_cov) else {
                continue;
            };
            if dist <= params.sigma_max {
                let bin = ((alpha / params.alpha_min).floor() as u64).min(63);
                bins |= 1 << bin;
            }
        }
        SupportCell {
            bins,
            support: bins.count_ones() as u16,
        }
    })
}
