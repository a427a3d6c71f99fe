//! Census-based block matching: cost volumes, winner-take-all disparity,
//! optional semi-global aggregation, and disparity/depth conversion.
//!
//! This is the built-in query algorithm whose systematic errors the labeling
//! pipeline detects. It intentionally performs no left-right filtering or
//! occlusion filling; the raw mistakes are the point.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::StereoRig;
use crate::grid::Grid;
use crate::{DepthMap, DisparityMap, GrayImage};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StereoError {
    #[error("image sizes do not match: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Dense per-pixel matching-cost curves over disparities 0..=d_max.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    pub width: usize,
    pub height: usize,
    pub d_max: usize,
    /// Row-major (y, x, d) with the disparity axis innermost.
    pub costs: Vec<f32>,
}

impl CostVolume {
    pub fn new(width: usize, height: usize, d_max: usize) -> Self {
        CostVolume {
            width,
            height,
            d_max,
            costs: vec![0.0; width * height * (d_max + 1)],
        }
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.d_max + 1
    }

    #[inline]
    pub fn cost(&self, x: usize, y: usize, d: usize) -> f32 {
        self.costs[(y * self.width + x) * self.stride() + d]
    }

    /// The full cost curve of one pixel.
    #[inline]
    pub fn curve(&self, x: usize, y: usize) -> &[f32] {
        let s = self.stride();
        let base = (y * self.width + x) * s;
        &self.costs[base..base + s]
    }

    fn curve_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let s = self.stride();
        let base = (y * self.width + x) * s;
        &mut self.costs[base..base + s]
    }
}

/// Census bit-string of every pixel over a `window`×`window` neighborhood
/// (border pixels sample with clamping). Bit = 1 where the neighbor is darker
/// than the center.
fn census_transform(image: &GrayImage, window: usize) -> Grid<u64> {
    let half = (window / 2) as i64;
    Grid::from_fn(image.width(), image.height(), |x, y| {
        let center = *image.at(x, y);
        let mut bits = 0u64;
        for dy in -half..=half {
            for dx in -half..=half {
                if dx == 0 && dy == 0 {
                    continue;
                }
                bits <<= 1;
                if image.at_clamped(x as i64 + dx, y as i64 + dy) < center {
                    bits |= 1;
                }
            }
        }
        bits
    })
}

/// Builds the census Hamming cost volume between a rectified pair.
///
/// `cost(x, y, d)` compares the census strings of `left(x, y)` and
/// `right(x - d, y)`; disparities that fall off the right image get the
/// maximal cost (the full census bit count).
pub fn census_cost_volume(
    left: &GrayImage,
    right: &GrayImage,
    d_max: usize,
    window: usize,
) -> Result<CostVolume, StereoError> {
    if !left.same_size(right) {
        return Err(StereoError::SizeMismatch(
            left.width(),
            left.height(),
            right.width(),
            right.height(),
        ));
    }
    if window < 3 || window % 2 == 0 {
        return Err(StereoError::InvalidArgument("window must be odd and >= 3"));
    }
    if window * window - 1 > 64 {
        return Err(StereoError::InvalidArgument(
            "census window larger than 64 bits",
        ));
    }
    let census_l = census_transform(left, window);
    let census_r = census_transform(right, window);
    let max_cost = (window * window - 1) as f32;
    let mut volume = CostVolume::new(left.width(), left.height(), d_max);
    for y in 0..left.height() {
        for x in 0..left.width() {
            let cl = *census_l.at(x, y);
            let curve = volume.curve_mut(x, y);
            for (d, slot) in curve.iter_mut().enumerate() {
                *slot = if d <= x {
                    (cl ^ *census_r.at(x - d, y)).count_ones() as f32
                } else {
                    max_cost
                };
            }
        }
    }
    Ok(volume)
}

/// Winner-take-all disparity: per-pixel argmin of the cost curve, ties broken
/// toward the smaller disparity. Disparity 0 doubles as the invalid sentinel
/// downstream.
pub fn wta_disparity(volume: &CostVolume) -> DisparityMap {
    Grid::from_fn(volume.width, volume.height, |x, y| {
        let curve = volume.curve(x, y);
        let mut best_d = 0usize;
        let mut best_c = curve[0];
        for (d, &c) in curve.iter().enumerate().skip(1) {
            if c < best_c {
                best_c = c;
                best_d = d;
            }
        }
        best_d as f64
    })
}

/// Four-path semi-global aggregation with penalties `p1` (|Δd| = 1) and `p2`
/// (larger jumps); per-path costs are minimum-normalized as usual. Panics
/// when `p2 >= p1 >= 0` is violated.
pub fn sgm_aggregate(volume: &CostVolume, p1: f32, p2: f32) -> CostVolume {
    assert!(p1 >= 0.0 && p2 >= p1, "penalties must satisfy p2 >= p1 >= 0");
    let (w, h, nd) = (volume.width, volume.height, volume.d_max + 1);
    let mut sum = CostVolume::new(w, h, volume.d_max);

    // (dx, dy) per path; each path scans the image so that the predecessor
    // pixel is always already aggregated.
    let paths: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let mut path_cost = vec![0.0f32; w * h * nd];

    for &(dx, dy) in &paths {
        // Fixed traversal order per direction keeps the f32 sums and thus
        // the output bit-stable.
        let xs: Vec<usize> = if dx > 0 {
            (0..w).collect()
        } else {
            (0..w).rev().collect()
        };
        let ys: Vec<usize> = if dy >= 0 {
            (0..h).collect()
        } else {
            (0..h).rev().collect()
        };
        for &y in &ys {
            for &x in &xs {
                let px = x as i64 - dx;
                let py = y as i64 - dy;
                let base = (y * w + x) * nd;
                if !volume_contains(w, h, px, py) {
                    let curve = volume.curve(x, y);
                    path_cost[base..base + nd].copy_from_slice(curve);
                } else {
                    let prev_base = (py as usize * w + px as usize) * nd;
                    let mut prev_min = f32::INFINITY;
                    for d in 0..nd {
                        prev_min = prev_min.min(path_cost[prev_base + d]);
                    }
                    for d in 0..nd {
                        let stay = path_cost[prev_base + d];
                        let step_m = if d > 0 {
                            path_cost[prev_base + d - 1] + p1
                        } else {
                            f32::INFINITY
                        };
                        let step_p = if d + 1 < nd {
                            path_cost[prev_base + d + 1] + p1
                        } else {
                            f32::INFINITY
                        };
                        let jump = prev_min + p2;
                        let best = stay.min(step_m).min(step_p).min(jump);
                        path_cost[base + d] = volume.cost(x, y, d) + best - prev_min;
                    }
                }
            }
        }
        for (acc, &pc) in sum.costs.iter_mut().zip(path_cost.iter()) {
            *acc += pc;
        }
    }
    sum
}

#[inline]
fn volume_contains(w: usize, h: usize, x: i64, y: i64) -> bool {
    x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h
}

/// Conversion direction for [`disparity_depth_convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvertDirection {
    DisparityToDepth,
    DepthToDisparity,
}

/// Elementwise z = fx·B/d (its own inverse); values ≤ 0 pass through
/// unchanged, so the invalid sentinel and behind-camera markers survive.
pub fn disparity_depth_convert(
    map: &Grid<f64>,
    rig: &StereoRig,
    _direction: ConvertDirection,
) -> Grid<f64> {
    let fxb = rig.intrinsics.fx * rig.baseline;
    map.map(|&v| if v > 0.0 { fxb / v } else { v })
}

/// Disparity map of the right image, computed by mirroring both images,
/// matching, and mirroring back. Needed by left-right consistency features.
pub fn right_disparity(
    left: &GrayImage,
    right: &GrayImage,
    d_max: usize,
    window: usize,
    sgm: Option<(f32, f32)>,
) -> Result<DisparityMap, StereoError> {
    let left_m = right.flip_horizontal();
    let right_m = left.flip_horizontal();
    let volume = census_cost_volume(&left_m, &right_m, d_max, window)?;
    let volume = match sgm {
        Some((p1, p2)) => sgm_aggregate(&volume, p1, p2),
        None => volume,
    };
    Ok(wta_disparity(&volume).flip_horizontal())
}

/// Depth map implied by a disparity map (convenience wrapper).
pub fn disparity_to_depth(disp: &DisparityMap, rig: &StereoRig) -> DepthMap {
    disparity_depth_convert(disp, rig, ConvertDirection::DisparityToDepth)
}
