//! Hand-crafted per-pixel confidence features.
//!
//! One row is produced per valid left-disparity pixel. The channels cover
//! the families shared by the published feature sets: left-right
//! consistency, cost-curve shape (peak ratios, margins, entropy), local
//! disparity statistics, and image/position cues.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::confidence::{ConfidenceError, FeatureMatrix};
use crate::grid::Grid;
use crate::stereo::CostVolume;
use crate::{DisparityMap, GrayImage};

pub(crate) const FEATURE_NAMES: [&str; 13] = [
    "lrd",
    "lrc",
    "peak_ratio",
    "naive_peak_ratio",
    "matching_score",
    "max_margin",
    "winner_margin",
    "neg_entropy",
    "disp_variance",
    "median_dev",
    "dist_border",
    "dist_discont",
    "grad_x",
];

const LRD: usize = 0;
const LRC: usize = 1;

/// Extracts the feature matrix of one frame over its valid disparity pixels.
///
/// The left-right difference looks up `d_R(x − d_L(x,y), y)`; lookups that
/// leave the image or hit an invalid right pixel are imputed with the
/// largest observed value of the channel, keeping occlusion suspicious
/// without producing non-finite entries.
pub fn extract_features(
    disp_left: &DisparityMap,
    disp_right: &DisparityMap,
    volume: &CostVolume,
    image: &GrayImage,
    frame_id: u32,
) -> Result<FeatureMatrix, ConfidenceError> {
    let (w, h) = (disp_left.width(), disp_left.height());
    if !disp_left.same_size(disp_right)
        || !disp_left.same_size(image)
        || volume.width != w
        || volume.height != h
    {
        return Err(ConfidenceError::SizeMismatch);
    }

    let dist_discont = discontinuity_distance(disp_left);

    let n_features = FEATURE_NAMES.len();
    let mut values: Vec<f32> = Vec::new();
    let mut pixels: Vec<(u32, u32)> = Vec::new();
    let mut lrd_missing: Vec<usize> = Vec::new();

    for y in 0..h {
        for x in 0..w {
            let d = *disp_left.at(x, y);
            if d <= 0.0 {
                continue;
            }
            let row_base = values.len();
            values.resize(row_base + n_features, 0.0);
            pixels.push((x as u32, y as u32));
            let row = &mut values[row_base..row_base + n_features];

            // Left-right difference and consistency.
            let xr = x as i64 - d.round() as i64;
            let lrd = if xr >= 0 && (xr as usize) < w {
                let dr = *disp_right.at(xr as usize, y);
                if dr > 0.0 {
                    Some((d - dr).abs())
                } else {
                    None
                }
            } else {
                None
            };
            match lrd {
                Some(v) => {
                    row[LRD] = v as f32;
                    row[LRC] = if v <= 1.0 { 1.0 } else { 0.0 };
                }
                None => {
                    row[LRD] = f32::NAN; // imputed below
                    row[LRC] = 0.0;
                    lrd_missing.push(row_base + LRD);
                }
            }

            let curve = volume.curve(x, y);
            let (c1, d1) = curve_min(curve);
            let c2 = second_min(curve, d1);
            let c2_local = second_local_min(curve, d1).unwrap_or(c1);
            let sum: f32 = curve.iter().sum();
            row[2] = (c2_local + 1.0) / (c1 + 1.0);
            row[3] = (c2 + 1.0) / (c1 + 1.0);
            row[4] = -c1;
            row[5] = c2 - c1;
            row[6] = (c2_local - c1) / sum.max(1e-12);
            row[7] = neg_entropy(curve);

            let (variance, median_dev) = window_stats(disp_left, x, y, d);
            row[8] = variance;
            row[9] = median_dev;
            row[10] = x.min(y).min(w - 1 - x).min(h - 1 - y) as f32;
            row[11] = *dist_discont.at(x, y) as f32;
            row[12] = (image.at_clamped(x as i64 + 1, y as i64) as f32
                - image.at_clamped(x as i64 - 1, y as i64) as f32)
                .abs()
                / 2.0;
        }
    }

    // Impute missing left-right lookups with the channel maximum.
    if !lrd_missing.is_empty() {
        let mut max_lrd = 0.0f32;
        for i in (LRD..values.len()).step_by(n_features) {
            if values[i].is_finite() {
                max_lrd = max_lrd.max(values[i]);
            }
        }
        for &i in &lrd_missing {
            values[i] = max_lrd;
        }
    }
    debug_assert!(values.iter().all(|v| v.is_finite()));

    let frame_ids = alloc::vec![frame_id; pixels.len()];
    Ok(FeatureMatrix {
        names: FEATURE_NAMES.iter().map(|n| n.to_string()).collect(),
        width: w,
        height: h,
        n_features,
        values,
        pixels,
        frame_ids,
    })
}

fn curve_min(curve: &[f32]) -> (f32, usize) {
    let mut best = curve[0];
    let mut at = 0usize;
    for (d, &c) in curve.iter().enumerate().skip(1) {
        if c < best {
            best = c;
            at = d;
        }
    }
    (best, at)
}

/// Smallest cost at any disparity other than the winner.
fn second_min(curve: &[f32], d1: usize) -> f32 {
    let mut best = f32::INFINITY;
    for (d, &c) in curve.iter().enumerate() {
        if d != d1 && c < best {
            best = c;
        }
    }
    if best.is_finite() {
        best
    } else {
        curve[d1]
    }
}

/// Smallest local minimum more than one disparity step from the winner.
fn second_local_min(curve: &[f32], d1: usize) -> Option<f32> {
    let n = curve.len();
    let mut best: Option<f32> = None;
    for d in 0..n {
        if d + 1 >= d1 && d <= d1 + 1 {
            continue;
        }
        let left_ok = d == 0 || curve[d - 1] >= curve[d];
        let right_ok = d + 1 == n || curve[d + 1] >= curve[d];
        if left_ok && right_ok {
            best = Some(match best {
                Some(b) => b.min(curve[d]),
                None => curve[d],
            });
        }
    }
    best
}

/// Σ p·ln p of the softmin distribution over the cost curve; peaked curves
/// score closer to zero.
fn neg_entropy(curve: &[f32]) -> f32 {
    let min = curve.iter().fold(f32::INFINITY, |a, &b| a.min(b));
    let mut z = 0.0f64;
    for &c in curve {
        z += (-((c - min) as f64)).exp();
    }
    let mut acc = 0.0f64;
    for &c in curve {
        let p = (-((c - min) as f64)).exp() / z;
        if p > 0.0 {
            acc += p * p.ln();
        }
    }
    acc as f32
}

/// Population variance and median deviation of the 5×5 disparity window.
fn window_stats(disp: &DisparityMap, x: usize, y: usize, center: f64) -> (f32, f32) {
    let mut vals: Vec<f64> = Vec::with_capacity(25);
    for dy in -2i64..=2 {
        for dx in -2i64..=2 {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if disp.contains(nx, ny) {
                let v = *disp.at(nx as usize, ny as usize);
                if v > 0.0 {
                    vals.push(v);
                }
            }
        }
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let variance = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = vals[vals.len() / 2];
    ((variance as f32), ((center - median).abs() as f32))
}

/// City-block distance to the nearest disparity discontinuity (neighboring
/// valid disparities differing by more than one pixel).
fn discontinuity_distance(disp: &DisparityMap) -> Grid<u32> {
    let (w, h) = (disp.width(), disp.height());
    let cap = (w + h) as u32;
    let mut dist: Grid<u32> = Grid::from_fn(w, h, |x, y| {
        let d = *disp.at(x, y);
        if d <= 0.0 {
            return cap;
        }
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if disp.contains(nx, ny) {
                let nd = *disp.at(nx as usize, ny as usize);
                if nd > 0.0 && (nd - d).abs() > 1.0 {
                    return 0;
                }
            }
        }
        cap
    });
    // Two-pass L1 distance transform.
    for y in 0..h {
        for x in 0..w {
            let mut best = *dist.at(x, y);
            if x > 0 {
                best = best.min(dist.at(x - 1, y).saturating_add(1));
            }
            if y > 0 {
                best = best.min(dist.at(x, y - 1).saturating_add(1));
            }
            *dist.at_mut(x, y) = best;
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let mut best = *dist.at(x, y);
            if x + 1 < w {
                best = best.min(dist.at(x + 1, y).saturating_add(1));
            }
            if y + 1 < h {
                best = best.min(dist.at(x, y + 1).saturating_add(1));
            }
            *dist.at_mut(x, y) = best.min(cap);
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_volume(w: usize, h: usize, d_max: usize) -> CostVolume {
        let mut vol = CostVolume::new(w, h, d_max);
        vol.costs.iter_mut().for_each(|c| *c = 1.0);
        vol
    }

    #[test]
    fn lrd_zero_on_consistent_pair() {
        let w = 20;
        let disp_l: DisparityMap = Grid::filled(w, 10, 5.0);
        let disp_r: DisparityMap = Grid::filled(w, 10, 5.0);
        let image: GrayImage = Grid::filled(w, 10, 100u8);
        let vol = flat_volume(w, 10, 8);
        let fm = extract_features(&disp_l, &disp_r, &vol, &image, 0).unwrap();
        let lrd_col: Vec<f32> = (0..fm.n_samples())
            .filter(|&i| fm.pixels[i].0 >= 5)
            .map(|i| fm.row(i)[LRD])
            .collect();
        assert!(!lrd_col.is_empty());
        assert!(lrd_col.iter().all(|&v| v == 0.0));
        // Consistency flag set on those pixels too.
        for i in 0..fm.n_samples() {
            if fm.pixels[i].0 >= 5 {
                assert_eq!(fm.row(i)[LRC], 1.0);
            }
        }
    }

    #[test]
    fn lrd_imputes_channel_max_when_occluded() {
        let w = 20;
        let mut disp_l: DisparityMap = Grid::filled(w, 1, 3.0);
        *disp_l.at_mut(1, 0) = 8.0; // lookup at x - 8 < 0: imputed
        let mut disp_r: DisparityMap = Grid::filled(w, 1, 3.0);
        *disp_r.at_mut(7, 0) = 5.5; // makes pixel x=10 have lrd 2.5 (the max)
        let image: GrayImage = Grid::filled(w, 1, 100u8);
        let vol = flat_volume(w, 1, 8);
        let fm = extract_features(&disp_l, &disp_r, &vol, &image, 0).unwrap();
        let row_of = |px: u32| (0..fm.n_samples()).find(|&i| fm.pixels[i].0 == px).unwrap();
        assert_eq!(fm.row(row_of(10))[LRD], 2.5);
        assert_eq!(fm.row(row_of(1))[LRD], 2.5, "imputed with channel max");
        assert!(fm.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn peak_ratio_one_with_two_equal_minima() {
        let mut vol = CostVolume::new(1, 1, 5);
        vol.costs = alloc::vec![5.0, 0.0, 7.0, 0.0, 9.0, 6.0];
        let disp: DisparityMap = Grid::filled(1, 1, 1.0);
        let image: GrayImage = Grid::filled(1, 1, 0u8);
        let fm = extract_features(&disp, &disp, &vol, &image, 0).unwrap();
        assert_eq!(fm.row(0)[2], 1.0, "peak ratio is 1 at maximal ambiguity");
        assert_eq!(fm.row(0)[3], 1.0);
        assert_eq!(fm.row(0)[5], 0.0, "max margin vanishes on a tie");
    }

    #[test]
    fn distance_to_border_is_min_of_edges() {
        let (w, h) = (30, 20);
        let disp: DisparityMap = Grid::filled(w, h, 2.0);
        let image: GrayImage = Grid::filled(w, h, 0u8);
        let vol = flat_volume(w, h, 4);
        let fm = extract_features(&disp, &disp, &vol, &image, 0).unwrap();
        for i in 0..fm.n_samples() {
            let (x, y) = fm.pixels[i];
            let expect = x.min(y).min(w as u32 - 1 - x).min(h as u32 - 1 - y) as f32;
            assert_eq!(fm.row(i)[10], expect);
        }
    }

    #[test]
    fn discontinuity_distance_measures_steps() {
        let mut disp: DisparityMap = Grid::filled(11, 5, 4.0);
        for y in 0..5 {
            for x in 6..11 {
                *disp.at_mut(x, y) = 9.0; // jump between x=5 and x=6
            }
        }
        let dist = discontinuity_distance(&disp);
        assert_eq!(*dist.at(5, 2), 0);
        assert_eq!(*dist.at(6, 2), 0);
        assert_eq!(*dist.at(3, 2), 2);
        assert_eq!(*dist.at(9, 2), 3);
    }

    #[test]
    fn entropy_flat_vs_peaked() {
        let flat = neg_entropy(&[1.0; 16]);
        let peaked = neg_entropy(&[9.0, 9.0, 0.0, 9.0, 9.0, 9.0, 9.0, 9.0]);
        assert!(peaked > flat, "peaked curves carry less entropy");
        assert!((flat - -(16f32.ln())).abs() < 1e-5);
    }

    #[test]
    fn size_mismatch_rejected() {
        let disp: DisparityMap = Grid::filled(4, 4, 1.0);
        let other: DisparityMap = Grid::filled(5, 4, 1.0);
        let image: GrayImage = Grid::filled(4, 4, 0u8);
        let vol = flat_volume(4, 4, 2);
        assert_eq!(
            extract_features(&disp, &other, &vol, &image, 0).unwrap_err(),
            ConfidenceError::SizeMismatch
        );
    }
}
