//! Ground-truth comparison and confidence benchmarking: bad-pixel masks,
//! sparsification curves with their area (AUSC), and label
//! accuracy/coverage.
//!
//! Sparsification removes pixels one at a time in increasing confidence
//! order and tracks the bad-pixel rate of the remainder; a good confidence
//! measure drives the rate down quickly. The oracle ordering (remove bad
//! pixels first) bounds every other ordering from below and normalizes AUSC
//! comparisons across frames.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;
use crate::labelgen::{Label, LabelImage};
use crate::DisparityMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("grid sizes do not match")]
    SizeMismatch,
    #[error("no pixels to evaluate")]
    EmptyDomain,
    #[error("no jointly labeled pixels, accuracy undefined")]
    UndefinedAccuracy,
}

/// Removal order for [`sparsification`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalOrder {
    /// Lowest confidence first; ties by pixel index.
    ByConfidence,
    /// Bad pixels first: the unbeatable lower envelope.
    OracleOptimal,
    /// Seeded uniform shuffle, for baselines.
    Random(u64),
}

/// Bad-pixel rate as a function of the removed fraction; `ausc` is the
/// trapezoidal area over the emitted points x ∈ {0, 1/N, …, (N−1)/N}.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsificationCurve {
    pub points: Vec<(f64, f64)>,
    pub ausc: f64,
}

/// True where |disp − gt| exceeds the threshold on jointly valid pixels.
pub fn bad_pixel_mask(
    disp: &DisparityMap,
    gt: &DisparityMap,
    threshold: f64,
) -> Result<Grid<bool>, EvalError> {
    if !disp.same_size(gt) {
        return Err(EvalError::SizeMismatch);
    }
    Ok(Grid::from_fn(disp.width(), disp.height(), |x, y| {
        let d = *disp.at(x, y);
        let g = *gt.at(x, y);
        d > 0.0 && g > 0.0 && (d - g).abs() > threshold
    }))
}

/// The evaluation domain: pixels valid in both maps.
pub fn joint_domain(disp: &DisparityMap, gt: &DisparityMap) -> Result<Grid<bool>, EvalError> {
    if !disp.same_size(gt) {
        return Err(EvalError::SizeMismatch);
    }
    Ok(Grid::from_fn(disp.width(), disp.height(), |x, y| {
        *disp.at(x, y) > 0.0 && *gt.at(x, y) > 0.0
    }))
}

/// Gathers per-pixel values over a domain mask in row-major order, the
/// index order that breaks sparsification ties.
pub fn gather_domain<T: Copy>(values: &Grid<T>, domain: &Grid<bool>) -> Vec<T> {
    values
        .data()
        .iter()
        .zip(domain.data())
        .filter(|(_, &d)| d)
        .map(|(v, _)| *v)
        .collect()
}

/// Sparsification curve over a flattened evaluation domain.
///
/// `confidence[i]` and `bad[i]` describe the same pixel; pixels are removed
/// one at a time in the requested order, sampling the bad-pixel rate of the
/// remainder after each step.
pub fn sparsification(
    confidence: &[f64],
    bad: &[bool],
    order: RemovalOrder,
) -> Result<SparsificationCurve, EvalError> {
    let n = confidence.len();
    if n != bad.len() {
        return Err(EvalError::SizeMismatch);
    }
    if n == 0 {
        return Err(EvalError::EmptyDomain);
    }

    let mut removal: Vec<u32> = (0..n as u32).collect();
    match order {
        RemovalOrder::ByConfidence => {
            removal.sort_by(|&a, &b| {
                confidence[a as usize]
                    .partial_cmp(&confidence[b as usize])
                    .unwrap()
                    .then(a.cmp(&b))
            });
        }
        RemovalOrder::OracleOptimal => {
            removal.sort_by_key(|&i| (!bad[i as usize], i));
        }
        RemovalOrder::Random(seed) => {
            use rand::seq::SliceRandom;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            removal.shuffle(&mut rng);
        }
    }

    let mut bad_left = bad.iter().filter(|&&b| b).count();
    let mut points = Vec::with_capacity(n);
    let mut ausc = 0.0;
    let mut prev_rate = 0.0;
    for k in 0..n {
        let rate = bad_left as f64 / (n - k) as f64;
        points.push((k as f64 / n as f64, rate));
        if k > 0 {
            ausc += (prev_rate + rate) / (2.0 * n as f64);
        }
        prev_rate = rate;
        if bad[removal[k] as usize] {
            bad_left -= 1;
        }
    }
    Ok(SparsificationCurve { points, ausc })
}

/// AUSC divided by the optimal AUSC, the scale-free quality figure.
///
/// Both areas zero (no bad pixels at all) counts as 1.0; a vanishing
/// optimal area under a non-zero curve reports +∞.
pub fn relative_ausc(curve: &SparsificationCurve, optimal: &SparsificationCurve) -> f64 {
    if optimal.ausc == 0.0 {
        if curve.ausc == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        curve.ausc / optimal.ausc
    }
}

/// Relative reduction 1 − a/b, the improvement of `a` over baseline `b`.
pub fn ausc_reduction(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        1.0 - a / b
    }
}

/// Agreement and coverage of generated labels against reference labels.
///
/// Accuracy is the fraction of pixels labeled by both sides where the
/// labels agree; coverage is the fraction of reference-labeled pixels that
/// carry any generated label.
pub fn label_accuracy_coverage(
    ours: &LabelImage,
    gt: &LabelImage,
) -> Result<(f64, f64), EvalError> {
    if !ours.same_size(gt) {
        return Err(EvalError::SizeMismatch);
    }
    let mut joint = 0usize;
    let mut agree = 0usize;
    let mut gt_labeled = 0usize;
    for (ours_l, gt_l) in ours.data().iter().zip(gt.data()) {
        if *gt_l == Label::Ignore {
            continue;
        }
        gt_labeled += 1;
        if *ours_l == Label::Ignore {
            continue;
        }
        joint += 1;
        if ours_l == gt_l {
            agree += 1;
        }
    }
    if joint == 0 {
        return Err(EvalError::UndefinedAccuracy);
    }
    Ok((
        agree as f64 / joint as f64,
        joint as f64 / gt_labeled.max(1) as f64,
    ))
}

/// Reference labels from a bad-pixel mask: good pixels of the evaluation
/// domain are Positive, bad ones Negative, everything else Ignore.
pub fn labels_from_bad_mask(bad: &Grid<bool>, domain: &Grid<bool>) -> LabelImage {
    Grid::from_fn(bad.width(), bad.height(), |x, y| {
        if !*domain.at(x, y) {
            Label::Ignore
        } else if *bad.at(x, y) {
            Label::Negative
        } else {
            Label::Positive
        }
    })
}
