//! Synthetic multi-view datasets with exact ground truth.
//!
//! Scenes are built from analytic primitives and rendered by casting one ray
//! per pixel; the closest hit yields the z-depth. Surfaces carry a procedural
//! value-noise texture sampled at the 3-D hit point, so all views of a
//! surface patch are photo-consistent by construction. Error injection
//! corrupts depth maps in seeded circular blobs to create known-bad pixels.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{CameraIntrinsics, CameraSide, StereoRig};
use crate::grid::Grid;
use crate::math::{derive_seed, splitmix64, Mat3, Vec3};
use crate::{DepthMap, GrayImage, INVALID};

/// Procedural texture parameters for one surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureSpec {
    pub seed: u64,
    /// Lattice cell size of the coarsest noise octave, in scene units.
    pub cell: f64,
}

impl Default for TextureSpec {
    fn default() -> Self {
        TextureSpec { seed: 1, cell: 0.25 }
    }
}

/// Analytic scene primitive with pose/size in scene units.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// Plane through `anchor` with unit `normal`; `half_extent` limits it to
    /// a square patch in its own plane, `None` makes it infinite.
    Plane {
        anchor: Vec3,
        normal: Vec3,
        half_extent: Option<f64>,
        texture: TextureSpec,
    },
    Sphere {
        center: Vec3,
        radius: f64,
        texture: TextureSpec,
    },
    /// Axis-aligned box spanning `min`..`max`.
    Box {
        min: Vec3,
        max: Vec3,
        texture: TextureSpec,
    },
}

impl Primitive {
    fn texture(&self) -> &TextureSpec {
        match self {
            Primitive::Plane { texture, .. }
            | Primitive::Sphere { texture, .. }
            | Primitive::Box { texture, .. } => texture,
        }
    }

    /// Smallest ray parameter above a small epsilon, if the ray hits.
    fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        const T_EPS: f64 = 1e-9;
        match self {
            Primitive::Plane {
                anchor,
                normal,
                half_extent,
                ..
            } => {
                let denom = dir.dot(*normal);
                if denom.abs() < 1e-12 {
                    return None;
                }
                let t = (*anchor - origin).dot(*normal) / denom;
                if t <= T_EPS {
                    return None;
                }
                if let Some(he) = half_extent {
                    let (e1, e2) = plane_basis(*normal);
                    let local = origin + dir * t - *anchor;
                    if local.dot(e1).abs() > *he || local.dot(e2).abs() > *he {
                        return None;
                    }
                }
                Some(t)
            }
            Primitive::Sphere { center, radius, .. } => {
                let oc = origin - *center;
                let a = dir.dot(dir);
                let b = 2.0 * oc.dot(dir);
                let c = oc.dot(oc) - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let t0 = (-b - sq) / (2.0 * a);
                if t0 > T_EPS {
                    return Some(t0);
                }
                let t1 = (-b + sq) / (2.0 * a);
                if t1 > T_EPS {
                    return Some(t1);
                }
                None
            }
            Primitive::Box { min, max, .. } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let o = [origin.x, origin.y, origin.z];
                let d = [dir.x, dir.y, dir.z];
                let lo = [min.x, min.y, min.z];
                let hi = [max.x, max.y, max.z];
                for ax in 0..3 {
                    let inv = 1.0 / d[ax];
                    let mut t0 = (lo[ax] - o[ax]) * inv;
                    let mut t1 = (hi[ax] - o[ax]) * inv;
                    if t0 > t1 {
                        core::mem::swap(&mut t0, &mut t1);
                    }
                    t_near = t_near.max(t0);
                    t_far = t_far.min(t1);
                    if t_near > t_far {
                        return None;
                    }
                }
                if t_near > T_EPS {
                    Some(t_near)
                } else if t_far > T_EPS {
                    Some(t_far)
                } else {
                    None
                }
            }
        }
    }
}

/// Deterministic in-plane basis derived from the normal.
fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let n = normal.normalized().unwrap_or(Vec3::new(0.0, 0.0, 1.0));
    let probe = if n.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = n.cross(probe).normalized().unwrap_or(Vec3::new(0.0, 1.0, 0.0));
    let e2 = n.cross(e1);
    (e1, e2)
}

/// A static scene: at least one primitive, plus an optional background
/// surface tested like any other primitive (intended to sit behind
/// everything).
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
    pub background: Option<Primitive>,
}

impl Scene {
    pub fn new(primitives: Vec<Primitive>) -> Self {
        assert!(!primitives.is_empty(), "scene needs at least one primitive");
        Scene {
            primitives,
            background: None,
        }
    }

    pub fn with_background(mut self, background: Primitive) -> Self {
        self.background = Some(background);
        self
    }

    fn all_primitives(&self) -> impl Iterator<Item = &Primitive> {
        self.primitives.iter().chain(self.background.iter())
    }
}

/// Rendered stereo views with exact per-pixel ground truth.
#[derive(Debug, Clone)]
pub struct RenderedViews {
    pub image_left: GrayImage,
    pub image_right: GrayImage,
    pub depth_left: DepthMap,
    pub depth_right: DepthMap,
}

/// Places `n_rigs` stereo rigs on a circular arc around `center`, all looking
/// at it. The arc lies in the world XZ plane; rig centers (pair midpoints)
/// sit exactly on the circle, spaced `arc_degrees / (n_rigs - 1)` apart as
/// seen from `center`. A single rig lands on the arc midpoint.
pub fn make_arc_rigs(
    center: Vec3,
    radius: f64,
    arc_degrees: f64,
    n_rigs: usize,
    intrinsics: CameraIntrinsics,
    baseline: f64,
) -> Vec<StereoRig> {
    assert!(radius > 0.0 && n_rigs >= 1);
    let mut rigs = Vec::with_capacity(n_rigs);
    for k in 0..n_rigs {
        let theta = if n_rigs == 1 {
            0.0
        } else {
            (-arc_degrees / 2.0 + arc_degrees * k as f64 / (n_rigs - 1) as f64).to_radians()
        };
        let midpoint = center + Vec3::new(theta.sin(), 0.0, -theta.cos()) * radius;
        let forward = (center - midpoint).normalized().expect("radius > 0");
        let up = Vec3::new(0.0, 1.0, 0.0);
        let x_cam = up
            .cross(forward)
            .normalized()
            .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        let y_cam = forward.cross(x_cam);
        let rotation = Mat3::from_rows(
            [x_cam.x, x_cam.y, x_cam.z],
            [y_cam.x, y_cam.y, y_cam.z],
            [forward.x, forward.y, forward.z],
        );
        // Left camera sits half a baseline off the rig midpoint.
        let c_left = midpoint - x_cam * (baseline / 2.0);
        let translation = -(rotation * c_left);
        rigs.push(
            StereoRig::new(intrinsics, rotation, translation, baseline)
                .expect("look-at rotation is orthonormal"),
        );
    }
    rigs
}

/// Ray-casts both cameras of a rig against the scene.
///
/// Depth maps hold the closest-hit z-depth (0.0 where no primitive is hit);
/// images sample each primitive's 3-octave value-noise texture at the 3-D hit
/// point, so matching surface points look identical from every view.
pub fn render_views(scene: &Scene, rig: &StereoRig) -> RenderedViews {
    let (image_left, depth_left) = render_camera(scene, rig, CameraSide::Left);
    let (image_right, depth_right) = render_camera(scene, rig, CameraSide::Right);
    RenderedViews {
        image_left,
        image_right,
        depth_left,
        depth_right,
    }
}

fn render_camera(scene: &Scene, rig: &StereoRig, side: CameraSide) -> (GrayImage, DepthMap) {
    let k = &rig.intrinsics;
    let origin = rig.camera_center(side);
    let rot_t = rig.rotation.transpose();
    let mut image = Grid::filled(k.width, k.height, 0u8);
    let mut depth = Grid::filled(k.width, k.height, INVALID);
    for y in 0..k.height {
        for x in 0..k.width {
            // Direction with unit z in the camera frame, so the ray parameter
            // at the hit is the z-depth directly.
            let dir_cam = Vec3::new((x as f64 - k.cx) / k.fx, (y as f64 - k.cy) / k.fy, 1.0);
            let dir = rot_t * dir_cam;
            let mut best_t = f64::INFINITY;
            let mut best_prim: Option<&Primitive> = None;
            for prim in scene.all_primitives() {
                if let Some(t) = prim.intersect(origin, dir) {
                    if t < best_t {
                        best_t = t;
                        best_prim = Some(prim);
                    }
                }
            }
            if let Some(prim) = best_prim {
                let hit = origin + dir * best_t;
                *image.at_mut(x, y) = texture_value(hit, prim.texture());
                *depth.at_mut(x, y) = best_t;
            }
        }
    }
    (image, depth)
}

/// Band-limited 3-octave value noise at a world point, mapped to 0..=255.
fn texture_value(p: Vec3, spec: &TextureSpec) -> u8 {
    let mut sum = 0.0;
    let mut weight = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0 / spec.cell;
    for octave in 0..3 {
        sum += amp * value_noise(p * freq, derive_seed(spec.seed, octave));
        weight += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    let v = sum / weight;
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Trilinearly interpolated lattice noise in [0, 1); counter-based (pure
/// function of cell coordinates and seed), so rendering order is irrelevant.
fn value_noise(p: Vec3, seed: u64) -> f64 {
    let xf = p.x.floor();
    let yf = p.y.floor();
    let zf = p.z.floor();
    let (ix, iy, iz) = (xf as i64, yf as i64, zf as i64);
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    let tx = smooth(p.x - xf);
    let ty = smooth(p.y - yf);
    let tz = smooth(p.z - zf);
    let mut corners = [0.0f64; 8];
    for (n, corner) in corners.iter_mut().enumerate() {
        let dx = (n & 1) as i64;
        let dy = ((n >> 1) & 1) as i64;
        let dz = ((n >> 2) & 1) as i64;
        *corner = lattice_hash(ix + dx, iy + dy, iz + dz, seed);
    }
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let x00 = lerp(corners[0], corners[1], tx);
    let x10 = lerp(corners[2], corners[3], tx);
    let x01 = lerp(corners[4], corners[5], tx);
    let x11 = lerp(corners[6], corners[7], tx);
    let y0 = lerp(x00, x10, ty);
    let y1 = lerp(x01, x11, ty);
    lerp(y0, y1, tz)
}

fn lattice_hash(ix: i64, iy: i64, iz: i64, seed: u64) -> f64 {
    let mut h = splitmix64(seed ^ (ix as u64));
    h = splitmix64(h ^ (iy as u64));
    h = splitmix64(h ^ (iz as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// How injected blobs alter the depth values they cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorMode {
    /// Multiply depth by the factor.
    ScaleDepth(f64),
    /// Add a constant offset in scene units.
    ConstantOffset(f64),
    /// Replace depth by a uniform draw from [lo, hi).
    RandomDepth { lo: f64, hi: f64 },
}

/// Seeded corruption of a depth map in circular blobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSpec {
    /// Fraction of valid pixels to corrupt, in [0, 1].
    pub blob_fraction: f64,
    pub blob_radius_px: u32,
    pub mode: ErrorMode,
    pub seed: u64,
}

/// Corrupts approximately `blob_fraction` of the valid pixels in circular
/// blobs; the mask marks exactly the altered pixels. Bit-identical output for
/// identical seeds.
pub fn inject_errors(depth: &DepthMap, spec: &ErrorSpec) -> (DepthMap, Grid<bool>) {
    assert!((0.0..=1.0).contains(&spec.blob_fraction));
    assert!(spec.blob_radius_px > 0);
    let mut out = depth.clone();
    let mut mask = Grid::filled(depth.width(), depth.height(), false);
    let n_valid = depth.data().iter().filter(|v| **v > 0.0).count();
    let target = (spec.blob_fraction * n_valid as f64).round() as usize;
    if target == 0 {
        return (out, mask);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r = spec.blob_radius_px as i64;
    let (w, h) = (depth.width() as i64, depth.height() as i64);
    let mut altered = 0usize;
    // A blob may land on already-altered or invalid ground, so allow a
    // generous number of placements before giving up.
    let max_blobs = 100 + 200 * (target / (r * r) as usize + 1);
    'outer: for _ in 0..max_blobs {
        let cx = rng.random_range(0..w);
        let cy = rng.random_range(0..h);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                let (x, y) = (cx + dx, cy + dy);
                if !depth.contains(x, y) {
                    continue;
                }
                let (xu, yu) = (x as usize, y as usize);
                if *mask.at(xu, yu) || *depth.at(xu, yu) <= 0.0 {
                    continue;
                }
                let z = *out.at(xu, yu);
                *out.at_mut(xu, yu) = match spec.mode {
                    ErrorMode::ScaleDepth(f) => z * f,
                    ErrorMode::ConstantOffset(d) => z + d,
                    ErrorMode::RandomDepth { lo, hi } => rng.random_range(lo..hi),
                };
                *mask.at_mut(xu, yu) = true;
                altered += 1;
                if altered >= target {
                    break 'outer;
                }
            }
        }
    }
    (out, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{backproject, project_point};

    fn test_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::new(160.0, 160.0, 79.5, 59.5, 160, 120)
    }

    fn plane_scene(z: f64) -> Scene {
        Scene::new(alloc::vec![Primitive::Plane {
            anchor: Vec3::new(0.0, 0.0, z),
            normal: Vec3::new(0.0, 0.0, -1.0),
            half_extent: None,
            texture: TextureSpec { seed: 7, cell: 0.2 },
        }])
    }

    #[test]
    fn arc_spacing() {
        let rigs = make_arc_rigs(Vec3::ZERO, 4.0, 60.0, 7, test_intrinsics(), 0.3);
        assert_eq!(rigs.len(), 7);
        for pair in rigs.windows(2) {
            let a = crate::geometry::observation_angle_deg(
                Vec3::ZERO,
                pair[0].center(),
                pair[1].center(),
            )
            .unwrap();
            assert!((a - 10.0).abs() < 1e-9, "spacing {a}");
        }
        // Two rigs apart: twice the spacing for points near the center.
        let p = Vec3::new(0.05, -0.03, 0.02);
        let a2 =
            crate::geometry::observation_angle_deg(p, rigs[0].center(), rigs[2].center()).unwrap();
        assert!((a2 - 20.0).abs() < 1.0, "double spacing {a2}");
    }

    #[test]
    fn single_rig_at_midpoint() {
        let rigs = make_arc_rigs(Vec3::ZERO, 4.0, 60.0, 1, test_intrinsics(), 0.3);
        assert_eq!(rigs.len(), 1);
        let c = rigs[0].center();
        assert!((c - Vec3::new(0.0, 0.0, -4.0)).norm() < 1e-12);
    }

    #[test]
    fn rigs_look_at_center() {
        let rigs = make_arc_rigs(Vec3::ZERO, 4.0, 70.0, 5, test_intrinsics(), 0.3);
        for rig in &rigs {
            // The arc center projects at the principal point shifted by the
            // projected half-baseline (the left camera is offset by b/2 from
            // the rig midpoint that sits on the arc).
            let ([u, v], z) = project_point(Vec3::ZERO, rig, CameraSide::Left);
            assert!(z > 0.0);
            assert!((v - rig.intrinsics.cy).abs() < 1e-9);
            let half_base_px = rig.intrinsics.fx * rig.baseline / (2.0 * z);
            assert!((u - rig.intrinsics.cx - half_base_px).abs() < 1e-9);
        }
    }

    #[test]
    fn plane_depth_constant() {
        let scene = plane_scene(5.0);
        let rig = crate::geometry::identity_rig(test_intrinsics(), 0.3);
        let views = render_views(&scene, &rig);
        for (_, _, z) in views.depth_left.enumerate() {
            assert!((z - 5.0).abs() < 1e-9, "fronto-parallel plane depth {z}");
        }
    }

    #[test]
    fn sphere_wins_zbuffer() {
        let mut scene = plane_scene(5.0);
        scene.primitives.push(Primitive::Sphere {
            center: Vec3::new(0.0, 0.0, 3.0),
            radius: 0.5,
            texture: TextureSpec { seed: 3, cell: 0.2 },
        });
        let rig = crate::geometry::identity_rig(test_intrinsics(), 0.3);
        let views = render_views(&scene, &rig);
        let center = *views.depth_left.at(79, 59);
        assert!(
            (center - 2.5).abs() < 0.01,
            "sphere front face depth {center}"
        );
    }

    #[test]
    fn fronto_parallel_warp_exact() {
        // On a fronto-parallel plane the depth field is constant, so warping
        // the left depth into the right camera must reproduce the stored
        // right depth to numerical precision.
        let scene = plane_scene(5.0);
        let rig = crate::geometry::identity_rig(test_intrinsics(), 0.3);
        let views = render_views(&scene, &rig);
        for (x, y, z) in views.depth_left.enumerate() {
            if *z <= 0.0 {
                continue;
            }
            let world = backproject([x as f64, y as f64], *z, &rig, CameraSide::Left).unwrap();
            let ([u, v], zr) = project_point(world, &rig, CameraSide::Right);
            let (ui, vi) = (u.round() as i64, v.round() as i64);
            if !views.depth_right.contains(ui, vi) {
                continue;
            }
            let z_right = *views.depth_right.at(ui as usize, vi as usize);
            assert!((z_right - zr).abs() < 1e-6);
        }
    }

    #[test]
    fn cross_view_consistency_on_arc() {
        // Warping GT depth between views agrees on co-visible, un-occluded
        // pixels; occlusions show up as large gaps, never small drifts.
        let mut scene = plane_scene(5.0);
        scene.primitives.push(Primitive::Sphere {
            center: Vec3::new(0.3, 0.1, 3.5),
            radius: 0.6,
            texture: TextureSpec { seed: 3, cell: 0.2 },
        });
        let rigs = make_arc_rigs(
            Vec3::new(0.0, 0.0, 4.0),
            4.0,
            40.0,
            3,
            test_intrinsics(),
            0.3,
        );
        let views_a = render_views(&scene, &rigs[1]);
        let views_b = render_views(&scene, &rigs[2]);
        let mut agree = 0usize;
        let mut drift = 0usize;
        for (x, y, z) in views_a.depth_left.enumerate() {
            if *z <= 0.0 {
                continue;
            }
            let world = backproject([x as f64, y as f64], *z, &rigs[1], CameraSide::Left).unwrap();
            let ([u, v], zb) = project_point(world, &rigs[2], CameraSide::Left);
            let (ui, vi) = (u.round() as i64, v.round() as i64);
            if zb <= 0.0 || !views_b.depth_left.contains(ui, vi) {
                continue;
            }
            let z_stored = *views_b.depth_left.at(ui as usize, vi as usize);
            if z_stored <= 0.0 {
                continue;
            }
            let err = (z_stored - zb).abs();
            if err < 0.05 {
                agree += 1;
            } else if err < 0.5 {
                // Small but non-trivial drift would indicate an inconsistent
                // renderer rather than an occlusion boundary.
                drift += 1;
            }
        }
        assert!(agree > 5000, "co-visible pixels: {agree}");
        assert!(
            (drift as f64) < 0.02 * agree as f64,
            "inconsistent warps: {drift} vs {agree} agreeing"
        );
    }

    #[test]
    fn texture_photoconsistent() {
        let spec = TextureSpec { seed: 7, cell: 0.2 };
        let p = Vec3::new(0.123, -0.456, 5.0);
        assert_eq!(texture_value(p, &spec), texture_value(p, &spec));
        // Texture has actual contrast.
        let scene = plane_scene(5.0);
        let rig = crate::geometry::identity_rig(test_intrinsics(), 0.3);
        let views = render_views(&scene, &rig);
        let min = views.image_left.data().iter().copied().min().unwrap();
        let max = views.image_left.data().iter().copied().max().unwrap();
        assert!(max - min > 60, "texture contrast {min}..{max}");
    }

    #[test]
    fn inject_zero_fraction_is_noop() {
        let depth = Grid::filled(20, 20, 5.0);
        let spec = ErrorSpec {
            blob_fraction: 0.0,
            blob_radius_px: 3,
            mode: ErrorMode::ScaleDepth(0.5),
            seed: 9,
        };
        let (out, mask) = inject_errors(&depth, &spec);
        assert_eq!(out, depth);
        assert!(mask.data().iter().all(|m| !m));
    }

    #[test]
    fn inject_scale_halves_masked() {
        let depth = Grid::filled(50, 40, 6.0);
        let spec = ErrorSpec {
            blob_fraction: 0.1,
            blob_radius_px: 4,
            mode: ErrorMode::ScaleDepth(0.5),
            seed: 42,
        };
        let (out, mask) = inject_errors(&depth, &spec);
        let mut altered = 0;
        for (x, y, m) in mask.enumerate() {
            if *m {
                assert_eq!(*out.at(x, y), 3.0);
                altered += 1;
            } else {
                assert_eq!(*out.at(x, y), 6.0);
            }
        }
        let target = (0.1 * 2000.0) as usize;
        assert!(
            altered as f64 >= target as f64 * 0.8 && altered as f64 <= target as f64 * 1.2,
            "altered {altered} vs target {target}"
        );
    }

    #[test]
    fn inject_deterministic() {
        let depth = Grid::from_fn(30, 30, |x, y| 1.0 + (x + y) as f64 * 0.01);
        let spec = ErrorSpec {
            blob_fraction: 0.2,
            blob_radius_px: 3,
            mode: ErrorMode::RandomDepth { lo: 0.5, hi: 2.0 },
            seed: 777,
        };
        let (a, ma) = inject_errors(&depth, &spec);
        let (b, mb) = inject_errors(&depth, &spec);
        assert_eq!(a, b);
        assert_eq!(ma, mb);
    }
}
