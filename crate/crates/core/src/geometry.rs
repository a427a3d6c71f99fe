//! Rectified stereo rigs and the numerics every pipeline stage rests on:
//! pinhole projection, two-view triangulation with first-order backward
//! covariance propagation, Mahalanobis distances, and observation angles.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::math::{sym_eigen, Mat3, Vec3};

/// Condition-number bound above which a covariance is treated as singular.
const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("singular covariance matrix")]
    SingularMatrix,
}

/// Pinhole intrinsics shared by both cameras of a rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Self {
        assert!(fx > 0.0 && fy > 0.0, "focal lengths must be positive");
        assert!(width > 0 && height > 0, "image size must be positive");
        assert!(
            cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64,
            "principal point must lie inside the image"
        );
        CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        }
    }
}

/// Which physical camera of a rectified pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CameraSide {
    Left,
    Right,
}

/// A calibrated rectified stereo pair: the unit of "viewpoint".
///
/// Both cameras share intrinsics; the right camera sits `baseline` scene
/// units along the rig's +x axis. `pose` maps world coordinates into the
/// left camera frame (x_cam = R·x_world + t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRig {
    pub intrinsics: CameraIntrinsics,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub baseline: f64,
}

impl StereoRig {
    /// Builds a rig, checking the rotation is orthonormal with det +1
    /// (tolerance 1e-9) and the baseline positive.
    pub fn new(
        intrinsics: CameraIntrinsics,
        rotation: Mat3,
        translation: Vec3,
        baseline: f64,
    ) -> Result<Self, GeometryError> {
        if baseline <= 0.0 {
            return Err(GeometryError::InvalidArgument("baseline must be positive"));
        }
        let rtr = rotation.transpose() * rotation;
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((rtr.m[i][j] - expect).abs());
            }
        }
        if dev > 1e-9 || (rotation.det() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidArgument(
                "rotation must be orthonormal with determinant +1",
            ));
        }
        Ok(StereoRig {
            intrinsics,
            rotation,
            translation,
            baseline,
        })
    }

    /// World position of the requested camera center.
    pub fn camera_center(&self, side: CameraSide) -> Vec3 {
        let c_left = self.rotation.transpose() * (-self.translation);
        match side {
            CameraSide::Left => c_left,
            CameraSide::Right => c_left + self.x_axis_world() * self.baseline,
        }
    }

    /// Mean camera center of the pair.
    pub fn center(&self) -> Vec3 {
        let c_left = self.rotation.transpose() * (-self.translation);
        c_left + self.x_axis_world() * (0.5 * self.baseline)
    }

    /// The rig's +x axis (stereo baseline direction) in world coordinates.
    pub fn x_axis_world(&self) -> Vec3 {
        self.rotation.transpose() * Vec3::new(1.0, 0.0, 0.0)
    }

    /// World point into the chosen camera frame.
    #[inline]
    pub fn world_to_camera(&self, point: Vec3, side: CameraSide) -> Vec3 {
        let mut p = self.rotation * point + self.translation;
        if side == CameraSide::Right {
            p.x -= self.baseline;
        }
        p
    }

    /// Returns a copy with translation and baseline multiplied by `s`.
    pub fn scaled(&self, s: f64) -> StereoRig {
        StereoRig {
            intrinsics: self.intrinsics,
            rotation: self.rotation,
            translation: self.translation * s,
            baseline: self.baseline * s,
        }
    }
}

/// A triangulated 3-D point with its propagated uncertainty.
///
/// `u` is the largest eigenvalue of the covariance; `i = 1/u` is the smallest
/// eigenvalue of the Fisher information and weighs votes as √i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointWithUncertainty {
    pub position: Vec3,
    pub covariance: Mat3,
    pub u: f64,
    pub i: f64,
}

/// Projects a world point into one camera of a rig.
///
/// Returns continuous pixel coordinates and the depth along the optical
/// axis. Non-positive depth is reported, not an error; the pixel coordinates
/// are meaningless in that case and must be gated by the caller.
pub fn project_point(point: Vec3, rig: &StereoRig, side: CameraSide) -> ([f64; 2], f64) {
    let p = rig.world_to_camera(point, side);
    let k = &rig.intrinsics;
    let u = k.fx * p.x / p.z + k.cx;
    let v = k.fy * p.y / p.z + k.cy;
    ([u, v], p.z)
}

/// Lifts a pixel at a given depth back to a world point.
pub fn backproject(
    pixel: [f64; 2],
    depth: f64,
    rig: &StereoRig,
    side: CameraSide,
) -> Result<Vec3, GeometryError> {
    if depth <= 0.0 {
        return Err(GeometryError::InvalidArgument("depth must be positive"));
    }
    let k = &rig.intrinsics;
    let mut cam = Vec3::new(
        (pixel[0] - k.cx) * depth / k.fx,
        (pixel[1] - k.cy) * depth / k.fy,
        depth,
    );
    if side == CameraSide::Right {
        cam.x += rig.baseline;
    }
    Ok(rig.rotation.transpose() * (cam - rig.translation))
}

/// Triangulates a left pixel + disparity into a world point with covariance.
///
/// The covariance is σ_px²·(JᵀJ)⁻¹ where J stacks the Jacobians of the left
/// and right reprojection functions with respect to the 3-D point (4×3,
/// isotropic pixel noise in both views). Eigenvalues below 1e-15·trace are
/// clamped to keep the matrix positive definite.
pub fn triangulate_covariance(
    rig: &StereoRig,
    pixel_left: [f64; 2],
    disparity: f64,
    sigma_px: f64,
) -> Result<PointWithUncertainty, GeometryError> {
    if disparity <= 0.0 {
        return Err(GeometryError::InvalidArgument(
            "disparity must be positive",
        ));
    }
    if sigma_px <= 0.0 {
        return Err(GeometryError::InvalidArgument("sigma_px must be positive"));
    }
    let depth = rig.intrinsics.fx * rig.baseline / disparity;
    let position = backproject(pixel_left, depth, rig, CameraSide::Left)?;
    point_covariance(rig, position, sigma_px)
}

/// Covariance propagation for an already-triangulated world point.
pub(crate) fn point_covariance(
    rig: &StereoRig,
    position: Vec3,
    sigma_px: f64,
) -> Result<PointWithUncertainty, GeometryError> {
    let k = &rig.intrinsics;
    let mut jtj = Mat3::zeros();
    for side in [CameraSide::Left, CameraSide::Right] {
        let p = rig.world_to_camera(position, side);
        if p.z <= 0.0 {
            return Err(GeometryError::DegenerateGeometry(
                "point behind camera during covariance propagation",
            ));
        }
        let iz = 1.0 / p.z;
        // d(pixel)/d(cam point), rows of the 2×3 per-view block.
        let du = Vec3::new(k.fx * iz, 0.0, -k.fx * p.x * iz * iz);
        let dv = Vec3::new(0.0, k.fy * iz, -k.fy * p.y * iz * iz);
        // Chain through cam = R·world + t: row · R.
        for row in [du, dv] {
            let world_row = [
                row.dot(rig.rotation.col(0)),
                row.dot(rig.rotation.col(1)),
                row.dot(rig.rotation.col(2)),
            ];
            jtj.add_outer(world_row);
        }
    }

    let (jvals, _) = sym_eigen(&jtj);
    if jvals[0] <= 1e-12 * jvals[2].max(1e-300) {
        return Err(GeometryError::DegenerateGeometry(
            "rank-deficient normal matrix",
        ));
    }
    let inv = jtj
        .inverse()
        .ok_or(GeometryError::DegenerateGeometry("singular normal matrix"))?;
    let cov = (inv * (sigma_px * sigma_px)).symmetrized();

    let (mut vals, vecs) = sym_eigen(&cov);
    let floor = 1e-15 * cov.trace();
    let mut clamped = false;
    for v in vals.iter_mut() {
        if *v < floor {
            *v = floor;
            clamped = true;
        }
    }
    let covariance = if clamped {
        Mat3::from_eigen(vals, vecs).symmetrized()
    } else {
        cov
    };
    let u = vals[2];
    Ok(PointWithUncertainty {
        position,
        covariance,
        u,
        i: 1.0 / u,
    })
}

/// Mahalanobis distance √((a−b)ᵀ Σ⁻¹ (a−b)).
///
/// Fails when the covariance is singular (condition number above 1e12).
pub fn mahalanobis(p_a: Vec3, p_b: Vec3, covariance: &Mat3) -> Result<f64, GeometryError> {
    let (vals, _) = sym_eigen(covariance);
    if vals[0] <= 0.0 || vals[2] / vals[0] > COND_LIMIT {
        return Err(GeometryError::SingularMatrix);
    }
    let d = p_a - p_b;
    let y = covariance
        .solve_spd(d)
        .ok_or(GeometryError::SingularMatrix)?;
    Ok(d.dot(y).max(0.0).sqrt())
}

/// Angle in degrees subtended at `p` by the two rig centers, in [0, 180].
pub fn observation_angle_deg(
    p: Vec3,
    c_ref: Vec3,
    c_query: Vec3,
) -> Result<f64, GeometryError> {
    let v1 = (c_ref - p)
        .normalized()
        .ok_or(GeometryError::InvalidArgument("p coincides with c_ref"))?;
    let v2 = (c_query - p)
        .normalized()
        .ok_or(GeometryError::InvalidArgument("p coincides with c_query"))?;
    let cos = v1.dot(v2).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// Canonical rig looking down +z from the world origin.
pub fn identity_rig(intrinsics: CameraIntrinsics, baseline: f64) -> StereoRig {
    StereoRig::new(intrinsics, Mat3::IDENTITY, Vec3::ZERO, baseline).expect("canonical rig")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canonical() -> StereoRig {
        identity_rig(CameraIntrinsics::new(100.0, 100.0, 50.0, 50.0, 100, 100), 0.5)
    }

    #[test]
    fn project_on_axis() {
        let rig = canonical();
        let ([u, v], z) = project_point(Vec3::new(0.0, 0.0, 5.0), &rig, CameraSide::Left);
        assert_eq!((u, v, z), (50.0, 50.0, 5.0));
    }

    #[test]
    fn project_offset() {
        let rig = canonical();
        let ([u, v], z) = project_point(Vec3::new(1.0, 0.0, 5.0), &rig, CameraSide::Left);
        assert_eq!((u, v, z), (70.0, 50.0, 5.0));
    }

    #[test]
    fn project_behind_camera_reports_negative_depth() {
        let rig = canonical();
        let (_, z) = project_point(Vec3::new(0.0, 0.0, -1.0), &rig, CameraSide::Left);
        assert_eq!(z, -1.0);
    }

    #[test]
    fn backproject_principal_ray() {
        let rig = canonical();
        let p = backproject([50.0, 50.0], 5.0, &rig, CameraSide::Left).unwrap();
        assert!((p - Vec3::new(0.0, 0.0, 5.0)).norm() < 1e-12);
    }

    #[test]
    fn backproject_rejects_nonpositive_depth() {
        let rig = canonical();
        assert!(matches!(
            backproject([50.0, 50.0], 0.0, &rig, CameraSide::Left),
            Err(GeometryError::InvalidArgument(_))
        ));
    }

    #[test]
    fn right_camera_disparity_relation() {
        let rig = canonical();
        let p = Vec3::new(0.3, -0.2, 5.0);
        let ([ul, _], zl) = project_point(p, &rig, CameraSide::Left);
        let ([ur, vr], zr) = project_point(p, &rig, CameraSide::Right);
        assert!((zl - zr).abs() < 1e-12);
        let d = ul - ur;
        assert!((d - rig.intrinsics.fx * rig.baseline / zl).abs() < 1e-9);
        let ([_, vl], _) = project_point(p, &rig, CameraSide::Left);
        assert!((vl - vr).abs() < 1e-12, "rectified pair shares scanlines");
    }

    #[test]
    fn triangulate_depth_formula() {
        let rig = canonical();
        let pt = triangulate_covariance(&rig, [50.0, 50.0], 10.0, 1.0).unwrap();
        assert!((pt.position - Vec3::new(0.0, 0.0, 5.0)).norm() < 1e-9);
        assert!(pt.u > 0.0);
        assert!((pt.i * pt.u - 1.0).abs() < 1e-9);
        assert!(pt.covariance.asymmetry() < 1e-12);
    }

    #[test]
    fn triangulate_rejects_nonpositive_disparity() {
        let rig = canonical();
        assert!(matches!(
            triangulate_covariance(&rig, [50.0, 50.0], 0.0, 1.0),
            Err(GeometryError::InvalidArgument(_))
        ));
        assert!(matches!(
            triangulate_covariance(&rig, [50.0, 50.0], -3.0, 1.0),
            Err(GeometryError::InvalidArgument(_))
        ));
    }

    #[test]
    fn mahalanobis_euclidean_case() {
        let d = mahalanobis(
            Vec3::new(3.0, 4.0, 0.0),
            Vec3::ZERO,
            &Mat3::IDENTITY,
        )
        .unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mahalanobis_axis_scaling() {
        let cov = Mat3::from_rows([4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        let d = mahalanobis(Vec3::new(2.0, 0.0, 0.0), Vec3::ZERO, &cov).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mahalanobis_zero_at_identity() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(mahalanobis(p, p, &Mat3::IDENTITY).unwrap(), 0.0);
    }

    #[test]
    fn mahalanobis_singular_rejected() {
        let cov = Mat3::from_rows(
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1e-15],
        );
        assert_eq!(
            mahalanobis(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, &cov),
            Err(GeometryError::SingularMatrix)
        );
    }

    #[test]
    fn observation_angles() {
        let p = Vec3::ZERO;
        let a = observation_angle_deg(p, Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0))
            .unwrap();
        assert!((a - 90.0).abs() < 1e-12);
        let same =
            observation_angle_deg(p, Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!(same.abs() < 1e-12);
        let opp =
            observation_angle_deg(p, Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        assert!((opp - 180.0).abs() < 1e-12);
        assert!(observation_angle_deg(p, Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn covariance_scale_law() {
        // Scaling scene and baseline by s scales covariance by s².
        let rig = canonical();
        let s = 3.7;
        let scaled = rig.scaled(s);
        let a = triangulate_covariance(&rig, [62.0, 41.0], 8.0, 1.0).unwrap();
        let b = triangulate_covariance(&scaled, [62.0, 41.0], 8.0, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = a.covariance.m[i][j] * s * s;
                let got = b.covariance.m[i][j];
                assert!(
                    (got - want).abs() <= 1e-6 * want.abs().max(1e-30),
                    "covariance scale law violated at ({i},{j}): {got} vs {want}"
                );
            }
        }
        assert!((b.u / a.u - s * s).abs() < 1e-6 * s * s);
    }

    proptest! {
        #[test]
        fn backproject_project_roundtrip(
            px in 0.0f64..100.0,
            py in 0.0f64..100.0,
            depth in 0.1f64..1e4,
        ) {
            let rig = canonical();
            for side in [CameraSide::Left, CameraSide::Right] {
                let world = backproject([px, py], depth, &rig, side).unwrap();
                let ([u, v], z) = project_point(world, &rig, side);
                prop_assert!((u - px).abs() < 1e-9 * depth.max(1.0));
                prop_assert!((v - py).abs() < 1e-9 * depth.max(1.0));
                prop_assert!((z - depth).abs() < 1e-9 * depth.max(1.0));
            }
        }

        #[test]
        fn mahalanobis_symmetric(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0, az in -5.0f64..5.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0, bz in -5.0f64..5.0,
        ) {
            let cov = Mat3::from_rows([2.0, 0.3, 0.1], [0.3, 1.5, 0.2], [0.1, 0.2, 1.0]);
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            let d1 = mahalanobis(a, b, &cov).unwrap();
            let d2 = mahalanobis(b, a, &cov).unwrap();
            prop_assert!((d1 - d2).abs() < 1e-9);
            prop_assert!(d1 >= 0.0);
            if (a - b).norm() > 1e-9 {
                prop_assert!(d1 > 0.0);
            }
        }
    }
}
