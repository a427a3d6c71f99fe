//! Fixed-size vectors, 3×3 matrices, and a closed-form symmetric eigensolver.
//!
//! Everything geometric in this crate runs on `f64`; the handful of matrix
//! sizes involved (3-vectors, 3×3 covariances, stacked 4×3 Jacobians) never
//! justifies a general linear-algebra dependency.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use core::ops::{Add, Div, Mul, Neg, Sub};

/// Column vector in R^3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    #[inline]
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector, or `None` when the norm is below `1e-300`.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self / n)
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    #[inline]
    pub fn from_rows(r0: [f64; 3], r1: [f64; 3], r2: [f64; 3]) -> Self {
        Mat3 { m: [r0, r1, r2] }
    }

    #[inline]
    pub fn zeros() -> Self {
        Mat3 { m: [[0.0; 3]; 3] }
    }

    #[inline]
    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::new(self.m[i][0], self.m[i][1], self.m[i][2])
    }

    #[inline]
    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows(
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        )
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Adjugate-based inverse; `None` when |det| < 1e-300.
    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if d.abs() < 1e-300 {
            return None;
        }
        let m = &self.m;
        let inv = Mat3::from_rows(
            [
                (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d,
                (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d,
                (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d,
            ],
            [
                (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d,
                (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d,
                (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d,
            ],
            [
                (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d,
                (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d,
                (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d,
            ],
        );
        Some(inv)
    }

    /// Largest absolute deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.m;
        let a = (m[0][1] - m[1][0]).abs();
        let b = (m[0][2] - m[2][0]).abs();
        let c = (m[1][2] - m[2][1]).abs();
        a.max(b).max(c)
    }

    /// (self + selfᵀ) / 2.
    pub fn symmetrized(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows(
            [
                m[0][0],
                0.5 * (m[0][1] + m[1][0]),
                0.5 * (m[0][2] + m[2][0]),
            ],
            [
                0.5 * (m[0][1] + m[1][0]),
                m[1][1],
                0.5 * (m[1][2] + m[2][1]),
            ],
            [
                0.5 * (m[0][2] + m[2][0]),
                0.5 * (m[1][2] + m[2][1]),
                m[2][2],
            ],
        )
    }

    /// Rank-accumulating outer-product update: self += v·vᵀ (v a row).
    pub fn add_outer(&mut self, v: [f64; 3]) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += v[i] * v[j];
            }
        }
    }

    /// V · diag(d) · Vᵀ where the columns of V are `vectors`.
    pub fn from_eigen(values: [f64; 3], vectors: [Vec3; 3]) -> Mat3 {
        let mut out = Mat3::zeros();
        for k in 0..3 {
            let v = vectors[k];
            let d = values[k];
            let vv = [v.x, v.y, v.z];
            for i in 0..3 {
                for j in 0..3 {
                    out.m[i][j] += d * vv[i] * vv[j];
                }
            }
        }
        out
    }

    /// Cholesky factor L (lower triangular) of an SPD matrix, or `None` when a
    /// pivot is non-positive.
    pub fn cholesky(&self) -> Option<Mat3> {
        let a = &self.m;
        let mut l = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[i][j] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Some(Mat3 { m: l })
    }

    /// Solves self·x = b for SPD self via Cholesky; `None` when not SPD.
    pub fn solve_spd(&self, b: Vec3) -> Option<Vec3> {
        let l = self.cholesky()?;
        let m = &l.m;
        // forward: L y = b
        let y0 = b.x / m[0][0];
        let y1 = (b.y - m[1][0] * y0) / m[1][1];
        let y2 = (b.z - m[2][0] * y0 - m[2][1] * y1) / m[2][2];
        // backward: Lᵀ x = y
        let x2 = y2 / m[2][2];
        let x1 = (y1 - m[2][1] * x2) / m[1][1];
        let x0 = (y0 - m[1][0] * x1 - m[2][0] * x2) / m[0][0];
        Some(Vec3::new(x0, x1, x2))
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.row(0).dot(v),
            self.row(1).dot(v),
            self.row(2).dot(v),
        )
    }
}

impl Mul<Mat3> for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.row(i).dot(o.col(j));
            }
        }
        r
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] *= s;
            }
        }
        r
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a
/// symmetric 3×3 matrix.
///
/// Eigenvalues use the closed-form trigonometric solution; eigenvectors come
/// from products of shifted matrices, falling back to an orthogonal complement
/// for (near-)repeated eigenvalues.
pub fn sym_eigen(a: &Mat3) -> ([f64; 3], [Vec3; 3]) {
    let m = &a.m;
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let scale = a.trace().abs().max(1.0);

    if p1 <= 1e-30 * scale * scale {
        // Already diagonal.
        let mut pairs = [
            (m[0][0], Vec3::new(1.0, 0.0, 0.0)),
            (m[1][1], Vec3::new(0.0, 1.0, 0.0)),
            (m[2][2], Vec3::new(0.0, 0.0, 1.0)),
        ];
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        return (
            [pairs[0].0, pairs[1].0, pairs[2].0],
            [pairs[0].1, pairs[1].1, pairs[2].1],
        );
    }

    let q = a.trace() / 3.0;
    let p2 = (m[0][0] - q) * (m[0][0] - q)
        + (m[1][1] - q) * (m[1][1] - q)
        + (m[2][2] - q) * (m[2][2] - q)
        + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = *a;
    for i in 0..3 {
        b.m[i][i] -= q;
    }
    let b = b * (1.0 / p);
    let r = (b.det() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;

    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * core::f64::consts::PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    let values = [lo, mid, hi];

    let vectors = eigenvectors_for(a, values);
    (values, vectors)
}

fn eigenvectors_for(a: &Mat3, values: [f64; 3]) -> [Vec3; 3] {
    let shifted = |lambda: f64| {
        let mut s = *a;
        for i in 0..3 {
            s.m[i][i] -= lambda;
        }
        s
    };

    // (A - λj)(A - λk) spans the λi eigenspace; its largest column is a
    // robust eigenvector unless λj ≈ λk degenerates the product.
    let product_vector = |i: usize| -> Option<Vec3> {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let prod = shifted(values[j]) * shifted(values[k]);
        let mut best = Vec3::ZERO;
        let mut best_n = 0.0;
        for c in 0..3 {
            let v = prod.col(c);
            let n = v.norm_squared();
            if n > best_n {
                best_n = n;
                best = v;
            }
        }
        let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if best_n.sqrt() > 1e-12 * scale.max(1e-300) * scale.max(1e-300) {
            best.normalized()
        } else {
            None
        }
    };

    // Take the eigenvalue most separated from the other two first.
    let sep = |i: usize| {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        (values[i] - values[j]).abs().min((values[i] - values[k]).abs())
    };
    let first = (0..3).max_by(|&x, &y| sep(x).partial_cmp(&sep(y)).unwrap()).unwrap();

    let v_first = product_vector(first).unwrap_or(Vec3::new(1.0, 0.0, 0.0));

    // Second vector: try the product; fall back to any direction orthogonal
    // to the first one (valid inside a repeated eigenspace).
    let second = (first + 1) % 3;
    let third = (first + 2) % 3;
    let v_second_raw = product_vector(second).unwrap_or_else(|| {
        let probe = if v_first.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        v_first.cross(probe)
    });
    // Re-orthogonalize against the first to fight roundoff near degeneracy.
    let v_second = (v_second_raw - v_first * v_first.dot(v_second_raw))
        .normalized()
        .unwrap_or(Vec3::new(0.0, 1.0, 0.0));
    let v_third = v_first.cross(v_second);

    let mut out = [Vec3::ZERO; 3];
    out[first] = v_first;
    out[second] = v_second;
    out[third] = v_third;
    out
}

/// SplitMix64 step; used to derive independent per-item seeds from one root
/// seed (frame ids, tree ids, noise cells).
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stable seed for sub-stream `index` of stream `seed`.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x51ed2701)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn mat_close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (a.m[i][j] - b.m[i][j]).abs() <= tol))
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Mat3::from_rows([2.0, 1.0, 0.5], [0.3, 3.0, 0.2], [0.1, 0.4, 1.5]);
        let inv = a.inverse().unwrap();
        assert!(mat_close(&(a * inv), &Mat3::IDENTITY, 1e-12));
    }

    #[test]
    fn eigen_diagonal() {
        let a = Mat3::from_rows([4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 9.0]);
        let (vals, _) = sym_eigen(&a);
        assert_eq!(vals, [1.0, 4.0, 9.0]);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = Mat3::from_rows([3.0, 1.0, 0.2], [1.0, 2.0, -0.5], [0.2, -0.5, 1.0]);
        let (vals, vecs) = sym_eigen(&a);
        let back = Mat3::from_eigen(vals, vecs);
        assert!(mat_close(&a, &back, 1e-10));
    }

    #[test]
    fn eigen_repeated_eigenvalue() {
        // Rotation-symmetric: eigenvalues (1, 1, 4) with a repeated pair.
        let a = Mat3::from_rows([2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]);
        let (vals, vecs) = sym_eigen(&a);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 4.0).abs() < 1e-12);
        let back = Mat3::from_eigen(vals, vecs);
        assert!(mat_close(&a, &back, 1e-10));
    }

    #[test]
    fn spd_solve_matches_inverse() {
        let a = Mat3::from_rows([4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]);
        let b = Vec3::new(1.0, -2.0, 3.0);
        let x = a.solve_spd(b).unwrap();
        let x2 = a.inverse().unwrap() * b;
        assert!((x - x2).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn eigen_random_spd(entries in proptest::collection::vec(-2.0f64..2.0, 9)) {
            // Build SPD as GᵀG + εI.
            let g = Mat3::from_rows(
                [entries[0], entries[1], entries[2]],
                [entries[3], entries[4], entries[5]],
                [entries[6], entries[7], entries[8]],
            );
            let a = (g.transpose() * g).symmetrized();
            let mut a = a;
            for i in 0..3 { a.m[i][i] += 1e-6; }
            let (vals, vecs) = sym_eigen(&a);
            prop_assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
            prop_assert!(vals[0] > 0.0);
            let back = Mat3::from_eigen(vals, vecs);
            let scale = a.trace().abs().max(1.0);
            prop_assert!(mat_close(&a, &back, 1e-9 * scale));
            // Orthonormality
            let dots: Vec<f64> = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(i, j)| vecs[i].dot(vecs[j]).abs())
                .collect();
            for d in dots { prop_assert!(d < 1e-8); }
        }
    }
}
