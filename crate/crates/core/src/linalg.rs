//! Small fixed-size vector and matrix helpers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::diff::Real;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn add<S: Real>(a: [S; 3], b: [S; 3]) -> [S; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<S: Real>(a: [S; 3], b: [S; 3]) -> [S; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<S: Real>(a: [S; 3], k: S) -> [S; 3] {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn dot<S: Real>(a: [S; 3], b: [S; 3]) -> S {
    S::dot(&a, &b)
}

#[inline]
pub fn cross<S: Real>(a: [S; 3], b: [S; 3]) -> [S; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    libm::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

#[inline]
pub fn mat_vec<S: Real>(m: &[[f64; 3]; 3], v: [S; 3]) -> [S; 3] {
    [S::lin(&m[0], &v), S::lin(&m[1], &v), S::lin(&m[2], &v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Frobenius norm of `RᵀR − I`.
pub fn orthonormality_defect(r: &Mat3) -> f64 {
    let rtr = mat_mul(&transpose(r), r);
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = rtr[i][j] - IDENTITY3[i][j];
            acc += d * d;
        }
    }
    libm::sqrt(acc)
}

/// Rotation by `angle` radians about the unit `axis` (Rodrigues).
pub fn axis_angle(axis: Vec3, angle: f64) -> Mat3 {
    let [x, y, z] = normalize(axis);
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// Rotation from a unit quaternion `(w, x, y, z)`.
pub fn quaternion(q: [f64; 4]) -> Mat3 {
    let n = libm::sqrt(q.iter().map(|v| v * v).sum::<f64>());
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// Uniformly distributed rotation (normalized Gaussian quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let q: [f64; 4] = core::array::from_fn(|_| rng.sample(StandardNormal));
    quaternion(q)
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v: Vec3 = core::array::from_fn(|_| rng.sample(StandardNormal));
        let n = norm(v);
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Heading/pitch/roll (z-y-x) rotation from body to navigation frame.
pub fn euler_zyx(yaw: f64, pitch: f64, roll: f64) -> Mat3 {
    let rz = axis_angle([0.0, 0.0, 1.0], yaw);
    let ry = axis_angle([0.0, 1.0, 0.0], pitch);
    let rx = axis_angle([1.0, 0.0, 0.0], roll);
    mat_mul(&rz, &mat_mul(&ry, &rx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_rotations_are_proper() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            assert!(orthonormality_defect(&r) < 1e-14);
            assert!((det(&r) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn axis_angle_quarter_turn() {
        let r = axis_angle([0.0, 0.0, 1.0], core::f64::consts::FRAC_PI_2);
        let v = mat_vec(&r, [1.0, 0.0, 0.0]);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }
}
