//! Real spherical harmonics.
//!
//! Components are ordered `m = −ℓ, …, ℓ`, orthonormal on the unit sphere,
//! without the Condon-Shortley phase: for `ℓ = 1` the basis is
//! `√(3/4π)·(y, z, x)`. Negative `m` carries `sin(|m|φ)`, positive `m`
//! carries `cos(mφ)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::diff::Real;

/// Regular solid harmonics `|r|^ℓ Y_ℓ^m(r̂)`: homogeneous polynomials of
/// degree ℓ in the components of `r`, smooth everywhere including `r = 0`.
pub fn solid_harmonics<S: Real>(l: usize, r: [S; 3]) -> Vec<S> {
    let [x, y, z] = r;
    let r2 = x * x + y * y + z * z;
    let mut out = alloc::vec![S::zero(); 2 * l + 1];

    // Re/Im parts of (x + iy)^m.
    let mut re = S::one();
    let mut im = S::zero();
    for m in 0..=l {
        if m > 0 {
            let (nre, nim) = (re * x - im * y, re * y + im * x);
            re = nre;
            im = nim;
        }
        let q = homogeneous_legendre_derivative(l, m, z, r2);
        let k = norm_factor(l, m);
        if m == 0 {
            out[l] = q.scale(k);
        } else {
            let kq = q.scale(k * core::f64::consts::SQRT_2);
            out[l + m] = kq * re;
            out[l - m] = kq * im;
        }
    }
    out
}

/// `Y_ℓ(r/|r|)` for any nonzero `r`; derivatives flow through the
/// normalization.
pub fn direction_harmonics<S: Real>(l: usize, r: [S; 3]) -> Vec<S> {
    let mut out = solid_harmonics(l, r);
    if l > 0 {
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        let inv = S::one() / pow_half(r2, l);
        for v in out.iter_mut() {
            *v = *v * inv;
        }
    }
    out
}

/// `(r²)^{l/2}`.
fn pow_half<S: Real>(r2: S, l: usize) -> S {
    let mut acc = S::one();
    for _ in 0..l / 2 {
        acc = acc * r2;
    }
    if l % 2 == 1 {
        acc = acc * r2.sqrt();
    }
    acc
}

/// `r^{ℓ−m} · d^m P_ℓ/dz^m (z/r)` as a polynomial in `z` and `r²`.
fn homogeneous_legendre_derivative<S: Real>(l: usize, m: usize, z: S, r2: S) -> S {
    // Q_m^m = (2m−1)!!
    let dfact: f64 = (1..=m).map(|k| (2 * k - 1) as f64).product();
    let mut q_prev = S::cst(dfact);
    if l == m {
        return q_prev;
    }
    let mut q = z.scale((2 * m + 1) as f64 * dfact);
    for n in (m + 2)..=l {
        let next = (z * q).scale((2 * n - 1) as f64) - (r2 * q_prev).scale((n + m - 1) as f64);
        q_prev = q;
        q = next.scale(1.0 / (n - m) as f64);
    }
    q
}

fn norm_factor(l: usize, m: usize) -> f64 {
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
    libm::sqrt((2 * l + 1) as f64 / (4.0 * PI) * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::Dual;

    #[test]
    fn l2_polynomials_against_closed_forms() {
        let r = [0.3, -1.2, 0.7];
        let y = solid_harmonics(2, r);
        let [x, yy, z] = r;
        let c = 0.5 * libm::sqrt(15.0 / PI);
        let expected = [
            c * x * yy,
            c * yy * z,
            0.25 * libm::sqrt(5.0 / PI) * (2.0 * z * z - x * x - yy * yy),
            c * x * z,
            0.5 * c * (x * x - yy * yy),
        ];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn direction_harmonics_are_scale_invariant_with_exact_gradient() {
        let r = [
            Dual::<f64, 1>::seeded(0.4, 0),
            Dual::cst(0.5),
            Dual::cst(-0.2),
        ];
        let y = direction_harmonics(1, r);
        let n = libm::sqrt(0.16 + 0.25 + 0.04);
        // d/dx (x/|r|) = (|r|² − x²)/|r|³
        let c = libm::sqrt(3.0 / (4.0 * PI));
        let expected = c * (n * n - 0.16) / (n * n * n);
        assert!((y[2].d[0] - expected).abs() < 1e-14);
    }
}
