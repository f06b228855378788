//! Clebsch-Gordan coefficients.
//!
//! Complex-basis (Condon-Shortley) coefficients come from Racah's formula
//! evaluated in exact integer arithmetic and are rounded once to `f64`.
//! The real-basis coupling coefficients used by the tensor product are the
//! same intertwiners expressed in the real harmonic basis of
//! [`harmonics`](super::harmonics).

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
use once_cell::race::OnceBox;

use super::{GeomError, L_SUPPORTED};

/// Largest coupled degree kept in the cache.
const L_COUPLED: usize = 2 * L_SUPPORTED;

fn factorial(n: i64) -> u128 {
    (1..=n as u128).product()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact ⟨j1 m1 j2 m2 | j m⟩ as `sqrt(pn/pd) · sn/sd`, each ratio reduced.
fn racah_parts(
    j1: i64,
    m1: i64,
    j2: i64,
    m2: i64,
    j: i64,
    m: i64,
) -> Option<(u128, u128, i128, u128)> {
    if m != m1 + m2
        || j < (j1 - j2).abs()
        || j > j1 + j2
        || m.abs() > j
        || m1.abs() > j1
        || m2.abs() > j2
    {
        return None;
    }
    let mut pn = (2 * j + 1) as u128
        * factorial(j + j1 - j2)
        * factorial(j - j1 + j2)
        * factorial(j1 + j2 - j);
    let mut pd = factorial(j1 + j2 + j + 1);
    let g = gcd(pn, pd);
    pn /= g;
    pd /= g;
    let extra = factorial(j + m)
        * factorial(j - m)
        * factorial(j1 - m1)
        * factorial(j1 + m1)
        * factorial(j2 - m2)
        * factorial(j2 + m2);
    let g = gcd(extra, pd);
    pn *= extra / g;
    pd /= g;

    // Alternating sum of reciprocal factorial products.
    let (mut sn, mut sd): (i128, u128) = (0, 1);
    let kmin = 0.max(j2 - j - m1).max(j1 - j + m2);
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(j1 + j2 - j - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(j - j2 + m1 + k)
            * factorial(j - j1 - m2 + k);
        let sign: i128 = if k % 2 == 0 { 1 } else { -1 };
        let l = sd / gcd(sd, den) * den;
        sn = sn * (l / sd) as i128 + sign * (l / den) as i128;
        sd = l;
        let g = gcd(sn.unsigned_abs(), sd);
        if g > 1 {
            sn /= g as i128;
            sd /= g;
        }
    }
    if sn == 0 {
        return None;
    }
    Some((pn, pd, sn, sd))
}

fn racah_f64(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    match racah_parts(j1, m1, j2, m2, j, m) {
        None => 0.0,
        Some((pn, pd, sn, sd)) => libm::sqrt(pn as f64 / pd as f64) * (sn as f64 / sd as f64),
    }
}

struct Tables {
    /// complex[(l1, l2, l)] dense over (m1, m2, m).
    complex: Vec<Option<Vec<f64>>>,
    /// real[(l1, l2, l)] for l ≤ L_SUPPORTED.
    real: Vec<Option<Vec<f64>>>,
}

fn triple_index(l1: usize, l2: usize, l: usize) -> usize {
    (l1 * (L_SUPPORTED + 1) + l2) * (L_COUPLED + 1) + l
}

fn dense_index(l1: usize, l2: usize, l: usize, m1: i64, m2: i64, m: i64) -> usize {
    let (d2, d) = (2 * l2 + 1, 2 * l + 1);
    let i1 = (m1 + l1 as i64) as usize;
    let i2 = (m2 + l2 as i64) as usize;
    let i = (m + l as i64) as usize;
    (i1 * d2 + i2) * d + i
}

/// `U[m][μ]` with `Y^real_m = Σ_μ U[m][μ] Y^complex_μ`.
fn real_basis(l: usize) -> Vec<Vec<Complex64>> {
    let n = 2 * l + 1;
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut u = alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); n]; n];
    let li = l as i64;
    for m in -li..=li {
        let row = (m + li) as usize;
        let sgn = if m.abs() % 2 == 0 { 1.0 } else { -1.0 };
        if m == 0 {
            u[row][l] = Complex64::new(1.0, 0.0);
        } else if m > 0 {
            u[row][(-m + li) as usize] = Complex64::new(s, 0.0);
            u[row][(m + li) as usize] = Complex64::new(sgn * s, 0.0);
        } else {
            u[row][(m + li) as usize] = Complex64::new(0.0, s);
            u[row][(-m + li) as usize] = Complex64::new(0.0, -sgn * s);
        }
    }
    u
}

fn build_tables() -> Tables {
    let mut complex = alloc::vec![None; (L_SUPPORTED + 1) * (L_SUPPORTED + 1) * (L_COUPLED + 1)];
    for l1 in 0..=L_SUPPORTED {
        for l2 in 0..=L_SUPPORTED {
            for l in l1.abs_diff(l2)..=(l1 + l2) {
                let mut t = alloc::vec![0.0; (2 * l1 + 1) * (2 * l2 + 1) * (2 * l + 1)];
                let (a, b, c) = (l1 as i64, l2 as i64, l as i64);
                for m1 in -a..=a {
                    for m2 in -b..=b {
                        let m = m1 + m2;
                        if m.abs() <= c {
                            t[dense_index(l1, l2, l, m1, m2, m)] = racah_f64(a, m1, b, m2, c, m);
                        }
                    }
                }
                complex[triple_index(l1, l2, l)] = Some(t);
            }
        }
    }

    let mut real = alloc::vec![None; complex.len()];
    for l1 in 0..=L_SUPPORTED {
        for l2 in 0..=L_SUPPORTED {
            for l in l1.abs_diff(l2)..=(l1 + l2).min(L_SUPPORTED) {
                let cg = complex[triple_index(l1, l2, l)].as_ref().unwrap();
                real[triple_index(l1, l2, l)] = Some(realify(l1, l2, l, cg));
            }
        }
    }
    Tables { complex, real }
}

/// `C^R[m1,m2,m] = Σ U[m][μ] conj(U[m1][μ1]) conj(U[m2][μ2]) C[μ1,μ2,μ]`,
/// which is real when `l1+l2+l` is even and imaginary otherwise; the
/// imaginary case is rotated onto the real axis by a fixed phase `−i`.
fn realify(l1: usize, l2: usize, l: usize, cg: &[f64]) -> Vec<f64> {
    let (u1, u2, u) = (real_basis(l1), real_basis(l2), real_basis(l));
    let (n1, n2, n) = (2 * l1 + 1, 2 * l2 + 1, 2 * l + 1);
    let odd = (l1 + l2 + l) % 2 == 1;
    let mut out = alloc::vec![0.0; n1 * n2 * n];
    for a in 0..n1 {
        for b in 0..n2 {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for mu1 in 0..n1 {
                    if u1[a][mu1].norm_sqr() == 0.0 {
                        continue;
                    }
                    for mu2 in 0..n2 {
                        if u2[b][mu2].norm_sqr() == 0.0 {
                            continue;
                        }
                        for mu in 0..n {
                            let w = cg[(mu1 * n2 + mu2) * n + mu];
                            if w == 0.0 {
                                continue;
                            }
                            acc += u[c][mu] * u1[a][mu1].conj() * u2[b][mu2].conj() * w;
                        }
                    }
                }
                let v = if odd { -acc.im } else { acc.re };
                out[(a * n2 + b) * n + c] = v;
            }
        }
    }
    out
}

static TABLES: OnceBox<Tables> = OnceBox::new();

fn tables() -> &'static Tables {
    TABLES.get_or_init(|| Box::new(build_tables()))
}

/// Complex-basis ⟨ℓ1 m1 ℓ2 m2 | ℓ m⟩ (Condon-Shortley phase).
///
/// Zero whenever `m ≠ m1 + m2`, `|m| > ℓ`, or `ℓ` violates the triangle
/// inequality. `|m1| > ℓ1` or `|m2| > ℓ2` is a domain error.
pub fn clebsch_gordan(
    l1: usize,
    m1: i64,
    l2: usize,
    m2: i64,
    l: usize,
    m: i64,
) -> Result<f64, GeomError> {
    if m1.unsigned_abs() as usize > l1 || m2.unsigned_abs() as usize > l2 {
        return Err(GeomError::Domain("|m_i| must not exceed ℓ_i"));
    }
    for deg in [l1, l2] {
        if deg > L_SUPPORTED {
            return Err(GeomError::UnsupportedDegree {
                degree: deg,
                max: L_SUPPORTED,
            });
        }
    }
    if m != m1 + m2 || m.unsigned_abs() as usize > l || l < l1.abs_diff(l2) || l > l1 + l2 {
        return Ok(0.0);
    }
    let t = tables().complex[triple_index(l1, l2, l)].as_ref().unwrap();
    Ok(t[dense_index(l1, l2, l, m1, m2, m)])
}

/// Dense real-basis coupling tensor for `(ℓ1, ℓ2) → ℓ`, indexed
/// `[(m1+ℓ1)·(2ℓ2+1) + (m2+ℓ2)]·(2ℓ+1) + (m+ℓ)`.
pub fn real_coupling(l1: usize, l2: usize, l: usize) -> Result<&'static [f64], GeomError> {
    for deg in [l1, l2, l] {
        if deg > L_SUPPORTED {
            return Err(GeomError::UnsupportedDegree {
                degree: deg,
                max: L_SUPPORTED,
            });
        }
    }
    if l < l1.abs_diff(l2) || l > l1 + l2 {
        return Err(GeomError::SelectionRule { l1, l2, l });
    }
    Ok(tables().real[triple_index(l1, l2, l)].as_ref().unwrap())
}

/// Real-basis coupling coefficient for a single component triple.
pub fn real_clebsch_gordan(
    l1: usize,
    m1: i64,
    l2: usize,
    m2: i64,
    l: usize,
    m: i64,
) -> Result<f64, GeomError> {
    if m1.unsigned_abs() as usize > l1
        || m2.unsigned_abs() as usize > l2
        || m.unsigned_abs() as usize > l
    {
        return Err(GeomError::Domain("|m| must not exceed ℓ"));
    }
    match real_coupling(l1, l2, l) {
        Ok(t) => Ok(t[dense_index(l1, l2, l, m1, m2, m)]),
        Err(GeomError::SelectionRule { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_with_scalar_is_identity() {
        for l in 0..=L_SUPPORTED {
            let li = l as i64;
            for m in -li..=li {
                assert_eq!(clebsch_gordan(l, m, 0, 0, l, m).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn known_values() {
        let v = clebsch_gordan(1, 0, 1, 0, 2, 0).unwrap();
        assert!((v - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 1, 2).unwrap(), 0.0);
        let v = clebsch_gordan(1, 1, 1, -1, 0, 0).unwrap();
        assert!((v - libm::sqrt(1.0 / 3.0)).abs() < 1e-15);
        assert!(clebsch_gordan(1, 2, 1, 0, 1, 2).is_err());
    }

    #[test]
    fn real_10_10_20_keeps_complex_value() {
        let v = real_clebsch_gordan(1, 0, 1, 0, 2, 0).unwrap();
        assert!((v - libm::sqrt(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn selection_rule_violation_is_reported() {
        assert!(matches!(
            real_coupling(1, 1, 3),
            Err(GeomError::SelectionRule { .. })
        ));
    }
}
