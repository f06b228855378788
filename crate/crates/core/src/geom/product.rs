use alloc::vec::Vec;

use super::clebsch::real_coupling;
use super::{Block, GeomError, IrrepSpec, Parity};
use crate::diff::Real;

/// Coupling of every channel of `t` (degree ℓ1) with the harmonic vector
/// `y` (degree ℓ2) into degree `l_out`:
///
/// `out[c]_m = Σ_{m1,m2} C(ℓ1 m1 ℓ2 m2 | ℓ_out m) · t[c]_{m1} · y_{m2}`.
///
/// `y` is taken to carry the harmonic parity `(−1)^ℓ2`; the output parity
/// is the product of both.
pub fn tensor_product<S: Real>(t: &Block<S>, y: &[S], l_out: usize) -> Result<Block<S>, GeomError> {
    let l1 = t.irrep.degree();
    if y.is_empty() || y.len().is_multiple_of(2) {
        return Err(GeomError::Shape {
            expected: 2 * (y.len() / 2) + 1,
            found: y.len(),
        });
    }
    let l2 = (y.len() - 1) / 2;
    let parity = t.irrep.parity().times(Parity::of_harmonic(l2));
    let irrep = IrrepSpec::new(l_out, parity)?;
    let mixer = coupling_matrix(l1, y, l_out)?;
    let (n1, n) = (2 * l1 + 1, 2 * l_out + 1);
    let mut coeffs = Vec::with_capacity(t.mult * n);
    for ch in t.channels() {
        for m in 0..n {
            coeffs.push(S::dot(&mixer[m * n1..(m + 1) * n1], ch));
        }
    }
    Ok(Block {
        irrep,
        mult: t.mult,
        coeffs,
    })
}

/// `M[m][m1] = Σ_{m2} C(ℓ1 m1 ℓ2 m2 | ℓ m) y_{m2}`, so that the coupled
/// output of a single channel `t` is `M t`.
pub fn coupling_matrix<S: Real>(l1: usize, y: &[S], l_out: usize) -> Result<Vec<S>, GeomError> {
    let l2 = (y.len() - 1) / 2;
    let k = real_coupling(l1, l2, l_out)?;
    let (n1, n2, n) = (2 * l1 + 1, 2 * l2 + 1, 2 * l_out + 1);
    let mut out = Vec::with_capacity(n * n1);
    let mut coef = Vec::with_capacity(n2);
    let mut ys = Vec::with_capacity(n2);
    for m in 0..n {
        for m1 in 0..n1 {
            coef.clear();
            ys.clear();
            for (m2, &yv) in y.iter().enumerate() {
                let c = k[(m1 * n2 + m2) * n + m];
                if c != 0.0 {
                    coef.push(c);
                    ys.push(yv);
                }
            }
            out.push(S::lin(&coef, &ys));
        }
    }
    Ok(out)
}

/// Coupling of two single-channel components: `[a ⊗ b]^(ℓ)`.
pub fn couple<S: Real>(l1: usize, a: &[S], b: &[S], l_out: usize) -> Result<Vec<S>, GeomError> {
    let mixer = coupling_matrix(l1, b, l_out)?;
    let n1 = 2 * l1 + 1;
    Ok((0..2 * l_out + 1)
        .map(|m| S::dot(&mixer[m * n1..(m + 1) * n1], a))
        .collect())
}
