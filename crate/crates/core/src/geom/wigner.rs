use alloc::vec::Vec;

use super::clebsch::real_coupling;
use crate::linalg::Mat3;

/// Real Wigner matrix `D^(ℓ)(R)` (row-major, `(2ℓ+1)²` entries) with
/// `Y_ℓ(R u) = D^(ℓ)(R) Y_ℓ(u)`.
///
/// `D^(1)` is `R` permuted to the `(y, z, x)` component order; higher
/// degrees are projected out of `D^(1) ⊗ D^(ℓ−1)` with the real coupling
/// coefficients.
pub fn wigner_matrix_rot(l: usize, r: &Mat3) -> Vec<f64> {
    match l {
        0 => alloc::vec![1.0],
        1 => {
            const P: [usize; 3] = [1, 2, 0];
            let mut d = alloc::vec![0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    d[i * 3 + j] = r[P[i]][P[j]];
                }
            }
            d
        }
        _ => {
            let d1 = wigner_matrix_rot(1, r);
            let dp = wigner_matrix_rot(l - 1, r);
            let np = 2 * l - 1;
            let n = 2 * l + 1;
            let k = real_coupling(1, l - 1, l).expect("degree within cache");
            // K is indexed [(a·np + b)·n + m].
            // tmp[(a,b), m'] = Σ_{a',b'} D1[a,a'] Dp[b,b'] K[(a',b'), m']
            let mut half = alloc::vec![0.0; 3 * np * n];
            for a in 0..3 {
                for bp in 0..np {
                    for m in 0..n {
                        let mut acc = 0.0;
                        for ap in 0..3 {
                            acc += d1[a * 3 + ap] * k[(ap * np + bp) * n + m];
                        }
                        half[(a * np + bp) * n + m] = acc;
                    }
                }
            }
            let mut full = alloc::vec![0.0; 3 * np * n];
            for a in 0..3 {
                for b in 0..np {
                    for m in 0..n {
                        let mut acc = 0.0;
                        for bp in 0..np {
                            acc += dp[b * np + bp] * half[(a * np + bp) * n + m];
                        }
                        full[(a * np + b) * n + m] = acc;
                    }
                }
            }
            let mut d = alloc::vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for ab in 0..3 * np {
                        acc += k[ab * n + i] * full[ab * n + j];
                    }
                    d[i * n + j] = acc;
                }
            }
            d
        }
    }
}
