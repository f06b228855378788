use gfk_core::geom::*;
use gfk_core::linalg::{self, Mat3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Exact rational CG² with sign, from the Racah sum. Independent of the
// library's table construction.
fn fact(n: i64) -> i128 {
    (1..=n as i128).product()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn racah_oracle(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m != m1 + m2 || j < (j1 - j2).abs() || j > j1 + j2 {
        return 0.0;
    }
    let pre_num = (2 * j + 1) as i128
        * fact(j + j1 - j2)
        * fact(j - j1 + j2)
        * fact(j1 + j2 - j)
        * fact(j + m)
        * fact(j - m)
        * fact(j1 - m1)
        * fact(j1 + m1)
        * fact(j2 - m2)
        * fact(j2 + m2);
    let pre_den = fact(j1 + j2 + j + 1);
    // S = Σ_k (-1)^k / (k! (j1+j2-j-k)! (j1-m1-k)! (j2+m2-k)! (j-j2+m1+k)! (j-j1-m2+k)!)
    let (mut sn, mut sd) = (0i128, 1i128);
    for k in 0..=(j1 + j2 + j) {
        let args = [
            k,
            j1 + j2 - j - k,
            j1 - m1 - k,
            j2 + m2 - k,
            j - j2 + m1 + k,
            j - j1 - m2 + k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let d: i128 = args.iter().map(|&a| fact(a)).product();
        let sign = if k % 2 == 0 { 1 } else { -1 };
        sn = sn * d + sign * sd;
        sd *= d;
        let g = gcd(sn, sd);
        if g > 1 {
            sn /= g;
            sd /= g;
        }
    }
    if sn == 0 {
        return 0.0;
    }
    // CG² = pre_num·sn² / (pre_den·sd²), reduced before conversion.
    let (mut p, mut q) = (pre_num, pre_den);
    let g = gcd(p, q);
    p /= g;
    q /= g;
    let (mut p2, mut q2) = (sn * sn, sd * sd);
    let g = gcd(p2, q);
    p2 /= g;
    q /= g;
    let g = gcd(p, q2);
    p /= g;
    q2 /= g;
    let value = ((p * p2) as f64 / (q * q2) as f64).sqrt();
    if sn < 0 {
        -value
    } else {
        value
    }
}

fn ulp_close(a: f64, b: f64, ulps: f64) -> bool {
    (a - b).abs() <= ulps * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    c
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

#[test]
fn clebsch_gordan_matches_exact_racah_for_l_up_to_2() {
    let mut checked = 0;
    for l1 in 0..=2i64 {
        for l2 in 0..=2i64 {
            for l in 0..=4i64 {
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        for m in -l..=l {
                            let got =
                                clebsch_gordan(l1 as usize, m1, l2 as usize, m2, l as usize, m)
                                    .unwrap();
                            let want = racah_oracle(l1, m1, l2, m2, l, m);
                            assert!(
                                ulp_close(got, want, 4.0),
                                "{l1} {m1} {l2} {m2} | {l} {m}: {got} vs {want}"
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn clebsch_gordan_spot_values() {
    assert!((clebsch_gordan(1, 0, 1, 0, 2, 0).unwrap() - 0.816_496_580_9).abs() < 1e-10);
    assert_eq!(clebsch_gordan(1, 1, 1, 1, 1, 2).unwrap(), 0.0);
    assert!(matches!(
        clebsch_gordan(1, 2, 1, 0, 2, 2),
        Err(GeomError::Domain(_))
    ));
    for l1 in 0..=2 {
        for m1 in -(l1 as i64)..=l1 as i64 {
            assert_eq!(clebsch_gordan(l1, m1, 0, 0, l1, m1).unwrap(), 1.0);
        }
    }
}

#[test]
fn selection_rules_give_exact_zero() {
    for l1 in 0..=2usize {
        for l2 in 0..=2usize {
            for l in 0..=4usize {
                let tri = l >= l1.abs_diff(l2) && l <= l1 + l2;
                for m1 in -(l1 as i64)..=l1 as i64 {
                    for m2 in -(l2 as i64)..=l2 as i64 {
                        for m in -(l as i64)..=l as i64 {
                            let c = clebsch_gordan(l1, m1, l2, m2, l, m).unwrap();
                            if !tri || m != m1 + m2 {
                                assert_eq!(c, 0.0);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn orthogonality(cg: impl Fn(usize, i64, usize, i64, usize, i64) -> f64) {
    for l1 in 0..=2usize {
        for l2 in 0..=2usize {
            let ls: Vec<usize> = (l1.abs_diff(l2)..=l1 + l2).collect();
            for &l in &ls {
                for &lp in &ls {
                    for m in -(l as i64)..=l as i64 {
                        for mp in -(lp as i64)..=lp as i64 {
                            let mut s = 0.0;
                            for m1 in -(l1 as i64)..=l1 as i64 {
                                for m2 in -(l2 as i64)..=l2 as i64 {
                                    s += cg(l1, m1, l2, m2, l, m) * cg(l1, m1, l2, m2, lp, mp);
                                }
                            }
                            let want = if l == lp && m == mp { 1.0 } else { 0.0 };
                            assert!((s - want).abs() < 1e-13, "({l1},{l2}) {l}{m} {lp}{mp}: {s}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn complex_basis_orthogonality() {
    orthogonality(|a, b, c, d, e, f| clebsch_gordan(a, b, c, d, e, f).unwrap());
}

#[test]
fn real_basis_orthogonality() {
    orthogonality(|a, b, c, d, e, f| real_clebsch_gordan(a, b, c, d, e, f).unwrap());
}

// Cartesian table of the real harmonics up to ℓ = 2.
fn table_harmonics(l: usize, u: [f64; 3]) -> Vec<f64> {
    use std::f64::consts::PI;
    let [x, y, z] = u;
    match l {
        0 => vec![0.5 / PI.sqrt()],
        1 => {
            let c = (3.0 / (4.0 * PI)).sqrt();
            vec![c * y, c * z, c * x]
        }
        2 => {
            let c = 0.5 * (15.0 / PI).sqrt();
            vec![
                c * x * y,
                c * y * z,
                0.25 * (5.0 / PI).sqrt() * (3.0 * z * z - 1.0),
                c * x * z,
                0.5 * c * (x * x - y * y),
            ]
        }
        _ => unreachable!(),
    }
}

#[test]
fn harmonics_match_cartesian_table() {
    let mut r = rng(3);
    for _ in 0..500 {
        let u = linalg::random_unit(&mut r);
        for l in 0..=2 {
            let got = eval_spherical_harmonics(l, u).unwrap();
            let want = table_harmonics(l, u);
            for (a, b) in got.iter().zip(&want) {
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1e-3),
                    "l={l}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn harmonics_are_orthonormal_on_the_sphere() {
    // Lebedev-free check: Monte Carlo is too noisy, so integrate on a
    // product Gauss grid in (cos θ, φ).
    let n = 24;
    let (nodes, weights) = gauss_legendre(n);
    let mut gram = vec![0.0; 16 * 16];
    let idx = |l: usize, m: usize| l * l + m;
    for (ci, &ct) in nodes.iter().enumerate() {
        let st = (1.0 - ct * ct).sqrt();
        for k in 0..2 * n {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / (2 * n) as f64;
            let u = [st * phi.cos(), st * phi.sin(), ct];
            let w = weights[ci] * 2.0 * std::f64::consts::PI / (2 * n) as f64;
            let all: Vec<f64> = (0..=3).flat_map(|l| solid_harmonics(l, u)).collect();
            for a in 0..16 {
                for b in 0..16 {
                    gram[a * 16 + b] += w * all[a] * all[b];
                }
            }
        }
    }
    for l in 0..=3 {
        for m in 0..2 * l + 1 {
            let i = idx(l, m);
            for j in 0..16 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * 16 + j] - want).abs() < 1e-12);
            }
        }
    }
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let dp = {
                    let (mut p0, mut p1) = (1.0, z);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    n as f64 * (z * p1 - p0) / (z * z - 1.0)
                };
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

#[test]
fn wigner_covariance_1000_pairs() {
    let mut r = rng(11);
    let alg = Algebra::new(4).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let g = RigidTransform::random(&mut r, 100.0);
        let u = linalg::random_unit(&mut r);
        let ru = g.apply_vector(u);
        for l in 0..=4 {
            let d = alg.wigner_matrix(l, &g).unwrap();
            let lhs = alg.spherical_harmonics(l, ru).unwrap();
            let rhs = apply_matrix(&d, &alg.spherical_harmonics(l, u).unwrap());
            worst = worst.max(max_diff(&lhs, &rhs));
        }
    }
    assert!(worst <= 1e-10, "worst {worst:e}");
}

#[test]
fn wigner_matrices_are_orthogonal_and_homomorphic() {
    let mut r = rng(12);
    for _ in 0..200 {
        let a = RigidTransform::random(&mut r, 1.0);
        let b = RigidTransform::random(&mut r, 1.0);
        let ab = a.compose(&b);
        for l in 0..=2 {
            let n = 2 * l + 1;
            let da = wigner_matrix(l, &a).unwrap();
            let db = wigner_matrix(l, &b).unwrap();
            let dab = wigner_matrix(l, &ab).unwrap();
            assert!(max_diff(&dab, &mat_mul(&da, &db, n)) <= 1e-10);
            let mut dt = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    dt[i * n + j] = da[j * n + i];
                }
            }
            let eye: Vec<f64> = (0..n * n)
                .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
                .collect();
            assert!(max_diff(&mat_mul(&dt, &da, n), &eye) <= 1e-12);
        }
    }
}

#[test]
fn wigner_ignores_translation() {
    let mut r = rng(13);
    let g = RigidTransform::random(&mut r, 0.0);
    let shifted = RigidTransform::new(*g.rotation(), [5.0, -3.0, 2.0]).unwrap();
    assert_eq!(
        wigner_matrix(2, &g).unwrap(),
        wigner_matrix(2, &shifted).unwrap()
    );
}

// Brute-force double sum with per-coefficient lookups.
fn brute_force_product(l1: usize, t: &[f64], l2: usize, y: &[f64], l: usize) -> Vec<f64> {
    let mut out = vec![0.0; 2 * l + 1];
    for (mi, o) in out.iter_mut().enumerate() {
        let m = mi as i64 - l as i64;
        for (i1, tv) in t.iter().enumerate() {
            for (i2, yv) in y.iter().enumerate() {
                let m1 = i1 as i64 - l1 as i64;
                let m2 = i2 as i64 - l2 as i64;
                *o += real_clebsch_gordan(l1, m1, l2, m2, l, m).unwrap() * tv * yv;
            }
        }
    }
    out
}

fn admissible_triples() -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for l1 in 0..=2usize {
        for l2 in 0..=2usize {
            for l in l1.abs_diff(l2)..=(l1 + l2).min(2) {
                v.push((l1, l2, l));
            }
        }
    }
    v
}

#[test]
fn tensor_product_matches_brute_force_sum() {
    let mut r = rng(21);
    for (l1, l2, l) in admissible_triples() {
        for _ in 0..20 {
            let t = random_vec(&mut r, 3 * (2 * l1 + 1));
            let y = random_vec(&mut r, 2 * l2 + 1);
            let block =
                Block::new(IrrepSpec::new(l1, Parity::Even).unwrap(), 3, t.clone()).unwrap();
            let out = tensor_product(&block, &y, l).unwrap();
            for c in 0..3 {
                let want = brute_force_product(
                    l1,
                    &t[c * (2 * l1 + 1)..(c + 1) * (2 * l1 + 1)],
                    l2,
                    &y,
                    l,
                );
                let got = out.channel(c);
                let scale = max_abs(&want).max(1e-300);
                assert!(max_diff(got, &want) <= 1e-12 * scale, "{l1}x{l2}->{l}");
            }
        }
    }
}

#[test]
fn tensor_product_is_equivariant_for_every_triple() {
    let mut r = rng(22);
    for (l1, l2, l) in admissible_triples() {
        for _ in 0..50 {
            let g = RigidTransform::random(&mut r, 1.0);
            let t = random_vec(&mut r, 2 * l1 + 1);
            let u = linalg::random_unit(&mut r);
            let y = eval_spherical_harmonics(l2, u).unwrap();
            let block = Block::new(IrrepSpec::new(l1, Parity::Odd).unwrap(), 1, t.clone()).unwrap();
            let base = tensor_product(&block, &y, l).unwrap();
            let rt = apply_matrix(&wigner_matrix(l1, &g).unwrap(), &t);
            let ry = eval_spherical_harmonics(l2, g.apply_vector(u)).unwrap();
            let rblock = Block::new(block.irrep, 1, rt).unwrap();
            let rotated = tensor_product(&rblock, &ry, l).unwrap();
            let want = apply_matrix(&wigner_matrix(l, &g).unwrap(), &base.coeffs);
            let scale = max_abs(&want).max(1e-12);
            assert!(
                max_diff(&rotated.coeffs, &want) <= 1e-9 * scale,
                "{l1}x{l2}->{l}"
            );
            assert_eq!(
                rotated.irrep.parity(),
                Parity::Odd.times(Parity::of_harmonic(l2))
            );
        }
    }
}

#[test]
fn vector_times_vector_to_vector_is_a_cross_product() {
    let mut r = rng(23);
    let a: [f64; 3] = [0.3, -1.1, 0.7];
    let b: [f64; 3] = [1.5, 0.2, -0.4];
    // harmonic ordering (y, z, x)
    let perm = |v: [f64; 3]| vec![v[1], v[2], v[0]];
    let out = couple(1, &perm(a), &perm(b), 1).unwrap();
    let cross = perm(linalg::cross(a, b));
    let k = out[0] / cross[0];
    for (o, c) in out.iter().zip(&cross) {
        assert!((o - k * c).abs() < 1e-14);
    }
    assert!((k.abs() - 1.0 / 2f64.sqrt()).abs() < 1e-14);
    let _ = r.random::<f64>();
}

#[test]
fn rotated_tensor_uses_block_wigner_matrices() {
    let mut r = rng(24);
    let sig: Signature = "2x0e+1x1o+1x2e".parse().unwrap();
    let flat = random_vec(&mut r, sig.dim());
    let t = GeometricTensor::from_flat(&sig, &flat).unwrap();
    let g = RigidTransform::random(&mut r, 1.0);
    let rt = t.rotated(g.rotation());
    let v = t.block(IrrepSpec::VECTOR).unwrap().channel(0).to_vec();
    let rv = rt.block(IrrepSpec::VECTOR).unwrap().channel(0).to_vec();
    assert!(max_diff(&rv, &apply_matrix(&wigner_matrix(1, &g).unwrap(), &v)) < 1e-14);
    assert_eq!(
        rt.block(IrrepSpec::SCALAR).unwrap().coeffs,
        t.block(IrrepSpec::SCALAR).unwrap().coeffs
    );
}

fn rotation_strategy() -> impl Strategy<Value = Mat3> {
    (prop::array::uniform3(-1.0f64..1.0), -3.2f64..3.2).prop_filter_map("axis", |(a, th)| {
        let n = linalg::norm(a);
        (n > 1e-3).then(|| linalg::axis_angle(linalg::normalize(a), th))
    })
}

proptest! {
    #[test]
    fn harmonics_rotate_by_wigner(rot in rotation_strategy(), u in prop::array::uniform3(-1.0f64..1.0)) {
        prop_assume!(linalg::norm(u) > 1e-3);
        let u = linalg::normalize(u);
        let g = RigidTransform::new(rot, [0.0; 3]).unwrap();
        for l in 0..=2 {
            let lhs = eval_spherical_harmonics(l, g.apply_vector(u)).unwrap();
            let rhs = apply_matrix(&wigner_matrix(l, &g).unwrap(), &eval_spherical_harmonics(l, u).unwrap());
            prop_assert!(max_diff(&lhs, &rhs) < 1e-10);
        }
    }

    #[test]
    fn signature_display_roundtrips(mults in prop::collection::vec(1usize..5, 3)) {
        let sig = Signature::new([
            (IrrepSpec::SCALAR, mults[0]),
            (IrrepSpec::VECTOR, mults[1]),
            (IrrepSpec::TENSOR2, mults[2]),
        ]);
        let again: Signature = sig.to_string().parse().unwrap();
        prop_assert_eq!(again, sig);
    }
}
