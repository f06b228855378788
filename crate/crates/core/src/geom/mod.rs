//! Irreducible-representation algebra of the rotation group: real
//! spherical harmonics, Clebsch-Gordan coupling, Wigner matrices and the
//! equivariant tensor product.
//!
//! All tables are built once on first use and shared read-only.

mod clebsch;
mod harmonics;
mod irreps;
mod product;
mod wigner;

use alloc::string::String;
use alloc::vec::Vec;

pub use clebsch::{clebsch_gordan, real_clebsch_gordan, real_coupling};
pub use harmonics::{direction_harmonics, solid_harmonics};
pub use irreps::{Block, GeometricTensor, IrrepSpec, Parity, Signature};
pub use product::{couple, coupling_matrix, tensor_product};
pub use wigner::wigner_matrix_rot;

use crate::linalg::{self, Mat3, Vec3};

/// Highest degree any table in this module is built for.
pub const L_SUPPORTED: usize = 4;
/// Default cap on feature and filter degrees.
pub const L_MAX: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("degree {degree} exceeds the supported maximum {max}")]
    UnsupportedDegree { degree: usize, max: usize },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("selection rule violated: {l} is not in [|{l1}-{l2}|, {l1}+{l2}]")]
    SelectionRule { l1: usize, l2: usize, l: usize },
    #[error("expected {expected} coefficients, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("geometric tensor signatures differ")]
    SignatureMismatch,
    #[error("cannot parse irreps from `{0}`")]
    Parse(String),
    #[error("not a proper rotation (orthonormality defect {defect:.3e}, det {det})")]
    NotARotation { defect: f64, det: f64 },
}

/// Element `(R, t)` of the proper Euclidean group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeomError> {
        let defect = linalg::orthonormality_defect(&rotation);
        let det = linalg::det(&rotation);
        if defect > 1e-12 || (det - 1.0).abs() > 1e-12 {
            return Err(GeomError::NotARotation { defect, det });
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        RigidTransform {
            rotation: linalg::IDENTITY3,
            translation: [0.0; 3],
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, max_shift: f64) -> Self {
        let rotation = linalg::random_rotation(rng);
        let translation = core::array::from_fn(|_| rng.random_range(-max_shift..=max_shift));
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn apply_point(&self, x: Vec3) -> Vec3 {
        linalg::add(linalg::mat_vec(&self.rotation, x), self.translation)
    }

    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        linalg::mat_vec(&self.rotation, v)
    }

    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: linalg::mat_mul(&self.rotation, &other.rotation),
            translation: self.apply_point(other.translation),
        }
    }
}

/// Degree-capped entry points. [`Algebra::default`] caps at [`L_MAX`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Algebra {
    l_max: usize,
}

impl Default for Algebra {
    fn default() -> Self {
        Algebra { l_max: L_MAX }
    }
}

impl Algebra {
    pub fn new(l_max: usize) -> Result<Self, GeomError> {
        if l_max > L_SUPPORTED {
            return Err(GeomError::UnsupportedDegree {
                degree: l_max,
                max: L_SUPPORTED,
            });
        }
        Ok(Algebra { l_max })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    fn check(&self, l: usize) -> Result<(), GeomError> {
        if l > self.l_max {
            Err(GeomError::UnsupportedDegree {
                degree: l,
                max: self.l_max,
            })
        } else {
            Ok(())
        }
    }

    /// `(Y_ℓ^{−ℓ}(u), …, Y_ℓ^{ℓ}(u))` for a unit vector `u`.
    pub fn spherical_harmonics(&self, l: usize, u: Vec3) -> Result<Vec<f64>, GeomError> {
        self.check(l)?;
        let n = linalg::norm(u);
        if !(1.0 - 1e-9..=1.0 + 1e-9).contains(&n) {
            return Err(GeomError::Domain("direction must be a unit vector"));
        }
        Ok(solid_harmonics(l, u))
    }

    pub fn wigner_matrix(&self, l: usize, g: &RigidTransform) -> Result<Vec<f64>, GeomError> {
        self.check(l)?;
        Ok(wigner_matrix_rot(l, g.rotation()))
    }

    pub fn clebsch_gordan(
        &self,
        l1: usize,
        m1: i64,
        l2: usize,
        m2: i64,
        l: usize,
        m: i64,
    ) -> Result<f64, GeomError> {
        for deg in [l1, l2] {
            self.check(deg)?;
        }
        if l > 2 * self.l_max {
            return Err(GeomError::UnsupportedDegree {
                degree: l,
                max: 2 * self.l_max,
            });
        }
        clebsch_gordan(l1, m1, l2, m2, l, m)
    }

    pub fn tensor_product<S: crate::diff::Real>(
        &self,
        t: &Block<S>,
        y: &[S],
        l_out: usize,
    ) -> Result<Block<S>, GeomError> {
        self.check(t.irrep.degree())?;
        self.check((y.len().max(1) - 1) / 2)?;
        self.check(l_out)?;
        tensor_product(t, y, l_out)
    }
}

/// [`Algebra::spherical_harmonics`] at the default degree cap.
pub fn eval_spherical_harmonics(l: usize, u: Vec3) -> Result<Vec<f64>, GeomError> {
    Algebra::default().spherical_harmonics(l, u)
}

/// [`Algebra::wigner_matrix`] at the default degree cap.
pub fn wigner_matrix(l: usize, g: &RigidTransform) -> Result<Vec<f64>, GeomError> {
    Algebra::default().wigner_matrix(l, g)
}

/// Applies a row-major square matrix to a vector.
pub fn apply_matrix(d: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| d[i * n + j] * v[j]).sum())
        .collect()
}
