use alloc::vec::Vec;

use super::SynthError;
use crate::diff::{Dual, Real};
use crate::geom::solid_harmonics;
use crate::linalg::{self, Mat3, Vec3};

/// `μ₀/4π` in nT·m³/(A·m²).
pub const MU0_4PI_NT: f64 = 100.0;

/// Geomagnetic reference radius in metres.
pub const EARTH_RADIUS: f64 = 6_371_200.0;

/// No source may be evaluated closer than this (metres).
pub const EXCLUSION_RADIUS: f64 = 1.0;

/// Field band expected at survey altitudes (nT).
pub const FIELD_BAND: (f64, f64) = (20_000.0, 70_000.0);

/// Highest degree accepted from an external coefficient set.
pub const GAUSS_MAX_DEGREE: usize = 4;

/// Latitude and longitude (radians) of the survey site.
pub const SURVEY_SITE: (f64, f64) = (0.8, 0.2);

/// Field of a point dipole `m` (A·m²) at offset `r` (m), in nT.
pub fn dipole_field<S: Real>(moment: Vec3, r: [S; 3]) -> [S; 3] {
    let r2 = linalg::dot(r, r);
    let inv_r = S::one() / r2.sqrt();
    let inv_r3 = inv_r * inv_r * inv_r;
    let inv_r5 = inv_r3 / r2;
    let m = moment.map(S::cst);
    let mr = linalg::dot(m, r);
    core::array::from_fn(|k| {
        (r[k] * mr).scale(3.0 * MU0_4PI_NT) * inv_r5 - m[k].scale(MU0_4PI_NT) * inv_r3
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointDipole {
    pub position: Vec3,
    pub moment: Vec3,
}

/// Schmidt semi-normalized Gauss coefficients `(n, m, gₙᵐ, hₙᵐ)` in nT for an
/// internal potential field.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussCoefficients {
    radius: f64,
    terms: Vec<(usize, usize, f64, f64)>,
}

impl GaussCoefficients {
    pub fn new(radius: f64, terms: Vec<(usize, usize, f64, f64)>) -> Result<Self, SynthError> {
        if !(radius > 0.0) {
            return Err(SynthError::Domain("reference radius must be positive"));
        }
        for &(n, m, g, h) in &terms {
            if n == 0 || n > GAUSS_MAX_DEGREE || m > n {
                return Err(SynthError::Domain(
                    "Gauss coefficient degree/order out of range",
                ));
            }
            if !g.is_finite() || !h.is_finite() {
                return Err(SynthError::Domain("non-finite Gauss coefficient"));
            }
        }
        Ok(GaussCoefficients { radius, terms })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn terms(&self) -> &[(usize, usize, f64, f64)] {
        &self.terms
    }

    /// `V/a` at `u = x/a`, written through regular solid harmonics so the
    /// result is a Kelvin-transformed harmonic polynomial.
    fn potential<S: Real>(&self, u: [S; 3]) -> S {
        let r2 = linalg::dot(u, u);
        let r = r2.sqrt();
        let mut acc = S::zero();
        for n in 1..=GAUSS_MAX_DEGREE {
            let here: Vec<_> = self.terms.iter().filter(|t| t.0 == n).collect();
            if here.is_empty() {
                continue;
            }
            let solid = solid_harmonics(n, u);
            let k = libm::sqrt(4.0 * core::f64::consts::PI / (2 * n + 1) as f64);
            let mut poly = S::zero();
            for &&(_, m, g, h) in &here {
                poly = poly + solid[n + m].scale(k * g);
                if m > 0 {
                    poly = poly + solid[n - m].scale(k * h);
                }
            }
            let mut inv = S::one();
            for _ in 0..(2 * n + 1) {
                inv = inv / r;
            }
            acc = acc + poly * inv;
        }
        acc
    }

    /// `B = −∇V` at geocentric `x` (m), in nT.
    pub fn field<S: Real>(&self, x: [S; 3]) -> [S; 3] {
        let u: [Dual<S, 3>; 3] =
            core::array::from_fn(|k| Dual::seeded(x[k].scale(1.0 / self.radius), k));
        let v = self.potential(u);
        v.d.map(|d| -d)
    }
}

/// Core (main) field of the planet.
#[derive(Clone, Debug, PartialEq)]
pub enum CoreField {
    /// Geocentric dipole with moment in A·m².
    Dipole { moment: Vec3 },
    /// External spherical-harmonic coefficients.
    Gauss(GaussCoefficients),
}

impl CoreField {
    /// Dipole of `moment` A·m² tilted `tilt` radians from the south
    /// geographic axis toward longitude `azimuth`.
    pub fn tilted_dipole(moment: f64, tilt: f64, azimuth: f64) -> Self {
        let (s, c) = (libm::sin(tilt), libm::cos(tilt));
        CoreField::Dipole {
            moment: [
                moment * s * libm::cos(azimuth),
                moment * s * libm::sin(azimuth),
                -moment * c,
            ],
        }
    }

    pub fn earth_like() -> Self {
        CoreField::tilted_dipole(8.0e22, 0.17, 5.0)
    }

    pub fn field<S: Real>(&self, x: [S; 3]) -> [S; 3] {
        match self {
            CoreField::Dipole { moment } => dipole_field(*moment, x),
            CoreField::Gauss(g) => g.field(x),
        }
    }
}

/// Ground truth for a survey: a core field plus crustal point-dipole
/// anomalies, evaluated in a local east-north-up frame anchored at a site
/// on the reference sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthField {
    core: CoreField,
    site: Vec3,
    frame: Mat3,
    anomalies: Vec<PointDipole>,
}

impl GroundTruthField {
    /// `latitude`/`longitude` in radians; `anomalies` in local coordinates.
    pub fn new(
        core: CoreField,
        latitude: f64,
        longitude: f64,
        anomalies: Vec<PointDipole>,
    ) -> Self {
        let (sl, cl) = (libm::sin(latitude), libm::cos(latitude));
        let (so, co) = (libm::sin(longitude), libm::cos(longitude));
        let up = [cl * co, cl * so, sl];
        let east = [-so, co, 0.0];
        let north = [-sl * co, -sl * so, cl];
        // columns are the local axes in geocentric coordinates
        let frame = [
            [east[0], north[0], up[0]],
            [east[1], north[1], up[1]],
            [east[2], north[2], up[2]],
        ];
        GroundTruthField {
            core,
            site: up.map(|v| v * EARTH_RADIUS),
            frame,
            anomalies,
        }
    }

    /// Mid-latitude survey with `n` random buried dipoles within
    /// `half_width` metres of the origin.
    pub fn survey<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, half_width: f64) -> Self {
        let anomalies = (0..n)
            .map(|_| {
                let position = [
                    rng.random_range(-half_width..half_width),
                    rng.random_range(-half_width..half_width),
                    -rng.random_range(200.0..1500.0),
                ];
                let strength = rng.random_range(2.0e8..2.0e9);
                let dir = linalg::random_unit(rng);
                PointDipole {
                    position,
                    moment: dir.map(|d| d * strength),
                }
            })
            .collect();
        GroundTruthField::new(
            CoreField::earth_like(),
            SURVEY_SITE.0,
            SURVEY_SITE.1,
            anomalies,
        )
    }

    pub fn core(&self) -> &CoreField {
        &self.core
    }

    /// Same site and anomalies over a different core model.
    pub fn with_core(self, core: CoreField) -> Self {
        GroundTruthField { core, ..self }
    }

    pub fn anomalies(&self) -> &[PointDipole] {
        &self.anomalies
    }

    /// Same site and core with no anomalies.
    pub fn core_only(&self) -> GroundTruthField {
        GroundTruthField {
            anomalies: Vec::new(),
            ..self.clone()
        }
    }

    fn geocentric<S: Real>(&self, x: [S; 3]) -> [S; 3] {
        let rotated = linalg::mat_vec(&self.frame, x);
        core::array::from_fn(|k| rotated[k] + S::cst(self.site[k]))
    }

    fn to_local<S: Real>(&self, b: [S; 3]) -> [S; 3] {
        linalg::mat_vec(&linalg::transpose(&self.frame), b)
    }

    /// Core field alone at local position `x`.
    pub fn core_field<S: Real>(&self, x: [S; 3]) -> Result<[S; 3], SynthError> {
        let g = self.geocentric(x);
        let d = linalg::norm(crate::diff::values3(&g));
        if d < EXCLUSION_RADIUS {
            return Err(SynthError::Singular { distance: d });
        }
        Ok(self.to_local(self.core.field(g)))
    }

    /// Total field at local position `x` (m), in nT.
    pub fn field_at<S: Real>(&self, x: [S; 3]) -> Result<[S; 3], SynthError> {
        let mut b = self.core_field(x)?;
        for a in &self.anomalies {
            let r: [S; 3] = core::array::from_fn(|k| x[k] - S::cst(a.position[k]));
            let d = linalg::norm(crate::diff::values3(&r));
            if d < EXCLUSION_RADIUS {
                return Err(SynthError::Singular { distance: d });
            }
            let f = dipole_field(a.moment, r);
            b = linalg::add(b, f);
        }
        Ok(b)
    }
}

/// Free-function form of [`GroundTruthField::field_at`].
pub fn eval_field(gt: &GroundTruthField, x: Vec3) -> Result<Vec3, SynthError> {
    gt.field_at(x)
}
