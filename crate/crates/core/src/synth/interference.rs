use alloc::vec::Vec;

use super::{Pose, SynthError};
use crate::linalg::{self, Mat3, Vec3};

/// Three-term platform interference in the body frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferenceCoefficients {
    /// Permanent magnetization (nT).
    pub permanent: Vec3,
    /// Induced susceptibility acting on the body-frame ambient field.
    pub induced: Mat3,
    /// Eddy response to the body-frame field rate (s).
    pub eddy: Mat3,
}

impl InterferenceCoefficients {
    pub const ZERO: InterferenceCoefficients = InterferenceCoefficients {
        permanent: [0.0; 3],
        induced: [[0.0; 3]; 3],
        eddy: [[0.0; 3]; 3],
    };

    /// Small random airframe: tens of nT permanent, ~1e-3 susceptibility.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        InterferenceCoefficients {
            permanent: core::array::from_fn(|_| rng.random_range(-40.0..40.0)),
            induced: core::array::from_fn(|_| {
                core::array::from_fn(|_| rng.random_range(-1e-3..1e-3))
            }),
            eddy: core::array::from_fn(|_| core::array::from_fn(|_| rng.random_range(-0.05..0.05))),
        }
    }
}

/// Interference in the local frame for each pose, given the ambient field
/// at each pose (local frame).
pub fn platform_interference(
    poses: &[Pose],
    ambient: &[Vec3],
    coeffs: &InterferenceCoefficients,
) -> Result<Vec<Vec3>, SynthError> {
    if poses.len() < 2 {
        return Err(SynthError::Domain(
            "need at least two samples to differentiate",
        ));
    }
    if ambient.len() != poses.len() {
        return Err(SynthError::Contract("one ambient field per pose"));
    }
    for p in poses {
        if linalg::orthonormality_defect(&p.orientation) > 1e-9 || linalg::det(&p.orientation) < 0.0
        {
            return Err(SynthError::Domain("orientation is not a rotation"));
        }
    }
    let body: Vec<Vec3> = poses
        .iter()
        .zip(ambient)
        .map(|(p, b)| linalg::mat_vec(&linalg::transpose(&p.orientation), *b))
        .collect();
    let n = poses.len();
    let rate = |i: usize| -> Vec3 {
        let (a, b) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        let dt = poses[b].t - poses[a].t;
        core::array::from_fn(|k| (body[b][k] - body[a][k]) / dt)
    };
    Ok((0..n)
        .map(|i| {
            let induced = linalg::mat_vec(&coeffs.induced, body[i]);
            let eddy = linalg::mat_vec(&coeffs.eddy, rate(i));
            let total = linalg::add(linalg::add(coeffs.permanent, induced), eddy);
            linalg::mat_vec(&poses[i].orientation, total)
        })
        .collect())
}
