use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{self, Vec3};
use crate::synth::{FlightDataset, GroundTruthField, SynthError};

/// Default high-pass cutoff (Hz): diurnal-scale drift and slower.
pub const DEFAULT_CUTOFF: f64 = 1.0 / 3600.0;

/// What [`preprocess`] removed from each channel, per record.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub core: Vec<Vec3>,
    pub clean_trend: Vec<Vec3>,
    pub measured_trend: Vec<Vec3>,
}

impl Baseline {
    /// Adds the core field and the clean channel's trend back.
    pub fn restore_clean(&self, residual: &[Vec3]) -> Vec<Vec3> {
        restore(residual, &self.core, &self.clean_trend)
    }

    /// Adds the core field and the measured channel's trend back; the
    /// trend a denoiser output inherits at inference time.
    pub fn restore_measured(&self, residual: &[Vec3]) -> Vec<Vec3> {
        restore(residual, &self.core, &self.measured_trend)
    }
}

fn restore(residual: &[Vec3], core: &[Vec3], trend: &[Vec3]) -> Vec<Vec3> {
    residual
        .iter()
        .zip(core)
        .zip(trend)
        .map(|((r, c), t)| linalg::add(linalg::add(*r, *t), *c))
        .collect()
}

/// Zero-phase first-order low-pass: a forward then a backward pass of
/// the exactly discretized RC filter, each started in steady state so a
/// constant passes through unchanged.
pub fn zero_phase_lowpass(times: &[f64], x: &[Vec3], cutoff: f64) -> Vec<Vec3> {
    if x.is_empty() {
        return Vec::new();
    }
    let tau = 1.0 / (2.0 * PI * cutoff);
    let pass = |order: &mut dyn Iterator<Item = usize>, input: &[Vec3]| -> Vec<Vec3> {
        let mut out = alloc::vec![[0.0; 3]; input.len()];
        let mut prev: Option<(usize, Vec3)> = None;
        for i in order {
            let y = match prev {
                None => input[i],
                Some((j, yp)) => {
                    let a = libm::exp(-(times[i] - times[j]).abs() / tau);
                    core::array::from_fn(|k| a * yp[k] + (1.0 - a) * input[i][k])
                }
            };
            out[i] = y;
            prev = Some((i, y));
        }
        out
    };
    let fwd = pass(&mut (0..x.len()), x);
    pass(&mut (0..x.len()).rev(), &fwd)
}

/// Subtracts the core field at every pose from both channels, then removes
/// each channel's zero-phase low-pass trend below `cutoff` Hz.
pub fn preprocess(
    ds: &FlightDataset,
    core: &GroundTruthField,
    cutoff: f64,
) -> Result<(FlightDataset, Baseline), SynthError> {
    ds.validate()?;
    let core_field = ds
        .records
        .iter()
        .map(|r| core.core_field(r.position))
        .collect::<Result<Vec<_>, _>>()?;
    let times: Vec<f64> = ds.records.iter().map(|r| r.t).collect();
    let clean: Vec<Vec3> = ds
        .records
        .iter()
        .zip(&core_field)
        .map(|(r, c)| linalg::sub(r.clean, *c))
        .collect();
    let measured: Vec<Vec3> = ds
        .records
        .iter()
        .zip(&core_field)
        .map(|(r, c)| linalg::sub(r.measured, *c))
        .collect();
    let clean_trend = zero_phase_lowpass(&times, &clean, cutoff);
    let measured_trend = zero_phase_lowpass(&times, &measured, cutoff);
    let mut out = ds.clone();
    for (i, r) in out.records.iter_mut().enumerate() {
        r.clean = linalg::sub(clean[i], clean_trend[i]);
        r.measured = linalg::sub(measured[i], measured_trend[i]);
    }
    Ok((
        out,
        Baseline {
            core: core_field,
            clean_trend,
            measured_trend,
        },
    ))
}
