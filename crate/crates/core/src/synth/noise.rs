use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::SynthError;
use crate::linalg::{self, Vec3};

/// Sensor noise, per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    /// Eddy-current decay rate λ in 1/s.
    pub eddy_rate: f64,
    /// Stationary standard deviation of the eddy component in nT.
    pub eddy_amplitude: f64,
    /// Drift slope scale in nT/hour.
    pub drift_rate: f64,
    /// Thermal bias amplitude in nT.
    pub thermal_amplitude: f64,
    /// Thermal period in hours.
    pub thermal_period: f64,
    /// White-noise standard deviation in nT.
    pub white: f64,
}

impl NoiseConfig {
    pub const ZERO: NoiseConfig = NoiseConfig {
        eddy_rate: 1.0,
        eddy_amplitude: 0.0,
        drift_rate: 0.0,
        thermal_amplitude: 0.0,
        thermal_period: 1.0,
        white: 0.0,
    };

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.eddy_rate > 0.0) || !(self.thermal_period > 0.0) {
            return Err(SynthError::Domain(
                "eddy rate and thermal period must be positive",
            ));
        }
        let amps = [
            self.eddy_amplitude,
            self.drift_rate,
            self.thermal_amplitude,
            self.white,
        ];
        if amps.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(SynthError::Domain(
                "noise amplitudes must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseRegime {
    Calm,
    Moderate,
    Severe,
}

impl NoiseRegime {
    pub const ALL: [NoiseRegime; 3] = [
        NoiseRegime::Calm,
        NoiseRegime::Moderate,
        NoiseRegime::Severe,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseRegime::Calm => "calm",
            NoiseRegime::Moderate => "moderate",
            NoiseRegime::Severe => "severe",
        }
    }

    pub fn config(self) -> NoiseConfig {
        match self {
            NoiseRegime::Calm => NoiseConfig {
                eddy_rate: 0.2,
                eddy_amplitude: 3.0,
                drift_rate: 10.0,
                thermal_amplitude: 2.0,
                thermal_period: 1.0,
                white: 1.0,
            },
            NoiseRegime::Moderate => NoiseConfig {
                eddy_rate: 0.1,
                eddy_amplitude: 8.0,
                drift_rate: 30.0,
                thermal_amplitude: 5.0,
                thermal_period: 0.75,
                white: 3.0,
            },
            NoiseRegime::Severe => NoiseConfig {
                eddy_rate: 0.05,
                eddy_amplitude: 20.0,
                drift_rate: 80.0,
                thermal_amplitude: 10.0,
                thermal_period: 0.5,
                white: 6.0,
            },
        }
    }
}

impl core::str::FromStr for NoiseRegime {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NoiseRegime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or(SynthError::Domain("unknown noise regime"))
    }
}

/// The four noise components, kept apart for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseComponents {
    pub eddy: Vec<Vec3>,
    pub drift: Vec<Vec3>,
    pub thermal: Vec<Vec3>,
    pub white: Vec<Vec3>,
}

impl NoiseComponents {
    pub fn total(&self) -> Vec<Vec3> {
        (0..self.eddy.len())
            .map(|i| {
                let s = linalg::add(linalg::add(self.eddy[i], self.drift[i]), self.thermal[i]);
                linalg::add(s, self.white[i])
            })
            .collect()
    }
}

/// Ornstein-Uhlenbeck samples with stationary deviation `sigma` at the
/// given times, using the exact transition `e^{−λΔt}`.
pub fn ornstein_uhlenbeck<R: Rng + ?Sized>(
    rate: f64,
    sigma: f64,
    times: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut x = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let xi: f64 = rng.sample(StandardNormal);
        x = if i == 0 {
            sigma * xi
        } else {
            let a = libm::exp(-rate * (t - times[i - 1]));
            a * x + sigma * libm::sqrt(1.0 - a * a) * xi
        };
        out.push(x);
    }
    out
}

pub fn sample_noise<R: Rng + ?Sized>(
    cfg: &NoiseConfig,
    timestamps: &[f64],
    rng: &mut R,
) -> Result<NoiseComponents, SynthError> {
    cfg.validate()?;
    if timestamps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SynthError::Domain("timestamps must increase"));
    }
    let axes: [Vec<f64>; 3] = core::array::from_fn(|_| {
        ornstein_uhlenbeck(cfg.eddy_rate, cfg.eddy_amplitude, timestamps, rng)
    });
    let eddy = (0..timestamps.len())
        .map(|i| [axes[0][i], axes[1][i], axes[2][i]])
        .collect();

    let t0 = timestamps.first().copied().unwrap_or(0.0);
    let slope: Vec3 =
        core::array::from_fn(|_| cfg.drift_rate / 3600.0 * rng.random_range(-1.0..=1.0));
    let drift = timestamps
        .iter()
        .map(|&t| slope.map(|s| s * (t - t0)))
        .collect();

    let phase: Vec3 = core::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
    let omega = 2.0 * PI / (cfg.thermal_period * 3600.0);
    let thermal = timestamps
        .iter()
        .map(|&t| phase.map(|p| cfg.thermal_amplitude * libm::sin(omega * t + p)))
        .collect();

    let white = timestamps
        .iter()
        .map(|_| core::array::from_fn(|_| cfg.white * rng.sample::<f64, _>(StandardNormal)))
        .collect();
    Ok(NoiseComponents {
        eddy,
        drift,
        thermal,
        white,
    })
}

/// Sample autocorrelation `ρ(k)` for lags `0..=max_lag` of a uniformly
/// sampled series.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            let c: f64 = (0..n - k).map(|i| (x[i] - mean) * (x[i + k] - mean)).sum();
            c / (n as f64 * var)
        })
        .collect()
}
