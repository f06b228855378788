//! Discrete Helmholtz split of a vector field on a periodic cubic grid.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use gfk_core::synth::{sample_noise, NoiseConfig};
use rand::SeedableRng;

use crate::error::{Error, Result};

/// Energies `Σ|F|²` over the grid of each part of the split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelmholtzEnergy {
    pub total: f64,
    /// Curl-free part, `k (k·F̂)/|k|²`.
    pub gradient: f64,
    /// Divergence-free part.
    pub solenoidal: f64,
    /// Zero-wavenumber part.
    pub mean: f64,
}

impl HelmholtzEnergy {
    pub fn gradient_fraction(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.gradient / self.total
        }
    }
}

fn fft3(data: &mut [Complex64], n: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(n);
    let mut buf = vec![Complex64::default(); n];
    for stride in [1, n, n * n] {
        // each line along this axis starts where its coordinate is 0
        for start in (0..n * n * n).filter(|s| (s / stride) % n == 0) {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = data[start + t * stride];
            }
            fft.process(&mut buf);
            for (t, b) in buf.iter().enumerate() {
                data[start + t * stride] = *b;
            }
        }
    }
}

fn wavenumber(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Splits `field`, sampled at `(i, j, k)` ↦ index `(i·n + j)·n + k`, into
/// gradient, solenoidal and mean parts with spectral projection.
pub fn helmholtz_split(field: &[[f64; 3]], n: usize) -> Result<HelmholtzEnergy> {
    if n < 2 || field.len() != n * n * n {
        return Err(Error::Config(format!(
            "field must hold n³ samples with n ≥ 2, got {} for n = {n}",
            field.len()
        )));
    }
    let mut planner = FftPlanner::new();
    let mut comps: Vec<Vec<Complex64>> = (0..3)
        .map(|c| field.iter().map(|v| Complex64::new(v[c], 0.0)).collect())
        .collect();
    for c in comps.iter_mut() {
        fft3(c, n, &mut planner);
    }
    let total: f64 = field
        .iter()
        .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        .sum();
    let volume = (n * n * n) as f64;
    let (mut gradient, mut mean) = (0.0, 0.0);
    for idx in 0..n * n * n {
        let (i, rem) = (idx / (n * n), idx % (n * n));
        let k = [
            wavenumber(i, n),
            wavenumber(rem / n, n),
            wavenumber(rem % n, n),
        ];
        let f = [comps[0][idx], comps[1][idx], comps[2][idx]];
        let e: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            mean += e;
            continue;
        }
        let kf = f[0] * k[0] + f[1] * k[1] + f[2] * k[2];
        gradient += kf.norm_sqr() / k2;
    }
    // Parseval: Σ|F̂|² = N Σ|F|²
    let (gradient, mean) = (gradient / volume, mean / volume);
    Ok(HelmholtzEnergy {
        total,
        gradient,
        solenoidal: (total - gradient - mean).max(0.0),
        mean,
    })
}

/// Sensor noise of `cfg`, sampled at `rate` Hz along serpentine survey
/// lines filling an `n³` grid, then split.
pub fn noise_split(cfg: &NoiseConfig, n: usize, rate: f64, seed: u64) -> Result<HelmholtzEnergy> {
    let count = n * n * n;
    let times: Vec<f64> = (0..count).map(|i| i as f64 / rate).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let noise = sample_noise(cfg, &times, &mut rng)?.total();
    let mut grid = vec![[0.0; 3]; count];
    for (t, v) in noise.into_iter().enumerate() {
        let (line, along) = (t / n, t % n);
        let k = if line % 2 == 0 { along } else { n - 1 - along };
        grid[line * n + k] = v;
    }
    helmholtz_split(&grid, n)
}
