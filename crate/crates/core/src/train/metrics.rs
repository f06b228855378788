use super::TrainError;
use crate::linalg::Vec3;

/// Printed in place of an infinite SNR.
pub const SNR_INFINITE: f64 = f64::INFINITY;

fn check(pred: &[Vec3], truth: &[Vec3]) -> Result<(), TrainError> {
    if pred.is_empty() {
        return Err(TrainError::Domain("metrics need at least one sample"));
    }
    if pred.len() != truth.len() {
        return Err(TrainError::Domain("prediction and truth lengths differ"));
    }
    Ok(())
}

fn error_energy(pred: &[Vec3], truth: &[Vec3]) -> f64 {
    pred.iter()
        .zip(truth)
        .map(|(p, t)| (0..3).map(|k| (p[k] - t[k]) * (p[k] - t[k])).sum::<f64>())
        .sum()
}

/// `√(mean_t ‖B̂(t) − B(t)‖²)` in the units of the inputs.
pub fn rmse(pred: &[Vec3], truth: &[Vec3]) -> Result<f64, TrainError> {
    check(pred, truth)?;
    Ok(libm::sqrt(error_energy(pred, truth) / pred.len() as f64))
}

/// `10 log₁₀(Σ‖B‖² / Σ‖B̂ − B‖²)` in dB; [`SNR_INFINITE`] for a perfect
/// prediction.
pub fn snr(pred: &[Vec3], truth: &[Vec3]) -> Result<f64, TrainError> {
    check(pred, truth)?;
    let signal: f64 = truth
        .iter()
        .map(|t| t.iter().map(|v| v * v).sum::<f64>())
        .sum();
    if signal == 0.0 {
        return Err(TrainError::Domain("truth has zero energy"));
    }
    let noise = error_energy(pred, truth);
    if noise == 0.0 {
        return Ok(SNR_INFINITE);
    }
    Ok(10.0 * libm::log10(signal / noise))
}
