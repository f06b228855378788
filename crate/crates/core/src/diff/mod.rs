//! Differentiation substrate.
//!
//! Forward mode ([`Dual`]) gives exact spatial Jacobians, reverse mode
//! ([`Tape`], [`Var`]) gives parameter gradients, and the two nest as
//! `Dual<Var, 3>` when a training loss is built from spatial derivatives.

mod dual;
mod real;
mod tape;

use alloc::vec::Vec;

pub use dual::Dual;
pub use real::{lift, lift3, sigmoid, values3, Real};
pub use tape::{Gradient, Tape, Var};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffError {
    #[error("operation `{0}` is not in the differentiable primitive set")]
    Unsupported(&'static str),
    #[error("gradient requested from an empty recording")]
    EmptyRecording,
    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
}

/// A map from positions to 3-vectors that can be evaluated with any
/// [`Real`] scalar.
pub trait VectorField {
    fn eval<S: Real>(&self, x: [S; 3]) -> Result<[S; 3], DiffError>;
}

/// `J[k][j] = ∂f^k/∂x^j` at `x`, using three seeded forward-mode
/// directions.
///
/// Errors raised by `f` are passed through unchanged.
pub fn spatial_jacobian<S, E, F>(f: F, x: [S; 3]) -> Result<[[S; 3]; 3], E>
where
    S: Real,
    F: FnOnce([Dual<S, 3>; 3]) -> Result<[Dual<S, 3>; 3], E>,
{
    let seeded = [
        Dual::seeded(x[0], 0),
        Dual::seeded(x[1], 1),
        Dual::seeded(x[2], 2),
    ];
    let out = f(seeded)?;
    Ok([out[0].d, out[1].d, out[2].d])
}

/// Spatial Jacobian of a [`VectorField`].
pub fn field_jacobian<S: Real, V: VectorField>(
    field: &V,
    x: [S; 3],
) -> Result<[[S; 3]; 3], DiffError> {
    spatial_jacobian(|p| field.eval(p), x)
}

/// Value and gradient of a scalar program with respect to `theta`.
///
/// The closure receives the tape and one recorded variable per parameter.
pub fn param_gradient<F>(theta: &[f64], loss: F) -> Result<(f64, Vec<f64>), DiffError>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Result<Var<'t>, DiffError>,
{
    let tape = Tape::new();
    let vars = tape.vars(theta);
    let out = loss(&tape, &vars)?;
    if !out.value().is_finite() {
        return Err(DiffError::NonFinite("loss"));
    }
    let grad = tape.gradient(out)?;
    Ok((out.value(), grad.wrt_all(&vars)))
}
