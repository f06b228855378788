//! Continuous-time backbones: liquid time-constant cells with
//! closed-form interval updates, a latent ODE, and quadrature attention
//! over the interval between two observations.

mod attention;
mod ltc;
mod ode;

pub use attention::{
    conti_attention, conti_output, gauss_legendre_unit, AlphaNorm, AlphaPath, ContiAttention,
    OutputPath, Token, ValuePath,
};
pub use ltc::{
    equivariant_ltc_step, ltc_step, relax, time_constant, EquivariantLtcCell, LtcCell, TAU_MAX,
    TAU_MIN,
};
pub use ode::{integrate_rk4, latent_ode_integrate, LatentOde, LatentState, MAX_SUBSTEP};

use crate::geom::GeomError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemporalError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("contract violated: {0}")]
    Contract(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("non-finite dynamics at t = {t} s")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
}
