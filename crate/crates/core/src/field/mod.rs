//! Physics constraints as architecture: fields defined as the curl of a
//! learned vector potential, and tensor-product message layers that
//! commute with rigid motions.
//!
//! Positions are in meters, fields in nT and potentials in nT·m.

mod equivariant;
mod linear;
mod mlp;

use alloc::vec::Vec;

use rand::Rng;

pub use equivariant::{
    causal_neighbors, equivariant_forward, EquivariantLayerSpec, FilterKind, Path,
};
pub use linear::{squash, IrrepLinear};
pub use mlp::Mlp;

use crate::diff::{spatial_jacobian, DiffError, Dual, Real};
use crate::geom::{GeomError, GeometricTensor, IrrepSpec, Parity, Signature};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("non-finite parameter at index {0}")]
    NonFiniteParameter(usize),
    #[error("contract violated: {0}")]
    Contract(&'static str),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ConstraintFlags {
    pub divergence_free: bool,
    pub equivariant: bool,
}

impl ConstraintFlags {
    pub const NONE: Self = ConstraintFlags {
        divergence_free: false,
        equivariant: false,
    };
    pub const DIV_FREE: Self = ConstraintFlags {
        divergence_free: true,
        equivariant: false,
    };
    pub const EQUIVARIANT: Self = ConstraintFlags {
        divergence_free: false,
        equivariant: true,
    };
    pub const BOTH: Self = ConstraintFlags {
        divergence_free: true,
        equivariant: true,
    };
}

/// `ε_ijk ∂f^k/∂x^j` at `x`.
pub fn curl<S, E, F>(f: F, x: [S; 3]) -> Result<[S; 3], E>
where
    S: Real,
    F: FnOnce([Dual<S, 3>; 3]) -> Result<[Dual<S, 3>; 3], E>,
{
    let j = spatial_jacobian(f, x)?;
    Ok([j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]])
}

/// Trace of the spatial Jacobian.
pub fn divergence<S, E, F>(f: F, x: [S; 3]) -> Result<S, E>
where
    S: Real,
    F: FnOnce([Dual<S, 3>; 3]) -> Result<[Dual<S, 3>; 3], E>,
{
    let j = spatial_jacobian(f, x)?;
    Ok(j[0][0] + j[1][1] + j[2][2])
}

/// The network that maps a position (and an optional per-window context)
/// to the potential, or directly to the field when unconstrained.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoder {
    /// `MLP([x; context])` plus an optional linear term in the context.
    Mlp {
        net: Mlp,
        context_dim: usize,
        skip: Skip,
    },
    /// One solid-harmonic message from the context tensor, placed at the
    /// origin, to `x`.
    Equivariant(EquivariantLayerSpec),
}

impl Decoder {
    pub fn num_params(&self) -> usize {
        match self {
            Decoder::Mlp {
                net,
                context_dim,
                skip,
            } => {
                net.num_params()
                    + if *skip == Skip::None {
                        0
                    } else {
                        3 * context_dim
                    }
            }
            Decoder::Equivariant(layer) => layer.num_params(),
        }
    }

    pub fn context_dim(&self) -> usize {
        match self {
            Decoder::Mlp { context_dim, .. } => *context_dim,
            Decoder::Equivariant(layer) => layer.input().dim(),
        }
    }

    fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Decoder::Mlp {
                net,
                context_dim,
                skip,
            } => {
                let mut p = net.init(rng);
                if *skip != Skip::None {
                    let bound = libm::sqrt(3.0 / (*context_dim).max(1) as f64);
                    p.extend((0..3 * context_dim).map(|_| rng.random_range(-bound..bound)));
                }
                p
            }
            Decoder::Equivariant(layer) => layer.init(rng),
        }
    }

    /// Raw 3-vector output in Cartesian order.
    pub fn eval<S: Real>(
        &self,
        params: &[S],
        x: [S; 3],
        context: &[S],
    ) -> Result<[S; 3], FieldError> {
        if context.len() != self.context_dim() {
            return Err(FieldError::Contract(
                "context length does not match the decoder",
            ));
        }
        match self {
            Decoder::Mlp {
                net,
                context_dim,
                skip,
            } => {
                let mut input = Vec::with_capacity(3 + context.len());
                input.extend_from_slice(&x);
                input.extend_from_slice(context);
                let (np, lp) = params.split_at(net.num_params());
                let y = net.forward(np, &input);
                let mut out = [y[0], y[1], y[2]];
                if *skip != Skip::None {
                    let lc: [S; 3] = core::array::from_fn(|k| {
                        S::dot(&lp[k * context_dim..(k + 1) * context_dim], context)
                    });
                    let add = match skip {
                        Skip::Uniform => crate::linalg::cross(lc, x).map(|v| v.scale(0.5)),
                        _ => lc,
                    };
                    out = crate::linalg::add(out, add);
                }
                Ok(out)
            }
            Decoder::Equivariant(layer) => {
                let ctx = GeometricTensor::from_flat(layer.input(), context)?;
                let out = layer.message(params, x, &ctx)?;
                // harmonic order (y, z, x)
                let v = &out.blocks()[0].coeffs;
                Ok([v[2], v[0], v[1]])
            }
        }
    }
}

/// Linear context term of an MLP decoder, `L·c` with `L` a `3 × context`
/// matrix stored after the network weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Skip {
    None,
    /// Added to the field directly.
    Direct,
    /// Potential `½ (L·c) × x` of the uniform field `L·c`.
    Uniform,
}

/// A learned field `B_θ`.
///
/// With `divergence_free` set, the decoder output is a vector potential
/// and the public field is exclusively its curl. With `equivariant` set,
/// the decoder is a tensor-product layer over a geometric context tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldModel {
    decoder: Decoder,
    flags: ConstraintFlags,
    params: Vec<f64>,
}

impl FieldModel {
    /// Context-free MLP decoder with the given layer widths; the first
    /// and last must be 3.
    pub fn mlp<R: Rng + ?Sized>(
        widths: &[usize],
        flags: ConstraintFlags,
        rng: &mut R,
    ) -> Result<Self, FieldError> {
        if flags.equivariant {
            return Err(FieldError::Contract("an MLP decoder cannot be equivariant"));
        }
        if widths.first() != Some(&3) || widths.last() != Some(&3) {
            return Err(FieldError::Contract("position MLP must map 3 → … → 3"));
        }
        Ok(Self::with_decoder(
            Decoder::Mlp {
                net: Mlp::new(widths),
                context_dim: 0,
                skip: Skip::None,
            },
            flags,
            rng,
        ))
    }

    /// The default `3 → 64 → 64 → 3` tanh potential.
    pub fn default_mlp<R: Rng + ?Sized>(
        flags: ConstraintFlags,
        rng: &mut R,
    ) -> Result<Self, FieldError> {
        Self::mlp(&[3, 64, 64, 3], flags, rng)
    }

    /// Decoder for `[x; context]` with the given hidden widths and a linear
    /// context term (a uniform field `L·c` in either form).
    pub fn contextual_mlp<R: Rng + ?Sized>(
        hidden: &[usize],
        context_dim: usize,
        divergence_free: bool,
        rng: &mut R,
    ) -> Self {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(3 + context_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(3);
        Self::with_decoder(
            Decoder::Mlp {
                net: Mlp::new(&sizes),
                context_dim,
                skip: match (context_dim, divergence_free) {
                    (0, _) => Skip::None,
                    (_, true) => Skip::Uniform,
                    (_, false) => Skip::Direct,
                },
            },
            ConstraintFlags {
                divergence_free,
                equivariant: false,
            },
            rng,
        )
    }

    /// Equivariant decoder from a context tensor of signature `context`.
    ///
    /// The output is a true vector (1o) when used directly, and a
    /// pseudovector potential (1e) when its curl is taken, so that the
    /// resulting field is 1o in both cases.
    pub fn equivariant<R: Rng + ?Sized>(
        context: Signature,
        filters: &[usize],
        radial_hidden: usize,
        divergence_free: bool,
        rng: &mut R,
    ) -> Result<Self, FieldError> {
        let out_parity = if divergence_free {
            Parity::Even
        } else {
            Parity::Odd
        };
        let out = Signature::new([(IrrepSpec::new(1, out_parity)?, 1)]);
        let layer =
            EquivariantLayerSpec::new(context, out, filters, radial_hidden, FilterKind::Solid)?;
        Ok(Self::with_decoder(
            Decoder::Equivariant(layer),
            ConstraintFlags {
                divergence_free,
                equivariant: true,
            },
            rng,
        ))
    }

    fn with_decoder<R: Rng + ?Sized>(
        decoder: Decoder,
        flags: ConstraintFlags,
        rng: &mut R,
    ) -> Self {
        let params = decoder.init(rng);
        FieldModel {
            decoder,
            flags,
            params,
        }
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    pub fn flags(&self) -> ConstraintFlags {
        self.flags
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Vec<f64> {
        &mut self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), FieldError> {
        if params.len() != self.decoder.num_params() {
            return Err(FieldError::Contract(
                "parameter count does not match the decoder",
            ));
        }
        self.params = params;
        Ok(())
    }

    fn check_finite(&self) -> Result<(), FieldError> {
        match self.params.iter().position(|p| !p.is_finite()) {
            Some(i) => Err(FieldError::NonFiniteParameter(i)),
            None => Ok(()),
        }
    }

    /// Decoder output with externally supplied parameters; a potential
    /// when `divergence_free` is set.
    pub fn raw<S: Real>(
        &self,
        params: &[S],
        x: [S; 3],
        context: &[S],
    ) -> Result<[S; 3], FieldError> {
        self.decoder.eval(params, x, context)
    }

    /// `∇ × A` with externally supplied parameters.
    pub fn curl_with<S: Real>(
        &self,
        params: &[S],
        x: [S; 3],
        context: &[S],
    ) -> Result<[S; 3], FieldError> {
        if !self.flags.divergence_free {
            return Err(FieldError::Contract(
                "curl requested from a model without a potential",
            ));
        }
        let lifted_params: Vec<Dual<S, 3>> = params.iter().map(|&p| Dual::constant(p)).collect();
        let lifted_ctx: Vec<Dual<S, 3>> = context.iter().map(|&c| Dual::constant(c)).collect();
        curl(|p| self.decoder.eval(&lifted_params, p, &lifted_ctx), x)
    }

    /// The public field: the curl of the potential when divergence-free,
    /// the decoder output otherwise.
    pub fn field_with<S: Real>(
        &self,
        params: &[S],
        x: [S; 3],
        context: &[S],
    ) -> Result<[S; 3], FieldError> {
        if self.flags.divergence_free {
            self.curl_with(params, x, context)
        } else {
            self.raw(params, x, context)
        }
    }

    /// Vector potential at `x` using the stored parameters.
    pub fn potential_forward(&self, x: [f64; 3]) -> Result<[f64; 3], FieldError> {
        self.potential_forward_in(x, &[])
    }

    pub fn potential_forward_in(
        &self,
        x: [f64; 3],
        context: &[f64],
    ) -> Result<[f64; 3], FieldError> {
        self.check_finite()?;
        self.raw(&self.params, x, context)
    }

    pub fn curl_field(&self, x: [f64; 3]) -> Result<[f64; 3], FieldError> {
        self.curl_field_in(x, &[])
    }

    pub fn curl_field_in(&self, x: [f64; 3], context: &[f64]) -> Result<[f64; 3], FieldError> {
        self.check_finite()?;
        self.curl_with(&self.params, x, context)
    }

    pub fn field(&self, x: [f64; 3], context: &[f64]) -> Result<[f64; 3], FieldError> {
        self.check_finite()?;
        self.field_with(&self.params, x, context)
    }

    /// `∇·B` of the public field.
    pub fn field_divergence(&self, x: [f64; 3], context: &[f64]) -> Result<f64, FieldError> {
        self.check_finite()?;
        let lifted_params: Vec<Dual<f64, 3>> =
            self.params.iter().map(|&p| Dual::constant(p)).collect();
        let lifted_ctx: Vec<Dual<f64, 3>> = context.iter().map(|&c| Dual::constant(c)).collect();
        divergence(|p| self.field_with(&lifted_params, p, &lifted_ctx), x)
    }
}
