use alloc::vec::Vec;

use rand::Rng;

use super::TemporalError;
use crate::diff::Real;
use crate::geom::{Block, GeometricTensor, IrrepSpec, Signature};

pub const TAU_MIN: f64 = 1e-3;
pub const TAU_MAX: f64 = 1e3;

/// `τ = τ_min (τ_max/τ_min)^((1 + tanh z)/2)`: smooth, strictly inside
/// `[τ_min, τ_max]`, and 1 s at `z = 0`.
pub fn time_constant<S: Real>(z: S) -> S {
    let span = libm::log(TAU_MAX / TAU_MIN);
    ((S::one() + z.tanh()).scale(0.5 * span) + S::cst(libm::log(TAU_MIN))).exp()
}

/// `e^{−Δt/τ} h + (1 − e^{−Δt/τ}) u` per unit, gates held fixed.
pub fn relax<S: Real>(h: &[S], tau: &[S], u: &[S], dt: f64) -> Vec<S> {
    h.iter()
        .zip(tau)
        .zip(u)
        .map(|((&h, &tau), &u)| {
            let decay = (S::cst(-dt) / tau).exp();
            decay * h + (S::one() - decay) * u
        })
        .collect()
}

/// Liquid time-constant cell:
/// `τ_i(x, h) ḣ_i = −h_i + σ(W_x,i x + W_h,i h + b_i)`.
///
/// Layout: `W_x` (H×I), `W_h` (H×H), `b` (H), then the same three for the
/// time-constant pre-activation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtcCell {
    input: usize,
    hidden: usize,
}

impl LtcCell {
    pub fn new(input: usize, hidden: usize) -> Self {
        LtcCell { input, hidden }
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    fn block_len(&self) -> usize {
        self.hidden * (self.input + self.hidden + 1)
    }

    pub fn num_params(&self) -> usize {
        2 * self.block_len()
    }

    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let bound = libm::sqrt(3.0 / (self.input + self.hidden) as f64);
        let mut p = Vec::with_capacity(self.num_params());
        for _ in 0..2 {
            p.extend(
                (0..self.hidden * (self.input + self.hidden))
                    .map(|_| rng.random_range(-bound..bound)),
            );
            p.extend(core::iter::repeat_n(0.0, self.hidden));
        }
        p
    }

    fn affine<S: Real>(&self, p: &[S], h: &[S], x: &[S]) -> Vec<S> {
        let (ni, nh) = (self.input, self.hidden);
        let wx = &p[..nh * ni];
        let wh = &p[nh * ni..nh * (ni + nh)];
        let b = &p[nh * (ni + nh)..];
        (0..nh)
            .map(|i| {
                S::dot(&wx[i * ni..(i + 1) * ni], x) + S::dot(&wh[i * nh..(i + 1) * nh], h) + b[i]
            })
            .collect()
    }

    /// `(τ, u)` at the current state and input.
    pub fn gates<S: Real>(&self, params: &[S], h: &[S], x: &[S]) -> (Vec<S>, Vec<S>) {
        let (gate_p, tau_p) = params.split_at(self.block_len());
        let u = self
            .affine(gate_p, h, x)
            .into_iter()
            .map(S::sigmoid)
            .collect();
        let tau = self
            .affine(tau_p, h, x)
            .into_iter()
            .map(time_constant)
            .collect();
        (tau, u)
    }

    /// Closed-form update over `Δt` with gates frozen at the interval
    /// start.
    pub fn step<S: Real>(
        &self,
        params: &[S],
        h: &[S],
        x: &[S],
        dt: f64,
    ) -> Result<Vec<S>, TemporalError> {
        if !(dt >= 0.0) {
            return Err(TemporalError::Domain("time step must be non-negative"));
        }
        if params.len() != self.num_params() || h.len() != self.hidden || x.len() != self.input {
            return Err(TemporalError::Contract(
                "LTC parameter, state or input size mismatch",
            ));
        }
        let (tau, u) = self.gates(params, h, x);
        Ok(relax(h, &tau, &u, dt))
    }
}

/// Free-function form of [`LtcCell::step`].
pub fn ltc_step<S: Real>(
    cell: &LtcCell,
    params: &[S],
    h: &[S],
    x: &[S],
    dt: f64,
) -> Result<Vec<S>, TemporalError> {
    cell.step(params, h, x, dt)
}

/// LTC over a geometric state of `n_s × 0e + n_v × 1o`.
///
/// Scalar channels are a plain [`LtcCell`] over the scalar input and
/// scalar state. Vector channel `c` relaxes towards a gated linear mix of
/// input and state vectors,
///
/// `v_c ← e^{−Δt/τ_c} v_c + (1 − e^{−Δt/τ_c}) g_c Σ (M x_v + N h_v)_c`,
///
/// where `τ_c` and `g_c` come from invariants only: scalars and squared
/// norms of vector channels. Squared norms keep the gates smooth at zero.
///
/// Layout: scalar cell, then `W_τ` (n_v × n_inv), `b_τ`, `W_g`
/// (n_v × n_inv), `b_g`, `M` (n_v × in_v), `N` (n_v × n_v).
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantLtcCell {
    scalar: LtcCell,
    in_s: usize,
    in_v: usize,
    n_s: usize,
    n_v: usize,
}

impl EquivariantLtcCell {
    pub fn new(input: &Signature, state: &Signature) -> Result<Self, TemporalError> {
        let only_0e_1o = |s: &Signature| {
            s.entries()
                .iter()
                .all(|(ir, _)| *ir == IrrepSpec::SCALAR || *ir == IrrepSpec::VECTOR)
        };
        if !only_0e_1o(input) || !only_0e_1o(state) {
            return Err(TemporalError::Contract(
                "equivariant LTC takes 0e and 1o channels only",
            ));
        }
        let in_s = input.multiplicity(IrrepSpec::SCALAR);
        let in_v = input.multiplicity(IrrepSpec::VECTOR);
        let n_s = state.multiplicity(IrrepSpec::SCALAR);
        let n_v = state.multiplicity(IrrepSpec::VECTOR);
        Ok(EquivariantLtcCell {
            scalar: LtcCell::new(in_s, n_s),
            in_s,
            in_v,
            n_s,
            n_v,
        })
    }

    /// The default `64×0e + 64×1o` state.
    pub fn default_state() -> Signature {
        Signature::new([(IrrepSpec::SCALAR, 64), (IrrepSpec::VECTOR, 64)])
    }

    pub fn input_signature(&self) -> Signature {
        Signature::new([
            (IrrepSpec::SCALAR, self.in_s),
            (IrrepSpec::VECTOR, self.in_v),
        ])
    }

    pub fn state_signature(&self) -> Signature {
        Signature::new([(IrrepSpec::SCALAR, self.n_s), (IrrepSpec::VECTOR, self.n_v)])
    }

    pub fn scalar_cell(&self) -> &LtcCell {
        &self.scalar
    }

    fn n_inv(&self) -> usize {
        self.in_s + self.in_v + self.n_s + self.n_v
    }

    pub fn num_params(&self) -> usize {
        self.scalar.num_params()
            + 2 * self.n_v * (self.n_inv() + 1)
            + self.n_v * (self.in_v + self.n_v)
    }

    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = self.scalar.init(rng);
        let inv_bound = libm::sqrt(3.0 / self.n_inv().max(1) as f64);
        for _ in 0..2 {
            p.extend((0..self.n_v * self.n_inv()).map(|_| rng.random_range(-inv_bound..inv_bound)));
            p.extend(core::iter::repeat_n(0.0, self.n_v));
        }
        let mix_bound = libm::sqrt(3.0 / (self.in_v + self.n_v).max(1) as f64);
        p.extend(
            (0..self.n_v * (self.in_v + self.n_v)).map(|_| rng.random_range(-mix_bound..mix_bound)),
        );
        p
    }

    pub fn step<S: Real>(
        &self,
        params: &[S],
        h: &GeometricTensor<S>,
        x: &GeometricTensor<S>,
        dt: f64,
    ) -> Result<GeometricTensor<S>, TemporalError> {
        if !(dt >= 0.0) {
            return Err(TemporalError::Domain("time step must be non-negative"));
        }
        if params.len() != self.num_params() {
            return Err(TemporalError::Contract(
                "equivariant LTC parameter count mismatch",
            ));
        }
        if h.signature() != self.state_signature() || x.signature() != self.input_signature() {
            return Err(TemporalError::Contract(
                "equivariant LTC signature mismatch",
            ));
        }
        let scalars = |t: &GeometricTensor<S>| {
            t.block(IrrepSpec::SCALAR)
                .map_or(Vec::new(), |b| b.coeffs.clone())
        };
        let vectors = |t: &GeometricTensor<S>| {
            t.block(IrrepSpec::VECTOR)
                .map_or(Vec::new(), |b| b.coeffs.clone())
        };
        let (hs, hv, xs, xv) = (scalars(h), vectors(h), scalars(x), vectors(x));

        let (scalar_p, rest) = params.split_at(self.scalar.num_params());
        let hs_new = self.scalar.step(scalar_p, &hs, &xs, dt)?;

        let mut blocks = Vec::with_capacity(2);
        if self.n_s > 0 {
            blocks.push(Block::new(IrrepSpec::SCALAR, self.n_s, hs_new)?);
        }
        if self.n_v > 0 {
            let sq_norms = |v: &[S]| v.chunks(3).map(|c| S::dot(c, c)).collect::<Vec<S>>();
            let mut inv = xs.clone();
            inv.extend(sq_norms(&xv));
            inv.extend(hs.iter().copied());
            inv.extend(sq_norms(&hv));

            let ni = self.n_inv();
            let nv = self.n_v;
            let (w_tau, rest) = rest.split_at(nv * ni);
            let (b_tau, rest) = rest.split_at(nv);
            let (w_g, rest) = rest.split_at(nv * ni);
            let (b_g, mix) = rest.split_at(nv);

            let mut out = Vec::with_capacity(3 * nv);
            let mut src = Vec::with_capacity(self.in_v + nv);
            for c in 0..nv {
                let tau = time_constant(S::dot(&w_tau[c * ni..(c + 1) * ni], &inv) + b_tau[c]);
                let g = (S::dot(&w_g[c * ni..(c + 1) * ni], &inv) + b_g[c]).sigmoid();
                let decay = (S::cst(-dt) / tau).exp();
                let w = &mix[c * (self.in_v + nv)..(c + 1) * (self.in_v + nv)];
                for k in 0..3 {
                    src.clear();
                    src.extend(xv.chunks(3).map(|v| v[k]));
                    src.extend(hv.chunks(3).map(|v| v[k]));
                    let target = g * S::dot(w, &src);
                    let hk = hv[3 * c + k];
                    out.push(decay * hk + (S::one() - decay) * target);
                }
            }
            blocks.push(Block::new(IrrepSpec::VECTOR, nv, out)?);
        }
        Ok(GeometricTensor::from_blocks(blocks)?)
    }
}

/// Free-function form of [`EquivariantLtcCell::step`].
pub fn equivariant_ltc_step<S: Real>(
    cell: &EquivariantLtcCell,
    params: &[S],
    h: &GeometricTensor<S>,
    x: &GeometricTensor<S>,
    dt: f64,
) -> Result<GeometricTensor<S>, TemporalError> {
    cell.step(params, h, x, dt)
}
