use alloc::vec::Vec;

use rand::Rng;

use crate::diff::Real;
use crate::geom::{Block, GeomError, GeometricTensor, Signature};

/// Channel mixing within each irrep type: `out^(ρ)[c] = Σ_c' W^(ρ)[c][c'] in^(ρ)[c']`
/// (plus a bias on even scalars).
///
/// Irreps present in the output but not in the input stay zero. Layout:
/// per output irrep in canonical order, a `mult_out × mult_in` matrix,
/// then one bias per `0e` output channel when `bias` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepLinear {
    input: Signature,
    output: Signature,
    bias: bool,
}

impl IrrepLinear {
    pub fn new(input: Signature, output: Signature, bias: bool) -> Self {
        IrrepLinear {
            input,
            output,
            bias,
        }
    }

    pub fn input(&self) -> &Signature {
        &self.input
    }

    pub fn output(&self) -> &Signature {
        &self.output
    }

    pub fn num_params(&self) -> usize {
        let weights: usize = self
            .output
            .entries()
            .iter()
            .map(|&(ir, m)| m * self.input.multiplicity(ir))
            .sum();
        weights + self.n_bias()
    }

    fn n_bias(&self) -> usize {
        if self.bias {
            self.output.multiplicity(crate::geom::IrrepSpec::SCALAR)
        } else {
            0
        }
    }

    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for &(ir, m) in self.output.entries() {
            let m_in = self.input.multiplicity(ir);
            if m_in == 0 {
                continue;
            }
            let bound = libm::sqrt(3.0 / m_in as f64);
            p.extend((0..m * m_in).map(|_| rng.random_range(-bound..bound)));
        }
        p.extend(core::iter::repeat_n(0.0, self.n_bias()));
        p
    }

    pub fn forward<S: Real>(
        &self,
        params: &[S],
        x: &GeometricTensor<S>,
    ) -> Result<GeometricTensor<S>, GeomError> {
        if params.len() != self.num_params() {
            return Err(GeomError::Shape {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        if x.signature() != self.input {
            return Err(GeomError::SignatureMismatch);
        }
        let mut off = 0;
        let mut blocks = Vec::with_capacity(self.output.entries().len());
        for &(ir, m_out) in self.output.entries() {
            let mut out = Block::zeros(ir, m_out);
            if let Some(src) = x.block(ir) {
                let m_in = src.mult;
                let w = &params[off..off + m_out * m_in];
                off += m_out * m_in;
                let d = ir.dim();
                let mut column = Vec::with_capacity(m_in);
                for k in 0..d {
                    column.clear();
                    column.extend((0..m_in).map(|c| src.coeffs[c * d + k]));
                    for co in 0..m_out {
                        out.coeffs[co * d + k] = S::dot(&w[co * m_in..(co + 1) * m_in], &column);
                    }
                }
            }
            blocks.push(out);
        }
        if self.bias {
            let b = &params[off..];
            if let Some(s) = blocks
                .iter_mut()
                .find(|b| b.irrep == crate::geom::IrrepSpec::SCALAR)
            {
                for (c, bv) in s.coeffs.iter_mut().zip(b) {
                    *c = *c + *bv;
                }
            }
        }
        GeometricTensor::from_blocks(blocks)
    }
}

/// Equivariant squashing: `tanh` on even scalars, `v / √(1 + |v|²)` on every
/// other channel.
pub fn squash<S: Real>(x: &GeometricTensor<S>) -> GeometricTensor<S> {
    let blocks = x.blocks().iter().map(|b| {
        let mut out = b.clone();
        if b.irrep == crate::geom::IrrepSpec::SCALAR {
            for c in out.coeffs.iter_mut() {
                *c = c.tanh();
            }
        } else {
            let d = b.irrep.dim();
            for ch in out.coeffs.chunks_mut(d) {
                let n2 = S::dot(ch, ch);
                let k = S::one() / (S::one() + n2).sqrt();
                for v in ch.iter_mut() {
                    *v = *v * k;
                }
            }
        }
        out
    });
    GeometricTensor::from_blocks(blocks).expect("blocks copied from a valid tensor")
}
