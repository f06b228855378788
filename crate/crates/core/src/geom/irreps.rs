use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{wigner::wigner_matrix_rot, GeomError, L_SUPPORTED};
use crate::diff::Real;
use crate::linalg::Mat3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_harmonic(degree: usize) -> Self {
        if degree.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Degree and parity of an irreducible representation of O(3), written
/// `0e`, `1o`, `2e`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IrrepSpec {
    degree: u8,
    parity: Parity,
}

impl IrrepSpec {
    pub const SCALAR: IrrepSpec = IrrepSpec {
        degree: 0,
        parity: Parity::Even,
    };
    pub const VECTOR: IrrepSpec = IrrepSpec {
        degree: 1,
        parity: Parity::Odd,
    };
    pub const PSEUDOVECTOR: IrrepSpec = IrrepSpec {
        degree: 1,
        parity: Parity::Even,
    };
    pub const TENSOR2: IrrepSpec = IrrepSpec {
        degree: 2,
        parity: Parity::Even,
    };

    pub fn new(degree: usize, parity: Parity) -> Result<Self, GeomError> {
        if degree > L_SUPPORTED {
            return Err(GeomError::UnsupportedDegree {
                degree,
                max: L_SUPPORTED,
            });
        }
        Ok(IrrepSpec {
            degree: degree as u8,
            parity,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        2 * self.degree as usize + 1
    }
}

impl fmt::Display for IrrepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.parity {
            Parity::Even => 'e',
            Parity::Odd => 'o',
        };
        write!(f, "{}{}", self.degree, p)
    }
}

impl FromStr for IrrepSpec {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || GeomError::Parse(String::from(s));
        let (deg, par) = s.split_at(s.len().checked_sub(1).ok_or_else(bad)?);
        let parity = match par {
            "e" => Parity::Even,
            "o" => Parity::Odd,
            _ => return Err(bad()),
        };
        let degree: usize = deg.parse().map_err(|_| bad())?;
        IrrepSpec::new(degree, parity)
    }
}

/// Canonically ordered list of `(irrep, multiplicity)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    entries: Vec<(IrrepSpec, usize)>,
}

impl Signature {
    /// Sorts by degree then parity and merges repeated irreps. Zero
    /// multiplicities are dropped.
    pub fn new(entries: impl IntoIterator<Item = (IrrepSpec, usize)>) -> Self {
        let mut v: Vec<(IrrepSpec, usize)> = entries.into_iter().filter(|e| e.1 > 0).collect();
        v.sort_by_key(|e| e.0);
        let mut merged: Vec<(IrrepSpec, usize)> = Vec::with_capacity(v.len());
        for (ir, m) in v {
            match merged.last_mut() {
                Some(last) if last.0 == ir => last.1 += m,
                _ => merged.push((ir, m)),
            }
        }
        Signature { entries: merged }
    }

    pub fn entries(&self) -> &[(IrrepSpec, usize)] {
        &self.entries
    }

    pub fn multiplicity(&self, irrep: IrrepSpec) -> usize {
        self.entries
            .iter()
            .find(|e| e.0 == irrep)
            .map_or(0, |e| e.1)
    }

    /// Total number of real coefficients.
    pub fn dim(&self) -> usize {
        self.entries.iter().map(|(ir, m)| ir.dim() * m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (ir, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{m}x{ir}")?;
        }
        Ok(())
    }
}

impl FromStr for Signature {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(Signature::default());
        }
        let mut entries = Vec::new();
        for part in s.split('+') {
            let part = part.trim();
            let (mult, ir) = match part.split_once('x') {
                Some((m, ir)) => (
                    m.trim()
                        .parse::<usize>()
                        .map_err(|_| GeomError::Parse(String::from(part)))?,
                    ir,
                ),
                None => (1, part),
            };
            entries.push((ir.parse()?, mult));
        }
        Ok(Signature::new(entries))
    }
}

/// Coefficients of one irrep type, `multiplicity` channels of
/// `2ℓ+1` components each, stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Block<S: Real = f64> {
    pub irrep: IrrepSpec,
    pub mult: usize,
    pub coeffs: Vec<S>,
}

impl<S: Real> Block<S> {
    pub fn zeros(irrep: IrrepSpec, mult: usize) -> Self {
        Block {
            irrep,
            mult,
            coeffs: alloc::vec![S::zero(); mult * irrep.dim()],
        }
    }

    pub fn new(irrep: IrrepSpec, mult: usize, coeffs: Vec<S>) -> Result<Self, GeomError> {
        if mult == 0 || coeffs.len() != mult * irrep.dim() {
            return Err(GeomError::Shape {
                expected: mult * irrep.dim(),
                found: coeffs.len(),
            });
        }
        Ok(Block {
            irrep,
            mult,
            coeffs,
        })
    }

    pub fn channel(&self, c: usize) -> &[S] {
        let d = self.irrep.dim();
        &self.coeffs[c * d..(c + 1) * d]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [S] {
        let d = self.irrep.dim();
        &mut self.coeffs[c * d..(c + 1) * d]
    }

    pub fn channels(&self) -> impl Iterator<Item = &[S]> {
        self.coeffs.chunks(self.irrep.dim())
    }
}

/// A typed collection of irrep blocks in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricTensor<S: Real = f64> {
    blocks: Vec<Block<S>>,
}

impl<S: Real> GeometricTensor<S> {
    pub fn zeros(sig: &Signature) -> Self {
        GeometricTensor {
            blocks: sig
                .entries()
                .iter()
                .map(|&(ir, m)| Block::zeros(ir, m))
                .collect(),
        }
    }

    /// Builds a tensor from blocks in any order; blocks of the same irrep
    /// are concatenated channel-wise.
    pub fn from_blocks(blocks: impl IntoIterator<Item = Block<S>>) -> Result<Self, GeomError> {
        let mut v: Vec<Block<S>> = Vec::new();
        for b in blocks {
            if b.coeffs.len() != b.mult * b.irrep.dim() {
                return Err(GeomError::Shape {
                    expected: b.mult * b.irrep.dim(),
                    found: b.coeffs.len(),
                });
            }
            if b.mult == 0 {
                continue;
            }
            match v.iter_mut().find(|x| x.irrep == b.irrep) {
                Some(existing) => {
                    existing.mult += b.mult;
                    existing.coeffs.extend(b.coeffs);
                }
                None => v.push(b),
            }
        }
        v.sort_by_key(|b| b.irrep);
        Ok(GeometricTensor { blocks: v })
    }

    /// Reads coefficients laid out in signature order.
    pub fn from_flat(sig: &Signature, flat: &[S]) -> Result<Self, GeomError> {
        if flat.len() != sig.dim() {
            return Err(GeomError::Shape {
                expected: sig.dim(),
                found: flat.len(),
            });
        }
        let mut off = 0;
        let blocks = sig
            .entries()
            .iter()
            .map(|&(ir, m)| {
                let n = m * ir.dim();
                let b = Block {
                    irrep: ir,
                    mult: m,
                    coeffs: flat[off..off + n].to_vec(),
                };
                off += n;
                b
            })
            .collect();
        Ok(GeometricTensor { blocks })
    }

    pub fn to_flat(&self) -> Vec<S> {
        self.blocks
            .iter()
            .flat_map(|b| b.coeffs.iter().copied())
            .collect()
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.blocks.iter().map(|b| (b.irrep, b.mult)))
    }

    pub fn blocks(&self) -> &[Block<S>] {
        &self.blocks
    }

    pub fn block(&self, irrep: IrrepSpec) -> Option<&Block<S>> {
        self.blocks.iter().find(|b| b.irrep == irrep)
    }

    pub fn block_mut(&mut self, irrep: IrrepSpec) -> Option<&mut Block<S>> {
        self.blocks.iter_mut().find(|b| b.irrep == irrep)
    }

    pub fn values(&self) -> GeometricTensor<f64> {
        GeometricTensor {
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    irrep: b.irrep,
                    mult: b.mult,
                    coeffs: b.coeffs.iter().map(|c| c.val()).collect(),
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GeometricTensor<S>) -> Result<(), GeomError> {
        if self.signature() != other.signature() {
            return Err(GeomError::SignatureMismatch);
        }
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
                *x = *x + *y;
            }
        }
        Ok(())
    }
}

impl GeometricTensor<f64> {
    /// Applies the proper rotation `r` blockwise through its Wigner
    /// matrices.
    pub fn rotated(&self, r: &Mat3) -> GeometricTensor<f64> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let d = wigner_matrix_rot(b.irrep.degree(), r);
                let n = b.irrep.dim();
                let mut coeffs = alloc::vec![0.0; b.coeffs.len()];
                for c in 0..b.mult {
                    let src = &b.coeffs[c * n..(c + 1) * n];
                    for i in 0..n {
                        coeffs[c * n + i] = (0..n).map(|j| d[i * n + j] * src[j]).sum();
                    }
                }
                Block {
                    irrep: b.irrep,
                    mult: b.mult,
                    coeffs,
                }
            })
            .collect();
        GeometricTensor { blocks }
    }

    /// Largest absolute coefficient difference and largest magnitude.
    pub fn max_abs_diff(&self, other: &GeometricTensor<f64>) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.to_flat()
            .iter()
            .map(|a| libm::fabs(*a))
            .fold(0.0, f64::max)
    }
}
