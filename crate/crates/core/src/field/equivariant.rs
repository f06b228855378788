use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use super::{FieldError, Mlp};
use crate::diff::Real;
use crate::geom::{
    direction_harmonics, solid_harmonics, tensor_product, GeomError, GeometricTensor, IrrepSpec,
    Parity, Signature, L_MAX,
};

/// How the filter `Y^(ℓ)` depends on the relative position `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterKind {
    /// `Y^(ℓ)(r̂)` with a radial profile of `|r|`. Undefined at `r = 0`,
    /// where only `ℓ = 0` filters contribute.
    Direction,
    /// `|r|^ℓ Y^(ℓ)(r̂)` with a radial profile of `|r|²`: polynomial in
    /// `r`, hence smooth everywhere. Used by field decoders whose curl is
    /// taken.
    Solid,
}

/// One `(ℓ_in, ℓ_filter) → ℓ_out` coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Path {
    pub input: IrrepSpec,
    pub filter: usize,
    pub output: IrrepSpec,
}

/// Tensor-product message layer.
///
/// For a relative position `r` and input features `T`, output channel `c`
/// of irrep `ℓ_out` is
///
/// `Σ_paths (1 + ρ_p(r)) Σ_c' W_p[c][c'] [T^(ℓ_in)_c' ⊗ Y^(ℓ_f)(r)]^(ℓ_out)`
///
/// where `ρ` is a small radial MLP with one output per path.
///
/// Parameter layout: radial MLP, then per path a `mult_out × mult_in`
/// row-major weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantLayerSpec {
    input: Signature,
    output: Signature,
    filters: Vec<usize>,
    paths: Vec<Path>,
    radial: Mlp,
    kind: FilterKind,
}

impl EquivariantLayerSpec {
    /// Enumerates every path allowed by the triangle inequality and parity
    /// conservation. Output irreps that no path reaches are an error.
    pub fn new(
        input: Signature,
        output: Signature,
        filters: &[usize],
        radial_hidden: usize,
        kind: FilterKind,
    ) -> Result<Self, GeomError> {
        if let Some(&l) = filters.iter().find(|&&l| l > L_MAX) {
            return Err(GeomError::UnsupportedDegree {
                degree: l,
                max: L_MAX,
            });
        }
        let mut paths = Vec::new();
        for &(out, _) in output.entries() {
            for &(inp, _) in input.entries() {
                for &lf in filters {
                    let (l1, lo) = (inp.degree(), out.degree());
                    let triangle = lo >= l1.abs_diff(lf) && lo <= l1 + lf;
                    if triangle && inp.parity().times(Parity::of_harmonic(lf)) == out.parity() {
                        paths.push(Path {
                            input: inp,
                            filter: lf,
                            output: out,
                        });
                    }
                }
            }
            if !paths.iter().any(|p| p.output == out) {
                return Err(GeomError::SelectionRule {
                    l1: input.entries().first().map_or(0, |e| e.0.degree()),
                    l2: filters.iter().copied().max().unwrap_or(0),
                    l: out.degree(),
                });
            }
        }
        let radial = Mlp::new(&[1, radial_hidden, paths.len()]);
        Ok(EquivariantLayerSpec {
            input,
            output,
            filters: filters.to_vec(),
            paths,
            radial,
            kind,
        })
    }

    pub fn input(&self) -> &Signature {
        &self.input
    }

    pub fn output(&self) -> &Signature {
        &self.output
    }

    pub fn filters(&self) -> &[usize] {
        &self.filters
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    /// Number of path weights, excluding the radial MLP.
    pub fn weight_count(&self) -> usize {
        self.paths
            .iter()
            .map(|p| self.input.multiplicity(p.input) * self.output.multiplicity(p.output))
            .sum()
    }

    pub fn num_params(&self) -> usize {
        self.radial.num_params() + self.weight_count()
    }

    /// Radial MLP at small scale, path weights scaled by their fan-in.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p: Vec<f64> = self.radial.init(rng).into_iter().map(|w| 0.1 * w).collect();
        for path in &self.paths {
            let fan_in: usize = self
                .paths
                .iter()
                .filter(|q| q.output == path.output)
                .map(|q| self.input.multiplicity(q.input))
                .sum();
            let bound = libm::sqrt(3.0 / fan_in as f64);
            let n = self.input.multiplicity(path.input) * self.output.multiplicity(path.output);
            p.extend((0..n).map(|_| rng.random_range(-bound..bound)));
        }
        p
    }

    /// The message from a node with features `feats` seen at relative
    /// position `r`.
    pub fn message<S: Real>(
        &self,
        params: &[S],
        r: [S; 3],
        feats: &GeometricTensor<S>,
    ) -> Result<GeometricTensor<S>, GeomError> {
        if params.len() != self.num_params() {
            return Err(GeomError::Shape {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        if feats.signature() != self.input {
            return Err(GeomError::SignatureMismatch);
        }
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        let degenerate = self.kind == FilterKind::Direction && r2.val() == 0.0;
        let radial_in = match self.kind {
            FilterKind::Direction if degenerate => S::zero(),
            FilterKind::Direction => r2.sqrt(),
            FilterKind::Solid => r2,
        };
        let (radial_params, weights) = params.split_at(self.radial.num_params());
        let rho = self.radial.forward(radial_params, &[radial_in]);

        let mut harmonics: [Option<Vec<S>>; L_MAX + 1] = Default::default();
        for &lf in &self.filters {
            if degenerate && lf > 0 {
                continue;
            }
            harmonics[lf] = Some(match self.kind {
                FilterKind::Direction if degenerate => {
                    alloc::vec![S::cst(0.5 / libm::sqrt(core::f64::consts::PI))]
                }
                FilterKind::Direction => direction_harmonics(lf, r),
                FilterKind::Solid => solid_harmonics(lf, r),
            });
        }

        let mut out = GeometricTensor::zeros(&self.output);
        let mut off = 0;
        for (pi, path) in self.paths.iter().enumerate() {
            let m_in = self.input.multiplicity(path.input);
            let m_out = self.output.multiplicity(path.output);
            let w = &weights[off..off + m_in * m_out];
            off += m_in * m_out;
            let Some(y) = &harmonics[path.filter] else {
                continue;
            };
            let block = feats.block(path.input).expect("signature checked");
            let coupled = tensor_product(block, y, path.output.degree())?;
            let gain = S::one() + rho[pi];
            let dim = path.output.dim();
            let target = out.block_mut(path.output).expect("output irrep present");
            let mut column = Vec::with_capacity(m_in);
            for k in 0..dim {
                column.clear();
                column.extend((0..m_in).map(|c| coupled.coeffs[c * dim + k]));
                for co in 0..m_out {
                    let v = S::dot(&w[co * m_in..(co + 1) * m_in], &column) * gain;
                    let slot = &mut target.coeffs[co * dim + k];
                    *slot = *slot + v;
                }
            }
        }
        Ok(out)
    }
}

/// The `k` samples strictly preceding `i` in time.
pub fn causal_neighbors(i: usize, k: usize) -> Range<usize> {
    i.saturating_sub(k)..i
}

/// Sum of messages to node `i` from `neighbors`, with `r_ij = x_i − x_j`.
///
/// An empty neighborhood yields the zero tensor of the output signature.
pub fn equivariant_forward<S: Real>(
    layer: &EquivariantLayerSpec,
    params: &[S],
    nodes: &[([S; 3], GeometricTensor<S>)],
    i: usize,
    neighbors: impl IntoIterator<Item = usize>,
) -> Result<GeometricTensor<S>, FieldError> {
    let xi = nodes
        .get(i)
        .ok_or(FieldError::Contract("node index out of range"))?
        .0;
    let mut out = GeometricTensor::zeros(layer.output());
    let mut seen = 0usize;
    for j in neighbors {
        let (xj, feats) = nodes
            .get(j)
            .ok_or(FieldError::Contract("neighbor index out of range"))?;
        let r = [xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]];
        out.add_assign(&layer.message(params, r, feats)?)?;
        seen += 1;
    }
    if seen == 0 {
        log::warn!("node {i} has no neighbors; emitting zeros");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_enumeration_respects_parity() {
        let sig_in: Signature = "2x0e+1x1o".parse().unwrap();
        let sig_out: Signature = "1x1o".parse().unwrap();
        let layer =
            EquivariantLayerSpec::new(sig_in, sig_out, &[0, 1, 2], 4, FilterKind::Direction)
                .unwrap();
        // 0e⊗Y1, 1o⊗Y0 and 1o⊗Y2 all land on 1o.
        let got: Vec<(usize, usize)> = layer
            .paths()
            .iter()
            .map(|p| (p.input.degree(), p.filter))
            .collect();
        assert_eq!(got, alloc::vec![(0, 1), (1, 0), (1, 2)]);
        assert_eq!(layer.weight_count(), 2 + 1 + 1);
    }

    #[test]
    fn unreachable_output_is_rejected() {
        let sig_in: Signature = "1x0e".parse().unwrap();
        let sig_out: Signature = "1x1e".parse().unwrap();
        assert!(
            EquivariantLayerSpec::new(sig_in, sig_out, &[0, 1, 2], 4, FilterKind::Direction)
                .is_err()
        );
    }

    #[test]
    fn empty_neighborhood_is_zero() {
        let sig: Signature = "1x0e".parse().unwrap();
        let layer =
            EquivariantLayerSpec::new(sig.clone(), sig.clone(), &[0], 2, FilterKind::Direction)
                .unwrap();
        let p = alloc::vec![0.3; layer.num_params()];
        let nodes = alloc::vec![([0.0; 3], GeometricTensor::from_flat(&sig, &[1.0]).unwrap())];
        let out = equivariant_forward(&layer, &p, &nodes, 0, causal_neighbors(0, 8)).unwrap();
        assert_eq!(out.to_flat(), alloc::vec![0.0]);
    }
}
