use alloc::vec::Vec;

use rand::Rng;

use super::TemporalError;
use crate::diff::Real;
use crate::field::IrrepLinear;
use crate::geom::{
    couple, direction_harmonics, tensor_product, Block, GeometricTensor, IrrepSpec, Parity,
    Signature, L_MAX,
};

/// How attention coefficients are normalized across keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaNorm {
    /// `exp(α_i) / Σ_j exp(α_j)`.
    Softmax,
    /// Raw coefficients.
    Identity,
}

/// How the value of key `i` is carried to the query time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValuePath {
    /// `V_i + (t − t_i) D_i`, both linear in the key features.
    Extrapolated,
    /// `V_i`.
    Held,
}

/// An observation: position (m), time (s) and features.
#[derive(Clone, Debug, PartialEq)]
pub struct Token<S: Real = f64> {
    pub r: [f64; 3],
    pub t: f64,
    pub feats: GeometricTensor<S>,
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
    };
    for i in 0..n {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if libm::fabs(dz) < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(z);
        nodes.push(0.5 * (1.0 + z));
        weights.push(1.0 / ((1.0 - z * z) * dp * dp));
    }
    (nodes, weights)
}

/// `(ℓ_q, ℓ_k, ℓ)` coupling inside the attention integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaPath {
    pub query: IrrepSpec,
    pub key: IrrepSpec,
    pub filter: usize,
}

/// `(ℓ_v, ℓ_mix) → ℓ_out` coupling of the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputPath {
    pub value: IrrepSpec,
    pub filter: usize,
    pub output: IrrepSpec,
}

/// Single-head continuous-time attention with tensor-product coupling.
///
/// Query and key paths over `[t_i, t]` interpolate linearly between the
/// embeddings of the key features (at `t_i`) and the query features
/// (at `t`). The attention coefficient is the interval mean
///
/// `α = (1/(t−t_i)) ∫ Σ Q^(ℓq)(τ) · [K^(ℓk)(τ) ⊗ Y^(ℓ)(r̂ − r̂_i)]^(ℓq) dτ / √d`,
///
/// evaluated by Gauss-Legendre quadrature. At `t = t_i` it is the
/// integrand at `t_i`.
///
/// Layout: `Q`, `K`, `V`, `D` linear maps, then one `mult_out × mult_v`
/// matrix per output path.
#[derive(Clone, Debug, PartialEq)]
pub struct ContiAttention {
    features: Signature,
    output: Signature,
    q: IrrepLinear,
    k: IrrepLinear,
    v: IrrepLinear,
    d: IrrepLinear,
    alpha_paths: Vec<AlphaPath>,
    output_paths: Vec<OutputPath>,
    channels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub norm: AlphaNorm,
    pub value_path: ValuePath,
}

impl ContiAttention {
    /// `qk` must give every irrep the same multiplicity, which is the
    /// number of contracted channels.
    pub fn new(
        features: Signature,
        qk: Signature,
        value: Signature,
        output: Signature,
        filters: &[usize],
        mix: &[usize],
        order: usize,
    ) -> Result<Self, TemporalError> {
        let channels = qk.entries().first().map_or(0, |e| e.1);
        if channels == 0 || qk.entries().iter().any(|e| e.1 != channels) {
            return Err(TemporalError::Contract(
                "query/key irreps need one common multiplicity",
            ));
        }
        if filters.iter().chain(mix).any(|&l| l > L_MAX) || order == 0 {
            return Err(TemporalError::Contract(
                "filter degree or quadrature order out of range",
            ));
        }
        let mut alpha_paths = Vec::new();
        for &(q, _) in qk.entries() {
            for &(k, _) in qk.entries() {
                for &l in filters {
                    let (lq, lk) = (q.degree(), k.degree());
                    if lq >= lk.abs_diff(l)
                        && lq <= lk + l
                        && k.parity().times(Parity::of_harmonic(l)) == q.parity()
                    {
                        alpha_paths.push(AlphaPath {
                            query: q,
                            key: k,
                            filter: l,
                        });
                    }
                }
            }
        }
        if alpha_paths.is_empty() {
            return Err(TemporalError::Contract("no admissible attention path"));
        }
        let mut output_paths = Vec::new();
        for &(o, _) in output.entries() {
            for &(v, _) in value.entries() {
                for &l in mix {
                    let (lv, lo) = (v.degree(), o.degree());
                    if lo >= lv.abs_diff(l)
                        && lo <= lv + l
                        && v.parity().times(Parity::of_harmonic(l)) == o.parity()
                    {
                        output_paths.push(OutputPath {
                            value: v,
                            filter: l,
                            output: o,
                        });
                    }
                }
            }
        }
        let (nodes, weights) = gauss_legendre_unit(order);
        Ok(ContiAttention {
            q: IrrepLinear::new(features.clone(), qk.clone(), false),
            k: IrrepLinear::new(features.clone(), qk, false),
            v: IrrepLinear::new(features.clone(), value.clone(), true),
            d: IrrepLinear::new(features.clone(), value, false),
            features,
            output,
            alpha_paths,
            output_paths,
            channels,
            nodes,
            weights,
            norm: AlphaNorm::Softmax,
            value_path: ValuePath::Extrapolated,
        })
    }

    pub fn features(&self) -> &Signature {
        &self.features
    }

    pub fn output(&self) -> &Signature {
        &self.output
    }

    pub fn alpha_paths(&self) -> &[AlphaPath] {
        &self.alpha_paths
    }

    pub fn output_paths(&self) -> &[OutputPath] {
        &self.output_paths
    }

    fn linear_params(&self) -> usize {
        self.q.num_params() + self.k.num_params() + self.v.num_params() + self.d.num_params()
    }

    fn output_weight_count(&self) -> usize {
        self.output_paths
            .iter()
            .map(|p| self.v.output().multiplicity(p.value) * self.output.multiplicity(p.output))
            .sum()
    }

    pub fn num_params(&self) -> usize {
        self.linear_params() + self.output_weight_count()
    }

    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = self.q.init(rng);
        p.extend(self.k.init(rng));
        p.extend(self.v.init(rng));
        p.extend(self.d.init(rng).into_iter().map(|w| 0.1 * w));
        for path in &self.output_paths {
            let fan_in: usize = self
                .output_paths
                .iter()
                .filter(|q| q.output == path.output)
                .map(|q| self.v.output().multiplicity(q.value))
                .sum();
            let bound = libm::sqrt(3.0 / fan_in as f64) * 2.0 * libm::sqrt(core::f64::consts::PI);
            let n =
                self.v.output().multiplicity(path.value) * self.output.multiplicity(path.output);
            p.extend((0..n).map(|_| rng.random_range(-bound..bound)));
        }
        p
    }

    fn split<'p, S>(&self, params: &'p [S]) -> [&'p [S]; 5] {
        let (q, rest) = params.split_at(self.q.num_params());
        let (k, rest) = rest.split_at(self.k.num_params());
        let (v, rest) = rest.split_at(self.v.num_params());
        let (d, w) = rest.split_at(self.d.num_params());
        [q, k, v, d, w]
    }

    fn check<S: Real>(&self, params: &[S], tokens: &[&Token<S>]) -> Result<(), TemporalError> {
        if params.len() != self.num_params() {
            return Err(TemporalError::Contract(
                "attention parameter count mismatch",
            ));
        }
        if tokens.iter().any(|t| t.feats.signature() != self.features) {
            return Err(TemporalError::Contract("token signature mismatch"));
        }
        Ok(())
    }

    /// Unit direction from `r_i` to `r`, or `None` when they coincide.
    fn direction(r: [f64; 3], ri: [f64; 3]) -> Option<[f64; 3]> {
        let d = [r[0] - ri[0], r[1] - ri[1], r[2] - ri[2]];
        let n = libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        (n > 0.0).then(|| [d[0] / n, d[1] / n, d[2] / n])
    }

    /// The integrand `Σ Q · [K ⊗ Y]` at one instant.
    pub fn integrand<S: Real>(
        &self,
        q: &GeometricTensor<S>,
        k: &GeometricTensor<S>,
        harmonics: &[Option<Vec<f64>>],
    ) -> Result<S, TemporalError> {
        let mut terms = Vec::new();
        for path in &self.alpha_paths {
            let Some(y) = harmonics.get(path.filter).and_then(|y| y.as_ref()) else {
                continue;
            };
            let yq: Vec<S> = y.iter().map(|&v| S::cst(v)).collect();
            let qb = q.block(path.query).expect("query signature");
            let kb = k.block(path.key).expect("key signature");
            for c in 0..self.channels {
                let coupled = couple(path.key.degree(), kb.channel(c), &yq, path.query.degree())?;
                terms.push(S::dot(qb.channel(c), &coupled));
            }
        }
        let dim = (self.channels * self.q.output().entries().len()) as f64;
        Ok(S::sum(&terms).scale(1.0 / libm::sqrt(dim)))
    }

    /// Harmonics `Y^(ℓ)(r̂ − r̂_i)` for each filter degree; only `ℓ = 0`
    /// when the positions coincide.
    fn harmonics(
        &self,
        r: [f64; 3],
        ri: [f64; 3],
        filters: impl Iterator<Item = usize>,
    ) -> Vec<Option<Vec<f64>>> {
        let dir = Self::direction(r, ri);
        let mut out: Vec<Option<Vec<f64>>> = (0..=L_MAX).map(|_| None).collect();
        for l in filters {
            out[l] = match dir {
                Some(u) => Some(direction_harmonics(l, u)),
                None if l == 0 => Some(alloc::vec![0.5 / libm::sqrt(core::f64::consts::PI)]),
                None => None,
            };
        }
        out
    }

    /// Interval mean of `g(s)` over `s ∈ [0, 1]`; `g(0)` for a zero-length
    /// interval.
    pub fn interval_mean<S: Real, G>(&self, zero_length: bool, mut g: G) -> Result<S, TemporalError>
    where
        G: FnMut(f64) -> Result<S, TemporalError>,
    {
        if zero_length {
            return g(0.0);
        }
        let vals = self
            .nodes
            .iter()
            .map(|&s| g(s))
            .collect::<Result<Vec<S>, _>>()?;
        Ok(S::lin(&self.weights, &vals))
    }

    /// α from arbitrary query and key paths parameterized by
    /// `s = (τ − t_i)/(t − t_i)`.
    pub fn alpha_from_paths<S, QP, KP>(
        &self,
        r: [f64; 3],
        ri: [f64; 3],
        zero_length: bool,
        q_path: QP,
        k_path: KP,
    ) -> Result<S, TemporalError>
    where
        S: Real,
        QP: Fn(f64) -> GeometricTensor<S>,
        KP: Fn(f64) -> GeometricTensor<S>,
    {
        let harmonics = self.harmonics(r, ri, self.alpha_paths.iter().map(|p| p.filter));
        self.interval_mean(zero_length, |s| {
            self.integrand(&q_path(s), &k_path(s), &harmonics)
        })
    }

    pub fn attention<S: Real>(
        &self,
        params: &[S],
        query: &Token<S>,
        key: &Token<S>,
    ) -> Result<S, TemporalError> {
        self.check(params, &[query, key])?;
        if query.t < key.t {
            return Err(TemporalError::Domain("key lies after the query"));
        }
        let [qp, kp, ..] = self.split(params);
        let (q0, q1) = (
            self.q.forward(qp, &key.feats)?,
            self.q.forward(qp, &query.feats)?,
        );
        let (k0, k1) = (
            self.k.forward(kp, &key.feats)?,
            self.k.forward(kp, &query.feats)?,
        );
        let lerp = |a: &GeometricTensor<S>, b: &GeometricTensor<S>, s: f64| {
            let flat: Vec<S> = a
                .to_flat()
                .iter()
                .zip(b.to_flat())
                .map(|(&x, y)| x.scale(1.0 - s) + y.scale(s))
                .collect();
            GeometricTensor::from_flat(&a.signature(), &flat).expect("same signature")
        };
        self.alpha_from_paths(
            query.r,
            key.r,
            query.t == key.t,
            |s| lerp(&q0, &q1, s),
            |s| lerp(&k0, &k1, s),
        )
    }

    /// `V_exp` of `key` at the query time.
    pub fn value<S: Real>(
        &self,
        params: &[S],
        key: &Token<S>,
        t: f64,
    ) -> Result<GeometricTensor<S>, TemporalError> {
        let [_, _, vp, dp, _] = self.split(params);
        let mut v = self.v.forward(vp, &key.feats)?;
        if self.value_path == ValuePath::Extrapolated {
            let d = self.d.forward(dp, &key.feats)?;
            let flat: Vec<S> = v
                .to_flat()
                .iter()
                .zip(d.to_flat())
                .map(|(&a, b)| a + b.scale(t - key.t))
                .collect();
            v = GeometricTensor::from_flat(&v.signature(), &flat)?;
        }
        Ok(v)
    }

    /// Normalized attention weights of every key for `query`.
    pub fn weights<S: Real>(
        &self,
        params: &[S],
        keys: &[Token<S>],
        query: &Token<S>,
    ) -> Result<Vec<S>, TemporalError> {
        let alphas = keys
            .iter()
            .map(|k| self.attention(params, query, k))
            .collect::<Result<Vec<S>, _>>()?;
        Ok(match self.norm {
            AlphaNorm::Identity => alphas,
            AlphaNorm::Softmax => {
                let shift = alphas
                    .iter()
                    .map(|a| a.val())
                    .fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<S> = alphas.iter().map(|&a| (a - S::cst(shift)).exp()).collect();
                let inv = S::one() / S::sum(&e);
                e.into_iter().map(|x| x * inv).collect()
            }
        })
    }

    pub fn output_for<S: Real>(
        &self,
        params: &[S],
        keys: &[Token<S>],
        query: &Token<S>,
    ) -> Result<GeometricTensor<S>, TemporalError> {
        if keys.is_empty() {
            return Err(TemporalError::Degenerate("attention over zero keys"));
        }
        let a = self.weights(params, keys, query)?;
        let [.., wp] = self.split(params);
        let mut out = GeometricTensor::zeros(&self.output);
        for (key, &ai) in keys.iter().zip(&a) {
            let v = self.value(params, key, query.t)?;
            let harmonics =
                self.harmonics(query.r, key.r, self.output_paths.iter().map(|p| p.filter));
            let mut off = 0;
            for path in &self.output_paths {
                let m_v = self.v.output().multiplicity(path.value);
                let m_o = self.output.multiplicity(path.output);
                let w = &wp[off..off + m_v * m_o];
                off += m_v * m_o;
                let Some(y) = &harmonics[path.filter] else {
                    continue;
                };
                let vb = v.block(path.value).expect("value signature");
                let scaled = Block {
                    irrep: vb.irrep,
                    mult: vb.mult,
                    coeffs: vb.coeffs.iter().map(|&c| c * ai).collect(),
                };
                let yq: Vec<S> = y.iter().map(|&c| S::cst(c)).collect();
                let coupled = tensor_product(&scaled, &yq, path.output.degree())?;
                let dim = path.output.dim();
                let target = out.block_mut(path.output).expect("output irrep");
                let mut column = Vec::with_capacity(m_v);
                for k in 0..dim {
                    column.clear();
                    column.extend((0..m_v).map(|c| coupled.coeffs[c * dim + k]));
                    for co in 0..m_o {
                        let slot = &mut target.coeffs[co * dim + k];
                        *slot = *slot + S::dot(&w[co * m_v..(co + 1) * m_v], &column);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// α between a query and one key.
pub fn conti_attention<S: Real>(
    att: &ContiAttention,
    params: &[S],
    query: &Token<S>,
    key: &Token<S>,
) -> Result<S, TemporalError> {
    att.attention(params, query, key)
}

/// Attention output at `query` over `keys`.
pub fn conti_output<S: Real>(
    att: &ContiAttention,
    params: &[S],
    keys: &[Token<S>],
    query: &Token<S>,
) -> Result<GeometricTensor<S>, TemporalError> {
    att.output_for(params, keys, query)
}
