use alloc::vec::Vec;

use rand::Rng;

use super::TrainError;
use crate::diff::Real;
use crate::field::{
    equivariant_forward, squash, ConstraintFlags, EquivariantLayerSpec, FieldModel, FilterKind,
    IrrepLinear, Mlp,
};
use crate::geom::{GeometricTensor, IrrepSpec, Signature};
use crate::linalg::{self, Vec3};
use crate::synth::Window;
use crate::temporal::{ContiAttention, EquivariantLtcCell, LtcCell, Token};

/// Metres per model length unit.
pub const POSITION_SCALE: f64 = 1000.0;

/// Per-sample scalar features: measured vector, its norm, the three body
/// axes and the ambient core field.
pub const SCALAR_FEATURES: usize = 16;

/// Scalar channels of the equivariant features: `|m|`, `|B₀|`, `m·B₀`, and
/// `m·aₖ`, `B₀·aₖ` for the body axes `aₖ`.
pub const INVARIANT_FEATURES: usize = 9;

/// nT per model unit of the ambient core field.
pub const AMBIENT_SCALE: f64 = 50_000.0;

/// Quadrature order used inside the attention backbone.
pub const ATTENTION_ORDER: usize = 8;

const CNN_LAYERS: usize = 3;
const CNN_KERNEL: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backbone {
    Mlp,
    Cnn1d,
    Ltc,
    Contiformer,
}

impl Backbone {
    pub const ALL: [Backbone; 4] = [
        Backbone::Mlp,
        Backbone::Cnn1d,
        Backbone::Ltc,
        Backbone::Contiformer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backbone::Mlp => "mlp",
            Backbone::Cnn1d => "cnn1d",
            Backbone::Ltc => "ltc",
            Backbone::Contiformer => "contiformer",
        }
    }
}

impl core::str::FromStr for Backbone {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Backbone::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or(TrainError::Domain("unknown backbone"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    None,
    DivFree,
    Equivariant,
    Both,
}

impl Constraint {
    pub const ALL: [Constraint; 4] = [
        Constraint::None,
        Constraint::DivFree,
        Constraint::Equivariant,
        Constraint::Both,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constraint::None => "none",
            Constraint::DivFree => "div_free",
            Constraint::Equivariant => "equivariant",
            Constraint::Both => "both",
        }
    }

    pub fn flags(self) -> ConstraintFlags {
        match self {
            Constraint::None => ConstraintFlags::NONE,
            Constraint::DivFree => ConstraintFlags::DIV_FREE,
            Constraint::Equivariant => ConstraintFlags::EQUIVARIANT,
            Constraint::Both => ConstraintFlags::BOTH,
        }
    }
}

impl core::str::FromStr for Constraint {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Constraint::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or(TrainError::Domain("unknown constraint"))
    }
}

/// Everything needed to rebuild a denoiser's structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenoiserSpec {
    pub backbone: Backbone,
    pub constraint: Constraint,
    /// Context width; the equivariant variants carry this many 0e and 1o
    /// channels each.
    pub hidden: usize,
    /// Samples visible to the MLP and attention backbones, including the
    /// current one.
    pub lags: usize,
    pub decoder_hidden: usize,
    pub radial_hidden: usize,
    /// nT per model field unit.
    pub field_scale: f64,
}

impl DenoiserSpec {
    pub fn new(backbone: Backbone, constraint: Constraint) -> Self {
        DenoiserSpec {
            backbone,
            constraint,
            hidden: 8,
            lags: 4,
            decoder_hidden: 8,
            radial_hidden: 4,
            field_scale: 100.0,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.hidden < 2 || self.lags == 0 || self.decoder_hidden == 0 || self.radial_hidden == 0
        {
            return Err(TrainError::Domain(
                "model sizes must be positive (hidden ≥ 2)",
            ));
        }
        if !(self.field_scale > 0.0) {
            return Err(TrainError::Domain("field scale must be positive"));
        }
        Ok(())
    }

    /// Invariants (norms and axis contractions) plus the measured vector,
    /// the three body axes and the ambient field.
    pub fn feature_signature() -> Signature {
        Signature::new([
            (IrrepSpec::SCALAR, INVARIANT_FEATURES),
            (IrrepSpec::VECTOR, 5),
        ])
    }

    /// `hidden` copies each of 0e and 1o.
    pub fn context_signature(&self) -> Signature {
        Signature::new([
            (IrrepSpec::SCALAR, self.hidden),
            (IrrepSpec::VECTOR, self.hidden),
        ])
    }

    /// Context plus one gate scalar per vector channel.
    fn gated_signature(&self) -> Signature {
        Signature::new([
            (IrrepSpec::SCALAR, 2 * self.hidden),
            (IrrepSpec::VECTOR, self.hidden),
        ])
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Net {
    Mlp(Mlp),
    EqMlp(EquivariantLayerSpec, IrrepLinear),
    Cnn(Vec<(usize, usize)>),
    EqCnn(Vec<EquivariantLayerSpec>),
    Ltc(LtcCell),
    EqLtc(EquivariantLtcCell),
    Attention(ContiAttention),
    EqAttention(ContiAttention),
}

impl Net {
    fn build(spec: &DenoiserSpec) -> Result<Self, TrainError> {
        let h = spec.hidden;
        let eq = spec.constraint.flags().equivariant;
        let feat = DenoiserSpec::feature_signature();
        let ctx = spec.context_signature();
        let gated = spec.gated_signature();
        let scalars = |n: usize| Signature::new([(IrrepSpec::SCALAR, n)]);
        Ok(match (spec.backbone, eq) {
            (Backbone::Mlp, false) => Net::Mlp(Mlp::new(&[SCALAR_FEATURES * spec.lags, h, h])),
            (Backbone::Mlp, true) => Net::EqMlp(
                EquivariantLayerSpec::new(
                    feat,
                    gated,
                    &[0, 1],
                    spec.radial_hidden,
                    FilterKind::Direction,
                )?,
                IrrepLinear::new(ctx.clone(), ctx, true),
            ),
            (Backbone::Cnn1d, false) => {
                let mut layers = Vec::with_capacity(CNN_LAYERS);
                layers.push((SCALAR_FEATURES, h));
                layers.extend(core::iter::repeat_n((h, h), CNN_LAYERS - 1));
                Net::Cnn(layers)
            }
            (Backbone::Cnn1d, true) => {
                let mut layers = Vec::with_capacity(CNN_LAYERS);
                let mut input = feat;
                for _ in 0..CNN_LAYERS {
                    layers.push(EquivariantLayerSpec::new(
                        input.clone(),
                        gated.clone(),
                        &[0, 1],
                        spec.radial_hidden,
                        FilterKind::Direction,
                    )?);
                    input = ctx.clone();
                }
                Net::EqCnn(layers)
            }
            (Backbone::Ltc, false) => Net::Ltc(LtcCell::new(SCALAR_FEATURES, h)),
            (Backbone::Ltc, true) => Net::EqLtc(EquivariantLtcCell::new(&feat, &ctx)?),
            (Backbone::Contiformer, false) => Net::Attention(ContiAttention::new(
                scalars(SCALAR_FEATURES),
                scalars(4),
                scalars(h),
                scalars(h),
                &[0],
                &[0],
                ATTENTION_ORDER,
            )?),
            (Backbone::Contiformer, true) => Net::EqAttention(ContiAttention::new(
                feat,
                Signature::new([(IrrepSpec::SCALAR, 2), (IrrepSpec::VECTOR, 2)]),
                ctx,
                gated,
                &[0, 1],
                &[0, 1],
                ATTENTION_ORDER,
            )?),
        })
    }

    fn num_params(&self) -> usize {
        match self {
            Net::Mlp(m) => m.num_params(),
            Net::EqMlp(l, lin) => l.num_params() + lin.num_params(),
            Net::Cnn(layers) => layers.iter().map(|&(i, o)| o * i * CNN_KERNEL + o).sum(),
            Net::EqCnn(layers) => layers.iter().map(|l| l.num_params()).sum(),
            Net::Ltc(c) => c.num_params(),
            Net::EqLtc(c) => c.num_params(),
            Net::Attention(a) | Net::EqAttention(a) => a.num_params(),
        }
    }

    fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Net::Mlp(m) => m.init(rng),
            Net::EqMlp(l, lin) => {
                let mut p = l.init(rng);
                p.extend(lin.init(rng));
                p
            }
            Net::Cnn(layers) => {
                let mut p = Vec::new();
                for &(i, o) in layers {
                    let bound = libm::sqrt(6.0 / ((i + o) * CNN_KERNEL) as f64);
                    p.extend((0..o * i * CNN_KERNEL).map(|_| rng.random_range(-bound..bound)));
                    p.extend(core::iter::repeat_n(0.0, o));
                }
                p
            }
            Net::EqCnn(layers) => layers.iter().flat_map(|l| l.init(rng)).collect(),
            Net::Ltc(c) => c.init(rng),
            Net::EqLtc(c) => c.init(rng),
            Net::Attention(a) | Net::EqAttention(a) => a.init(rng),
        }
    }
}

/// Per-window inputs in model units.
struct Prepared<S: Real> {
    times: Vec<f64>,
    positions: Vec<[S; 3]>,
    scalar: Vec<Vec<S>>,
    tensor: Vec<GeometricTensor<S>>,
}

/// Gate nonlinearity: `tanh` on the first `n` scalars, and every vector
/// channel `k` scaled by `σ(2 s_{n+k})`, where `n` is the number of scalars
/// left over after one gate per vector channel.
fn gate<S: Real>(x: &GeometricTensor<S>) -> Result<GeometricTensor<S>, TrainError> {
    let scalars = x
        .block(IrrepSpec::SCALAR)
        .map_or(&[][..], |b| &b.coeffs[..]);
    let vectors = x
        .block(IrrepSpec::VECTOR)
        .map_or(&[][..], |b| &b.coeffs[..]);
    let nv = vectors.len() / 3;
    let ns = scalars.len().checked_sub(nv).ok_or(TrainError::Contract(
        "gate needs one scalar per vector channel",
    ))?;
    let mut flat: Vec<S> = scalars[..ns].iter().map(|s| s.tanh()).collect();
    for k in 0..nv {
        let g = (S::one() + scalars[ns + k].tanh()).scale(0.5);
        flat.extend(vectors[3 * k..3 * k + 3].iter().map(|&v| v * g));
    }
    let sig = Signature::new([(IrrepSpec::SCALAR, ns), (IrrepSpec::VECTOR, nv)]);
    Ok(GeometricTensor::from_flat(&sig, &flat)?)
}

/// Cartesian `(x, y, z)` to the harmonic order `(y, z, x)` of a 1o block.
fn harmonic_order<T: Copy>(v: [T; 3]) -> [T; 3] {
    [v[1], v[2], v[0]]
}

/// A temporal backbone feeding a field decoder, predicting the clean
/// field at every sample of a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Denoiser {
    spec: DenoiserSpec,
    net: Net,
    decoder: FieldModel,
    params: Vec<f64>,
}

impl Denoiser {
    pub fn new<R: Rng + ?Sized>(spec: DenoiserSpec, rng: &mut R) -> Result<Self, TrainError> {
        spec.validate()?;
        let net = Net::build(&spec)?;
        let flags = spec.constraint.flags();
        let decoder = if flags.equivariant {
            FieldModel::equivariant(
                spec.context_signature(),
                &[0, 1, 2],
                spec.radial_hidden,
                flags.divergence_free,
                rng,
            )?
        } else {
            FieldModel::contextual_mlp(
                &[spec.decoder_hidden],
                spec.hidden,
                flags.divergence_free,
                rng,
            )
        };
        let mut params = net.init(rng);
        params.extend_from_slice(decoder.params());
        Ok(Denoiser {
            spec,
            net,
            decoder,
            params,
        })
    }

    pub fn spec(&self) -> &DenoiserSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn backbone_params(&self) -> usize {
        self.net.num_params()
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), TrainError> {
        if params.len() != self.params.len() {
            return Err(TrainError::Contract(
                "parameter count does not match the model",
            ));
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(TrainError::NonFiniteParameter(i));
        }
        self.params = params;
        Ok(())
    }

    pub fn decoder(&self) -> &FieldModel {
        &self.decoder
    }

    fn prepare<S: Real>(&self, w: &Window) -> Result<Prepared<S>, TrainError> {
        if w.is_empty() {
            return Err(TrainError::Domain("empty window"));
        }
        let k = 1.0 / self.spec.field_scale;
        let origin = w.positions[0];
        let ambient = w.ambient.map(|v| v / AMBIENT_SCALE);
        let feat_sig = DenoiserSpec::feature_signature();
        let mut scalar = Vec::with_capacity(w.len());
        let mut tensor = Vec::with_capacity(w.len());
        let mut positions = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let m = [w.inputs[i][0] * k, w.inputs[i][1] * k, w.inputs[i][2] * k];
            let norm = w.inputs[i][3] * k;
            let r = &w.orientations[i];
            let axes: [Vec3; 3] = core::array::from_fn(|c| [r[0][c], r[1][c], r[2][c]]);
            let mut s = Vec::with_capacity(SCALAR_FEATURES);
            s.extend(m.map(S::cst));
            s.push(S::cst(norm));
            for a in &axes {
                s.extend(a.map(S::cst));
            }
            s.extend(ambient.map(S::cst));
            let mut flat = Vec::with_capacity(INVARIANT_FEATURES + 15);
            flat.push(S::cst(norm));
            flat.push(S::cst(linalg::norm(ambient)));
            flat.push(S::cst(linalg::dot(m, ambient)));
            for a in &axes {
                flat.push(S::cst(linalg::dot(m, *a)));
            }
            for a in &axes {
                flat.push(S::cst(linalg::dot(ambient, *a)));
            }
            flat.extend(harmonic_order(m).map(S::cst));
            for a in &axes {
                flat.extend(harmonic_order(*a).map(S::cst));
            }
            flat.extend(harmonic_order(ambient).map(S::cst));
            scalar.push(s);
            tensor.push(GeometricTensor::from_flat(&feat_sig, &flat)?);
            let rel = linalg::sub(w.positions[i], origin);
            positions.push(rel.map(|v| S::cst(v / POSITION_SCALE)));
        }
        Ok(Prepared {
            times: w.times.clone(),
            positions,
            scalar,
            tensor,
        })
    }

    /// Context vector (flat) for every sample.
    fn contexts<S: Real>(&self, p: &[S], x: &Prepared<S>) -> Result<Vec<Vec<S>>, TrainError> {
        let n = x.times.len();
        let lags = self.spec.lags;
        let window = |i: usize| (i + 1).saturating_sub(lags)..i + 1;
        let dt = |i: usize| -> f64 {
            if i == 0 {
                if n > 1 {
                    x.times[1] - x.times[0]
                } else {
                    0.0
                }
            } else {
                x.times[i] - x.times[i - 1]
            }
        };
        let mut out = Vec::with_capacity(n);
        match &self.net {
            Net::Mlp(m) => {
                let zeros = alloc::vec![S::zero(); SCALAR_FEATURES];
                for i in 0..n {
                    let mut input = Vec::with_capacity(SCALAR_FEATURES * lags);
                    for l in 0..lags {
                        input.extend_from_slice(if i >= l { &x.scalar[i - l] } else { &zeros });
                    }
                    out.push(m.forward(p, &input).into_iter().map(S::tanh).collect());
                }
            }
            Net::EqMlp(layer, lin) => {
                let (lp, linp) = p.split_at(layer.num_params());
                let nodes: Vec<_> = x
                    .positions
                    .iter()
                    .copied()
                    .zip(x.tensor.iter().cloned())
                    .collect();
                for i in 0..n {
                    let msg = equivariant_forward(layer, lp, &nodes, i, window(i))?;
                    out.push(lin.forward(linp, &gate(&msg)?)?.to_flat());
                }
            }
            Net::Cnn(layers) => {
                let mut h: Vec<Vec<S>> = x.scalar.clone();
                let mut off = 0;
                for &(cin, cout) in layers {
                    let w = &p[off..off + cout * cin * CNN_KERNEL];
                    let b = &p[off + cout * cin * CNN_KERNEL..off + cout * cin * CNN_KERNEL + cout];
                    off += cout * cin * CNN_KERNEL + cout;
                    let next: Vec<Vec<S>> = (0..n)
                        .map(|i| {
                            (0..cout)
                                .map(|o| {
                                    let mut acc = b[o];
                                    for k in 0..CNN_KERNEL.min(i + 1) {
                                        let row = &w[(o * cin) * CNN_KERNEL..];
                                        for c in 0..cin {
                                            acc = acc + row[c * CNN_KERNEL + k] * h[i - k][c];
                                        }
                                    }
                                    acc.tanh()
                                })
                                .collect()
                        })
                        .collect();
                    h = next;
                }
                out = h;
            }
            Net::EqCnn(layers) => {
                let mut feats = x.tensor.clone();
                let mut off = 0;
                for layer in layers {
                    let lp = &p[off..off + layer.num_params()];
                    off += layer.num_params();
                    let nodes: Vec<_> = x
                        .positions
                        .iter()
                        .copied()
                        .zip(feats.iter().cloned())
                        .collect();
                    feats = (0..n)
                        .map(|i| {
                            let i0 = (i + 1).saturating_sub(CNN_KERNEL);
                            gate(&equivariant_forward(layer, lp, &nodes, i, i0..i + 1)?)
                        })
                        .collect::<Result<_, _>>()?;
                }
                out = feats.iter().map(|t| t.to_flat()).collect();
            }
            Net::Ltc(cell) => {
                let mut h = alloc::vec![S::zero(); cell.hidden_dim()];
                for i in 0..n {
                    h = cell.step(p, &h, &x.scalar[i], dt(i))?;
                    out.push(h.clone());
                }
            }
            Net::EqLtc(cell) => {
                let mut h = GeometricTensor::zeros(&cell.state_signature());
                for i in 0..n {
                    h = cell.step(p, &h, &x.tensor[i], dt(i))?;
                    out.push(h.to_flat());
                }
            }
            Net::Attention(att) | Net::EqAttention(att) => {
                let scalar_sig = Signature::new([(IrrepSpec::SCALAR, SCALAR_FEATURES)]);
                let tokens = (0..n)
                    .map(|i| {
                        let feats = match &self.net {
                            Net::Attention(_) => {
                                GeometricTensor::from_flat(&scalar_sig, &x.scalar[i])?
                            }
                            _ => x.tensor[i].clone(),
                        };
                        Ok(Token {
                            r: crate::diff::values3(&x.positions[i]),
                            t: x.times[i],
                            feats,
                        })
                    })
                    .collect::<Result<Vec<_>, TrainError>>()?;
                for i in 0..n {
                    let o = att.output_for(p, &tokens[window(i)], &tokens[i])?;
                    out.push(match &self.net {
                        Net::Attention(_) => squash(&o).to_flat(),
                        _ => gate(&o)?.to_flat(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Predictions in model units with externally supplied parameters.
    pub fn forward<S: Real>(&self, params: &[S], w: &Window) -> Result<Vec<[S; 3]>, TrainError> {
        if params.len() != self.params.len() {
            return Err(TrainError::Contract(
                "parameter count does not match the model",
            ));
        }
        let x = self.prepare::<S>(w)?;
        let (bp, dp) = params.split_at(self.net.num_params());
        let ctx = self.contexts(bp, &x)?;
        ctx.iter()
            .zip(&x.positions)
            .map(|(c, &pos)| Ok(self.decoder.field_with(dp, pos, c)?))
            .collect()
    }

    /// Mean squared error against the window targets, in model units.
    pub fn loss<S: Real>(&self, params: &[S], w: &Window) -> Result<S, TrainError> {
        let pred = self.forward(params, w)?;
        let k = 1.0 / self.spec.field_scale;
        let mut terms = Vec::with_capacity(3 * pred.len());
        for (p, t) in pred.iter().zip(&w.targets) {
            for c in 0..3 {
                terms.push((p[c] - S::cst(t[c] * k)).square());
            }
        }
        Ok(S::sum(&terms).scale(1.0 / pred.len() as f64))
    }

    /// Predicted clean field (nT) at every sample.
    pub fn predict(&self, w: &Window) -> Result<Vec<Vec3>, TrainError> {
        let pred = self.forward(&self.params, w)?;
        let out: Vec<Vec3> = pred
            .iter()
            .map(|p| p.map(|v| v * self.spec.field_scale))
            .collect();
        if out.iter().flatten().any(|v| !v.is_finite()) {
            return Err(TrainError::NonFinite("prediction"));
        }
        Ok(out)
    }

    /// `|∇·B̂| / ‖∇B̂‖` of the decoder at every sample of `w`, with the
    /// context held fixed.
    pub fn divergence_diagnostic(&self, w: &Window) -> Result<Vec<f64>, TrainError> {
        let x = self.prepare::<f64>(w)?;
        let (bp, dp) = self.params.split_at(self.net.num_params());
        let ctx = self.contexts(bp, &x)?;
        ctx.iter()
            .zip(&x.positions)
            .map(|(c, &pos)| Ok(self.decoder_jet(dp, c, pos)?.1))
            .collect()
    }

    /// Decoder field (nT) and relative divergence at `offsets` (m) from
    /// sample `k`, with sample `k`'s context held fixed.
    pub fn probe(
        &self,
        w: &Window,
        k: usize,
        offsets: &[Vec3],
    ) -> Result<Vec<(Vec3, f64)>, TrainError> {
        if k >= w.len() {
            return Err(TrainError::Domain("probe sample outside the window"));
        }
        let x = self.prepare::<f64>(w)?;
        let (bp, dp) = self.params.split_at(self.net.num_params());
        let ctx = self.contexts(bp, &x)?;
        offsets
            .iter()
            .map(|o| {
                let pos = core::array::from_fn(|c| x.positions[k][c] + o[c] / POSITION_SCALE);
                let (b, div) = self.decoder_jet(dp, &ctx[k], pos)?;
                Ok((b.map(|v| v * self.spec.field_scale), div))
            })
            .collect()
    }

    fn decoder_jet(&self, dp: &[f64], ctx: &[f64], pos: Vec3) -> Result<(Vec3, f64), TrainError> {
        use crate::diff::Dual;
        let lp: Vec<Dual<f64, 3>> = dp.iter().map(|&v| Dual::constant(v)).collect();
        let lc: Vec<Dual<f64, 3>> = ctx.iter().map(|&v| Dual::constant(v)).collect();
        let xd: [Dual<f64, 3>; 3] = core::array::from_fn(|k| Dual::seeded(pos[k], k));
        let b = self.decoder.field_with(&lp, xd, &lc)?;
        let div = b[0].d[0] + b[1].d[1] + b[2].d[2];
        let scale = libm::sqrt(b.iter().flat_map(|c| c.d).map(|d| d * d).sum::<f64>());
        let rel = if scale == 0.0 {
            0.0
        } else {
            libm::fabs(div) / scale
        };
        Ok((b.map(|c| c.v), rel))
    }
}
