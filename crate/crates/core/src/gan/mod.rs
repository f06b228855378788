//! Conditional sequence GAN: a recurrent generator and a recurrent
//! discriminator with an adversarial head and a class head.
//!
//! Sequences are `length × channels`, row-major, with values in `[−1, 1]`.

mod gru;

pub use gru::Gru;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diff::{param_gradient, DiffError, Real};
use crate::synth::{Window, CHANNELS, NUM_CLASSES};
use crate::train::{clip_grad_norm, Adam};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GanError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("contract violated: {0}")]
    Contract(&'static str),
    #[error("non-finite {what} at step {step} (d_loss {d_loss}, g_loss {g_loss})")]
    NonFinite {
        step: u64,
        what: &'static str,
        d_loss: f64,
        g_loss: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GanConfig {
    pub latent: usize,
    pub classes: usize,
    /// Sequence length `T`.
    pub length: usize,
    pub channels: usize,
    /// Recurrent width.
    pub hidden: usize,
    /// Width of the class embedding.
    pub embed: usize,
    /// Per-step width of the generator's expanded input.
    pub step_width: usize,
    /// Target for real samples in the adversarial loss.
    pub smoothing: f64,
    /// Weight of the classification terms.
    pub lambda: f64,
    pub learning_rate: f64,
    pub betas: (f64, f64),
    pub weight_decay: f64,
    pub clip: f64,
    pub batch_size: usize,
    /// Use `+E log(1 − D(fake))` in the discriminator loss instead of the
    /// standard `−E log(1 − D(fake))`.
    pub printed_sign: bool,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            latent: 16,
            classes: NUM_CLASSES,
            length: 100,
            channels: CHANNELS,
            hidden: 32,
            embed: 8,
            step_width: 8,
            smoothing: 0.9,
            lambda: 1.0,
            learning_rate: 1e-4,
            betas: (0.5, 0.999),
            weight_decay: 1e-2,
            clip: 1.0,
            batch_size: 8,
            printed_sign: false,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<(), GanError> {
        if self.classes < 2 || self.length < 2 {
            return Err(GanError::Domain("need at least 2 classes and 2 time steps"));
        }
        if self.latent == 0
            || self.channels == 0
            || self.hidden == 0
            || self.embed == 0
            || self.step_width == 0
        {
            return Err(GanError::Domain("layer widths must be positive"));
        }
        if !(self.lambda >= 0.0) || !(0.0..=1.0).contains(&self.smoothing) {
            return Err(GanError::Domain(
                "lambda must be ≥ 0 and smoothing in [0, 1]",
            ));
        }
        if !(self.learning_rate > 0.0) || !(self.clip > 0.0) || self.batch_size == 0 {
            return Err(GanError::Domain(
                "learning rate, clip and batch size must be positive",
            ));
        }
        Ok(())
    }
}

/// A labelled sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// `length × channels`, row-major.
    pub x: Vec<f64>,
    pub class: usize,
}

/// Generator and discriminator parameters plus one power-iteration vector
/// per spectrally normalized matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GanParams {
    pub generator: Vec<f64>,
    pub discriminator: Vec<f64>,
    pub power: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GanOptimizer {
    pub generator: Adam,
    pub discriminator: Adam,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub step: u64,
    pub d_loss: f64,
    pub g_loss: f64,
    /// Pre-clip gradient norms.
    pub d_grad_norm: f64,
    pub g_grad_norm: f64,
}

/// Shapes and parameter layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Gan {
    cfg: GanConfig,
    g_cell: Gru,
    d_cell: Gru,
}

struct Split<'a, S> {
    head: &'a [S],
    rest: &'a [S],
}

fn take<S>(p: &[S], n: usize) -> Split<'_, S> {
    let (head, rest) = p.split_at(n);
    Split { head, rest }
}

fn log_sigmoid<S: Real>(a: S) -> S {
    // −softplus(−a), stable for large |a|
    let m = S::zero().max(-a);
    -(m + ((-m).exp() + (-a - m).exp()).ln())
}

fn log_softmax_at<S: Real>(logits: &[S], k: usize) -> S {
    let shift = logits
        .iter()
        .map(|l| l.val())
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<S> = logits.iter().map(|&l| (l - S::cst(shift)).exp()).collect();
    logits[k] - S::cst(shift) - S::sum(&exps).ln()
}

/// Adversarial part of the discriminator loss from head logits: real
/// samples against the smoothed target, generated samples against 0.
pub fn discriminator_adversarial_loss<S: Real>(
    real: &[S],
    fake: &[S],
    smoothing: f64,
    printed_sign: bool,
) -> S {
    let real_terms: Vec<S> = real
        .iter()
        .map(|&a| -(log_sigmoid(a).scale(smoothing) + log_sigmoid(-a).scale(1.0 - smoothing)))
        .collect();
    let fake_terms: Vec<S> = fake.iter().map(|&a| log_sigmoid(-a)).collect();
    let fake_mean = S::sum(&fake_terms).scale(1.0 / fake.len().max(1) as f64);
    let real_mean = S::sum(&real_terms).scale(1.0 / real.len().max(1) as f64);
    if printed_sign {
        real_mean + fake_mean
    } else {
        real_mean - fake_mean
    }
}

/// Adversarial part of the generator loss from the logits on generated
/// samples: `−E log D(fake)`.
pub fn generator_adversarial_loss<S: Real>(fake: &[S]) -> S {
    let terms: Vec<S> = fake.iter().map(|&a| -log_sigmoid(a)).collect();
    S::sum(&terms).scale(1.0 / fake.len().max(1) as f64)
}

/// Mean cross-entropy of class logits against labels.
pub fn cross_entropy<S: Real>(logits: &[Vec<S>], labels: &[usize]) -> S {
    let terms: Vec<S> = logits
        .iter()
        .zip(labels)
        .map(|(l, &c)| -log_softmax_at(l, c))
        .collect();
    S::sum(&terms).scale(1.0 / labels.len().max(1) as f64)
}

impl Gan {
    pub fn new(cfg: GanConfig) -> Result<Self, GanError> {
        cfg.validate()?;
        Ok(Gan {
            cfg,
            g_cell: Gru::new(cfg.step_width, cfg.hidden),
            d_cell: Gru::new(cfg.channels, cfg.hidden),
        })
    }

    pub fn config(&self) -> &GanConfig {
        &self.cfg
    }

    fn expansion_params(&self) -> usize {
        let c = &self.cfg;
        (c.latent + c.embed) * c.length * c.step_width + c.length * c.step_width
    }

    /// Embedding, expansion, recurrent cell, output projection.
    pub fn generator_params(&self) -> usize {
        let c = &self.cfg;
        c.classes * c.embed
            + self.expansion_params()
            + self.g_cell.num_params()
            + c.channels * c.hidden
            + c.channels
    }

    /// Class projection, recurrent cell, adversarial head, class head.
    pub fn discriminator_params(&self) -> usize {
        let c = &self.cfg;
        c.classes * c.hidden
            + self.d_cell.num_params()
            + c.hidden
            + 1
            + c.classes * c.hidden
            + c.classes
    }

    /// Spectrally normalized matrices: the three recurrent blocks of the
    /// discriminator cell.
    pub fn normalized_matrices(&self) -> usize {
        3
    }

    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> GanParams {
        let c = &self.cfg;
        let mut g = Vec::with_capacity(self.generator_params());
        g.extend((0..c.classes * c.embed).map(|_| rng.random_range(-1.0..1.0)));
        let fan = c.latent + c.embed;
        let bound = libm::sqrt(3.0 / fan as f64);
        g.extend((0..fan * c.length * c.step_width).map(|_| rng.random_range(-bound..bound)));
        g.extend(core::iter::repeat_n(0.0, c.length * c.step_width));
        g.extend(self.g_cell.init(rng));
        let bound = libm::sqrt(6.0 / (c.hidden + c.channels) as f64);
        g.extend((0..c.channels * c.hidden).map(|_| rng.random_range(-bound..bound)));
        g.extend(core::iter::repeat_n(0.0, c.channels));

        let mut d = Vec::with_capacity(self.discriminator_params());
        let bound = libm::sqrt(3.0 / c.hidden as f64);
        d.extend((0..c.classes * c.hidden).map(|_| rng.random_range(-0.1 * bound..0.1 * bound)));
        d.extend(self.d_cell.init(rng));
        d.extend((0..c.hidden).map(|_| rng.random_range(-bound..bound)));
        d.push(0.0);
        // class head starts at zero: uniform predictions, no class favoured
        d.extend(core::iter::repeat_n(0.0, c.classes * (c.hidden + 1)));

        let mut power = Vec::with_capacity(3 * c.hidden);
        for _ in 0..self.normalized_matrices() {
            let u: Vec<f64> = (0..c.hidden).map(|_| StandardNormal.sample(rng)).collect();
            power.extend(normalize(&u));
        }
        let mut params = GanParams {
            generator: g,
            discriminator: d,
            power,
        };
        // settle the estimates before the first step
        for _ in 0..30 {
            self.power_iteration(&mut params);
        }
        params
    }

    fn check(&self, p: &GanParams) -> Result<(), GanError> {
        if p.generator.len() != self.generator_params()
            || p.discriminator.len() != self.discriminator_params()
            || p.power.len() != self.normalized_matrices() * self.cfg.hidden
        {
            return Err(GanError::Contract(
                "parameter shapes do not match the configuration",
            ));
        }
        Ok(())
    }

    fn recurrent_block<'a, S>(&self, dp: &'a [S], k: usize) -> &'a [S] {
        let h = self.cfg.hidden;
        let cell = &dp[self.cfg.classes * h..];
        self.d_cell.recurrent(cell, k)
    }

    /// One power-iteration update of every stored vector.
    pub fn power_iteration(&self, p: &mut GanParams) {
        let h = self.cfg.hidden;
        for k in 0..self.normalized_matrices() {
            let w = self.recurrent_block(&p.discriminator, k);
            let u = &mut p.power[k * h..(k + 1) * h];
            let v = normalize(&mat_t_vec(w, u, h));
            let wu = normalize(&mat_vec(w, &v, h));
            u.copy_from_slice(&wu);
        }
    }

    /// `uᵀWv` for every normalized matrix, with `v ∝ Wᵀu` from the stored
    /// vectors.
    pub fn spectral_estimates(&self, p: &GanParams) -> Vec<f64> {
        let h = self.cfg.hidden;
        (0..self.normalized_matrices())
            .map(|k| {
                let w = self.recurrent_block(&p.discriminator, k);
                let u = &p.power[k * h..(k + 1) * h];
                let v = normalize(&mat_t_vec(w, u, h));
                dot(u, &mat_vec(w, &v, h))
            })
            .collect()
    }

    /// Top singular value of each matrix actually used in the forward pass
    /// (`W / σ̂`), measured with `iterations` fresh power iterations.
    pub fn normalized_spectral_norms(&self, p: &GanParams, iterations: usize) -> Vec<f64> {
        let h = self.cfg.hidden;
        let est = self.spectral_estimates(p);
        (0..self.normalized_matrices())
            .map(|k| {
                let w = self.recurrent_block(&p.discriminator, k);
                top_singular_value(w, h, &p.power[k * h..(k + 1) * h], iterations) / est[k]
            })
            .collect()
    }

    pub fn generator_forward<S: Real>(
        &self,
        gp: &[S],
        z: &[S],
        class: usize,
    ) -> Result<Vec<S>, GanError> {
        let c = &self.cfg;
        if class >= c.classes {
            return Err(GanError::Domain("class label out of range"));
        }
        if gp.len() != self.generator_params() || z.len() != c.latent {
            return Err(GanError::Contract("generator input shapes do not match"));
        }
        let s = take(gp, c.classes * c.embed);
        let emb = &s.head[class * c.embed..(class + 1) * c.embed];
        let s = take(s.rest, self.expansion_params());
        let fan = c.latent + c.embed;
        let (w, b) = s.head.split_at(fan * c.length * c.step_width);
        let mut input = z.to_vec();
        input.extend_from_slice(emb);
        let s = take(s.rest, self.g_cell.num_params());
        let cell = s.head;
        let (wo, bo) = s.rest.split_at(c.channels * c.hidden);
        let recurrent: Vec<&[S]> = (0..3).map(|k| self.g_cell.recurrent(cell, k)).collect();
        let mut h = alloc::vec![S::zero(); c.hidden];
        let mut out = Vec::with_capacity(c.length * c.channels);
        for t in 0..c.length {
            let xt: Vec<S> = (0..c.step_width)
                .map(|j| {
                    let r = t * c.step_width + j;
                    S::dot(&w[r * fan..(r + 1) * fan], &input) + b[r]
                })
                .collect();
            h = self
                .g_cell
                .step(cell, [recurrent[0], recurrent[1], recurrent[2]], &h, &xt);
            for o in 0..c.channels {
                out.push((S::dot(&wo[o * c.hidden..(o + 1) * c.hidden], &h) + bo[o]).tanh());
            }
        }
        Ok(out)
    }

    /// Final hidden state of the discriminator cell.
    pub fn discriminator_hidden<S: Real>(
        &self,
        dp: &[S],
        power: &[f64],
        x: &[S],
    ) -> Result<Vec<S>, GanError> {
        let c = &self.cfg;
        if dp.len() != self.discriminator_params() || power.len() != 3 * c.hidden {
            return Err(GanError::Contract(
                "discriminator parameter shapes do not match",
            ));
        }
        if x.len() != c.length * c.channels {
            return Err(GanError::Contract(
                "sequence shape does not match the configuration",
            ));
        }
        let h = c.hidden;
        let cell = &dp[c.classes * h..c.classes * h + self.d_cell.num_params()];
        let normalized: Vec<Vec<S>> = (0..3)
            .map(|k| {
                let w = self.d_cell.recurrent(cell, k);
                let wv: Vec<f64> = w.iter().map(|v| v.val()).collect();
                let u = &power[k * h..(k + 1) * h];
                let v = normalize(&mat_t_vec(&wv, u, h));
                // σ̂ = uᵀWv with u, v held constant
                let coeffs: Vec<f64> = (0..h * h).map(|ij| u[ij / h] * v[ij % h]).collect();
                let sigma = S::lin(&coeffs, w);
                let inv = S::one() / sigma;
                w.iter().map(|&e| e * inv).collect()
            })
            .collect();
        let mut state = alloc::vec![S::zero(); h];
        for t in 0..c.length {
            state = self.d_cell.step(
                cell,
                [&normalized[0], &normalized[1], &normalized[2]],
                &state,
                &x[t * c.channels..(t + 1) * c.channels],
            );
        }
        Ok(state)
    }

    /// Adversarial logit and class logits from a final hidden state. The
    /// class enters the adversarial head only, through a learned
    /// projection.
    pub fn heads<S: Real>(
        &self,
        dp: &[S],
        hidden: &[S],
        class: usize,
    ) -> Result<(S, Vec<S>), GanError> {
        let c = &self.cfg;
        if class >= c.classes {
            return Err(GanError::Domain("class label out of range"));
        }
        let h = c.hidden;
        let proj = &dp[class * h..(class + 1) * h];
        let rest = &dp[c.classes * h + self.d_cell.num_params()..];
        let (wa, rest) = rest.split_at(h);
        let ba = rest[0];
        let (wc, bc) = rest[1..].split_at(c.classes * h);
        let adv = S::dot(wa, hidden) + S::dot(proj, hidden) + ba;
        let cls = (0..c.classes)
            .map(|k| S::dot(&wc[k * h..(k + 1) * h], hidden) + bc[k])
            .collect();
        Ok((adv, cls))
    }

    fn discriminator_logits<S: Real>(
        &self,
        dp: &[S],
        power: &[f64],
        x: &[S],
        class: usize,
    ) -> Result<(S, Vec<S>), GanError> {
        let hidden = self.discriminator_hidden(dp, power, x)?;
        self.heads(dp, &hidden, class)
    }

    /// `(D_adv, D_cls)`: a probability and a distribution over classes.
    pub fn discriminator_forward(
        &self,
        p: &GanParams,
        x: &[f64],
        class: usize,
    ) -> Result<(f64, Vec<f64>), GanError> {
        self.check(p)?;
        let (a, logits) = self.discriminator_logits(&p.discriminator, &p.power, x, class)?;
        Ok((crate::diff::sigmoid(a), softmax(&logits)))
    }

    pub fn classify(&self, p: &GanParams, x: &[f64]) -> Result<usize, GanError> {
        let (_, cls) = self.discriminator_forward(p, x, 0)?;
        Ok(argmax(&cls))
    }

    /// Fraction of samples whose class head argmax equals the label.
    pub fn class_accuracy(&self, p: &GanParams, samples: &[Sample]) -> Result<f64, GanError> {
        if samples.is_empty() {
            return Err(GanError::Domain("no samples"));
        }
        let mut hits = 0;
        for s in samples {
            if self.classify(p, &s.x)? == s.class {
                hits += 1;
            }
        }
        Ok(hits as f64 / samples.len() as f64)
    }

    pub fn sample_latent<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.cfg.latent)
            .map(|_| StandardNormal.sample(rng))
            .collect()
    }

    pub fn generate<R: Rng + ?Sized>(
        &self,
        p: &GanParams,
        class: usize,
        rng: &mut R,
    ) -> Result<Sample, GanError> {
        self.check(p)?;
        let z = self.sample_latent(rng);
        Ok(Sample {
            x: self.generator_forward(&p.generator, &z, class)?,
            class,
        })
    }

    pub fn optimizer(&self) -> GanOptimizer {
        let c = &self.cfg;
        GanOptimizer {
            generator: Adam::adamw(
                self.generator_params(),
                c.learning_rate,
                c.betas,
                c.weight_decay,
            ),
            discriminator: Adam::adamw(
                self.discriminator_params(),
                c.learning_rate,
                c.betas,
                c.weight_decay,
            ),
        }
    }

    /// One discriminator update followed by one generator update on a
    /// real batch; generated samples reuse the batch labels.
    pub fn train_step<R: Rng + ?Sized>(
        &self,
        p: &mut GanParams,
        opt: &mut GanOptimizer,
        real: &[Sample],
        rng: &mut R,
    ) -> Result<StepReport, GanError> {
        self.check(p)?;
        let c = self.cfg;
        if real.is_empty() {
            return Err(GanError::Domain("empty batch"));
        }
        if real
            .iter()
            .any(|s| s.class >= c.classes || s.x.len() != c.length * c.channels)
        {
            return Err(GanError::Contract(
                "batch sample does not match the configuration",
            ));
        }
        let step = opt.discriminator.steps() + 1;
        let fail = |what, d_loss, g_loss| GanError::NonFinite {
            step,
            what,
            d_loss,
            g_loss,
        };
        self.power_iteration(p);
        let labels: Vec<usize> = real.iter().map(|s| s.class).collect();

        let fakes = labels
            .iter()
            .map(|&k| {
                let z = self.sample_latent(rng);
                self.generator_forward(&p.generator, &z, k)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let power = p.power.clone();
        let (d_loss, mut dg) = param_gradient(&p.discriminator, |_, dp| {
            let mut adv_real = Vec::with_capacity(real.len());
            let mut cls_real = Vec::with_capacity(real.len());
            let mut adv_fake = Vec::with_capacity(real.len());
            for (s, f) in real.iter().zip(&fakes) {
                let xr: Vec<_> = s.x.iter().map(|&v| Real::cst(v)).collect();
                let (a, l) = self
                    .discriminator_logits(dp, &power, &xr, s.class)
                    .map_err(gan_to_diff)?;
                adv_real.push(a);
                cls_real.push(l);
                let xf: Vec<_> = f.iter().map(|&v| Real::cst(v)).collect();
                adv_fake.push(
                    self.discriminator_logits(dp, &power, &xf, s.class)
                        .map_err(gan_to_diff)?
                        .0,
                );
            }
            let adv =
                discriminator_adversarial_loss(&adv_real, &adv_fake, c.smoothing, c.printed_sign);
            Ok(adv + cross_entropy(&cls_real, &labels).scale(c.lambda))
        })
        .map_err(|_| fail("discriminator loss", f64::NAN, f64::NAN))?;
        let d_grad_norm = clip_grad_norm(&mut dg, c.clip);
        opt.discriminator.update(&mut p.discriminator, &dg);
        if p.discriminator.iter().any(|v| !v.is_finite()) {
            return Err(fail("discriminator parameters", d_loss, f64::NAN));
        }

        let zs: Vec<Vec<f64>> = labels.iter().map(|_| self.sample_latent(rng)).collect();
        let dp_now = p.discriminator.clone();
        let (g_loss, mut gg) = param_gradient(&p.generator, |_, gp| {
            let dp: Vec<_> = dp_now.iter().map(|&v| Real::cst(v)).collect();
            let mut adv = Vec::with_capacity(labels.len());
            let mut cls = Vec::with_capacity(labels.len());
            for (z, &k) in zs.iter().zip(&labels) {
                let zv: Vec<_> = z.iter().map(|&v| Real::cst(v)).collect();
                let x = self.generator_forward(gp, &zv, k).map_err(gan_to_diff)?;
                let (a, l) = self
                    .discriminator_logits(&dp, &power, &x, k)
                    .map_err(gan_to_diff)?;
                adv.push(a);
                cls.push(l);
            }
            Ok(generator_adversarial_loss(&adv) + cross_entropy(&cls, &labels).scale(c.lambda))
        })
        .map_err(|_| fail("generator loss", d_loss, f64::NAN))?;
        let g_grad_norm = clip_grad_norm(&mut gg, c.clip);
        opt.generator.update(&mut p.generator, &gg);
        if p.generator.iter().any(|v| !v.is_finite()) {
            return Err(fail("generator parameters", d_loss, g_loss));
        }
        Ok(StepReport {
            step,
            d_loss,
            g_loss,
            d_grad_norm,
            g_grad_norm,
        })
    }
}

impl Gan {
    /// `steps` training steps on batches drawn with replacement from
    /// `data`; stops at the first failure.
    pub fn fit<R: Rng + ?Sized>(
        &self,
        p: &mut GanParams,
        opt: &mut GanOptimizer,
        data: &[Sample],
        steps: usize,
        rng: &mut R,
    ) -> Result<Vec<StepReport>, GanError> {
        if data.is_empty() {
            return Err(GanError::Domain("no training samples"));
        }
        let mut reports = Vec::with_capacity(steps);
        for _ in 0..steps {
            let batch: Vec<Sample> = (0..self.cfg.batch_size)
                .map(|_| data[rng.random_range(0..data.len())].clone())
                .collect();
            reports.push(self.train_step(p, opt, &batch, rng)?);
        }
        Ok(reports)
    }
}

fn gan_to_diff(_: GanError) -> DiffError {
    DiffError::NonFinite("gan forward")
}

/// Real windows as GAN samples: inputs divided by `scale` and clamped to
/// `[−1, 1]`, labelled with the window context.
pub fn samples_from_windows(windows: &[Window], scale: f64) -> Vec<Sample> {
    windows
        .iter()
        .map(|w| Sample {
            x: w.inputs
                .iter()
                .flatten()
                .map(|v| (v / scale).clamp(-1.0, 1.0))
                .collect(),
            class: w.context as usize,
        })
        .collect()
}

/// Largest absolute input over a set of windows.
pub fn window_scale(windows: &[Window]) -> f64 {
    let m = windows
        .iter()
        .flat_map(|w| w.inputs.iter().flatten())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = libm::sqrt(dot(v, v));
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

fn mat_vec<S: Real>(w: &[S], v: &[f64], h: usize) -> Vec<f64> {
    (0..h)
        .map(|i| (0..h).map(|j| w[i * h + j].val() * v[j]).sum())
        .collect()
}

fn mat_t_vec<S: Real>(w: &[S], u: &[f64], h: usize) -> Vec<f64> {
    (0..h)
        .map(|j| (0..h).map(|i| w[i * h + j].val() * u[i]).sum())
        .collect()
}

fn top_singular_value(w: &[f64], h: usize, start: &[f64], iterations: usize) -> f64 {
    let mut u = start.to_vec();
    for _ in 0..iterations {
        let v = normalize(&mat_t_vec(w, &u, h));
        u = normalize(&mat_vec(w, &v, h));
    }
    let v = normalize(&mat_t_vec(w, &u, h));
    dot(&u, &mat_vec(w, &v, h))
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| libm::exp(l - m)).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| {
            if x > bv {
                (i, x)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Power-iteration estimate of the top singular value of a square
/// row-major matrix, from a fixed start.
pub fn spectral_norm(w: &[f64], h: usize, iterations: usize) -> f64 {
    let start: Vec<f64> = (0..h).map(|i| 1.0 + 0.1 * i as f64).collect();
    top_singular_value(w, h, &normalize(&start), iterations)
}
