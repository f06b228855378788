//! Synthetic flight data: an analytic ground-truth field, trajectories,
//! airframe interference and sensor noise.
//!
//! Every generated record satisfies
//! `measured = clean + interference + noise` with the sum taken in that
//! order.

mod field;
mod interference;
mod noise;
mod trajectory;

pub use field::{
    dipole_field, eval_field, CoreField, GaussCoefficients, GroundTruthField, PointDipole,
    EARTH_RADIUS, EXCLUSION_RADIUS, FIELD_BAND, GAUSS_MAX_DEGREE, MU0_4PI_NT, SURVEY_SITE,
};
pub use interference::{platform_interference, InterferenceCoefficients};
pub use noise::{
    autocorrelation, ornstein_uhlenbeck, sample_noise, NoiseComponents, NoiseConfig, NoiseRegime,
};
pub use trajectory::{gen_trajectory, Pattern, Pose, TrajectoryConfig};

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::RigidTransform;
use crate::linalg::{self, Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("contract violated: {0}")]
    Contract(&'static str),
    #[error("evaluation {distance} m from a source is inside the exclusion radius")]
    Singular { distance: f64 },
}

/// Number of context classes: trajectory pattern × noise regime.
pub const NUM_CLASSES: usize = Pattern::ALL.len() * NoiseRegime::ALL.len();

/// Channels per sample in a training window: the field vector and its norm.
pub const CHANNELS: usize = 4;

pub fn context_class(pattern: Pattern, regime: NoiseRegime) -> u16 {
    (pattern.index() * NoiseRegime::ALL.len() + regime.index()) as u16
}

pub fn class_parts(c: u16) -> Option<(Pattern, NoiseRegime)> {
    let c = c as usize;
    (c < NUM_CLASSES).then(|| (Pattern::ALL[c / 3], NoiseRegime::ALL[c % 3]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub t: f64,
    pub position: Vec3,
    pub orientation: Mat3,
    pub clean: Vec3,
    pub measured: Vec3,
    pub context: u16,
}

/// Where a dataset came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Provenance {
    #[default]
    Physics,
    Generated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlightDataset {
    pub records: Vec<Record>,
    pub classes: u32,
    pub provenance: Provenance,
}

impl FlightDataset {
    pub fn new(records: Vec<Record>, classes: u32) -> Result<Self, SynthError> {
        let ds = FlightDataset {
            records,
            classes,
            provenance: Provenance::Physics,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.records.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(SynthError::Domain("timestamps must be strictly increasing"));
        }
        if self
            .records
            .iter()
            .any(|r| u32::from(r.context) >= self.classes)
        {
            return Err(SynthError::Domain("context label outside the class count"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if self.records.iter().any(|r| {
            !r.t.is_finite()
                || !finite(&r.position)
                || !finite(&r.clean)
                || !finite(&r.measured)
                || !r.orientation.iter().all(|row| finite(row))
        }) {
            return Err(SynthError::Domain("non-finite record"));
        }
        Ok(())
    }

    pub fn poses(&self) -> Vec<Pose> {
        self.records
            .iter()
            .map(|r| Pose {
                t: r.t,
                position: r.position,
                orientation: r.orientation,
            })
            .collect()
    }
}

/// One flight to generate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlightSpec {
    pub trajectory: TrajectoryConfig,
    pub regime: NoiseRegime,
    pub interference: InterferenceCoefficients,
}

/// A generated flight together with its additive parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Flight {
    pub dataset: FlightDataset,
    pub interference: Vec<Vec3>,
    pub noise: NoiseComponents,
}

pub fn generate_flight<R: rand::Rng + ?Sized>(
    spec: &FlightSpec,
    gt: &GroundTruthField,
    rng: &mut R,
) -> Result<Flight, SynthError> {
    let poses = gen_trajectory(&spec.trajectory, rng)?;
    let clean = poses
        .iter()
        .map(|p| gt.field_at(p.position))
        .collect::<Result<Vec<_>, _>>()?;
    let interference = platform_interference(&poses, &clean, &spec.interference)?;
    let times: Vec<f64> = poses.iter().map(|p| p.t).collect();
    let noise = sample_noise(&spec.regime.config(), &times, rng)?;
    let total = noise.total();
    let context = context_class(spec.trajectory.pattern, spec.regime);
    let records = poses
        .iter()
        .enumerate()
        .map(|(i, p)| Record {
            t: p.t,
            position: p.position,
            orientation: p.orientation,
            clean: clean[i],
            measured: linalg::add(linalg::add(clean[i], interference[i]), total[i]),
            context,
        })
        .collect();
    Ok(Flight {
        dataset: FlightDataset::new(records, NUM_CLASSES as u32)?,
        interference,
        noise,
    })
}

/// Corpus layout shared by the CLI and the ablation harness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusConfig {
    /// Seconds per flight.
    pub duration: f64,
    pub rate: f64,
    pub jitter: f64,
    pub anomalies: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            duration: 300.0,
            rate: 10.0,
            jitter: 0.2,
            anomalies: 8,
            seed: 0,
        }
    }
}

/// The survey field and one flight per (pattern, regime) pair, each from
/// its own RNG stream so flights can be generated independently. All
/// flights share one airframe, see [`corpus_platform`].
pub fn generate_corpus(cfg: &CorpusConfig) -> Result<(GroundTruthField, Vec<Flight>), SynthError> {
    generate_corpus_with(cfg, CoreField::earth_like())
}

/// [`generate_corpus`] over an external core model.
pub fn generate_corpus_with(
    cfg: &CorpusConfig,
    core: CoreField,
) -> Result<(GroundTruthField, Vec<Flight>), SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gt = GroundTruthField::survey(&mut rng, cfg.anomalies, 2000.0).with_core(core);
    let mut flights = Vec::new();
    for (k, (pattern, regime)) in Pattern::ALL
        .into_iter()
        .flat_map(|p| NoiseRegime::ALL.into_iter().map(move |r| (p, r)))
        .enumerate()
    {
        flights.push(generate_flight_stream(cfg, &gt, pattern, regime, k as u64)?);
    }
    Ok((gt, flights))
}

/// RNG stream reserved for the airframe coefficients.
const PLATFORM_STREAM: u64 = u64::MAX;

/// Interference coefficients of the single airframe flying a corpus.
pub fn corpus_platform(cfg: &CorpusConfig) -> InterferenceCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(PLATFORM_STREAM);
    InterferenceCoefficients::random(&mut rng)
}

/// Flight number `stream` of a corpus.
pub fn generate_flight_stream(
    cfg: &CorpusConfig,
    gt: &GroundTruthField,
    pattern: Pattern,
    regime: NoiseRegime,
    stream: u64,
) -> Result<Flight, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream + 1);
    let mut traj = TrajectoryConfig::new(pattern, cfg.duration);
    traj.rate = cfg.rate;
    traj.jitter = cfg.jitter;
    let spec = FlightSpec {
        trajectory: traj,
        regime,
        interference: corpus_platform(cfg),
    };
    generate_flight(&spec, gt, &mut rng)
}

/// A contiguous run of samples from one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub times: Vec<f64>,
    pub positions: Vec<Vec3>,
    pub orientations: Vec<Mat3>,
    /// Measured vector plus its norm.
    pub inputs: Vec<[f64; CHANNELS]>,
    pub targets: Vec<Vec3>,
    pub context: u16,
    /// Core field (nT) near the window, in the local frame; zero when
    /// unknown.
    pub ambient: Vec3,
}

impl Window {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_ambient(mut self, ambient: Vec3) -> Self {
        self.ambient = ambient;
        self
    }

    /// The same window seen after moving the whole scene by `g`: positions
    /// move, attitudes and vector channels rotate, the norm channel stays.
    pub fn transformed(&self, g: &RigidTransform) -> Window {
        let q = g.rotation();
        Window {
            positions: self.positions.iter().map(|p| g.apply_point(*p)).collect(),
            orientations: self
                .orientations
                .iter()
                .map(|o| linalg::mat_mul(q, o))
                .collect(),
            inputs: self
                .inputs
                .iter()
                .map(|x| {
                    let v = g.apply_vector([x[0], x[1], x[2]]);
                    [v[0], v[1], v[2], x[3]]
                })
                .collect(),
            targets: self.targets.iter().map(|t| g.apply_vector(*t)).collect(),
            ambient: g.apply_vector(self.ambient),
            ..self.clone()
        }
    }
}

/// Windows of `len` samples starting every `stride` samples, never
/// crossing the end of `records`.
pub fn extract_windows(records: &[Record], len: usize, stride: usize) -> Vec<Window> {
    if len == 0 || stride == 0 || records.len() < len {
        return Vec::new();
    }
    (0..=records.len() - len)
        .step_by(stride)
        .map(|s| {
            let rs = &records[s..s + len];
            Window {
                times: rs.iter().map(|r| r.t).collect(),
                positions: rs.iter().map(|r| r.position).collect(),
                orientations: rs.iter().map(|r| r.orientation).collect(),
                inputs: rs
                    .iter()
                    .map(|r| {
                        let m = r.measured;
                        [m[0], m[1], m[2], linalg::norm(m)]
                    })
                    .collect(),
                targets: rs.iter().map(|r| r.clean).collect(),
                context: rs[0].context,
                ambient: [0.0; 3],
            }
        })
        .collect()
}

/// Samples in a window of `seconds` at `rate` Hz.
pub fn window_samples(seconds: f64, rate: f64) -> usize {
    libm::round(seconds * rate) as usize
}
