//! Preprocessing, metrics, optimizers, the backbone × constraint model
//! family, and the training loop.

mod metrics;
mod model;
mod optim;
mod preprocess;
mod trainer;

pub use metrics::{rmse, snr, SNR_INFINITE};
pub use model::{
    Backbone, Constraint, Denoiser, DenoiserSpec, AMBIENT_SCALE, ATTENTION_ORDER,
    INVARIANT_FEATURES, POSITION_SCALE, SCALAR_FEATURES,
};
pub use optim::{clip_grad_norm, Adam};
pub use preprocess::{preprocess, zero_phase_lowpass, Baseline, DEFAULT_CUTOFF};
pub use trainer::{
    ablation_grid, evaluate, prepare_corpus, prepare_corpus_with, run_ablation, train, EpochStats,
    RunReport, Splits, TrainConfig, SPLIT,
};

use crate::diff::DiffError;
use crate::field::FieldError;
use crate::geom::GeomError;
use crate::synth::SynthError;
use crate::temporal::TemporalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("contract violated: {0}")]
    Contract(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("non-finite parameter at index {0}")]
    NonFiniteParameter(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}
