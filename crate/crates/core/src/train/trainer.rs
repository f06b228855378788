use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{
    preprocess, rmse, snr, Backbone, Constraint, Denoiser, DenoiserSpec, TrainError, DEFAULT_CUTOFF,
};
use crate::diff::param_gradient;
use crate::linalg::Vec3;
use crate::synth::{
    extract_windows, generate_corpus_with, window_samples, CoreField, CorpusConfig, FlightDataset,
    GroundTruthField, Window,
};

/// One experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub backbone: Backbone,
    pub constraint: Constraint,
    /// Window length in seconds.
    pub window: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Multiplier applied to the learning rate after every epoch.
    pub lr_decay: f64,
    pub patience: usize,
    pub seed: u64,
    pub hidden: usize,
    pub lags: usize,
}

impl TrainConfig {
    pub fn new(backbone: Backbone, constraint: Constraint) -> Self {
        TrainConfig {
            backbone,
            constraint,
            window: 10.0,
            batch_size: 128,
            epochs: 40,
            learning_rate: 3e-3,
            lr_decay: 0.95,
            patience: 5,
            seed: 0,
            hidden: 8,
            lags: 4,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let positive = self.window > 0.0
            && self.batch_size > 0
            && self.epochs > 0
            && self.learning_rate > 0.0
            && self.lr_decay > 0.0
            && self.patience > 0
            && self.hidden >= 2
            && self.lags > 0;
        if !positive || !self.window.is_finite() || !self.learning_rate.is_finite() {
            return Err(TrainError::Domain(
                "training configuration values must be positive",
            ));
        }
        Ok(())
    }

    /// `key=value` lines in a fixed order.
    pub fn canonical(&self) -> String {
        format!(
            "backbone={}\nconstraint={}\nwindow={:?}\nbatch_size={}\nepochs={}\nlearning_rate={:?}\nlr_decay={:?}\npatience={}\nseed={}\nhidden={}\nlags={}\n",
            self.backbone.name(),
            self.constraint.name(),
            self.window,
            self.batch_size,
            self.epochs,
            self.learning_rate,
            self.lr_decay,
            self.patience,
            self.seed,
            self.hidden,
            self.lags,
        )
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub learning_rate: f64,
    pub train_loss: f64,
    pub val_rmse: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub config: TrainConfig,
    pub config_hash: String,
    pub train_rmse: f64,
    pub val_rmse: f64,
    pub test_rmse: f64,
    pub train_snr: f64,
    pub test_snr: f64,
    pub best_epoch: usize,
    pub epochs: Vec<EpochStats>,
    /// Seconds; filled in by callers that own a clock.
    pub wall_clock: f64,
    pub test_predictions: Vec<Vec3>,
    pub test_truth: Vec<Vec3>,
}

/// Windows of a corpus split by contiguous time segments.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Splits {
    pub train: Vec<Window>,
    pub val: Vec<Window>,
    pub test: Vec<Window>,
}

/// Fractions of each flight assigned to train and validation; the rest is
/// test.
pub const SPLIT: (f64, f64) = (0.70, 0.15);

impl Splits {
    /// Splits every dataset 70/15/15 by time, then cuts windows of `len`
    /// samples inside each segment: half-overlapping for training,
    /// disjoint for evaluation.
    pub fn from_datasets(datasets: &[FlightDataset], len: usize) -> Self {
        let mut s = Splits::default();
        for ds in datasets {
            let n = ds.records.len();
            let a = (n as f64 * SPLIT.0) as usize;
            let b = (n as f64 * (SPLIT.0 + SPLIT.1)) as usize;
            s.train
                .extend(extract_windows(&ds.records[..a], len, (len / 2).max(1)));
            s.val.extend(extract_windows(&ds.records[a..b], len, len));
            s.test.extend(extract_windows(&ds.records[b..], len, len));
        }
        s
    }

    /// Sets every window's ambient field to `core` at its first sample.
    pub fn attach_ambient(&mut self, core: &GroundTruthField) -> Result<(), TrainError> {
        for w in self
            .train
            .iter_mut()
            .chain(&mut self.val)
            .chain(&mut self.test)
        {
            w.ambient = core.core_field(w.positions[0])?;
        }
        Ok(())
    }

    /// RMS of the measured vectors over the training windows.
    pub fn input_scale(&self) -> f64 {
        let (mut acc, mut n) = (0.0, 0usize);
        for w in &self.train {
            for x in &w.inputs {
                acc += x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                n += 1;
            }
        }
        if n == 0 || acc == 0.0 {
            1.0
        } else {
            libm::sqrt(acc / n as f64)
        }
    }
}

/// Generates a corpus, preprocesses every flight against the core field,
/// and splits it into windows of `window` seconds.
pub fn prepare_corpus(
    cfg: &CorpusConfig,
    window: f64,
) -> Result<(GroundTruthField, Splits), TrainError> {
    prepare_corpus_with(cfg, window, CoreField::earth_like())
}

/// [`prepare_corpus`] over an external core model.
pub fn prepare_corpus_with(
    cfg: &CorpusConfig,
    window: f64,
    core: CoreField,
) -> Result<(GroundTruthField, Splits), TrainError> {
    let (gt, flights) = generate_corpus_with(cfg, core)?;
    let core = gt.core_only();
    let datasets = flights
        .iter()
        .map(|f| preprocess(&f.dataset, &core, DEFAULT_CUTOFF).map(|(d, _)| d))
        .collect::<Result<Vec<_>, _>>()?;
    let len = window_samples(window, cfg.rate);
    let mut splits = Splits::from_datasets(&datasets, len);
    splits.attach_ambient(&core)?;
    Ok((gt, splits))
}

/// Predictions and targets over a set of windows, concatenated.
pub fn evaluate(
    model: &Denoiser,
    windows: &[Window],
) -> Result<(Vec<Vec3>, Vec<Vec3>), TrainError> {
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for w in windows {
        pred.extend(model.predict(w)?);
        truth.extend_from_slice(&w.targets);
    }
    Ok((pred, truth))
}

fn window_rmse(model: &Denoiser, windows: &[Window]) -> Result<f64, TrainError> {
    let (p, t) = evaluate(model, windows)?;
    rmse(&p, &t)
}

/// Trains one configuration with Adam, exponential learning-rate decay and
/// early stopping on validation RMSE; returns the best-validation model.
pub fn train(cfg: &TrainConfig, splits: &Splits) -> Result<(Denoiser, RunReport), TrainError> {
    cfg.validate()?;
    if splits.train.is_empty() || splits.val.is_empty() || splits.test.is_empty() {
        return Err(TrainError::Domain("every split needs at least one window"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spec = DenoiserSpec {
        hidden: cfg.hidden,
        lags: cfg.lags,
        field_scale: splits.input_scale(),
        ..DenoiserSpec::new(cfg.backbone, cfg.constraint)
    };
    let mut model = Denoiser::new(spec, &mut rng)?;
    let mut params = model.params().to_vec();
    let mut opt = super::Adam::new(params.len(), cfg.learning_rate);

    let mut best_val = window_rmse(&model, &splits.val)?;
    let mut best_params = params.clone();
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..splits.train.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = alloc::vec![0.0; params.len()];
            for &wi in batch {
                let w = &splits.train[wi];
                let (loss, g) = param_gradient(&params, |_, v| {
                    model
                        .loss(v, w)
                        .map_err(|_| crate::diff::DiffError::NonFinite("window loss"))
                })
                .map_err(|_| TrainError::NonFinite("training loss"))?;
                epoch_loss += loss;
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += b / batch.len() as f64;
                }
            }
            opt.update(&mut params, &grad);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(TrainError::NonFinite("parameters after an update"));
            }
        }
        model.set_params(params.clone())?;
        let val = window_rmse(&model, &splits.val)?;
        history.push(EpochStats {
            epoch,
            learning_rate: opt.lr,
            train_loss: epoch_loss / splits.train.len() as f64,
            val_rmse: val,
        });
        log::debug!(
            "epoch {epoch}: loss {:.5} val {:.4} nT",
            epoch_loss / splits.train.len() as f64,
            val
        );
        if val < best_val {
            best_val = val;
            best_params = params.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
        opt.lr *= cfg.lr_decay;
    }
    model.set_params(best_params)?;

    let (train_p, train_t) = evaluate(&model, &splits.train)?;
    let (test_p, test_t) = evaluate(&model, &splits.test)?;
    let report = RunReport {
        config: *cfg,
        config_hash: cfg.hash(),
        train_rmse: rmse(&train_p, &train_t)?,
        val_rmse: best_val,
        test_rmse: rmse(&test_p, &test_t)?,
        train_snr: snr(&train_p, &train_t)?,
        test_snr: snr(&test_p, &test_t)?,
        best_epoch,
        epochs: history,
        wall_clock: 0.0,
        test_predictions: test_p,
        test_truth: test_t,
    };
    Ok((model, report))
}

/// Every configuration on the same splits, in order; a failed cell keeps
/// its error and the rest still run.
pub fn run_ablation(
    configs: &[TrainConfig],
    splits: &Splits,
) -> Vec<Result<RunReport, TrainError>> {
    configs
        .iter()
        .map(|c| train(c, splits).map(|(_, r)| r))
        .collect()
}

/// The 4 × 4 backbone × constraint grid for one seed.
pub fn ablation_grid(template: &TrainConfig) -> Vec<TrainConfig> {
    Backbone::ALL
        .into_iter()
        .flat_map(|b| {
            Constraint::ALL.into_iter().map(move |c| TrainConfig {
                backbone: b,
                constraint: c,
                ..*template
            })
        })
        .collect()
}
