//! Experiment plumbing: the threaded ablation grid, report CSVs, GAN
//! training runs and whole-file denoising.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use gfk_core::gan::{samples_from_windows, window_scale, Gan, GanConfig, Sample, StepReport};
use gfk_core::linalg::Vec3;
use gfk_core::synth::{
    extract_windows, CoreField, FlightDataset, GroundTruthField, Provenance, Record, SURVEY_SITE,
};
use gfk_core::train::{
    preprocess, train, Denoiser, RunReport, Splits, TrainConfig, TrainError, DEFAULT_CUTOFF,
};
use rand::SeedableRng;

use crate::checkpoint::{DenoiserCheckpoint, GanCheckpoint};
use crate::error::{Error, Result};
use crate::magd::sig17;

/// Worker threads: `GFK_THREADS` when set to a positive integer, else the
/// available parallelism.
pub fn worker_count() -> usize {
    std::env::var("GFK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub type CellOutcome = std::result::Result<(Denoiser, RunReport), TrainError>;

/// Trains every configuration on the shared splits with up to `threads`
/// workers. Results keep the input order and carry wall-clock seconds.
pub fn run_grid(configs: &[TrainConfig], splits: &Splits, threads: usize) -> Vec<CellOutcome> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CellOutcome>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, configs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                let t0 = Instant::now();
                let out = train(cfg, splits).map(|(m, mut r)| {
                    r.wall_clock = t0.elapsed().as_secs_f64();
                    (m, r)
                });
                match &out {
                    Ok((_, r)) => log::info!(
                        "{} {} seed {}: test {:.3} nT in {:.1} s",
                        cfg.backbone.name(),
                        cfg.constraint.name(),
                        cfg.seed,
                        r.test_rmse,
                        r.wall_clock
                    ),
                    Err(e) => log::warn!(
                        "{} {} seed {} failed: {e}",
                        cfg.backbone.name(),
                        cfg.constraint.name(),
                        cfg.seed
                    ),
                }
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every cell runs"))
        .collect()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format(format!("{}: {e}", path.display()))
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        sig17(v)
    }
}

pub const REPORT_HEADER: [&str; 13] = [
    "backbone",
    "constraint",
    "seed",
    "status",
    "train_rmse_nt",
    "val_rmse_nt",
    "test_rmse_nt",
    "train_snr_db",
    "test_snr_db",
    "best_epoch",
    "epochs_run",
    "wall_clock_s",
    "config_hash",
];

/// One row per cell; failed cells keep their row with the error as
/// status and empty metrics.
pub fn write_reports(
    path: &Path,
    cells: &[(TrainConfig, std::result::Result<&RunReport, String>)],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(REPORT_HEADER).map_err(csv_err(path))?;
    for (cfg, r) in cells {
        let head = [
            cfg.backbone.name().to_string(),
            cfg.constraint.name().to_string(),
            cfg.seed.to_string(),
        ];
        let row: Vec<String> = match r {
            Ok(r) => head
                .into_iter()
                .chain([
                    "ok".to_string(),
                    num(r.train_rmse),
                    num(r.val_rmse),
                    num(r.test_rmse),
                    num(r.train_snr),
                    num(r.test_snr),
                    r.best_epoch.to_string(),
                    r.epochs.len().to_string(),
                    num(r.wall_clock),
                    r.config_hash.clone(),
                ])
                .collect(),
            Err(e) => head
                .into_iter()
                .chain([format!("failed: {e}")])
                .chain(std::iter::repeat_n(String::new(), 8))
                .chain([cfg.hash()])
                .collect(),
        };
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_epochs(path: &Path, reports: &[&RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "backbone",
        "constraint",
        "seed",
        "epoch",
        "learning_rate",
        "train_loss",
        "val_rmse_nt",
    ])
    .map_err(csv_err(path))?;
    for r in reports {
        for e in &r.epochs {
            w.write_record([
                r.config.backbone.name().to_string(),
                r.config.constraint.name().to_string(),
                r.config.seed.to_string(),
                e.epoch.to_string(),
                num(e.learning_rate),
                num(e.train_loss),
                num(e.val_rmse),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Test-split predictions next to the truth, in nT.
pub fn write_predictions(path: &Path, pred: &[Vec3], truth: &[Vec3]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "index", "pred_x", "pred_y", "pred_z", "truth_x", "truth_y", "truth_z",
    ])
    .map_err(csv_err(path))?;
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        let row: Vec<String> = std::iter::once(i.to_string())
            .chain(p.iter().chain(t).map(|&v| sig17(v)))
            .collect();
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for row in r.records() {
        let row = row.map_err(csv_err(path))?;
        let v: Vec<f64> = (1..7)
            .map(|k| row.get(k).and_then(|s| s.parse().ok()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Format(format!("{}: bad prediction row", path.display())))?;
        pred.push([v[0], v[1], v[2]]);
        truth.push([v[3], v[4], v[5]]);
    }
    Ok((pred, truth))
}

/// Core field alone at the survey site.
pub fn site_core(core: CoreField) -> GroundTruthField {
    GroundTruthField::new(core, SURVEY_SITE.0, SURVEY_SITE.1, Vec::new())
}

/// Predicted clean field for every record of `ds`, written into the clean
/// channel. The model sees preprocessed windows; the core field and the
/// sub-cutoff trend of the measured channel are added back, so the input's
/// clean channel is never read.
pub fn denoise(
    ck: &DenoiserCheckpoint,
    ds: &FlightDataset,
    core: &GroundTruthField,
) -> Result<FlightDataset> {
    let (pre, base) =
        preprocess(ds, core, DEFAULT_CUTOFF).map_err(|e| Error::Format(e.to_string()))?;
    let (n, len) = (ds.len(), ck.window);
    if n < len {
        return Err(Error::Format(format!(
            "dataset has {n} records, fewer than one {len}-sample window"
        )));
    }
    let mut starts: Vec<usize> = (0..=n - len).step_by(len).collect();
    if starts.last() != Some(&(n - len)) {
        starts.push(n - len);
    }
    let mut residual: Vec<Option<Vec3>> = vec![None; n];
    for s in starts {
        let w = extract_windows(&pre.records[s..s + len], len, len).remove(0);
        let ambient = core.core_field(w.positions[0])?;
        let pred = ck.model.predict(&w.with_ambient(ambient))?;
        for (k, p) in pred.into_iter().enumerate() {
            residual[s + k].get_or_insert(p);
        }
    }
    let residual: Vec<Vec3> = residual
        .into_iter()
        .map(|r| r.expect("windows cover every record"))
        .collect();
    let restored = base.restore_measured(&residual);
    let mut out = ds.clone();
    for (r, b) in out.records.iter_mut().zip(restored) {
        r.clean = b;
    }
    Ok(out)
}

/// A finished GAN run.
#[derive(Clone, Debug)]
pub struct GanRun {
    pub checkpoint: GanCheckpoint,
    pub steps: Vec<StepReport>,
    /// Class-head accuracy on validation and test windows.
    pub held_accuracy: f64,
    /// Top singular value of each normalized recurrent matrix.
    pub spectral_norms: Vec<f64>,
}

/// Held-out GAN samples: validation and test windows.
pub fn held_samples(splits: &Splits, scale: f64) -> Vec<Sample> {
    let mut held = samples_from_windows(&splits.val, scale);
    held.extend(samples_from_windows(&splits.test, scale));
    held
}

pub fn train_gan(
    cfg: &GanConfig,
    splits: &Splits,
    steps: usize,
    seed: u64,
    rate: f64,
) -> Result<GanRun> {
    let gan = Gan::new(*cfg)?;
    if splits.train.first().map(|w| w.len()) != Some(cfg.length) {
        return Err(Error::Config(format!(
            "GAN length {} does not match the training windows",
            cfg.length
        )));
    }
    let scale = window_scale(&splits.train);
    let data = samples_from_windows(&splits.train, scale);
    let held = held_samples(splits, scale);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut params = gan.init(&mut rng);
    let mut opt = gan.optimizer();
    let reports = gan.fit(&mut params, &mut opt, &data, steps, &mut rng)?;
    let held_accuracy = if held.is_empty() {
        f64::NAN
    } else {
        gan.class_accuracy(&params, &held)?
    };
    Ok(GanRun {
        spectral_norms: gan.normalized_spectral_norms(&params, 100),
        checkpoint: GanCheckpoint {
            config: *cfg,
            params,
            scale,
            rate,
        },
        steps: reports,
        held_accuracy,
    })
}

/// `per_class` generated windows of every class as one dataset with
/// generated provenance. Only the measured channel carries data; clean,
/// position and attitude are placeholders (zero, zero, identity).
pub fn synthesize(ck: &GanCheckpoint, per_class: usize, seed: u64) -> Result<FlightDataset> {
    let gan = Gan::new(ck.config)?;
    let c = ck.config;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(c.classes * per_class * c.length);
    for class in 0..c.classes {
        for _ in 0..per_class {
            let s = gan.generate(&ck.params, class, &mut rng)?;
            for row in s.x.chunks_exact(c.channels) {
                records.push(Record {
                    t: records.len() as f64 / ck.rate,
                    position: [0.0; 3],
                    orientation: gfk_core::linalg::IDENTITY3,
                    clean: [0.0; 3],
                    measured: [row[0] * ck.scale, row[1] * ck.scale, row[2] * ck.scale],
                    context: class as u16,
                });
            }
        }
    }
    let mut ds = FlightDataset::new(records, c.classes as u32)?;
    ds.provenance = Provenance::Generated;
    Ok(ds)
}

pub fn write_steps(path: &Path, steps: &[StepReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["step", "d_loss", "g_loss", "d_grad_norm", "g_grad_norm"])
        .map_err(csv_err(path))?;
    for s in steps {
        w.write_record([
            s.step.to_string(),
            num(s.d_loss),
            num(s.g_loss),
            num(s.d_grad_norm),
            num(s.g_grad_norm),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
