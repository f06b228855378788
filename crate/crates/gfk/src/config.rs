//! Plain `key=value` run configuration. Blank lines and `#` comments are
//! ignored; unknown or repeated keys are errors. Keys are listed in the
//! README.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gfk_core::gan::GanConfig;
use gfk_core::synth::{window_samples, CorpusConfig};
use gfk_core::train::{Backbone, Constraint, TrainConfig};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub corpus: CorpusConfig,
    pub train: TrainConfig,
    /// `length` follows the training window.
    pub gan: GanConfig,
    pub gan_steps: usize,
    /// Synthetic windows written per class by `gan-train`.
    pub gan_samples: usize,
    /// Train the whole backbone × constraint grid instead of one cell.
    pub grid: bool,
    /// Model seeds for the grid; the corpus always uses `seed`.
    pub seeds: Vec<u64>,
    /// Gauss coefficient file replacing the built-in dipole core.
    pub core_model: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let corpus = CorpusConfig::default();
        let train = TrainConfig::new(Backbone::Mlp, Constraint::None);
        Config {
            corpus,
            train,
            gan: GanConfig {
                length: window_samples(train.window, corpus.rate),
                ..GanConfig::default()
            },
            gan_steps: 200,
            gan_samples: 4,
            grid: false,
            seeds: vec![0],
            core_model: None,
        }
    }
}

pub fn parse_value<T>(key: &str, text: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    text.trim()
        .parse()
        .map_err(|e| Error::Config(format!("`{key}`: cannot parse `{}`: {e}", text.trim())))
}

pub fn parse_bool(key: &str, text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!(
            "`{key}`: expected true or false, got `{other}`"
        ))),
    }
}

impl Config {
    /// Parses `text`; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut c = Config::default();
        let mut seen: Vec<String> = Vec::new();
        let mut seeds_set = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::Config(format!(
                    "line {}: `{key}` given twice",
                    n + 1
                )));
            }
            seen.push(key.to_string());
            let v = value.trim();
            match key {
                "seed" => {
                    let s: u64 = parse_value(key, v)?;
                    c.corpus.seed = s;
                    c.train.seed = s;
                }
                "seeds" => {
                    c.seeds = v
                        .split(',')
                        .map(|s| parse_value(key, s))
                        .collect::<Result<Vec<u64>>>()?;
                    seeds_set = true;
                }
                "duration" => c.corpus.duration = parse_value(key, v)?,
                "rate" => c.corpus.rate = parse_value(key, v)?,
                "jitter" => c.corpus.jitter = parse_value(key, v)?,
                "anomalies" => c.corpus.anomalies = parse_value(key, v)?,
                "core_model" => c.core_model = Some(base.join(v)),
                "backbone" => c.train.backbone = parse_value(key, v)?,
                "constraint" => c.train.constraint = parse_value(key, v)?,
                "window" => c.train.window = parse_value(key, v)?,
                "batch_size" => c.train.batch_size = parse_value(key, v)?,
                "epochs" => c.train.epochs = parse_value(key, v)?,
                "learning_rate" => c.train.learning_rate = parse_value(key, v)?,
                "lr_decay" => c.train.lr_decay = parse_value(key, v)?,
                "patience" => c.train.patience = parse_value(key, v)?,
                "hidden" => c.train.hidden = parse_value(key, v)?,
                "lags" => c.train.lags = parse_value(key, v)?,
                "grid" => c.grid = parse_bool(key, v)?,
                "gan_steps" => c.gan_steps = parse_value(key, v)?,
                "gan_samples" => c.gan_samples = parse_value(key, v)?,
                "gan_latent" => c.gan.latent = parse_value(key, v)?,
                "gan_hidden" => c.gan.hidden = parse_value(key, v)?,
                "gan_embed" => c.gan.embed = parse_value(key, v)?,
                "gan_step_width" => c.gan.step_width = parse_value(key, v)?,
                "gan_smoothing" => c.gan.smoothing = parse_value(key, v)?,
                "gan_lambda" => c.gan.lambda = parse_value(key, v)?,
                "gan_learning_rate" => c.gan.learning_rate = parse_value(key, v)?,
                "gan_beta1" => c.gan.betas.0 = parse_value(key, v)?,
                "gan_beta2" => c.gan.betas.1 = parse_value(key, v)?,
                "gan_weight_decay" => c.gan.weight_decay = parse_value(key, v)?,
                "gan_clip" => c.gan.clip = parse_value(key, v)?,
                "gan_batch_size" => c.gan.batch_size = parse_value(key, v)?,
                "gan_printed_sign" => c.gan.printed_sign = parse_bool(key, v)?,
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{key}`",
                        n + 1
                    )))
                }
            }
        }
        if !seeds_set {
            c.seeds = vec![c.train.seed];
        }
        c.finish()
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base)
    }

    /// Replaces the corpus and model seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if self.seeds == [self.train.seed] {
            self.seeds = vec![seed];
        }
        self.corpus.seed = seed;
        self.train.seed = seed;
        self
    }

    fn finish(mut self) -> Result<Config> {
        let cc = &self.corpus;
        if !(cc.duration > 0.0) || !(cc.rate > 0.0) || !(0.0..1.0).contains(&cc.jitter) {
            return Err(Error::Config(
                "duration and rate must be positive, jitter in [0, 1)".into(),
            ));
        }
        self.train.validate()?;
        self.gan.length = window_samples(self.train.window, cc.rate);
        self.gan.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("`seeds` is empty".into()));
        }
        Ok(self)
    }

    /// Core model named by `core_model`, or the built-in dipole.
    pub fn core_field(&self) -> Result<gfk_core::synth::CoreField> {
        match &self.core_model {
            Some(p) => crate::gauss::load_core(p),
            None => Ok(gfk_core::synth::CoreField::earth_like()),
        }
    }
}
