//! GFK1 checkpoint container. Byte layout in `docs/checkpoint.md`.

use std::fs;
use std::path::Path;

use gfk_core::gan::{Gan, GanConfig, GanParams};
use gfk_core::train::{Backbone, Constraint, Denoiser, DenoiserSpec};
use rand::SeedableRng;

use crate::config::{parse_bool, parse_value};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GFK1";
pub const VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Denoiser = 1,
    Gan = 2,
}

/// A named flat array with its irrep signature (empty when untyped).
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: String,
    pub signature: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub kind: Kind,
    /// `key=value` pairs in write order.
    pub meta: Vec<(String, String)>,
    pub blocks: Vec<Block>,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

impl Checkpoint {
    pub fn meta(&self, key: &str) -> Result<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Format(format!("checkpoint lacks `{key}`")))
    }

    pub fn block(&self, name: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::Format(format!("checkpoint lacks block `{name}`")))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.kind as u8);
        let meta: String = self
            .meta
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        put_str(&mut out, &meta);
        out.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
        for b in &self.blocks {
            put_str(&mut out, &b.name);
            put_str(&mut out, &b.signature);
            out.extend_from_slice(&(b.values.len() as u64).to_le_bytes());
            for v in &b.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic, not a GFK1 checkpoint".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let kind = match r.take(1)?[0] {
            1 => Kind::Denoiser,
            2 => Kind::Gan,
            k => return Err(Error::Format(format!("unknown checkpoint kind {k}"))),
        };
        let meta = r
            .string()?
            .lines()
            .map(|l| {
                l.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::Format(format!("bad metadata line `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = u32::from_le_bytes(r.array()?) as usize;
        let mut blocks = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            let name = r.string()?;
            let signature = r.string()?;
            let len = u64::from_le_bytes(r.array()?) as usize;
            let raw = r.take(
                len.checked_mul(8)
                    .ok_or_else(|| Error::Format("block length overflows".into()))?,
            )?;
            let values = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            blocks.push(Block {
                name,
                signature,
                values,
            });
        }
        if r.at != bytes.len() {
            return Err(Error::Format("trailing bytes after the last block".into()));
        }
        Ok(Checkpoint { kind, meta, blocks })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::decode(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn string(&mut self) -> Result<String> {
        let n = u32::from_le_bytes(self.array()?) as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Format("checkpoint text is not UTF-8".into()))
    }
}

/// A trained denoiser plus what inference needs to cut windows.
#[derive(Clone, Debug)]
pub struct DenoiserCheckpoint {
    pub model: Denoiser,
    /// Samples per window.
    pub window: usize,
    pub rate: f64,
}

impl DenoiserCheckpoint {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let s = self.model.spec();
        let meta = [
            ("backbone", s.backbone.name().to_string()),
            ("constraint", s.constraint.name().to_string()),
            ("hidden", s.hidden.to_string()),
            ("lags", s.lags.to_string()),
            ("decoder_hidden", s.decoder_hidden.to_string()),
            ("radial_hidden", s.radial_hidden.to_string()),
            ("field_scale", format!("{:?}", s.field_scale)),
            ("window", self.window.to_string()),
            ("rate", format!("{:?}", self.rate)),
        ];
        let (bp, dp) = self.model.params().split_at(self.model.backbone_params());
        let context = if s.constraint.flags().equivariant {
            s.context_signature().to_string()
        } else {
            format!("{}x0e", s.hidden)
        };
        Checkpoint {
            kind: Kind::Denoiser,
            meta: meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            blocks: vec![
                Block {
                    name: "backbone".into(),
                    signature: context.clone(),
                    values: bp.to_vec(),
                },
                Block {
                    name: "decoder".into(),
                    signature: context,
                    values: dp.to_vec(),
                },
            ],
        }
    }

    pub fn from_checkpoint(c: &Checkpoint) -> Result<Self> {
        if c.kind != Kind::Denoiser {
            return Err(Error::Format("checkpoint does not hold a denoiser".into()));
        }
        let get = |k: &str| -> Result<&str> { c.meta(k) };
        let fmt = |e: Error| Error::Format(e.to_string());
        let spec = DenoiserSpec {
            hidden: parse_value("hidden", get("hidden")?).map_err(fmt)?,
            lags: parse_value("lags", get("lags")?).map_err(fmt)?,
            decoder_hidden: parse_value("decoder_hidden", get("decoder_hidden")?).map_err(fmt)?,
            radial_hidden: parse_value("radial_hidden", get("radial_hidden")?).map_err(fmt)?,
            field_scale: parse_value("field_scale", get("field_scale")?).map_err(fmt)?,
            ..DenoiserSpec::new(
                parse_value::<Backbone>("backbone", get("backbone")?).map_err(fmt)?,
                parse_value::<Constraint>("constraint", get("constraint")?).map_err(fmt)?,
            )
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut model = Denoiser::new(spec, &mut rng).map_err(|e| Error::Format(e.to_string()))?;
        let mut params = c.block("backbone")?.values.clone();
        if params.len() != model.backbone_params() {
            return Err(Error::Format(
                "backbone block does not match the stored spec".into(),
            ));
        }
        params.extend_from_slice(&c.block("decoder")?.values);
        model
            .set_params(params)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(DenoiserCheckpoint {
            model,
            window: parse_value("window", get("window")?).map_err(fmt)?,
            rate: parse_value("rate", get("rate")?).map_err(fmt)?,
        })
    }
}

/// GAN parameters plus the scale that maps real windows into `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GanCheckpoint {
    pub config: GanConfig,
    pub params: GanParams,
    pub scale: f64,
    pub rate: f64,
}

impl GanCheckpoint {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let c = &self.config;
        let meta = [
            ("latent", c.latent.to_string()),
            ("classes", c.classes.to_string()),
            ("length", c.length.to_string()),
            ("channels", c.channels.to_string()),
            ("hidden", c.hidden.to_string()),
            ("embed", c.embed.to_string()),
            ("step_width", c.step_width.to_string()),
            ("smoothing", format!("{:?}", c.smoothing)),
            ("lambda", format!("{:?}", c.lambda)),
            ("learning_rate", format!("{:?}", c.learning_rate)),
            ("beta1", format!("{:?}", c.betas.0)),
            ("beta2", format!("{:?}", c.betas.1)),
            ("weight_decay", format!("{:?}", c.weight_decay)),
            ("clip", format!("{:?}", c.clip)),
            ("batch_size", c.batch_size.to_string()),
            ("printed_sign", c.printed_sign.to_string()),
            ("scale", format!("{:?}", self.scale)),
            ("rate", format!("{:?}", self.rate)),
        ];
        let block = |name: &str, values: &[f64]| Block {
            name: name.into(),
            signature: String::new(),
            values: values.to_vec(),
        };
        Checkpoint {
            kind: Kind::Gan,
            meta: meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            blocks: vec![
                block("generator", &self.params.generator),
                block("discriminator", &self.params.discriminator),
                block("power", &self.params.power),
            ],
        }
    }

    pub fn from_checkpoint(c: &Checkpoint) -> Result<Self> {
        if c.kind != Kind::Gan {
            return Err(Error::Format("checkpoint does not hold a GAN".into()));
        }
        let fmt = |e: Error| Error::Format(e.to_string());
        macro_rules! get {
            ($k:expr) => {
                parse_value($k, c.meta($k)?).map_err(fmt)?
            };
        }
        let config = GanConfig {
            latent: get!("latent"),
            classes: get!("classes"),
            length: get!("length"),
            channels: get!("channels"),
            hidden: get!("hidden"),
            embed: get!("embed"),
            step_width: get!("step_width"),
            smoothing: get!("smoothing"),
            lambda: get!("lambda"),
            learning_rate: get!("learning_rate"),
            betas: (get!("beta1"), get!("beta2")),
            weight_decay: get!("weight_decay"),
            clip: get!("clip"),
            batch_size: get!("batch_size"),
            printed_sign: parse_bool("printed_sign", c.meta("printed_sign")?).map_err(fmt)?,
        };
        let gan = Gan::new(config).map_err(|e| Error::Format(e.to_string()))?;
        let params = GanParams {
            generator: c.block("generator")?.values.clone(),
            discriminator: c.block("discriminator")?.values.clone(),
            power: c.block("power")?.values.clone(),
        };
        if params.generator.len() != gan.generator_params()
            || params.discriminator.len() != gan.discriminator_params()
            || params.power.len() != gan.normalized_matrices() * config.hidden
        {
            return Err(Error::Format(
                "GAN blocks do not match the stored configuration".into(),
            ));
        }
        Ok(GanCheckpoint {
            config,
            params,
            scale: get!("scale"),
            rate: get!("rate"),
        })
    }
}
