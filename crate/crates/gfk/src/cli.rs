//! Command-line verbs.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gfk_core::synth::{generate_corpus_with, window_samples};
use gfk_core::train::{ablation_grid, prepare_corpus_with, rmse, snr, RunReport, Splits};

use crate::checkpoint::{Checkpoint, DenoiserCheckpoint};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::magd::{read_dataset, sig17, write_csv_file, write_dataset};
use crate::runner;
use crate::verify::{self, Status};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "gfk",
    version,
    about = "Physics-constrained magnetometer denoising toolkit"
)]
pub struct Cli {
    /// key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the `seed` key
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if missing
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Generate the synthetic corpus: one MAGD file and CSV mirror per flight
    GenData,
    /// Train one configuration, or the whole grid with `grid=true`
    Train,
    /// Write a copy of a MAGD file whose clean channel holds the prediction
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// RMSE and SNR of the clean channel of `pred` against `truth`
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Check divergence, equivariance and gradients of a checkpoint
    Verify {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Train the conditional GAN and write synthetic windows
    GanTrain,
}

fn load_config(cli: &Cli) -> Result<Config> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    Ok(match cli.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn io_out(e: std::io::Error) -> Error {
    Error::io(Path::new("<stdout>"), e)
}

fn splits(cfg: &Config, window: f64) -> Result<Splits> {
    let (_, s) = prepare_corpus_with(&cfg.corpus, window, cfg.core_field()?)?;
    if s.train.is_empty() || s.val.is_empty() || s.test.is_empty() {
        return Err(Error::Config(
            "flights too short for the window: every split needs a window".into(),
        ));
    }
    Ok(s)
}

fn cell_name(r: &RunReport) -> String {
    format!(
        "{}_{}_s{}",
        r.config.backbone.name(),
        r.config.constraint.name(),
        r.config.seed
    )
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(cli)?;
    runner::ensure_dir(&cli.out)?;
    let dir = cli.out.as_path();
    match &cli.command {
        Command::GenData => {
            let (_, flights) = generate_corpus_with(&cfg.corpus, cfg.core_field()?)?;
            for (k, f) in flights.iter().enumerate() {
                let name = format!("flight_{k:02}_c{}", f.dataset.records[0].context);
                write_dataset(&f.dataset, &dir.join(format!("{name}.magd")))?;
                write_csv_file(&f.dataset, &dir.join(format!("{name}.csv")))?;
                writeln!(out, "{name}.magd {} records", f.dataset.len()).map_err(io_out)?;
            }
        }
        Command::Train => {
            let s = splits(&cfg, cfg.train.window)?;
            let configs = if cfg.grid {
                cfg.seeds
                    .iter()
                    .flat_map(|&seed| {
                        ablation_grid(&gfk_core::train::TrainConfig { seed, ..cfg.train })
                    })
                    .collect()
            } else {
                vec![cfg.train]
            };
            let cells = runner::run_grid(&configs, &s, runner::worker_count());
            let window = window_samples(cfg.train.window, cfg.corpus.rate);
            let mut failed = 0;
            for (c, cell) in configs.iter().zip(&cells) {
                match cell {
                    Ok((model, r)) => {
                        let stem = if cfg.grid {
                            cell_name(r)
                        } else {
                            "model".into()
                        };
                        let ck = DenoiserCheckpoint {
                            model: model.clone(),
                            window,
                            rate: cfg.corpus.rate,
                        };
                        ck.to_checkpoint().save(&dir.join(format!("{stem}.gfk")))?;
                        let pred = if cfg.grid {
                            format!("predictions_{stem}.csv")
                        } else {
                            "predictions.csv".into()
                        };
                        runner::write_predictions(
                            &dir.join(pred),
                            &r.test_predictions,
                            &r.test_truth,
                        )?;
                        writeln!(
                            out,
                            "{:<12} {:<12} seed {:<3} test RMSE {:>10.4} nT  SNR {:>8.3} dB",
                            c.backbone.name(),
                            c.constraint.name(),
                            c.seed,
                            r.test_rmse,
                            r.test_snr
                        )
                        .map_err(io_out)?;
                    }
                    Err(e) => {
                        failed += 1;
                        writeln!(
                            out,
                            "{:<12} {:<12} seed {:<3} failed: {e}",
                            c.backbone.name(),
                            c.constraint.name(),
                            c.seed
                        )
                        .map_err(io_out)?;
                    }
                }
            }
            let rows: Vec<_> = configs
                .iter()
                .zip(&cells)
                .map(|(c, cell)| (*c, cell.as_ref().map(|(_, r)| r).map_err(|e| e.to_string())))
                .collect();
            runner::write_reports(&dir.join("report.csv"), &rows)?;
            let ok: Vec<&RunReport> = cells
                .iter()
                .filter_map(|c| c.as_ref().ok().map(|(_, r)| r))
                .collect();
            runner::write_epochs(&dir.join("epochs.csv"), &ok)?;
            if failed > 0 {
                return Err(Error::Numeric(format!(
                    "{failed} of {} runs failed",
                    configs.len()
                )));
            }
        }
        Command::Denoise { input, checkpoint } => {
            let ck = DenoiserCheckpoint::from_checkpoint(&Checkpoint::load(checkpoint)?)?;
            let ds = read_dataset(input)?;
            let core = runner::site_core(cfg.core_field()?);
            let den = runner::denoise(&ck, &ds, &core)?;
            let stem = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("dataset");
            let path = dir.join(format!("{stem}_denoised.magd"));
            write_dataset(&den, &path)?;
            writeln!(out, "{}", path.display()).map_err(io_out)?;
        }
        Command::Eval { pred, truth } => {
            let p = read_dataset(pred)?;
            let t = read_dataset(truth)?;
            if p.len() != t.len() {
                return Err(Error::Format(format!(
                    "{} records against {}",
                    p.len(),
                    t.len()
                )));
            }
            let pv: Vec<_> = p.records.iter().map(|r| r.clean).collect();
            let tv: Vec<_> = t.records.iter().map(|r| r.clean).collect();
            let fmt = |e: gfk_core::train::TrainError| Error::Format(e.to_string());
            let e_rmse = rmse(&pv, &tv).map_err(fmt)?;
            let e_snr = snr(&pv, &tv).map_err(fmt)?;
            writeln!(out, "rmse_nt {e_rmse}\nsnr_db {e_snr}").map_err(io_out)?;
            let path = dir.join("eval.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Format(e.to_string()))?;
            let fail = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
            w.write_record([
                "t", "pred_x", "pred_y", "pred_z", "truth_x", "truth_y", "truth_z",
            ])
            .map_err(fail)?;
            for (a, b) in p.records.iter().zip(&t.records) {
                let row: Vec<String> = std::iter::once(b.t)
                    .chain(a.clean)
                    .chain(b.clean)
                    .map(sig17)
                    .collect();
                w.write_record(&row).map_err(fail)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Command::Verify { checkpoint } => {
            let ck = DenoiserCheckpoint::from_checkpoint(&Checkpoint::load(checkpoint)?)?;
            let mut corpus = cfg.clone();
            corpus.corpus.rate = ck.rate;
            let s = splits(&corpus, ck.window as f64 / ck.rate)?;
            let windows = &s.test[..s.test.len().min(4)];
            let props = verify::verify(&ck.model, windows, cfg.train.seed)?;
            for p in &props {
                writeln!(out, "{p}").map_err(io_out)?;
            }
            let slice = verify::divergence_slice(&ck.model, &windows[0], 21, 500.0)?;
            let path = dir.join("divergence_slice.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Format(e.to_string()))?;
            let fail = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
            w.write_record(["east_m", "north_m", "relative_divergence"])
                .map_err(fail)?;
            for (x, y, d) in slice {
                w.write_record([sig17(x), sig17(y), sig17(d)])
                    .map_err(fail)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            let bad: Vec<&str> = props
                .iter()
                .filter(|p| p.status == Status::Fail)
                .map(|p| p.name)
                .collect();
            if !bad.is_empty() {
                return Err(Error::Verification(bad.join(", ")));
            }
        }
        Command::GanTrain => {
            let s = splits(&cfg, cfg.train.window)?;
            let run =
                runner::train_gan(&cfg.gan, &s, cfg.gan_steps, cfg.train.seed, cfg.corpus.rate)?;
            run.checkpoint.to_checkpoint().save(&dir.join("gan.gfk"))?;
            runner::write_steps(&dir.join("gan_steps.csv"), &run.steps)?;
            let synth = runner::synthesize(&run.checkpoint, cfg.gan_samples, cfg.train.seed)?;
            write_dataset(&synth, &dir.join("synthetic.magd"))?;
            let last = run.steps.last();
            writeln!(
                out,
                "steps {}\nd_loss {}\ng_loss {}\nheld_accuracy {}\nspectral_norms {:?}\nsynthetic.magd {} records",
                run.steps.len(),
                last.map_or(f64::NAN, |s| s.d_loss),
                last.map_or(f64::NAN, |s| s.g_loss),
                run.held_accuracy,
                run.spectral_norms,
                synth.len()
            )
            .map_err(io_out)?;
        }
    }
    Ok(())
}
