//! The `prepare`, `train`, `eval`, `infer` and `gradcheck` commands.
//!
//! Each command is a plain function so examples and tests can drive the same
//! code path as the binary.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::checkpoint::{Checkpoint, TrainingState};
use crate::data::{self, SrDataset};
use crate::error::{Error, Result};
use crate::gradcheck::{self, GradcheckOptions, GradcheckReport};
use crate::image::{write_pgm, ImageView};
use crate::metrics::{self, MetricReport};
use crate::model::ModelConfig;
use crate::statevector::Axis;
use crate::train::{self, TrainConfig, Trainer};

/// Training run description. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train_data: PathBuf,
    pub val_data: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub resume: Option<PathBuf>,
    pub layers: usize,
    pub k_local: usize,
    pub encoding_axis: Axis,
    pub angle_scale: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    pub theta_init_range: (f64, f64),
    pub phi_init_std: f64,
    /// Write `checkpoint.json` after every this many epochs (and at the end).
    pub checkpoint_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            train_data: PathBuf::new(),
            val_data: None,
            out_dir: PathBuf::from("run"),
            resume: None,
            layers: 4,
            k_local: 2,
            encoding_axis: Axis::Y,
            angle_scale: PI,
            learning_rate: t.learning_rate,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_eps: t.adam_eps,
            epochs: t.epochs,
            batch_size: t.batch_size,
            c1: t.c1,
            c2: t.c2,
            seed: t.rng_seed,
            theta_init_range: t.theta_init_range,
            phi_init_std: t.phi_init_std,
            checkpoint_every: 10,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid run config: {e}")))
    }

    /// Loads a config and resolves its paths relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.train_data);
        resolve(&mut cfg.out_dir);
        if let Some(p) = cfg.val_data.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.resume.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
            epochs: self.epochs,
            batch_size: self.batch_size,
            c1: self.c1,
            c2: self.c2,
            rng_seed: self.seed,
            theta_init_range: self.theta_init_range,
            phi_init_std: self.phi_init_std,
        }
    }

    pub fn model_config(&self, scale: usize) -> ModelConfig {
        let mut cfg = ModelConfig::for_scale(scale, self.k_local, self.layers);
        cfg.encoding_axes = vec![self.encoding_axis; cfg.n_qubits];
        cfg.angle_scale = self.angle_scale;
        cfg
    }

    fn check_paths(&self) -> Result<()> {
        if self.train_data.as_os_str().is_empty() {
            return Err(Error::config("train_data is required"));
        }
        for p in [
            Some(&self.train_data),
            self.val_data.as_ref(),
            self.resume.as_ref(),
        ]
        .into_iter()
        .flatten()
        {
            if !p.is_file() {
                return Err(Error::config(format!("{} does not exist", p.display())));
            }
        }
        if self.checkpoint_every == 0 {
            return Err(Error::config("checkpoint_every must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PrepareSummary {
    pub samples: usize,
    pub scale: usize,
}

pub fn cmd_prepare(
    images_path: &Path,
    labels_path: &Path,
    scale: usize,
    limit: Option<usize>,
    seed: u64,
    out_path: &Path,
) -> Result<PrepareSummary> {
    let with_path = |path: &Path, e: Error| match e {
        Error::Format { offset, message } => Error::Format {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    };
    let images = data::parse_idx_images(&data::read_maybe_gzip(images_path)?)
        .map_err(|e| with_path(images_path, e))?;
    let labels = data::parse_idx_labels(&data::read_maybe_gzip(labels_path)?)
        .map_err(|e| with_path(labels_path, e))?;
    let samples = data::build_sr_dataset(&images, &labels, scale, limit, seed)?;
    let ds = SrDataset::new(scale, samples)?;
    ds.write(out_path)?;
    Ok(PrepareSummary {
        samples: ds.samples.len(),
        scale,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub metrics_csv: PathBuf,
    pub epochs_done: usize,
    pub log_rows: Vec<String>,
}

fn save_progress(
    trainer: &Trainer,
    train_config: &TrainConfig,
    rows: &[String],
    ckpt_path: &Path,
    csv_path: &Path,
) -> Result<()> {
    let ck = Checkpoint {
        model: trainer.model().clone(),
        training: Some(TrainingState {
            epochs_done: trainer.epochs_done(),
            train_config: train_config.clone(),
            adam: trainer.adam().clone(),
            log_rows: rows.to_vec(),
        }),
    };
    ck.write(ckpt_path)?;
    let mut csv = String::from(train::EPOCH_CSV_HEADER);
    csv.push('\n');
    for r in rows {
        csv.push_str(r);
        csv.push('\n');
    }
    std::fs::write(csv_path, csv).map_err(|e| Error::io(csv_path, e))
}

/// Trains per `config`, writing `checkpoint.json` and `metrics.csv` to the output directory.
pub fn cmd_train(config: &RunConfig) -> Result<TrainOutcome> {
    config.check_paths()?;
    let train_cfg = config.train_config();
    train_cfg.validate()?;
    let train_ds = SrDataset::read(&config.train_data)?;
    let val_ds = config
        .val_data
        .as_deref()
        .map(SrDataset::read)
        .transpose()?;
    if let Some(v) = &val_ds {
        if v.scale != train_ds.scale {
            return Err(Error::config(format!(
                "validation scale {} differs from training scale {}",
                v.scale, train_ds.scale
            )));
        }
    }
    let model_cfg = config.model_config(train_ds.scale);
    model_cfg.validate()?;

    let (mut trainer, mut rows) = match &config.resume {
        Some(path) => {
            let ck = Checkpoint::read(path)?;
            if ck.model.config() != &model_cfg {
                return Err(Error::config(format!(
                    "checkpoint {} was trained with a different model configuration \
                     ({}×{} output, k = {}) than this run ({}×{}, k = {})",
                    path.display(),
                    ck.model.config().hr_height,
                    ck.model.config().hr_width,
                    ck.model.config().k_local,
                    model_cfg.hr_height,
                    model_cfg.hr_width,
                    model_cfg.k_local
                )));
            }
            let state = ck.training.ok_or_else(|| {
                Error::config(format!(
                    "checkpoint {} has no training state",
                    path.display()
                ))
            })?;
            let trainer =
                Trainer::resume(ck.model, train_cfg.clone(), state.adam, state.epochs_done)?;
            (trainer, state.log_rows)
        }
        None => (
            Trainer::new(train::init_model(model_cfg, &train_cfg)?, train_cfg.clone())?,
            Vec::new(),
        ),
    };
    train::check_dataset(trainer.model(), &train_ds.samples)?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let ckpt_path = config.out_dir.join("checkpoint.json");
    let csv_path = config.out_dir.join("metrics.csv");
    while trainer.epochs_done() < config.epochs {
        let log = trainer.run_epoch(
            &train_ds.samples,
            val_ds.as_ref().map(|d| d.samples.as_slice()),
        )?;
        rows.push(log.csv_row());
        if trainer.epochs_done() % config.checkpoint_every == 0 {
            save_progress(&trainer, &train_cfg, &rows, &ckpt_path, &csv_path)?;
        }
    }
    save_progress(&trainer, &train_cfg, &rows, &ckpt_path, &csv_path)?;
    Ok(TrainOutcome {
        checkpoint: ckpt_path,
        metrics_csv: csv_path,
        epochs_done: trainer.epochs_done(),
        log_rows: rows,
    })
}

fn load_matching(checkpoint_path: &Path, dataset_path: &Path) -> Result<(Checkpoint, SrDataset)> {
    let ck = Checkpoint::read(checkpoint_path)?;
    let ds = SrDataset::read(dataset_path)?;
    let side = ds.hr_side();
    let cfg = ck.model.config();
    if (cfg.hr_height, cfg.hr_width) != (side, side) {
        return Err(Error::config(format!(
            "checkpoint predicts {}×{} images but the dataset is ×{} ({side}×{side})",
            cfg.hr_height, cfg.hr_width, ds.scale
        )));
    }
    Ok((ck, ds))
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: MetricReport,
    /// `scale,k_local,mse,lpips_proxy,psnr,ssim`
    pub csv_row: String,
}

pub fn cmd_eval(checkpoint_path: &Path, dataset_path: &Path) -> Result<EvalOutcome> {
    let (ck, ds) = load_matching(checkpoint_path, dataset_path)?;
    let report = train::evaluate(&ck.model, &ds.samples)?;
    Ok(EvalOutcome {
        report,
        csv_row: metrics::report_csv_row(ds.scale, ck.model.config().k_local, &report),
    })
}

/// Writes `<i>_lr.pgm`, `<i>_pred.pgm`, `<i>_hr.pgm` for the first `count` samples.
pub fn cmd_infer(
    checkpoint_path: &Path,
    dataset_path: &Path,
    out_dir: &Path,
    count: usize,
) -> Result<Vec<PathBuf>> {
    let (ck, ds) = load_matching(checkpoint_path, dataset_path)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let cfg = ck.model.config();
    let mut written = Vec::new();
    for (i, s) in ds.samples.iter().take(count).enumerate() {
        let pred = ck.model.forward(s.lr.pixels())?;
        let images = [
            ("lr", s.lr.view()),
            ("pred", ImageView::new(cfg.hr_height, cfg.hr_width, &pred)?),
            ("hr", s.hr.view()),
        ];
        for (tag, img) in images {
            let path = out_dir.join(format!("{i}_{tag}.pgm"));
            write_pgm(&path, img)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn cmd_gradcheck(seed: u64) -> Result<GradcheckReport> {
    gradcheck::run(&GradcheckOptions {
        seed,
        ..Default::default()
    })
}

/// Header plus row, as printed by `eval`.
pub fn eval_csv(outcome: &EvalOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", metrics::REPORT_CSV_HEADER);
    let _ = writeln!(s, "{}", outcome.csv_row);
    s
}
