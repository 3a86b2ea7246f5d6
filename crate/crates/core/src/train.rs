//! Combined reconstruction loss, Adam, and the epoch/batch training loop.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SrSample;
use crate::error::{Error, Result};
use crate::grad;
use crate::image::ImageView;
use crate::metrics::{self, MetricReport};
use crate::model::{AnoVqcModel, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Weight of the pixel MSE term.
    pub c1: f64,
    /// Weight of the Sobel perceptual proxy term.
    pub c2: f64,
    pub rng_seed: u64,
    pub theta_init_range: (f64, f64),
    pub phi_init_std: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            epochs: 50,
            batch_size: 32,
            c1: 1.0,
            c2: 0.0,
            rng_seed: 0,
            theta_init_range: (-PI, PI),
            phi_init_std: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.learning_rate,
            self.adam_beta1,
            self.adam_beta2,
            self.adam_eps,
            self.c1,
            self.c2,
            self.phi_init_std,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("training hyperparameters must be finite"));
        }
        if self.c1 < 0.0 || self.c2 < 0.0 || self.c1 + self.c2 <= 0.0 {
            return Err(Error::config(format!(
                "loss weights c1 = {}, c2 = {}: both must be >= 0 with a positive sum",
                self.c1, self.c2
            )));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::config("Adam betas must lie in [0, 1)"));
        }
        if self.adam_eps <= 0.0 {
            return Err(Error::config("adam_eps must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        let (lo, hi) = self.theta_init_range;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::config(
                "theta_init_range must be a finite, nonempty interval",
            ));
        }
        if self.phi_init_std < 0.0 {
            return Err(Error::config("phi_init_std must be >= 0"));
        }
        Ok(())
    }
}

/// `c1·MSE(pred, target) + c2·proxy(pred, target)` and its gradient with
/// respect to `pred`. Images are `height × width`, row-major.
pub fn combined_loss(
    pred: &[f64],
    target: &[f64],
    height: usize,
    width: usize,
    c1: f64,
    c2: f64,
) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::input(format!(
            "prediction has {} pixels, target {}",
            pred.len(),
            target.len()
        )));
    }
    let p = ImageView::new(height, width, pred)?;
    let t = ImageView::new(height, width, target)?;
    let n = pred.len() as f64;
    let mut loss = c1 * metrics::mse(p, t)?;
    let mut grad: Vec<f64> = pred
        .iter()
        .zip(target)
        .map(|(a, b)| c1 * 2.0 * (a - b) / n)
        .collect();
    if c2 != 0.0 {
        let (proxy, g) = metrics::perceptual_proxy_with_grad(p, t)?;
        loss += c2 * proxy;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += c2 * b;
        }
    }
    Ok((loss, grad))
}

/// Bias-corrected Adam moments over the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }
}

pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    config: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != params.len() || state.v.len() != params.len()
    {
        return Err(Error::Numerical(format!(
            "Adam shape mismatch: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    let c1 = 1.0 - b1.powf(state.step as f64);
    let c2 = 1.0 - b2.powf(state.step as f64);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
    }
    Ok(())
}

/// Seeded initialization: θ uniform, φ Gaussian.
pub fn init_model(model_config: ModelConfig, config: &TrainConfig) -> Result<AnoVqcModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    AnoVqcModel::random(
        model_config,
        &mut rng,
        config.theta_init_range,
        config.phi_init_std,
    )
}

pub fn check_dataset(model: &AnoVqcModel, samples: &[SrSample]) -> Result<()> {
    let cfg = model.config();
    if samples.is_empty() {
        return Err(Error::config("empty dataset"));
    }
    for s in samples {
        if s.lr.pixels().len() != cfg.n_qubits
            || (s.hr.height(), s.hr.width()) != (cfg.hr_height, cfg.hr_width)
        {
            return Err(Error::config(format!(
                "sample {} ({}×{} -> {}×{}) does not fit a {}-qubit model with {}×{} output",
                s.source_index,
                s.lr.height(),
                s.lr.width(),
                s.hr.height(),
                s.hr.width(),
                cfg.n_qubits,
                cfg.hr_height,
                cfg.hr_width
            )));
        }
    }
    Ok(())
}

/// Mean metric report of raw (unclamped) predictions over `samples`.
pub fn evaluate(model: &AnoVqcModel, samples: &[SrSample]) -> Result<MetricReport> {
    check_dataset(model, samples)?;
    let cfg = model.config();
    let reports = samples
        .par_iter()
        .map(|s| {
            let pred = model.forward(s.lr.pixels())?;
            MetricReport::between(
                ImageView::new(cfg.hr_height, cfg.hr_width, &pred)?,
                s.hr.view(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    MetricReport::average(&reports)
}

/// Mean combined loss over `samples`.
pub fn dataset_loss(model: &AnoVqcModel, samples: &[SrSample], c1: f64, c2: f64) -> Result<f64> {
    check_dataset(model, samples)?;
    let cfg = model.config();
    let losses = samples
        .par_iter()
        .map(|s| {
            let pred = model.forward(s.lr.pixels())?;
            Ok(combined_loss(&pred, s.hr.pixels(), cfg.hr_height, cfg.hr_width, c1, c2)?.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let loss = losses.iter().sum::<f64>() / losses.len() as f64;
    if !loss.is_finite() {
        return Err(Error::Numerical("training loss is not finite".into()));
    }
    Ok(loss)
}

/// Test MSE of predicting the per-pixel mean of the training HR images.
pub fn mean_image_baseline(train: &[SrSample], test: &[SrSample]) -> Result<f64> {
    let first = train
        .first()
        .ok_or_else(|| Error::input("empty training set"))?;
    let n = first.hr.pixels().len();
    let mut mean = vec![0.0; n];
    for s in train {
        for (m, v) in mean.iter_mut().zip(s.hr.pixels()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= train.len() as f64);
    let view = ImageView::new(first.hr.height(), first.hr.width(), &mean)?;
    let mses = test
        .iter()
        .map(|s| metrics::mse(view, s.hr.view()))
        .collect::<Result<Vec<_>>>()?;
    Ok(mses.iter().sum::<f64>() / mses.len().max(1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    /// Mean combined loss over the training set after the epoch's updates.
    pub train_loss: f64,
    pub val: Option<MetricReport>,
}

pub const EPOCH_CSV_HEADER: &str = "epoch,train_loss,val_mse,val_psnr,val_ssim";

impl EpochLog {
    pub fn csv_row(&self) -> String {
        let (mse, psnr, ssim) = match &self.val {
            Some(r) => (r.mse, r.psnr, r.ssim),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        format!(
            "{},{},{},{},{}",
            self.epoch,
            metrics::fmt_metric(self.train_loss),
            metrics::fmt_metric(mse),
            metrics::fmt_metric(psnr),
            metrics::fmt_metric(ssim)
        )
    }
}

pub fn epoch_csv(logs: &[EpochLog]) -> String {
    let mut out = String::from(EPOCH_CSV_HEADER);
    out.push('\n');
    for l in logs {
        out.push_str(&l.csv_row());
        out.push('\n');
    }
    out
}

/// Stateful training loop; resumable from `(model, adam, epochs_done)`.
#[derive(Debug, Clone)]
pub struct Trainer {
    model: AnoVqcModel,
    config: TrainConfig,
    adam: AdamState,
    epochs_done: usize,
}

impl Trainer {
    pub fn new(model: AnoVqcModel, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let adam = AdamState::new(model.n_params());
        Ok(Self {
            model,
            config,
            adam,
            epochs_done: 0,
        })
    }

    pub fn resume(
        model: AnoVqcModel,
        config: TrainConfig,
        adam: AdamState,
        epochs_done: usize,
    ) -> Result<Self> {
        config.validate()?;
        if adam.m.len() != model.n_params() || adam.v.len() != model.n_params() {
            return Err(Error::config("optimizer state does not match the model"));
        }
        Ok(Self {
            model,
            config,
            adam,
            epochs_done,
        })
    }

    pub fn model(&self) -> &AnoVqcModel {
        &self.model
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn into_model(self) -> AnoVqcModel {
        self.model
    }

    /// Sample order for `epoch` (0-based) depends only on the seed and the epoch.
    fn epoch_order(&self, epoch: usize, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        rng.set_stream(epoch as u64 + 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    }

    /// Mean loss and gradient over one batch. Per-sample work runs in parallel;
    /// the reduction is sequential in batch order.
    fn batch_gradient(&self, batch: &[&SrSample]) -> Result<Vec<f64>> {
        let cfg = self.model.config();
        let (c1, c2) = (self.config.c1, self.config.c2);
        let parts = batch
            .par_iter()
            .map(|s| {
                let pass = self.model.forward_pass(s.lr.pixels())?;
                let (_, upstream) = combined_loss(
                    &pass.outputs,
                    s.hr.pixels(),
                    cfg.hr_height,
                    cfg.hr_width,
                    c1,
                    c2,
                )?;
                grad::adjoint_from_pass(&self.model, pass, &upstream)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = grad::GradientBundle::zeros_like(&self.model);
        for p in &parts {
            total.add_assign(p);
        }
        total.scale(1.0 / batch.len() as f64);
        Ok(total.flatten())
    }

    pub fn run_epoch(&mut self, train: &[SrSample], val: Option<&[SrSample]>) -> Result<EpochLog> {
        check_dataset(&self.model, train)?;
        if let Some(v) = val {
            check_dataset(&self.model, v)?;
        }
        let order = self.epoch_order(self.epochs_done, train.len());
        let mut params = self.model.flat_params();
        for chunk in order.chunks(self.config.batch_size) {
            let batch: Vec<&SrSample> = chunk.iter().map(|&i| &train[i]).collect();
            let g = self.batch_gradient(&batch)?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical("gradient is not finite".into()));
            }
            adam_step(&mut self.adam, &mut params, &g, &self.config)?;
            self.model.set_flat_params(&params)?;
        }
        self.epochs_done += 1;
        let train_loss = dataset_loss(&self.model, train, self.config.c1, self.config.c2)?;
        let val = val.map(|v| evaluate(&self.model, v)).transpose()?;
        Ok(EpochLog {
            epoch: self.epochs_done,
            train_loss,
            val,
        })
    }
}

/// Runs `config.epochs` epochs from scratch on an already-initialized model.
pub fn fit(
    model: AnoVqcModel,
    train: &[SrSample],
    val: Option<&[SrSample]>,
    config: &TrainConfig,
) -> Result<(AnoVqcModel, Vec<EpochLog>)> {
    check_dataset(&model, train)?;
    let mut trainer = Trainer::new(model, config.clone())?;
    let mut logs = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        logs.push(trainer.run_epoch(train, val)?);
    }
    Ok((trainer.into_model(), logs))
}
