//! JSON checkpoints: model configuration, θ (row-major, qubit × layer), one
//! φ block per head in packing order, and optional optimizer state for resuming.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnoVqcModel, Head, ModelConfig};
use crate::observable::HermitianParams;
use crate::train::{AdamState, TrainConfig};

pub const CHECKPOINT_FORMAT: &str = "ano-vqc-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadRecord {
    subset: Vec<usize>,
    phi: Vec<f64>,
}

/// Optimizer progress saved alongside the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingState {
    pub epochs_done: usize,
    pub train_config: TrainConfig,
    pub adam: AdamState,
    /// Epoch CSV rows written so far, without the header.
    pub log_rows: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    config: ModelConfig,
    theta: Vec<f64>,
    heads: Vec<HeadRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    training: Option<TrainingState>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: AnoVqcModel,
    pub training: Option<TrainingState>,
}

impl Checkpoint {
    pub fn new(model: AnoVqcModel) -> Self {
        Self {
            model,
            training: None,
        }
    }

    pub fn to_json(&self) -> String {
        let file = CheckpointFile {
            format: CHECKPOINT_FORMAT.to_string(),
            config: self.model.config().clone(),
            theta: self.model.theta().to_vec(),
            heads: self
                .model
                .heads()
                .iter()
                .map(|h| HeadRecord {
                    subset: h.subset.clone(),
                    phi: h.params.to_flat(),
                })
                .collect(),
            training: self.training.clone(),
        };
        serde_json::to_string(&file).expect("checkpoint values are finite")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("invalid checkpoint: {e}")))?;
        if file.format != CHECKPOINT_FORMAT {
            return Err(Error::config(format!(
                "unsupported checkpoint format {:?}, expected {CHECKPOINT_FORMAT:?}",
                file.format
            )));
        }
        let k = file.config.k_local;
        let heads = file
            .heads
            .into_iter()
            .map(|h| {
                Ok(Head {
                    subset: h.subset,
                    params: HermitianParams::from_flat(k, &h.phi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = AnoVqcModel::new(file.config, file.theta, heads)?;
        if let Some(t) = &file.training {
            if t.adam.m.len() != model.n_params() || t.adam.v.len() != model.n_params() {
                return Err(Error::config(
                    "checkpoint optimizer state does not match the model",
                ));
            }
        }
        Ok(Self {
            model,
            training: file.training,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
