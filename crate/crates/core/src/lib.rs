//! Variational quantum circuits with trainable multi-qubit observables, applied
//! to 4×4 → 12×12 / 16×16 / 20×20 digit super-resolution.
//!
//! The pipeline: each LR pixel is angle-encoded on its own qubit, a stack of
//! entangling R_y layers transforms the state, and every HR pixel is read out
//! as the expectation of its own trainable k-local Hermitian observable.
//! Circuit angles and observable entries are trained jointly with Adam using
//! exact adjoint gradients from a dense statevector simulator.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod grad;
pub mod gradcheck;
pub mod image;
pub mod metrics;
pub mod model;
pub mod observable;
pub mod statevector;
pub mod train;

pub use checkpoint::Checkpoint;
pub use data::{SrDataset, SrSample};
pub use error::{Error, Result};
pub use grad::GradientBundle;
pub use image::{GrayImage, ImageView};
pub use metrics::MetricReport;
pub use model::{AnoVqcModel, ModelConfig};
pub use observable::{DensityMatrix, HermitianParams};
pub use statevector::{Axis, StateVector};
pub use train::{TrainConfig, Trainer};
