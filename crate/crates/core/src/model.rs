//! The super-resolution circuit: angle encoding of the LR pixels, a stack of
//! entangling variational layers, and one trainable observable per HR pixel.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observable::{self, DensityMatrix, HermitianParams};
use crate::statevector::{Axis, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// One qubit per LR pixel.
    pub n_qubits: usize,
    pub layers: usize,
    pub k_local: usize,
    pub hr_height: usize,
    pub hr_width: usize,
    /// Encoding rotation axis for each qubit.
    pub encoding_axes: Vec<Axis>,
    /// Pixel value `x` is encoded as a rotation by `angle_scale * x`.
    pub angle_scale: f64,
}

impl ModelConfig {
    /// 4×4 LR input, `4·scale` square HR output, Y-axis encoding, angle scale π.
    pub fn for_scale(scale: usize, k_local: usize, layers: usize) -> Self {
        let n_qubits = 16;
        Self {
            n_qubits,
            layers,
            k_local,
            hr_height: 4 * scale,
            hr_width: 4 * scale,
            encoding_axes: vec![Axis::Y; n_qubits],
            angle_scale: PI,
        }
    }

    pub fn n_heads(&self) -> usize {
        self.hr_height * self.hr_width
    }

    pub fn n_theta(&self) -> usize {
        self.n_qubits * self.layers
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > crate::statevector::MAX_QUBITS {
            return Err(Error::config(format!("n_qubits = {}", self.n_qubits)));
        }
        if self.layers == 0 {
            return Err(Error::config("at least one variational layer is required"));
        }
        if self.k_local == 0 || self.k_local > observable::MAX_LOCALITY {
            return Err(Error::config(format!(
                "k_local = {} (supported 1..={})",
                self.k_local,
                observable::MAX_LOCALITY
            )));
        }
        if self.k_local > self.n_qubits {
            return Err(Error::config(format!(
                "k_local = {} exceeds n_qubits = {}",
                self.k_local, self.n_qubits
            )));
        }
        if self.n_heads() == 0 {
            return Err(Error::config("HR dimensions must be positive"));
        }
        if self.encoding_axes.len() != self.n_qubits {
            return Err(Error::config(format!(
                "{} encoding axes for {} qubits",
                self.encoding_axes.len(),
                self.n_qubits
            )));
        }
        if !self.angle_scale.is_finite() {
            return Err(Error::config("angle_scale must be finite"));
        }
        Ok(())
    }
}

/// Measured qubits for HR pixel `m`: a length-`k` window starting at `m mod n`,
/// wrapping around the register.
pub fn head_subset(m: usize, n_qubits: usize, k: usize) -> Vec<usize> {
    (0..k).map(|j| (m + j) % n_qubits).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub subset: Vec<usize>,
    pub params: HermitianParams,
}

/// A gate of the variational block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Gate {
    Cnot {
        control: usize,
        target: usize,
    },
    /// R_y on `qubit` driven by `theta[param]`.
    Ry {
        qubit: usize,
        param: usize,
    },
}

/// Every layer: CNOT ladder on even pairs, then odd pairs, then R_y on each wire.
pub(crate) fn variational_gates(n_qubits: usize, layers: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for layer in 0..layers {
        for parity in [0, 1] {
            gates.extend(
                (parity..n_qubits.saturating_sub(1))
                    .step_by(2)
                    .map(|q| Gate::Cnot {
                        control: q,
                        target: q + 1,
                    }),
            );
        }
        gates.extend((0..n_qubits).map(|q| Gate::Ry {
            qubit: q,
            param: q * layers + layer,
        }));
    }
    gates
}

pub(crate) fn apply_gate(state: &mut StateVector, gate: Gate, theta: &[f64]) {
    match gate {
        Gate::Cnot { control, target } => state.cnot_unchecked(control, target),
        Gate::Ry { qubit, param } => state.rotate_unchecked(qubit, Axis::Y, theta[param]),
    }
}

pub(crate) fn apply_gate_inverse(state: &mut StateVector, gate: Gate, theta: &[f64]) {
    match gate {
        Gate::Cnot { control, target } => state.cnot_unchecked(control, target),
        Gate::Ry { qubit, param } => state.rotate_unchecked(qubit, Axis::Y, -theta[param]),
    }
}

/// `V(x)|0…0>`: Hadamard then rotation by `angle_scale·x_q` on every wire.
pub fn encode(x: &[f64], config: &ModelConfig) -> Result<StateVector> {
    if x.len() != config.n_qubits {
        return Err(Error::input(format!(
            "input has {} values for {} qubits",
            x.len(),
            config.n_qubits
        )));
    }
    if let Some((q, v)) = x
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::input(format!(
            "input pixel {q} = {v} outside [0, 1]"
        )));
    }
    if config.encoding_axes.len() != config.n_qubits {
        return Err(Error::config("encoding axis count does not match n_qubits"));
    }
    // The encoded state is a product state; build each wire's 2-vector directly.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let factors: Vec<[Complex64; 2]> = x
        .iter()
        .zip(&config.encoding_axes)
        .map(|(&v, &axis)| {
            let (s, c) = (0.5 * config.angle_scale * v).sin_cos();
            match axis {
                Axis::X => [Complex64::new(c * h, -s * h), Complex64::new(c * h, -s * h)],
                Axis::Y => [
                    Complex64::new((c - s) * h, 0.0),
                    Complex64::new((s + c) * h, 0.0),
                ],
                Axis::Z => [Complex64::new(c * h, -s * h), Complex64::new(c * h, s * h)],
            }
        })
        .collect();
    StateVector::product(&factors)
}

/// Applies `U(θ)` to `state`. `theta` is n_qubits × layers, row-major.
pub fn apply_variational(
    state: &mut StateVector,
    theta: &[f64],
    config: &ModelConfig,
) -> Result<()> {
    if state.n_qubits() != config.n_qubits || theta.len() != config.n_theta() {
        return Err(Error::config(format!(
            "theta of length {} for {} qubits × {} layers on a {}-qubit state",
            theta.len(),
            config.n_qubits,
            config.layers,
            state.n_qubits()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::input("theta contains a non-finite angle"));
    }
    for gate in variational_gates(config.n_qubits, config.layers) {
        apply_gate(state, gate, theta);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct AnoVqcModel {
    config: ModelConfig,
    theta: Vec<f64>,
    heads: Vec<Head>,
    /// Distinct measured subsets, in first-use order.
    groups: Vec<Vec<usize>>,
    /// Group index for each head.
    head_group: Vec<usize>,
}

/// State and per-subset marginals of one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub state: StateVector,
    pub marginals: Vec<DensityMatrix>,
    pub outputs: Vec<f64>,
}

impl AnoVqcModel {
    pub fn new(config: ModelConfig, theta: Vec<f64>, heads: Vec<Head>) -> Result<Self> {
        config.validate()?;
        if theta.len() != config.n_theta() {
            return Err(Error::config(format!(
                "theta has {} entries, expected {} × {}",
                theta.len(),
                config.n_qubits,
                config.layers
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Numerical("theta contains a non-finite angle".into()));
        }
        if heads.len() != config.n_heads() {
            return Err(Error::config(format!(
                "{} heads for a {}×{} output",
                heads.len(),
                config.hr_height,
                config.hr_width
            )));
        }
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut groups = Vec::new();
        let mut head_group = Vec::with_capacity(heads.len());
        for (m, head) in heads.iter().enumerate() {
            if head.subset.len() != config.k_local || head.params.k() != config.k_local {
                return Err(Error::config(format!(
                    "head {m} is not {}-local",
                    config.k_local
                )));
            }
            observable::check_subset(&head.subset, config.n_qubits)
                .map_err(|e| Error::config(format!("head {m}: {e}")))?;
            head.params.check_finite()?;
            let g = *index.entry(head.subset.clone()).or_insert_with(|| {
                groups.push(head.subset.clone());
                groups.len() - 1
            });
            head_group.push(g);
        }
        Ok(Self {
            config,
            theta,
            heads,
            groups,
            head_group,
        })
    }

    /// Model with all parameters built from `theta` and a per-head observable factory.
    pub fn with_heads(
        config: ModelConfig,
        theta: Vec<f64>,
        mut params_for: impl FnMut(usize) -> Result<HermitianParams>,
    ) -> Result<Self> {
        config.validate()?;
        let heads = (0..config.n_heads())
            .map(|m| {
                Ok(Head {
                    subset: head_subset(m, config.n_qubits, config.k_local),
                    params: params_for(m)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(config, theta, heads)
    }

    /// All angles and observable parameters zero.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        let k = config.k_local;
        let theta = vec![0.0; config.n_theta()];
        Self::with_heads(config, theta, |_| HermitianParams::zeros(k))
    }

    /// θ uniform in `theta_range`, every observable parameter Gaussian(0, `phi_std`).
    pub fn random<R: Rng + ?Sized>(
        config: ModelConfig,
        rng: &mut R,
        theta_range: (f64, f64),
        phi_std: f64,
    ) -> Result<Self> {
        let (lo, hi) = theta_range;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi || !phi_std.is_finite() || phi_std < 0.0 {
            return Err(Error::config("invalid initialization ranges"));
        }
        let theta: Vec<f64> = (0..config.n_theta())
            .map(|_| rng.random_range(theta_range.0..theta_range.1))
            .collect();
        let normal = Normal::new(0.0, phi_std).map_err(|e| Error::config(e.to_string()))?;
        let k = config.k_local;
        let n_params = 1usize << (2 * k);
        Self::with_heads(config, theta, |_| {
            let flat: Vec<f64> = (0..n_params).map(|_| normal.sample(rng)).collect();
            HermitianParams::from_flat(k, &flat)
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_at(&self, qubit: usize, layer: usize) -> f64 {
        self.theta[qubit * self.config.layers + layer]
    }

    pub fn heads(&self) -> &[Head] {
        &self.heads
    }

    pub(crate) fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub(crate) fn head_group(&self) -> &[usize] {
        &self.head_group
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
            + self
                .heads
                .iter()
                .map(|h| h.params.n_params())
                .sum::<usize>()
    }

    /// θ then every head's observable parameters in head order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend_from_slice(&self.theta);
        for h in &self.heads {
            v.extend(h.params.to_flat());
        }
        v
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::input(format!(
                "{} parameters supplied, model has {}",
                flat.len(),
                self.n_params()
            )));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "parameter update produced a non-finite value".into(),
            ));
        }
        let (theta, mut rest) = flat.split_at(self.theta.len());
        self.theta.copy_from_slice(theta);
        for h in &mut self.heads {
            let (block, tail) = rest.split_at(h.params.n_params());
            h.params.set_flat(block);
            rest = tail;
        }
        Ok(())
    }

    /// `U(θ)V(x)|0…0>`.
    pub fn prepare_state(&self, x: &[f64]) -> Result<StateVector> {
        let mut state = encode(x, &self.config)?;
        apply_variational(&mut state, &self.theta, &self.config)?;
        Ok(state)
    }

    /// Raw (unclamped) HR pixel predictions in row-major order.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_pass(x)?.outputs)
    }

    pub fn forward_pass(&self, x: &[f64]) -> Result<ForwardPass> {
        let state = self.prepare_state(x)?;
        let marginals = self
            .groups
            .iter()
            .map(|s| observable::reduced_density_matrix(&state, s))
            .collect::<Result<Vec<_>>>()?;
        let outputs = self
            .heads
            .iter()
            .zip(&self.head_group)
            .map(|(h, &g)| marginals[g].expectation(&h.params))
            .collect::<Result<Vec<_>>>()?;
        if let Some(i) = outputs.iter().position(|y| !y.is_finite()) {
            return Err(Error::Numerical(format!("output {i} is not finite")));
        }
        Ok(ForwardPass {
            state,
            marginals,
            outputs,
        })
    }
}
