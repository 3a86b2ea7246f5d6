//! Gradients of a weighted sum of head outputs, `Σ_m w_m y_m`, where `w` is the
//! upstream derivative of the loss with respect to each prediction.
//!
//! Three engines:
//! - [`adjoint_gradient`]: one forward and one reverse sweep (training engine).
//! - [`param_shift_gradient`]: two shifted circuit evaluations per angle.
//! - [`finite_difference_gradient`]: central differences, test oracle only.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{apply_gate_inverse, variational_gates, AnoVqcModel, ForwardPass, Gate};
use crate::observable::{self, CMatrix};
use crate::statevector::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientBundle {
    /// n_qubits × layers, row-major like the model's θ.
    pub d_theta: Vec<f64>,
    /// One K²-vector per head.
    pub d_phi: Vec<Vec<f64>>,
}

impl GradientBundle {
    pub fn zeros_like(model: &AnoVqcModel) -> Self {
        Self {
            d_theta: vec![0.0; model.theta().len()],
            d_phi: model
                .heads()
                .iter()
                .map(|h| vec![0.0; h.params.n_params()])
                .collect(),
        }
    }

    /// Same packing as [`AnoVqcModel::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.d_theta.clone();
        for block in &self.d_phi {
            v.extend_from_slice(block);
        }
        v
    }

    pub fn add_assign(&mut self, other: &GradientBundle) {
        for (a, b) in self.d_theta.iter_mut().zip(&other.d_theta) {
            *a += b;
        }
        for (pa, pb) in self.d_phi.iter_mut().zip(&other.d_phi) {
            for (a, b) in pa.iter_mut().zip(pb) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.d_theta.iter_mut().for_each(|v| *v *= s);
        self.d_phi.iter_mut().flatten().for_each(|v| *v *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }
}

fn check_upstream(model: &AnoVqcModel, upstream: &[f64]) -> Result<()> {
    if upstream.len() != model.heads().len() {
        return Err(Error::input(format!(
            "upstream gradient has {} entries for {} heads",
            upstream.len(),
            model.heads().len()
        )));
    }
    if upstream.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("upstream gradient is not finite"));
    }
    Ok(())
}

/// φ-gradients from the per-subset marginals of a forward pass.
fn phi_gradient(
    model: &AnoVqcModel,
    pass: &ForwardPass,
    upstream: &[f64],
) -> Result<Vec<Vec<f64>>> {
    model
        .heads()
        .iter()
        .zip(model.head_group())
        .zip(upstream)
        .map(|((h, &g), &w)| {
            let mut d = pass.marginals[g].expectation_grad(&h.params)?;
            d.iter_mut().for_each(|v| *v *= w);
            Ok(d)
        })
        .collect()
}

/// Reverse-mode gradient of `Σ_m upstream_m · y_m(x)`.
pub fn adjoint_gradient(
    model: &AnoVqcModel,
    x: &[f64],
    upstream: &[f64],
) -> Result<GradientBundle> {
    check_upstream(model, upstream)?;
    let pass = model.forward_pass(x)?;
    adjoint_from_pass(model, pass, upstream)
}

/// Adjoint sweep reusing a forward pass already computed for `x`.
pub fn adjoint_from_pass(
    model: &AnoVqcModel,
    pass: ForwardPass,
    upstream: &[f64],
) -> Result<GradientBundle> {
    check_upstream(model, upstream)?;
    let d_phi = phi_gradient(model, &pass, upstream)?;
    let theta = model.theta();

    // Aggregate the weighted observable per measured subset, then lambda = O|psi>.
    let k_dim = 1usize << model.config().k_local;
    let mut per_group = vec![CMatrix::zeros(k_dim); model.groups().len()];
    for ((h, &g), &w) in model.heads().iter().zip(model.head_group()).zip(upstream) {
        if w != 0.0 {
            per_group[g].add_scaled(&h.params.matrix(), w);
        }
    }
    let mut psi = pass.state;
    let mut lambda_amps = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for (op, subset) in per_group.iter().zip(model.groups()) {
        observable::apply_local_accumulate(op, subset, psi.amplitudes(), &mut lambda_amps);
    }
    let mut lambda = StateVector::from_raw(lambda_amps);

    let mut d_theta = vec![0.0; theta.len()];
    for gate in variational_gates(model.config().n_qubits, model.config().layers)
        .into_iter()
        .rev()
    {
        if let Gate::Ry { qubit, param } = gate {
            // d/dθ <psi|O|psi> = 2 Re <lambda| (-i/2) Y psi> = Im <lambda|Y|psi>
            d_theta[param] = pauli_y_matrix_element(&lambda, &psi, qubit).im;
        }
        apply_gate_inverse(&mut psi, gate, theta);
        apply_gate_inverse(&mut lambda, gate, theta);
    }
    let bundle = GradientBundle { d_theta, d_phi };
    if !bundle.is_finite() {
        return Err(Error::Numerical("gradient is not finite".into()));
    }
    Ok(bundle)
}

/// `<bra| Y_q |ket>`.
fn pauli_y_matrix_element(bra: &StateVector, ket: &StateVector, q: usize) -> Complex64 {
    let stride = 1usize << q;
    let mut acc = Complex64::new(0.0, 0.0);
    for (lb, lk) in bra
        .amplitudes()
        .chunks_exact(stride << 1)
        .zip(ket.amplitudes().chunks_exact(stride << 1))
    {
        let (b0, b1) = lb.split_at(stride);
        let (k0, k1) = lk.split_at(stride);
        for i in 0..stride {
            // Y|k> = (-i k1, i k0)
            let t = b1[i].conj() * k0[i] - b0[i].conj() * k1[i];
            acc += Complex64::new(-t.im, t.re);
        }
    }
    acc
}

fn weighted_output(model: &AnoVqcModel, x: &[f64], upstream: &[f64]) -> Result<f64> {
    Ok(model
        .forward(x)?
        .iter()
        .zip(upstream)
        .map(|(y, w)| y * w)
        .sum())
}

/// θ-gradient from the shift rule `[f(θ+π/2) − f(θ−π/2)] / 2`; φ-gradient analytic.
pub fn param_shift_gradient(
    model: &AnoVqcModel,
    x: &[f64],
    upstream: &[f64],
) -> Result<GradientBundle> {
    check_upstream(model, upstream)?;
    let pass = model.forward_pass(x)?;
    let d_phi = phi_gradient(model, &pass, upstream)?;
    let shift = std::f64::consts::FRAC_PI_2;
    let mut work = model.clone();
    let base = model.flat_params();
    let mut d_theta = Vec::with_capacity(model.theta().len());
    for i in 0..model.theta().len() {
        let mut p = base.clone();
        p[i] = base[i] + shift;
        work.set_flat_params(&p)?;
        let plus = weighted_output(&work, x, upstream)?;
        p[i] = base[i] - shift;
        work.set_flat_params(&p)?;
        let minus = weighted_output(&work, x, upstream)?;
        d_theta.push(0.5 * (plus - minus));
    }
    Ok(GradientBundle { d_theta, d_phi })
}

/// Central differences over every θ and φ entry with step `h ∈ [1e-7, 1e-3]`.
pub fn finite_difference_gradient(
    model: &AnoVqcModel,
    x: &[f64],
    upstream: &[f64],
    h: f64,
) -> Result<GradientBundle> {
    check_upstream(model, upstream)?;
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::input(format!(
            "finite-difference step {h} outside [1e-7, 1e-3]"
        )));
    }
    let base = model.flat_params();
    let mut work = model.clone();
    let mut flat = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        let step_up = p[i] - base[i];
        work.set_flat_params(&p)?;
        let plus = work.forward(x)?;
        p[i] = base[i] - h;
        let step_down = base[i] - p[i];
        work.set_flat_params(&p)?;
        let minus = work.forward(x)?;
        // difference per head first: heads untouched by parameter i cancel exactly
        let diff: f64 = plus
            .iter()
            .zip(&minus)
            .zip(upstream)
            .map(|((a, b), w)| w * (a - b))
            .sum();
        flat.push(diff / (step_up + step_down));
    }
    let mut bundle = GradientBundle::zeros_like(model);
    let (theta, mut rest) = flat.split_at(bundle.d_theta.len());
    bundle.d_theta.copy_from_slice(theta);
    for block in &mut bundle.d_phi {
        let (b, tail) = rest.split_at(block.len());
        block.copy_from_slice(b);
        rest = tail;
    }
    Ok(bundle)
}
