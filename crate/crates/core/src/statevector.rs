//! Dense pure-state simulation.
//!
//! Basis ordering: qubit 0 is the least significant bit of the basis index, so
//! amplitude `i` belongs to the computational basis state whose qubit `q` reads
//! `(i >> q) & 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Rotation axis for the single-qubit gates `exp(-i angle sigma / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The vector must have power-of-two length and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::input(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-8 {
            return Err(Error::input(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Unnormalized vector in the same layout (adjoint sweeps carry `O|psi>`).
    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        debug_assert!(amplitudes.len().is_power_of_two());
        Self {
            n_qubits: amplitudes.len().trailing_zeros() as usize,
            amplitudes,
        }
    }

    /// Product state `amps[0] ⊗ ... ⊗ amps[n-1]` where `amps[q]` is the
    /// single-qubit state on wire `q`.
    pub(crate) fn product(factors: &[[Complex64; 2]]) -> Result<Self> {
        check_qubit_count(factors.len())?;
        let mut amplitudes = Vec::with_capacity(1 << factors.len());
        amplitudes.push(Complex64::new(1.0, 0.0));
        for f in factors {
            let half = amplitudes.len();
            amplitudes.extend_from_within(..);
            for a in &mut amplitudes[..half] {
                *a *= f[0];
            }
            for a in &mut amplitudes[half..] {
                *a *= f[1];
            }
        }
        Ok(Self {
            n_qubits: factors.len(),
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.for_each_pair(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = (x + y) * s;
            *b = (x - y) * s;
        });
        Ok(())
    }

    /// Applies `exp(-i angle sigma_axis / 2)` on wire `q`.
    pub fn apply_rotation(&mut self, q: usize, axis: Axis, angle: f64) -> Result<()> {
        self.check_qubit(q)?;
        if !angle.is_finite() {
            return Err(Error::input(format!(
                "rotation angle {angle} is not finite"
            )));
        }
        self.rotate_unchecked(q, axis, angle);
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::input(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        self.cnot_unchecked(control, target);
        Ok(())
    }

    pub(crate) fn rotate_unchecked(&mut self, q: usize, axis: Axis, angle: f64) {
        let (s, c) = (0.5 * angle).sin_cos();
        match axis {
            Axis::X => self.for_each_pair(q, |a, b| {
                let (x, y) = (*a, *b);
                // [[c, -is], [-is, c]]
                *a = Complex64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                *b = Complex64::new(s * x.im + c * y.re, -s * x.re + c * y.im);
            }),
            Axis::Y => self.for_each_pair(q, |a, b| {
                let (x, y) = (*a, *b);
                *a = x * c - y * s;
                *b = x * s + y * c;
            }),
            Axis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                self.for_each_pair(q, |a, b| {
                    *a *= lo;
                    *b *= hi;
                })
            }
        }
    }

    pub(crate) fn cnot_unchecked(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for base in crate::observable::rest_indices(self.amplitudes.len(), &[control, target]) {
            self.amplitudes.swap(base | cbit, base | cbit | tbit);
        }
    }

    /// `sigma_axis` on wire `q` (not a rotation).
    #[cfg(test)]
    pub(crate) fn apply_pauli_unchecked(&mut self, q: usize, axis: Axis) {
        let i = Complex64::new(0.0, 1.0);
        match axis {
            Axis::X => self.for_each_pair(q, std::mem::swap),
            Axis::Y => self.for_each_pair(q, |a, b| {
                let (x, y) = (*a, *b);
                *a = -i * y;
                *b = i * x;
            }),
            Axis::Z => self.for_each_pair(q, |_, b| *b = -*b),
        }
    }

    /// Visits every amplitude pair `(i, i | 1<<q)` with bit `q` of `i` clear.
    fn for_each_pair(&mut self, q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = 1usize << q;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a, b);
            }
        }
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::config(format!(
            "qubit count {n} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}
