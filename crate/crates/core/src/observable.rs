//! Trainable k-local Hermitian observables and their expectations.
//!
//! A k-local observable acts on an ordered qubit subset `S = [s_0, .., s_{k-1}]`.
//! Local basis index `l` has bit `j` equal to the value of qubit `s_j`, so the
//! first subset entry is the least significant local bit, mirroring the global
//! convention in [`crate::statevector`].
//!
//! Parameters are packed as `diag` (K entries), then `re_upper` and `im_upper`
//! (each K(K-1)/2 entries, row-major over `i < j`). Checkpoints rely on this order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::StateVector;

pub const MAX_LOCALITY: usize = 3;
const LOCAL_DIM_MAX: usize = 1 << MAX_LOCALITY;

/// Real parameters of one k-local Hermitian observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianParams {
    k: usize,
    diag: Vec<f64>,
    re_upper: Vec<f64>,
    im_upper: Vec<f64>,
}

impl HermitianParams {
    pub fn zeros(k: usize) -> Result<Self> {
        check_locality(k)?;
        let dim = 1 << k;
        let off = dim * (dim - 1) / 2;
        Ok(Self {
            k,
            diag: vec![0.0; dim],
            re_upper: vec![0.0; off],
            im_upper: vec![0.0; off],
        })
    }

    /// The identity observable: unit diagonal, zero off-diagonal.
    pub fn identity(k: usize) -> Result<Self> {
        let mut p = Self::zeros(k)?;
        p.diag.fill(1.0);
        Ok(p)
    }

    pub fn new(k: usize, diag: Vec<f64>, re_upper: Vec<f64>, im_upper: Vec<f64>) -> Result<Self> {
        check_locality(k)?;
        let dim = 1 << k;
        let off = dim * (dim - 1) / 2;
        if diag.len() != dim || re_upper.len() != off || im_upper.len() != off {
            return Err(Error::input(format!(
                "k={k} observable needs {dim} diagonal and {off}+{off} off-diagonal parameters, \
                 got {}+{}+{}",
                diag.len(),
                re_upper.len(),
                im_upper.len()
            )));
        }
        let p = Self {
            k,
            diag,
            re_upper,
            im_upper,
        };
        p.check_finite()?;
        Ok(p)
    }

    /// Unpacks the K² parameters in packing order.
    pub fn from_flat(k: usize, flat: &[f64]) -> Result<Self> {
        check_locality(k)?;
        let dim = 1 << k;
        if flat.len() != dim * dim {
            return Err(Error::input(format!(
                "k={k} observable needs {} parameters, got {}",
                dim * dim,
                flat.len()
            )));
        }
        let off = dim * (dim - 1) / 2;
        Self::new(
            k,
            flat[..dim].to_vec(),
            flat[dim..dim + off].to_vec(),
            flat[dim + off..].to_vec(),
        )
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend_from_slice(&self.diag);
        v.extend_from_slice(&self.re_upper);
        v.extend_from_slice(&self.im_upper);
        v
    }

    /// Overwrites the parameters in packing order. Length must be K².
    pub(crate) fn set_flat(&mut self, flat: &[f64]) {
        let dim = self.dim();
        let off = self.re_upper.len();
        self.diag.copy_from_slice(&flat[..dim]);
        self.re_upper.copy_from_slice(&flat[dim..dim + off]);
        self.im_upper.copy_from_slice(&flat[dim + off..]);
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// K = 2^k.
    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn n_params(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn re_upper(&self) -> &[f64] {
        &self.re_upper
    }

    pub fn im_upper(&self) -> &[f64] {
        &self.im_upper
    }

    pub fn check_finite(&self) -> Result<()> {
        let all = self.diag.iter().chain(&self.re_upper).chain(&self.im_upper);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "observable parameter is not finite".into(),
            ));
        }
        Ok(())
    }

    /// Builds H(φ) as a dense row-major K×K matrix.
    pub fn matrix(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        for (idx, (i, j)) in upper_pairs(dim).enumerate() {
            let h = Complex64::new(self.re_upper[idx], self.im_upper[idx]);
            m[(i, j)] = h;
            m[(j, i)] = h.conj();
        }
        m
    }
}

/// `(i, j)` with `i < j` in row-major order.
pub(crate) fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |i| (i + 1..dim).map(move |j| (i, j)))
}

fn check_locality(k: usize) -> Result<()> {
    if k == 0 || k > MAX_LOCALITY {
        return Err(Error::config(format!(
            "observable locality {k} outside supported range 1..={MAX_LOCALITY}"
        )));
    }
    Ok(())
}

/// Small dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `self += scale * other`.
    pub(crate) fn add_scaled(&mut self, other: &CMatrix, scale: f64) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * scale;
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// Reduced state of a qubit subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// `Tr(rho H(φ))`. Errors if the trace carries an imaginary part above 1e-8.
    pub fn expectation(&self, params: &HermitianParams) -> Result<f64> {
        self.check_dim(params)?;
        let rho = &self.0;
        let dim = rho.dim;
        // Tr(rho H) = sum_ij rho_ji H_ij. Diagonal terms are real; each upper pair
        // contributes rho_ji h + rho_ij conj(h) = 2 Re(rho_ij conj(h)).
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..dim {
            let r = rho[(i, i)];
            re += r.re * params.diag[i];
            im += r.im * params.diag[i];
        }
        for (idx, (i, j)) in upper_pairs(dim).enumerate() {
            let h = Complex64::new(params.re_upper[idx], params.im_upper[idx]);
            let t = rho[(j, i)] * h + rho[(i, j)] * h.conj();
            re += t.re;
            im += t.im;
        }
        if im.abs() > 1e-8 * (1.0 + re.abs()) {
            return Err(Error::Numerical(format!(
                "expectation has imaginary part {im:e}; observable or state is not Hermitian"
            )));
        }
        Ok(re)
    }

    /// Gradient of `Tr(rho H(φ))` in packing order:
    /// `d/dc_ii = Re rho_ii`, `d/da_ij = 2 Re rho_ij`, `d/db_ij = 2 Im rho_ij`.
    pub fn expectation_grad(&self, params: &HermitianParams) -> Result<Vec<f64>> {
        self.check_dim(params)?;
        let rho = &self.0;
        let dim = rho.dim;
        let mut g = Vec::with_capacity(dim * dim);
        g.extend((0..dim).map(|i| rho[(i, i)].re));
        g.extend(upper_pairs(dim).map(|(i, j)| 2.0 * rho[(i, j)].re));
        g.extend(upper_pairs(dim).map(|(i, j)| 2.0 * rho[(i, j)].im));
        Ok(g)
    }

    fn check_dim(&self, params: &HermitianParams) -> Result<()> {
        if params.dim() != self.0.dim {
            return Err(Error::input(format!(
                "observable dimension {} does not match reduced state dimension {}",
                params.dim(),
                self.0.dim
            )));
        }
        Ok(())
    }
}

/// Validates a measured subset: distinct, in range, at most [`MAX_LOCALITY`] long.
pub fn check_subset(subset: &[usize], n_qubits: usize) -> Result<()> {
    check_locality(subset.len()).map_err(|_| {
        Error::input(format!(
            "subset of {} qubits; expected 1..={MAX_LOCALITY}",
            subset.len()
        ))
    })?;
    for (i, &q) in subset.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::QubitIndex { index: q, n_qubits });
        }
        if subset[..i].contains(&q) {
            return Err(Error::input(format!(
                "qubit {q} repeated in subset {subset:?}"
            )));
        }
    }
    Ok(())
}

/// Global-index offsets of the K local basis states of `subset`.
pub(crate) fn local_offsets(subset: &[usize]) -> Vec<usize> {
    (0..1usize << subset.len())
        .map(|l| {
            subset
                .iter()
                .enumerate()
                .filter(|(j, _)| l >> j & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect()
}

/// Base indices (all subset bits clear) of a `dim`-sized register, ascending.
pub(crate) fn rest_indices(dim: usize, subset: &[usize]) -> impl Iterator<Item = usize> {
    let mut bits = [usize::MAX; MAX_LOCALITY];
    bits[..subset.len()].copy_from_slice(subset);
    bits.sort_unstable();
    let count = dim >> subset.len();
    (0..count).map(move |mut i| {
        // insert a zero at each subset position, lowest first
        for &b in &bits {
            if b == usize::MAX {
                break;
            }
            let low = i & ((1usize << b) - 1);
            i = ((i ^ low) << 1) | low;
        }
        i
    })
}

/// Partial trace of `|psi><psi|` over every qubit outside `subset`.
pub fn reduced_density_matrix(state: &StateVector, subset: &[usize]) -> Result<DensityMatrix> {
    check_subset(subset, state.n_qubits())?;
    let offsets = local_offsets(subset);
    let dim = offsets.len();
    let amps = state.amplitudes();
    let acc = match dim {
        2 => outer_sum::<2>(amps, subset, &offsets),
        4 => outer_sum::<4>(amps, subset, &offsets),
        8 => outer_sum::<8>(amps, subset, &offsets),
        _ => unreachable!("subset size checked above"),
    };
    let mut rho = CMatrix::zeros(dim);
    for (i, row) in acc.iter().enumerate().take(dim) {
        rho.entries[i * dim + i] = Complex64::new(row[i].re, 0.0);
        for (j, &v) in row.iter().enumerate().take(dim).skip(i + 1) {
            rho.entries[i * dim + j] = v;
            rho.entries[j * dim + i] = v.conj();
        }
    }
    Ok(DensityMatrix(rho))
}

/// Upper triangle of `Σ_base a a^†` over the local amplitude blocks; `D == 2^k`.
fn outer_sum<const D: usize>(
    amps: &[Complex64],
    subset: &[usize],
    offsets: &[usize],
) -> [[Complex64; LOCAL_DIM_MAX]; LOCAL_DIM_MAX] {
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = [[zero; LOCAL_DIM_MAX]; LOCAL_DIM_MAX];
    let off: [usize; D] = offsets.try_into().expect("offset count matches D");
    let mut local = [zero; D];
    for base in rest_indices(amps.len(), subset) {
        for l in 0..D {
            local[l] = amps[base + off[l]];
        }
        for i in 0..D {
            for j in i..D {
                acc[i][j] += local[i] * local[j].conj();
            }
        }
    }
    acc
}

/// `<psi| H(φ) ⊗ I |psi>` with H acting on `subset`.
pub fn expectation(state: &StateVector, subset: &[usize], params: &HermitianParams) -> Result<f64> {
    check_arity(subset, params)?;
    reduced_density_matrix(state, subset)?.expectation(params)
}

/// Gradient of [`expectation`] with respect to the K² observable parameters.
pub fn expectation_grad_phi(
    state: &StateVector,
    subset: &[usize],
    params: &HermitianParams,
) -> Result<Vec<f64>> {
    check_arity(subset, params)?;
    reduced_density_matrix(state, subset)?.expectation_grad(params)
}

fn check_arity(subset: &[usize], params: &HermitianParams) -> Result<()> {
    if subset.len() != params.k() {
        return Err(Error::input(format!(
            "{}-local observable measured on {} qubits",
            params.k(),
            subset.len()
        )));
    }
    Ok(())
}

/// Applies `op ⊗ I` (op acting on `subset`) to `amps` and accumulates into `out`.
pub(crate) fn apply_local_accumulate(
    op: &CMatrix,
    subset: &[usize],
    amps: &[Complex64],
    out: &mut [Complex64],
) {
    let offsets = local_offsets(subset);
    match offsets.len() {
        2 => local_matvec::<2>(op, subset, &offsets, amps, out),
        4 => local_matvec::<4>(op, subset, &offsets, amps, out),
        8 => local_matvec::<8>(op, subset, &offsets, amps, out),
        _ => unreachable!("subset size is at most {MAX_LOCALITY}"),
    }
}

fn local_matvec<const D: usize>(
    op: &CMatrix,
    subset: &[usize],
    offsets: &[usize],
    amps: &[Complex64],
    out: &mut [Complex64],
) {
    let zero = Complex64::new(0.0, 0.0);
    let off: [usize; D] = offsets.try_into().expect("offset count matches D");
    let mut m = [[zero; D]; D];
    for (i, row) in m.iter_mut().enumerate() {
        row.copy_from_slice(&op.entries[i * D..(i + 1) * D]);
    }
    let mut local = [zero; D];
    for base in rest_indices(amps.len(), subset) {
        for l in 0..D {
            local[l] = amps[base + off[l]];
        }
        for i in 0..D {
            let mut acc = zero;
            for j in 0..D {
                acc += m[i][j] * local[j];
            }
            out[base + off[i]] += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn build_paulis() {
        let z = HermitianParams::new(1, vec![1.0, -1.0], vec![0.0], vec![0.0]).unwrap();
        assert_eq!(
            z.matrix().entries(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]
        );
        let x = HermitianParams::new(1, vec![0.0, 0.0], vec![1.0], vec![0.0]).unwrap();
        assert_eq!(
            x.matrix().entries(),
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]
        );
        // b = -1 places -i above the diagonal: Pauli-Y
        let y = HermitianParams::new(1, vec![0.0, 0.0], vec![0.0], vec![-1.0]).unwrap();
        assert_eq!(
            y.matrix().entries(),
            &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn flat_packing_order() {
        let flat: Vec<f64> = (0..16).map(f64::from).collect();
        let p = HermitianParams::from_flat(2, &flat).unwrap();
        assert_eq!(p.diag(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.re_upper(), &[4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(p.im_upper(), &[10.0, 11.0, 12.0, 13.0, 14.0, 15.0]);
        assert_eq!(p.to_flat(), flat);
        // (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
        let m = p.matrix();
        assert_eq!(m[(1, 3)], c(8.0, 14.0));
        assert_eq!(m[(3, 1)], c(8.0, -14.0));
    }

    #[test]
    fn param_validation() {
        assert!(HermitianParams::zeros(0).is_err());
        assert!(HermitianParams::zeros(4).is_err());
        assert!(HermitianParams::from_flat(2, &[0.0; 15]).is_err());
        assert!(HermitianParams::new(1, vec![f64::NAN, 0.0], vec![0.0], vec![0.0]).is_err());
        assert_eq!(HermitianParams::zeros(3).unwrap().n_params(), 64);
    }

    #[test]
    fn rdm_product_and_bell() {
        let s = StateVector::zero(2).unwrap();
        let rho = reduced_density_matrix(&s, &[0]).unwrap();
        assert_eq!(
            rho.matrix().entries(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );

        let mut bell = StateVector::zero(2).unwrap();
        bell.apply_hadamard(0).unwrap();
        bell.apply_cnot(0, 1).unwrap();
        let rho = reduced_density_matrix(&bell, &[0]).unwrap();
        for (a, e) in
            rho.matrix()
                .entries()
                .iter()
                .zip([c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)])
        {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn subset_errors() {
        let s = StateVector::zero(3).unwrap();
        assert!(matches!(
            reduced_density_matrix(&s, &[0, 0]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            reduced_density_matrix(&s, &[3]),
            Err(Error::QubitIndex { .. })
        ));
        assert!(reduced_density_matrix(&s, &[]).is_err());
        let p = HermitianParams::zeros(2).unwrap();
        assert!(expectation(&s, &[0], &p).is_err());
    }

    #[test]
    fn expectation_cases() {
        let z = HermitianParams::new(1, vec![1.0, -1.0], vec![0.0], vec![0.0]).unwrap();
        let s = StateVector::zero(1).unwrap();
        assert_eq!(expectation(&s, &[0], &z).unwrap(), 1.0);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_hadamard(0).unwrap();
        assert!(expectation(&s, &[0], &z).unwrap().abs() < 1e-12);
    }

    #[test]
    fn grad_phi_of_zero_state() {
        let s = StateVector::zero(1).unwrap();
        let p = HermitianParams::zeros(1).unwrap();
        let g = expectation_grad_phi(&s, &[0], &p).unwrap();
        assert_eq!(g, vec![1.0, 0.0, 0.0, 0.0]);

        // |+> has rho_01 = 1/2, so d/da_01 = 1 and d/db_01 = 0
        let amps = vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)];
        let plus = StateVector::from_amplitudes(amps).unwrap();
        let g = expectation_grad_phi(&plus, &[0], &p).unwrap();
        assert!((g[2] - 1.0).abs() < 1e-15 && g[3].abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_trace_is_reported() {
        let mut bad = CMatrix::zeros(2);
        bad[(0, 1)] = c(0.0, 0.5);
        bad[(1, 0)] = c(0.0, 0.5);
        let rho = DensityMatrix(bad);
        let x = HermitianParams::new(1, vec![0.0, 0.0], vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(rho.expectation(&x), Err(Error::Numerical(_))));
    }

    #[test]
    fn local_operator_application() {
        // X on qubit 1 of |00> gives |10> (index 2)
        let x = HermitianParams::new(1, vec![0.0, 0.0], vec![1.0], vec![0.0]).unwrap();
        let s = StateVector::zero(2).unwrap();
        let mut out = vec![c(0.0, 0.0); 4];
        apply_local_accumulate(&x.matrix(), &[1], s.amplitudes(), &mut out);
        assert_eq!(out[2], c(1.0, 0.0));
        assert_eq!(out.iter().map(|a| a.norm_sqr()).sum::<f64>(), 1.0);
    }
}
