//! Cross-engine gradient self-test on small random models.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::grad::{adjoint_gradient, finite_difference_gradient, param_shift_gradient};
use crate::model::{AnoVqcModel, ModelConfig};
use crate::observable::HermitianParams;
use crate::statevector::Axis;

pub const REL_TOL: f64 = 1e-5;
pub const ABS_FLOOR: f64 = 1e-8;
pub const FD_STEP: f64 = 1e-5;
/// Tolerance for the single-qubit closed form `dy/dθ = −cos θ`.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GradcheckOptions {
    pub seed: u64,
    pub n_models: usize,
    pub max_qubits: usize,
    pub max_layers: usize,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n_models: 50,
            max_qubits: 6,
            max_layers: 3,
        }
    }
}

/// Largest normalized deviation between two gradient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    /// `|a − b| / max(|a|, |b|, ABS_FLOOR / REL_TOL)`; passes at ≤ [`REL_TOL`].
    pub max_rel: f64,
    /// Flat parameter index of the worst entry.
    pub worst_index: usize,
}

impl Deviation {
    pub fn passes(&self) -> bool {
        self.max_rel <= REL_TOL
    }
}

pub fn compare(a: &[f64], b: &[f64]) -> Deviation {
    assert_eq!(a.len(), b.len(), "gradient vectors differ in length");
    let mut dev = Deviation {
        max_rel: 0.0,
        worst_index: 0,
    };
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let scale = x.abs().max(y.abs()).max(ABS_FLOOR / REL_TOL);
        let d = (x - y).abs() / scale;
        // NaN compares false; treat it as infinitely bad
        if d.is_nan() || d > dev.max_rel {
            dev = Deviation {
                max_rel: if d.is_nan() { f64::INFINITY } else { d },
                worst_index: i,
            };
        }
    }
    dev
}

#[derive(Debug, Clone)]
pub struct PairResult {
    pub engines: (&'static str, &'static str),
    pub deviation: Deviation,
    /// Which random model produced the worst deviation.
    pub model_index: usize,
}

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub pairs: Vec<PairResult>,
    /// Max |adjoint − (−cos θ)| and |shift − (−cos θ)| over the sampled angles.
    pub closed_form_error: f64,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.deviation.passes()) && self.closed_form_error <= CLOSED_FORM_TOL
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&format!(
                "{} vs {}: max relative deviation {:.3e} (model {}, parameter {}) {}\n",
                p.engines.0,
                p.engines.1,
                p.deviation.max_rel,
                p.model_index,
                p.deviation.worst_index,
                if p.deviation.passes() { "ok" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "single-qubit closed form: max error {:.3e} {}\n",
            self.closed_form_error,
            if self.closed_form_error <= CLOSED_FORM_TOL {
                "ok"
            } else {
                "FAIL"
            }
        ));
        out
    }
}

/// Random model with n ≤ `max_qubits`, L ≤ `max_layers`, k ≤ min(3, n), and a
/// handful of heads with unit-scale observables.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    max_qubits: usize,
    max_layers: usize,
) -> Result<(AnoVqcModel, Vec<f64>, Vec<f64>)> {
    let n = rng.random_range(1..=max_qubits);
    let layers = rng.random_range(1..=max_layers);
    let k = rng.random_range(1..=n.min(3));
    let heads = rng.random_range(1..=6);
    let config = ModelConfig {
        n_qubits: n,
        layers,
        k_local: k,
        hr_height: 1,
        hr_width: heads,
        encoding_axes: vec![Axis::Y; n],
        angle_scale: PI,
    };
    let model = AnoVqcModel::random(config, rng, (-PI, PI), 1.0)?;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let upstream: Vec<f64> = (0..heads).map(|_| StandardNormal.sample(rng)).collect();
    Ok((model, x, upstream))
}

/// One-qubit, one-layer circuit `R_y(θ) H |0>` measured with Pauli-Z.
pub fn single_qubit_model(theta: f64) -> Result<AnoVqcModel> {
    let config = ModelConfig {
        n_qubits: 1,
        layers: 1,
        k_local: 1,
        hr_height: 1,
        hr_width: 1,
        encoding_axes: vec![Axis::Y],
        angle_scale: PI,
    };
    let z = HermitianParams::new(1, vec![1.0, -1.0], vec![0.0], vec![0.0])?;
    AnoVqcModel::with_heads(config, vec![theta], |_| Ok(z.clone()))
}

pub fn closed_form_error(thetas: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in thetas {
        let model = single_qubit_model(t)?;
        let adj = adjoint_gradient(&model, &[0.0], &[1.0])?.d_theta[0];
        let ps = param_shift_gradient(&model, &[0.0], &[1.0])?.d_theta[0];
        worst = worst.max((adj + t.cos()).abs()).max((ps + t.cos()).abs());
    }
    Ok(worst)
}

pub fn run(opts: &GradcheckOptions) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let names = [
        ("adjoint", "parameter-shift"),
        ("adjoint", "finite-difference"),
        ("parameter-shift", "finite-difference"),
    ];
    let mut pairs: Vec<PairResult> = names
        .iter()
        .map(|&engines| PairResult {
            engines,
            deviation: Deviation {
                max_rel: 0.0,
                worst_index: 0,
            },
            model_index: 0,
        })
        .collect();
    for m in 0..opts.n_models {
        let (model, x, up) = random_model(&mut rng, opts.max_qubits, opts.max_layers)?;
        let adj = adjoint_gradient(&model, &x, &up)?.flatten();
        let ps = param_shift_gradient(&model, &x, &up)?.flatten();
        let fd = finite_difference_gradient(&model, &x, &up, FD_STEP)?.flatten();
        for (slot, (a, b)) in pairs.iter_mut().zip([(&adj, &ps), (&adj, &fd), (&ps, &fd)]) {
            let d = compare(a, b);
            if d.max_rel > slot.deviation.max_rel || !d.max_rel.is_finite() {
                slot.deviation = d;
                slot.model_index = m;
            }
        }
    }
    let thetas: Vec<f64> = (0..10).map(|_| rng.random_range(-PI..PI)).collect();
    Ok(GradcheckReport {
        pairs,
        closed_form_error: closed_form_error(&thetas)?,
    })
}
