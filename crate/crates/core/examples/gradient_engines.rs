//! Compares the three gradient engines on one random model and times the
//! adjoint sweep on a full 16-qubit super-resolution circuit.

use std::time::Instant;

use ano_vqc::grad::{adjoint_gradient, finite_difference_gradient, param_shift_gradient};
use ano_vqc::gradcheck::compare;
use ano_vqc::{AnoVqcModel, ModelConfig, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cfg = ModelConfig::for_scale(3, 2, 2);
    cfg.n_qubits = 4;
    cfg.hr_height = 3;
    cfg.hr_width = 3;
    cfg.encoding_axes.truncate(4);
    let model = AnoVqcModel::random(cfg, &mut rng, (-3.0, 3.0), 0.5)?;
    let x: Vec<f64> = (0..4).map(|_| rng.random()).collect();
    let upstream: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();

    let adj = adjoint_gradient(&model, &x, &upstream)?.flatten();
    let ps = param_shift_gradient(&model, &x, &upstream)?.flatten();
    let fd = finite_difference_gradient(&model, &x, &upstream, 1e-5)?.flatten();
    println!("{} parameters", adj.len());
    println!(
        "adjoint vs param-shift: max rel {:.2e}",
        compare(&adj, &ps).max_rel
    );
    println!(
        "adjoint vs finite-diff: max rel {:.2e}",
        compare(&adj, &fd).max_rel
    );

    let model = AnoVqcModel::random(ModelConfig::for_scale(3, 2, 4), &mut rng, (-3.0, 3.0), 0.1)?;
    let x: Vec<f64> = (0..16).map(|_| rng.random()).collect();
    let upstream = vec![1.0 / 144.0; 144];
    let reps = 10;
    let t = Instant::now();
    for _ in 0..reps {
        model.forward(&x)?;
    }
    let fwd = t.elapsed().as_secs_f64() / reps as f64;
    let t = Instant::now();
    for _ in 0..reps {
        adjoint_gradient(&model, &x, &upstream)?;
    }
    let full = t.elapsed().as_secs_f64() / reps as f64;
    println!(
        "16 qubits, 4 layers, 144 heads: forward {:.1} ms, forward+adjoint {:.1} ms",
        fwd * 1e3,
        full * 1e3
    );
    Ok(())
}
