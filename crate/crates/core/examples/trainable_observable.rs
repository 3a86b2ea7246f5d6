//! Fits only the observable of a single 2-local head: with the state fixed, the
//! expectation is linear in the K² observable parameters, so plain gradient
//! descent reaches any target inside the spectrum range.

use ano_vqc::observable::{expectation, expectation_grad_phi};
use ano_vqc::{HermitianParams, Result, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut state = StateVector::zero(4)?;
    for q in 0..4 {
        state.apply_hadamard(q)?;
        state.apply_rotation(q, ano_vqc::Axis::Y, rng.random_range(-1.0..1.0))?;
    }
    state.apply_cnot(0, 1)?;
    state.apply_cnot(2, 3)?;
    state.apply_cnot(1, 2)?;

    let subset = [1, 2];
    let mut params = HermitianParams::zeros(2)?;
    let target = 0.73;
    let lr = 0.5;
    for step in 0..=40 {
        let y = expectation(&state, &subset, &params)?;
        if step % 5 == 0 {
            println!(
                "step {step:2}: <H> = {y:.8}, loss = {:.3e}",
                (y - target).powi(2)
            );
        }
        let g = expectation_grad_phi(&state, &subset, &params)?;
        let flat: Vec<f64> = params
            .to_flat()
            .iter()
            .zip(&g)
            .map(|(p, d)| p - lr * 2.0 * (y - target) * d)
            .collect();
        params = HermitianParams::from_flat(2, &flat)?;
    }
    let m = params.matrix();
    println!("learned observable (real parts):");
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:+.4}", m.entries()[i * 4 + j].re))
            .collect();
        println!("  [{}]", row.join(", "));
    }
    Ok(())
}
