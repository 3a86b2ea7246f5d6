//! Drives the statevector simulator directly: a Bell pair, a GHZ state, and the
//! 2-local marginals of the encoded-and-entangled super-resolution circuit.

use ano_vqc::model::{apply_variational, encode};
use ano_vqc::observable::{expectation, reduced_density_matrix};
use ano_vqc::{Axis, HermitianParams, ModelConfig, Result, StateVector};

fn zz() -> Result<HermitianParams> {
    HermitianParams::new(2, vec![1.0, -1.0, -1.0, 1.0], vec![0.0; 6], vec![0.0; 6])
}

fn main() -> Result<()> {
    let mut bell = StateVector::zero(2)?;
    bell.apply_hadamard(0)?;
    bell.apply_cnot(0, 1)?;
    println!("bell amplitudes: {:?}", bell.amplitudes());
    println!("bell <ZZ> = {:.6}", expectation(&bell, &[0, 1], &zz()?)?);

    let mut ghz = StateVector::zero(5)?;
    ghz.apply_hadamard(0)?;
    for q in 1..5 {
        ghz.apply_cnot(q - 1, q)?;
    }
    let rho = reduced_density_matrix(&ghz, &[1, 3])?;
    println!("GHZ marginal on qubits 1,3:");
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:.3}", rho.matrix()[(i, j)].re))
            .collect();
        println!("  [{}]", row.join(", "));
    }

    // a single rotation: <Z> after RY(t) on |0> is cos t
    for t in [0.0, 0.5, 1.0, std::f64::consts::PI] {
        let mut s = StateVector::zero(1)?;
        s.apply_rotation(0, Axis::Y, t)?;
        let z = HermitianParams::new(1, vec![1.0, -1.0], vec![0.0], vec![0.0])?;
        println!(
            "RY({t:.3}): <Z> = {:+.6}, cos = {:+.6}",
            expectation(&s, &[0], &z)?,
            t.cos()
        );
    }

    let cfg = ModelConfig::for_scale(3, 2, 2);
    let x: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
    let mut state = encode(&x, &cfg)?;
    let theta: Vec<f64> = (0..cfg.n_theta()).map(|i| 0.1 * i as f64).collect();
    apply_variational(&mut state, &theta, &cfg)?;
    println!("16-qubit state, norm {:.12}", state.norm());
    for q in [0, 5, 10, 15] {
        let pair = [q, (q + 1) % 16];
        println!(
            "  <ZZ> on {pair:?} = {:+.6}",
            expectation(&state, &pair, &zz()?)?
        );
    }
    Ok(())
}
