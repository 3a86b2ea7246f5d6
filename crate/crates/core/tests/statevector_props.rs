mod common;

use ano_vqc::{Axis, StateVector};
use common::{c, cnot_matrix, column, hadamard, random_state, rotation, single};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
enum Op {
    H(usize),
    R(usize, Axis, f64),
    Cnot(usize, usize),
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn op(n: usize) -> impl Strategy<Value = Op> {
    let two = (0..n, 1..n.max(2)).prop_map(move |(a, d)| Op::Cnot(a, (a + d) % n));
    prop_oneof![
        (0..n).prop_map(Op::H),
        (0..n, axis(), -10.0..10.0f64).prop_map(|(q, a, t)| Op::R(q, a, t)),
        two,
    ]
}

fn circuit(max_n: usize, max_len: usize) -> impl Strategy<Value = (usize, Vec<Op>, u64)> {
    (2..=max_n).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(op(n), 0..=max_len),
            any::<u64>(),
        )
    })
}

fn apply(s: &mut StateVector, o: Op) {
    match o {
        Op::H(q) => s.apply_hadamard(q).unwrap(),
        Op::R(q, a, t) => s.apply_rotation(q, a, t).unwrap(),
        Op::Cnot(a, b) => s.apply_cnot(a, b).unwrap(),
    }
}

fn invert(s: &mut StateVector, o: Op) {
    match o {
        Op::R(q, a, t) => s.apply_rotation(q, a, -t).unwrap(),
        other => apply(s, other),
    }
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_sequences_preserve_norm((n, ops, seed) in circuit(8, 100)) {
        let mut s = random_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        for o in ops {
            apply(&mut s, o);
        }
        prop_assert!((s.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn gate_then_inverse_restores_state((n, ops, seed) in circuit(4, 30)) {
        let start = random_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        for o in ops {
            let mut s = start.clone();
            apply(&mut s, o);
            invert(&mut s, o);
            prop_assert!(max_diff(&s, &start) <= 1e-12, "{o:?}");
        }
    }

    #[test]
    fn gates_on_different_wires_commute(
        n in 2usize..6,
        p in 0usize..6,
        dq in 1usize..6,
        a in axis(),
        b in axis(),
        t in -6.0..6.0f64,
        u in -6.0..6.0f64,
        seed in any::<u64>(),
    ) {
        let p = p % n;
        let q = (p + 1 + dq % (n - 1)) % n;
        prop_assume!(p != q);
        let start = random_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut one = start.clone();
        one.apply_rotation(p, a, t).unwrap();
        one.apply_rotation(q, b, u).unwrap();
        let mut two = start;
        two.apply_rotation(q, b, u).unwrap();
        two.apply_rotation(p, a, t).unwrap();
        prop_assert!(max_diff(&one, &two) <= 1e-12);
    }

    #[test]
    fn gates_match_dense_matrices((n, ops, seed) in circuit(4, 12)) {
        let mut s = random_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut dense = column(&s);
        for o in ops {
            let m = match o {
                Op::H(q) => single(&hadamard(), q, n),
                Op::R(q, a, t) => single(&rotation(a, t), q, n),
                Op::Cnot(a, b) => cnot_matrix(a, b, n),
            };
            dense = m * dense;
            apply(&mut s, o);
        }
        for (i, amp) in s.amplitudes().iter().enumerate() {
            prop_assert!((amp - dense[(i, 0)]).norm() <= 1e-12);
        }
    }
}

#[test]
fn hadamard_on_high_wire_places_amplitude_on_bit_one() {
    let mut s = StateVector::zero(2).unwrap();
    s.apply_hadamard(1).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let want = [c(h, 0.0), c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0)];
    for (a, b) in s.amplitudes().iter().zip(want) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn invalid_gate_arguments_are_rejected() {
    let mut s = StateVector::zero(3).unwrap();
    assert!(s.apply_hadamard(3).is_err());
    assert!(s.apply_cnot(1, 1).is_err());
    assert!(s.apply_cnot(0, 5).is_err());
    assert!(s.apply_rotation(0, Axis::Y, f64::NAN).is_err());
    assert!(s.apply_rotation(0, Axis::X, f64::INFINITY).is_err());
    assert!(StateVector::zero(0).is_err());
    assert!(StateVector::zero(25).is_err());
}
