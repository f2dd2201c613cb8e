mod common;

use proptest::prelude::*;

use qcavity::circuits::{build_encoding_layer, build_vqc};
use qcavity::jet::{jet_var, Axis};
use qcavity::qsim::{input_shift_derivative, run_circuit, Observable};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn random_circuits_match_finite_differences(n in 2usize..=4, layers in 1usize..=3, seed in any::<u64>()) {
        let (spec, params, point) = common::random_circuit(n, layers, seed);
        if let Err(msg) = common::check_circuit(&spec, &params, point) {
            prop_assert!(false, "{} qubits, {} layers, seed {}: {}", n, layers, seed, msg);
        }
    }

    #[test]
    fn input_shift_matches_first_jet_slot(n in 2usize..=4, layers in 1usize..=3, seed in any::<u64>()) {
        let (spec, params, point) = common::random_circuit(n, layers, seed);
        let x = jet_var(point[0], Axis::X, 1).unwrap();
        let y = jet_var(point[1], Axis::Y, 1).unwrap();
        let out = run_circuit(&spec, &params, &[x, y]).unwrap();
        for (k, slot) in [(0usize, 1usize), (1, 2)] {
            let d = input_shift_derivative(&spec, &params, &point[..], k, Observable::SumZ).unwrap();
            prop_assert!((d - out.coeffs()[slot]).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_is_bounded_by_qubit_count(n in 2usize..=4, layers in 1usize..=3, seed in any::<u64>()) {
        let (spec, params, point) = common::random_circuit(n, layers, seed);
        let value = run_circuit(&spec, &params, &point[..]).unwrap();
        prop_assert!(value.abs() <= n as f64 + 1e-12);
    }
}

#[test]
fn solver_circuit_derivatives_match_finite_differences() {
    for n in 2..=4 {
        for layers in 1..=3 {
            let spec = build_encoding_layer(n).unwrap().then(&build_vqc(n, layers).unwrap()).unwrap();
            let params: Vec<f64> = (0..spec.n_params()).map(|k| 0.3 * (k as f64 + 1.0).sin()).collect();
            let angles: Vec<f64> = (0..n).map(|i| 0.2 + 0.4 * i as f64).collect();
            let value = |a: &[f64]| run_circuit(&spec, &params, a).unwrap();
            let grad = fdcheck::gradient(&value, &angles, 1e-5);
            for (k, fd) in grad.iter().enumerate() {
                let d = input_shift_derivative(&spec, &params, &angles, k, Observable::SumZ).unwrap();
                assert!(fdcheck::close(d, *fd, 1e-6), "{n} qubits, {layers} layers, input {k}: {d} vs {fd}");
            }
        }
    }
}
