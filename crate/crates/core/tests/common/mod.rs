#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcavity::circuits::{Binding, CircuitSpec, GateOp, Pauli};
use qcavity::jet::{jet_var, Axis, Jet};
use qcavity::qsim::{param_shift_derivative, run_circuit, sum_z_gradients};

pub const RTOL_FIRST: f64 = 1e-6;
pub const RTOL_HIGHER: f64 = 1e-4;

/// Random layered circuit on two inputs: every qubit gets a rotation of
/// random axis per layer, bound to a parameter or a scaled input, followed
/// by CNOTs between random distinct pairs.
pub fn random_circuit(n_qubits: usize, layers: usize, seed: u64) -> (CircuitSpec, Vec<f64>, [f64; 2]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut gates = vec![
        GateOp::Rotation { axis: Pauli::Y, qubit: 0, binding: Binding::Input(0) },
        GateOp::Rotation { axis: Pauli::Y, qubit: 1, binding: Binding::Input(1) },
    ];
    let mut next = 0;
    for _ in 0..layers {
        for q in 0..n_qubits {
            let axis = axes[rng.gen_range(0..3)];
            let binding = if rng.gen_bool(0.3) {
                Binding::InputScaled(rng.gen_range(0..2), rng.gen_range(-1.5..1.5))
            } else {
                next += 1;
                Binding::Param(next - 1)
            };
            gates.push(GateOp::Rotation { axis, qubit: q, binding });
        }
        for _ in 0..rng.gen_range(1..n_qubits + 1) {
            let control = rng.gen_range(0..n_qubits);
            let target = (control + rng.gen_range(1..n_qubits)) % n_qubits;
            gates.push(GateOp::Cnot { control, target });
        }
    }
    // Guarantee at least one trainable slot.
    gates.push(GateOp::Rotation { axis: axes[rng.gen_range(0..3)], qubit: n_qubits - 1, binding: Binding::Param(next) });
    let spec = CircuitSpec::from_gates(n_qubits, gates).expect("valid circuit");
    let params = (0..spec.n_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let point = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    (spec, params, point)
}

fn jets(point: [f64; 2]) -> [Jet; 2] {
    [jet_var(point[0], Axis::X, 3).unwrap(), jet_var(point[1], Axis::Y, 3).unwrap()]
}

fn fd_slots<F: Fn(f64, f64) -> f64>(f: &F, point: [f64; 2]) -> Vec<f64> {
    let mut out = fdcheck::partials(f, point[0], point[1], 3, 1e-2);
    let first = fdcheck::partials(f, point[0], point[1], 1, 2e-3);
    out[..3].copy_from_slice(&first);
    out
}

fn compare(what: &str, actual: &[f64], expected: &[f64]) -> Result<(), String> {
    for (i, (a, b)) in actual.iter().zip(expected).enumerate() {
        let rtol = if i < 3 { RTOL_FIRST } else { RTOL_HIGHER };
        if !fdcheck::close(*a, *b, rtol) {
            return Err(format!("{what}: slot {i} exact {a:e} vs fd {b:e}"));
        }
    }
    Ok(())
}

/// Jet slots, shift-rule parameter derivatives (plain and jet-valued) and
/// the reverse sweep, each against finite differences.
pub fn check_circuit(spec: &CircuitSpec, params: &[f64], point: [f64; 2]) -> Result<(), String> {
    let input = jets(point);
    let value = |th: &[f64], x: f64, y: f64| run_circuit(spec, th, &[x, y]).unwrap();

    let jet = run_circuit(spec, params, &input).map_err(|e| e.to_string())?;
    compare("jet", jet.coeffs(), &fd_slots(&|x, y| value(params, x, y), point))?;

    let adjoint = sum_z_gradients(spec, params, &input).map_err(|e| e.to_string())?;
    let h = 1e-5;
    for k in 0..spec.n_params() {
        let shift = param_shift_derivative(spec, params, &point[..], k).map_err(|e| e.to_string())?;
        let fd = fdcheck::directional(&|th: &[f64]| value(th, point[0], point[1]), params, k, h);
        if !fdcheck::close(shift, fd, RTOL_FIRST) {
            return Err(format!("param {k}: shift {shift:e} vs fd {fd:e}"));
        }

        let shift_jet = param_shift_derivative(spec, params, &input, k).map_err(|e| e.to_string())?;
        let mut plus = params.to_vec();
        let mut minus = params.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let up = run_circuit(spec, &plus, &input).unwrap();
        let down = run_circuit(spec, &minus, &input).unwrap();
        let fd_jet: Vec<f64> = up.coeffs().iter().zip(down.coeffs()).map(|(u, d)| (u - d) / (2.0 * h)).collect();
        compare(&format!("param {k} jet"), shift_jet.coeffs(), &fd_jet)?;

        if let Some((i, a, b)) = fdcheck::first_mismatch(adjoint.params[k].coeffs(), shift_jet.coeffs(), 1e-10) {
            return Err(format!("param {k} adjoint slot {i}: {a:e} vs shift {b:e}"));
        }
    }
    Ok(())
}

use qcavity::circuits::{EmbeddingKind, ModelConfig};
use qcavity::qpinn::{build_model, loss_gradient, make_collocation, total_loss, GradientMethod, LossConfig};

/// Smallest instance of each model kind: 2-qubit circuits with one layer,
/// width-3 hidden layers.
pub fn tiny_configs() -> Vec<(&'static str, ModelConfig)> {
    let q = |embedding| ModelConfig::Qpinn { n_qubits: 2, vqc_layers: 1, embedding };
    vec![
        ("chebyshev", q(EmbeddingKind::Chebyshev)),
        ("fnn", q(EmbeddingKind::Fnn { hidden: 3 })),
        ("qnn", q(EmbeddingKind::Qnn { layers: 1 })),
        ("pinn", ModelConfig::Pinn { hidden: vec![3] }),
    ]
}

/// Full-size instance of each model kind.
pub fn full_configs() -> Vec<(&'static str, ModelConfig)> {
    let q = |embedding| ModelConfig::Qpinn { n_qubits: 4, vqc_layers: 10, embedding };
    vec![
        ("chebyshev", q(EmbeddingKind::Chebyshev)),
        ("fnn", q(EmbeddingKind::Fnn { hidden: 52 })),
        ("qnn", q(EmbeddingKind::Qnn { layers: 5 })),
        ("pinn", ModelConfig::Pinn { hidden: vec![32; 4] }),
    ]
}

pub fn random_theta(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Bound on the rounding error of a central difference of a sum of
/// magnitude `scale` at step `h`. Negligible unless the loss is huge, as it
/// is for the Chebyshev map whose `arccos` derivatives blow up on the walls.
pub fn rounding_floor(scale: f64, h: f64) -> f64 {
    16.0 * f64::EPSILON * scale.abs() / h
}

/// Compare the exact loss gradient on a 3×3 grid at Re 10 with central
/// differences over every parameter. Each loss term is differenced on its
/// own before weighting, so terms that do not depend on a parameter cancel
/// exactly instead of leaving rounding noise of their magnitude.
pub fn check_loss_gradient(config: &ModelConfig, method: GradientMethod, rtol: f64) -> Result<(), String> {
    let model = build_model(config, method).map_err(|e| e.to_string())?;
    let colloc = make_collocation(3, 3).unwrap();
    let cfg = LossConfig::new(10.0);
    let theta = random_theta(model.n_params(), 5);
    let (breakdown, grad) = loss_gradient(model.as_ref(), &theta, &colloc, &cfg).map_err(|e| e.to_string())?;
    let direct = total_loss(model.as_ref(), &theta, &colloc, &cfg).unwrap();
    if !fdcheck::close(breakdown.total, direct.total, 1e-12) {
        return Err(format!("loss {} vs {}", breakdown.total, direct.total));
    }
    let h = 1e-5;
    let mut work = theta.clone();
    let mut fd = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        work[k] = theta[k] + h;
        let up = total_loss(model.as_ref(), &work, &colloc, &cfg).unwrap();
        work[k] = theta[k] - h;
        let down = total_loss(model.as_ref(), &work, &colloc, &cfg).unwrap();
        work[k] = theta[k];
        let d = |a: f64, b: f64| (a - b) / (2.0 * h);
        fd.push(
            d(up.pde, down.pde)
                + cfg.lambda_b * (d(up.wall, down.wall) + d(up.lid, down.lid) + d(up.reference, down.reference)),
        );
    }
    let noise = rounding_floor(breakdown.total, h);
    for (k, (a, b)) in grad.iter().zip(&fd).enumerate() {
        if (a - b).abs() > rtol * (1.0 + b.abs()) + noise {
            return Err(format!("parameter {k}: exact {a:e} vs fd {b:e} (loss {:e})", breakdown.total));
        }
    }
    Ok(())
}
