//! Dense statevector simulation with scalar or jet-valued gate angles.
//!
//! Qubit `q` is bit `q` of the amplitude index (qubit 0 is the least
//! significant bit). Rotations are `exp(-i θ σ/2)`. Amplitudes are either
//! plain complex numbers or complex jets; in the latter case every
//! expectation value comes out as a real jet carrying its spatial
//! derivatives.
//!
//! Parameter derivatives are available two ways: the two-term shift rule
//! ([`param_shift_derivative`], [`input_shift_derivative`]) and a reverse
//! sweep over the executed circuit ([`gate_derivatives`]). Both are exact for
//! Pauli rotations and both work over the jet ring, so a derivative with
//! respect to an angle is itself a jet.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::circuits::{Binding, CircuitSpec, GateOp, Pauli};
use crate::error::{Error, Result};
use crate::jet::{terms, Jet};

/// Real scalar an angle or expectation can take: `f64` or a real jet.
pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
{
    type Amp: Amplitude<Real = Self>;

    fn value(&self) -> f64;
    fn constant_like(&self, v: f64) -> Self;
    /// `(cos(θ/2), sin(θ/2))`.
    fn half_angle(&self) -> (Self, Self);
    /// Prototype for circuits without inputs.
    fn proto() -> Self;
}

/// Amplitude type matching a [`Real`].
pub trait Amplitude: Copy + Send + Sync + Debug + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> {
    type Real: Real<Amp = Self>;

    fn from_real(r: Self::Real) -> Self;
    fn zero_like(&self) -> Self;
    /// Real zero of matching shape.
    fn real_zero(&self) -> Self::Real;
    fn scale(self, k: f64) -> Self;
    fn mul_real(self, r: &Self::Real) -> Self;
    /// `i · self`
    fn mul_i(self) -> Self;
    /// `Re(conj(a) · b)`
    fn re_conj_mul(a: &Self, b: &Self) -> Self::Real;
    /// `Im(conj(a) · b)`
    fn im_conj_mul(a: &Self, b: &Self) -> Self::Real;
    /// Value-level modulus squared.
    fn value_norm_sqr(&self) -> f64;
}

impl Real for f64 {
    type Amp = Complex64;

    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn constant_like(&self, v: f64) -> Self {
        v
    }
    #[inline]
    fn half_angle(&self) -> (Self, Self) {
        let (s, c) = (0.5 * self).sin_cos();
        (c, s)
    }
    fn proto() -> Self {
        0.0
    }
}

impl Amplitude for Complex64 {
    type Real = f64;

    #[inline]
    fn from_real(r: f64) -> Self {
        Complex64::new(r, 0.0)
    }
    #[inline]
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn real_zero(&self) -> f64 {
        0.0
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn mul_real(self, r: &f64) -> Self {
        self * *r
    }
    #[inline]
    fn mul_i(self) -> Self {
        Complex64::new(-self.im, self.re)
    }
    #[inline]
    fn re_conj_mul(a: &Self, b: &Self) -> f64 {
        a.re * b.re + a.im * b.im
    }
    #[inline]
    fn im_conj_mul(a: &Self, b: &Self) -> f64 {
        a.re * b.im - a.im * b.re
    }
    #[inline]
    fn value_norm_sqr(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Real for Jet<f64> {
    type Amp = Jet<Complex64>;

    #[inline]
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    #[inline]
    fn constant_like(&self, v: f64) -> Self {
        Jet::constant_like(self, v)
    }
    fn half_angle(&self) -> (Self, Self) {
        let h = self.scale(0.5);
        (h.cos(), h.sin())
    }
    fn proto() -> Self {
        Jet::default()
    }
}

impl Amplitude for Jet<Complex64> {
    type Real = Jet<f64>;

    fn from_real(r: Jet<f64>) -> Self {
        let mut out = Jet::<Complex64>::zero(r.order());
        for (o, v) in out.coeffs_mut().iter_mut().zip(r.coeffs()) {
            *o = Complex64::new(*v, 0.0);
        }
        out
    }
    #[inline]
    fn zero_like(&self) -> Self {
        Jet::zero(self.order())
    }
    #[inline]
    fn real_zero(&self) -> Jet<f64> {
        Jet::zero(self.order())
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        Jet::scale(&self, k)
    }
    #[inline]
    fn mul_real(self, r: &Jet<f64>) -> Self {
        self.mul_by(r)
    }
    #[inline]
    fn mul_i(self) -> Self {
        let mut out = self;
        for v in out.coeffs_mut() {
            *v = Complex64::new(-v.im, v.re);
        }
        out
    }
    #[inline]
    fn re_conj_mul(a: &Self, b: &Self) -> Jet<f64> {
        let order = a.order().min(b.order());
        let (ac, bc) = (a.coeffs(), b.coeffs());
        let mut out = Jet::<f64>::zero(order);
        let oc = out.coeffs_mut();
        for t in terms(order) {
            let (x, y) = (ac[t.lhs], bc[t.rhs]);
            oc[t.out] += t.weight * (x.re * y.re + x.im * y.im);
        }
        out
    }
    #[inline]
    fn im_conj_mul(a: &Self, b: &Self) -> Jet<f64> {
        let order = a.order().min(b.order());
        let (ac, bc) = (a.coeffs(), b.coeffs());
        let mut out = Jet::<f64>::zero(order);
        let oc = out.coeffs_mut();
        for t in terms(order) {
            let (x, y) = (ac[t.lhs], bc[t.rhs]);
            oc[t.out] += t.weight * (x.re * y.im - x.im * y.re);
        }
        out
    }
    #[inline]
    fn value_norm_sqr(&self) -> f64 {
        self.value().norm_sqr()
    }
}

/// A gate angle once bound: plain numbers take a cheaper path than jets.
#[derive(Clone, Copy, Debug)]
pub enum Angle<R> {
    Scalar(f64),
    Var(R),
}

impl<R: Real> Angle<R> {
    pub fn value(&self) -> f64 {
        match self {
            Angle::Scalar(v) => *v,
            Angle::Var(r) => r.value(),
        }
    }

    fn half(&self) -> Half<R> {
        match self {
            Angle::Scalar(v) => {
                let (s, c) = (0.5 * v).sin_cos();
                Half::Scalar(c, s)
            }
            Angle::Var(r) => {
                let (c, s) = r.half_angle();
                Half::Var(c, s)
            }
        }
    }

    fn shifted(&self, delta: f64) -> Self {
        match self {
            Angle::Scalar(v) => Angle::Scalar(v + delta),
            Angle::Var(r) => Angle::Var(*r + r.constant_like(delta)),
        }
    }
}

/// `(cos(θ/2), sin(θ/2))` of a bound angle.
#[derive(Clone, Copy, Debug)]
enum Half<R> {
    Scalar(f64, f64),
    Var(R, R),
}

impl<R: Real> Half<R> {
    fn inverse(&self) -> Self {
        match *self {
            Half::Scalar(c, s) => Half::Scalar(c, -s),
            Half::Var(c, s) => Half::Var(c, -s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Statevector<A> {
    n_qubits: usize,
    amps: Vec<A>,
}

impl<A: Amplitude> Statevector<A> {
    /// `|0…0⟩`, with amplitudes shaped like `proto` (jet order).
    pub fn zero_state(n_qubits: usize, proto: &A::Real) -> Self {
        let one = A::from_real(proto.constant_like(1.0));
        let zero = one.zero_like();
        let mut amps = vec![zero; 1 << n_qubits];
        amps[0] = one;
        Self { n_qubits, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(n_qubits: usize, index: usize, proto: &A::Real) -> Result<Self> {
        if index >= 1 << n_qubits {
            return Err(Error::Usage(format!("basis index {index} out of range")));
        }
        let mut s = Self::zero_state(n_qubits, proto);
        s.amps.swap(0, index);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[A] {
        &self.amps
    }

    /// Value-level squared 2-norm.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.value_norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n_qubits {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )))
        }
    }

    /// Apply `exp(-i θ σ_axis / 2)` on `qubit`.
    pub fn apply_rotation(&mut self, qubit: usize, axis: Pauli, angle: Angle<A::Real>) -> Result<()> {
        self.check_qubit(qubit)?;
        if !angle.value().is_finite() {
            return Err(Error::Usage(format!("non-finite rotation angle {}", angle.value())));
        }
        self.rotate(qubit, axis, &angle.half());
        Ok(())
    }

    fn rotate(&mut self, qubit: usize, axis: Pauli, half: &Half<A::Real>) {
        match half {
            Half::Scalar(c, s) => {
                let (c, s) = (*c, *s);
                rotate_pairs(&mut self.amps, qubit, axis, |a| a.scale(c), |a| a.scale(s))
            }
            Half::Var(c, s) => rotate_pairs(&mut self.amps, qubit, axis, |a| a.mul_real(c), |a| a.mul_real(s)),
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Usage("cnot control equals target".into()));
        }
        self.cnot(control, target);
        Ok(())
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for k in 0..self.amps.len() {
            if k & cm != 0 && k & tm == 0 {
                self.amps.swap(k, k | tm);
            }
        }
    }

    /// `⟨Z_q⟩`.
    pub fn expval_z(&self, qubit: usize) -> Result<A::Real> {
        self.check_qubit(qubit)?;
        Ok(self.expval_diag(&Observable::Z(qubit).diagonal(self.n_qubits)))
    }

    /// `Σ_j ⟨Z_j⟩`.
    pub fn expval_sum_z(&self) -> A::Real {
        self.expval_diag(&Observable::SumZ.diagonal(self.n_qubits))
    }

    /// `⟨O⟩` for a diagonal observable given by its diagonal.
    pub fn expval_diag(&self, diag: &[f64]) -> A::Real {
        let mut acc = self.amps[0].real_zero();
        for (a, d) in self.amps.iter().zip(diag) {
            if *d != 0.0 {
                debug_assert!(A::im_conj_mul(a, a).value().abs() < 1e-10);
                acc = acc + A::re_conj_mul(a, a) * *d;
            }
        }
        acc
    }
}

#[inline]
fn rotate_pairs<A: Amplitude>(
    amps: &mut [A],
    qubit: usize,
    axis: Pauli,
    mc: impl Fn(A) -> A,
    ms: impl Fn(A) -> A,
) {
    let stride = 1usize << qubit;
    let n = amps.len();
    let mut base = 0;
    while base < n {
        for k in base..base + stride {
            let (a0, a1) = (amps[k], amps[k + stride]);
            let (n0, n1) = match axis {
                // [[c, -is], [-is, c]]
                Pauli::X => (mc(a0) - ms(a1).mul_i(), mc(a1) - ms(a0).mul_i()),
                // [[c, -s], [s, c]]
                Pauli::Y => (mc(a0) - ms(a1), ms(a0) + mc(a1)),
                // diag(c - is, c + is)
                Pauli::Z => (mc(a0) - ms(a0).mul_i(), mc(a1) + ms(a1).mul_i()),
            };
            amps[k] = n0;
            amps[k + stride] = n1;
        }
        base += 2 * stride;
    }
}

/// Diagonal Pauli-Z observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Z(usize),
    SumZ,
}

impl Observable {
    pub fn diagonal(&self, n_qubits: usize) -> Vec<f64> {
        (0..1usize << n_qubits)
            .map(|k| match self {
                Observable::Z(q) => {
                    if k >> q & 1 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Observable::SumZ => n_qubits as f64 - 2.0 * k.count_ones() as f64,
            })
            .collect()
    }
}

/// Resolve each gate's angle from parameters and inputs.
pub fn bind_angles<R: Real>(spec: &CircuitSpec, params: &[f64], inputs: &[R]) -> Result<Vec<Option<Angle<R>>>> {
    if params.len() != spec.n_params() {
        return Err(Error::Usage(format!(
            "circuit expects {} parameters, got {}",
            spec.n_params(),
            params.len()
        )));
    }
    if inputs.len() != spec.n_inputs() {
        return Err(Error::Usage(format!(
            "circuit expects {} inputs, got {}",
            spec.n_inputs(),
            inputs.len()
        )));
    }
    Ok(spec
        .gates()
        .iter()
        .map(|g| match *g {
            GateOp::Rotation { binding, .. } => Some(match binding {
                Binding::Param(k) => Angle::Scalar(params[k]),
                Binding::Fixed(v) => Angle::Scalar(v),
                Binding::Input(k) => Angle::Var(inputs[k]),
                Binding::InputScaled(k, f) => Angle::Var(inputs[k] * f),
            }),
            GateOp::Cnot { .. } => None,
        })
        .collect())
}

/// Forward pass retained for reverse sweeps.
#[derive(Clone, Debug)]
pub struct Execution<A: Amplitude> {
    state: Statevector<A>,
    halves: Vec<Option<Half<A::Real>>>,
}

impl<A: Amplitude> Execution<A> {
    pub fn state(&self) -> &Statevector<A> {
        &self.state
    }
}

fn proto_of<R: Real>(inputs: &[R]) -> R {
    inputs.first().copied().unwrap_or_else(R::proto)
}

/// Run a circuit from bound angles on `|0…0⟩`.
pub fn execute_bound<R: Real>(spec: &CircuitSpec, angles: &[Option<Angle<R>>], proto: &R) -> Result<Execution<R::Amp>> {
    let mut state = Statevector::<R::Amp>::zero_state(spec.n_qubits(), proto);
    let mut halves = Vec::with_capacity(angles.len());
    for (g, angle) in spec.gates().iter().zip(angles) {
        match (*g, angle) {
            (GateOp::Rotation { axis, qubit, .. }, Some(a)) => {
                if !a.value().is_finite() {
                    return Err(Error::Usage(format!("non-finite rotation angle {}", a.value())));
                }
                let h = a.half();
                state.rotate(qubit, axis, &h);
                halves.push(Some(h));
            }
            (GateOp::Cnot { control, target }, _) => {
                state.cnot(control, target);
                halves.push(None);
            }
            (GateOp::Rotation { .. }, None) => {
                return Err(Error::Usage("rotation gate without a bound angle".into()))
            }
        }
    }
    Ok(Execution { state, halves })
}

/// Bind and run; returns the retained forward pass.
pub fn execute<R: Real>(spec: &CircuitSpec, params: &[f64], inputs: &[R]) -> Result<Execution<R::Amp>> {
    let angles = bind_angles(spec, params, inputs)?;
    execute_bound(spec, &angles, &proto_of(inputs))
}

/// Prepare `|0…0⟩`, apply every gate, return `Σ_j ⟨Z_j⟩`.
pub fn run_circuit<R: Real>(spec: &CircuitSpec, params: &[f64], inputs: &[R]) -> Result<R> {
    Ok(execute(spec, params, inputs)?.state.expval_sum_z())
}

fn shift_gate_derivative<R: Real>(
    spec: &CircuitSpec,
    angles: &[Option<Angle<R>>],
    gate: usize,
    proto: &R,
    readout: &impl Fn(&Statevector<R::Amp>) -> R,
) -> Result<R> {
    let base = angles[gate].ok_or_else(|| Error::Usage(format!("gate {gate} is not a rotation")))?;
    let mut shifted = angles.to_vec();
    shifted[gate] = Some(base.shifted(FRAC_PI_2));
    let up = readout(&execute_bound(spec, &shifted, proto)?.state);
    shifted[gate] = Some(base.shifted(-FRAC_PI_2));
    let down = readout(&execute_bound(spec, &shifted, proto)?.state);
    Ok((up - down) * 0.5)
}

/// `∂⟨ΣZ⟩/∂θ_k` by the two-term shift rule, summed over every gate bound to
/// parameter `k`. Jet outputs are differentiated slot by slot.
pub fn param_shift_derivative<R: Real>(spec: &CircuitSpec, params: &[f64], inputs: &[R], param_index: usize) -> Result<R> {
    param_shift_derivative_with(spec, params, inputs, param_index, Observable::SumZ)
}

pub fn param_shift_derivative_with<R: Real>(
    spec: &CircuitSpec,
    params: &[f64],
    inputs: &[R],
    param_index: usize,
    observable: Observable,
) -> Result<R> {
    if param_index >= spec.n_params() {
        return Err(Error::Usage(format!(
            "parameter index {param_index} out of range ({} parameters)",
            spec.n_params()
        )));
    }
    let angles = bind_angles(spec, params, inputs)?;
    let proto = proto_of(inputs);
    let diag = observable.diagonal(spec.n_qubits());
    let readout = |s: &Statevector<R::Amp>| s.expval_diag(&diag);
    let mut acc: Option<R> = None;
    for g in spec.gates_for_param(param_index) {
        let d = shift_gate_derivative(spec, &angles, g, &proto, &readout)?;
        acc = Some(match acc {
            Some(a) => a + d,
            None => d,
        });
    }
    acc.ok_or_else(|| Error::Usage(format!("parameter {param_index} is not used")))
}

/// Ring derivative `∂⟨O⟩/∂input_k` by the shift rule on every gate reading
/// input `k` (scaled inputs pick up their factor).
pub fn input_shift_derivative<R: Real>(
    spec: &CircuitSpec,
    params: &[f64],
    inputs: &[R],
    input_index: usize,
    observable: Observable,
) -> Result<R> {
    if input_index >= spec.n_inputs() {
        return Err(Error::Usage(format!("input index {input_index} out of range")));
    }
    let angles = bind_angles(spec, params, inputs)?;
    let proto = proto_of(inputs);
    let diag = observable.diagonal(spec.n_qubits());
    let readout = |s: &Statevector<R::Amp>| s.expval_diag(&diag);
    let mut acc: Option<R> = None;
    for (g, gate) in spec.gates().iter().enumerate() {
        let factor = match gate {
            GateOp::Rotation {
                binding: Binding::Input(k),
                ..
            } if *k == input_index => 1.0,
            GateOp::Rotation {
                binding: Binding::InputScaled(k, f),
                ..
            } if *k == input_index => *f,
            _ => continue,
        };
        let d = shift_gate_derivative(spec, &angles, g, &proto, &readout)? * factor;
        acc = Some(match acc {
            Some(a) => a + d,
            None => d,
        });
    }
    acc.ok_or_else(|| Error::Usage(format!("input {input_index} is not used")))
}

/// Reverse sweep: ring derivative of each observable with respect to the
/// angle of every rotation gate for which `wanted(gate)` holds.
///
/// Returns `out[observable][gate]`. With `λ` the back-propagated
/// `O|φ⟩` and `φ` the forward state after the gate,
/// `∂⟨O⟩/∂θ = Im⟨λ|σ|φ⟩`.
pub fn gate_derivatives<A: Amplitude>(
    spec: &CircuitSpec,
    exec: &Execution<A>,
    observables: &[&[f64]],
    wanted: impl Fn(usize) -> bool,
) -> Vec<Vec<Option<A::Real>>> {
    let n_gates = spec.gates().len();
    let mut phi = exec.state.clone();
    let mut lambdas: Vec<Statevector<A>> = observables
        .iter()
        .map(|diag| Statevector {
            n_qubits: phi.n_qubits,
            amps: phi.amps.iter().zip(diag.iter()).map(|(a, d)| a.scale(*d)).collect(),
        })
        .collect();
    let mut out = vec![vec![None; n_gates]; observables.len()];
    for g in (0..n_gates).rev() {
        match spec.gates()[g] {
            GateOp::Rotation { axis, qubit, .. } => {
                if wanted(g) {
                    for (o, lam) in lambdas.iter().enumerate() {
                        out[o][g] = Some(im_sigma_inner(&lam.amps, &phi.amps, qubit, axis));
                    }
                }
                let inv = exec.halves[g].as_ref().expect("rotation has a half angle").inverse();
                phi.rotate(qubit, axis, &inv);
                for lam in &mut lambdas {
                    lam.rotate(qubit, axis, &inv);
                }
            }
            GateOp::Cnot { control, target } => {
                phi.cnot(control, target);
                for lam in &mut lambdas {
                    lam.cnot(control, target);
                }
            }
        }
    }
    out
}

/// `Im⟨λ|σ_axis(qubit)|φ⟩`.
fn im_sigma_inner<A: Amplitude>(lam: &[A], phi: &[A], qubit: usize, axis: Pauli) -> A::Real {
    let stride = 1usize << qubit;
    let n = phi.len();
    let mut acc: Option<A::Real> = None;
    let mut base = 0;
    while base < n {
        for k in base..base + stride {
            let (l0, l1, p0, p1) = (&lam[k], &lam[k + stride], &phi[k], &phi[k + stride]);
            let term = match axis {
                Pauli::X => A::im_conj_mul(l0, p1) + A::im_conj_mul(l1, p0),
                Pauli::Y => A::re_conj_mul(l1, p0) - A::re_conj_mul(l0, p1),
                Pauli::Z => A::im_conj_mul(l0, p0) - A::im_conj_mul(l1, p1),
            };
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        base += 2 * stride;
    }
    acc.expect("at least one amplitude pair")
}

/// Expectation of `Σ Z` and its ring derivatives with respect to every
/// parameter and input, from one forward run and one reverse sweep.
#[derive(Clone, Debug)]
pub struct SumZGradients<R> {
    pub value: R,
    pub params: Vec<R>,
    pub inputs: Vec<R>,
}

pub fn sum_z_gradients<R: Real>(spec: &CircuitSpec, params: &[f64], inputs: &[R]) -> Result<SumZGradients<R>> {
    let exec = execute(spec, params, inputs)?;
    let diag = Observable::SumZ.diagonal(spec.n_qubits());
    let value = exec.state.expval_diag(&diag);
    let per_gate = gate_derivatives(spec, &exec, &[&diag], |_| true).remove(0);
    let zero = value.constant_like(0.0);
    let mut dp = vec![zero; spec.n_params()];
    let mut di = vec![zero; spec.n_inputs()];
    for (g, d) in spec.gates().iter().zip(per_gate) {
        if let (GateOp::Rotation { binding, .. }, Some(d)) = (g, d) {
            match *binding {
                Binding::Param(k) => dp[k] = dp[k] + d,
                Binding::Input(k) => di[k] = di[k] + d,
                Binding::InputScaled(k, f) => di[k] = di[k] + d * f,
                Binding::Fixed(_) => {}
            }
        }
    }
    Ok(SumZGradients {
        value,
        params: dp,
        inputs: di,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_encoding_layer, build_vqc};
    use crate::jet::{jet_var, Axis};
    use std::f64::consts::PI;

    fn one_qubit(axis: Pauli, binding: Binding) -> CircuitSpec {
        CircuitSpec::from_gates(
            1,
            vec![GateOp::Rotation {
                axis,
                qubit: 0,
                binding,
            }],
        )
        .unwrap()
    }

    #[test]
    fn ry_pi_flips() {
        let mut s = Statevector::<Complex64>::zero_state(1, &0.0);
        s.apply_rotation(0, Pauli::Y, Angle::Scalar(PI)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
        assert!((s.expval_sum_z() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rz_keeps_z() {
        for theta in [0.1, 1.0, 2.5, -4.0] {
            let mut s = Statevector::<Complex64>::zero_state(1, &0.0);
            s.apply_rotation(0, Pauli::Z, Angle::Scalar(theta)).unwrap();
            assert!((s.expval_sum_z() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ry_third_pi() {
        let mut s = Statevector::<Complex64>::zero_state(1, &0.0);
        s.apply_rotation(0, Pauli::Y, Angle::Scalar(PI / 3.0)).unwrap();
        assert!((s.expval_sum_z() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rotation_qubit_out_of_range() {
        let mut s = Statevector::<Complex64>::zero_state(2, &0.0);
        assert!(matches!(
            s.apply_rotation(2, Pauli::X, Angle::Scalar(0.1)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn cnot_examples() {
        // qubit 1 set: index 0b10
        let mut s = Statevector::<Complex64>::basis_state(2, 0b10, &0.0).unwrap();
        s.apply_cnot(1, 0).unwrap();
        assert!((s.amplitudes()[0b11].re - 1.0).abs() < 1e-15);
        let mut z = Statevector::<Complex64>::zero_state(2, &0.0);
        z.apply_cnot(0, 1).unwrap();
        assert!((z.amplitudes()[0].re - 1.0).abs() < 1e-15);
        let mut bell = Statevector::<Complex64>::zero_state(2, &0.0);
        bell.apply_rotation(0, Pauli::Y, Angle::Scalar(PI / 2.0)).unwrap();
        bell.apply_cnot(0, 1).unwrap();
        assert!(bell.expval_sum_z().abs() < 1e-15);
        assert!(matches!(bell.apply_cnot(1, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn sum_z_examples() {
        let s = Statevector::<Complex64>::zero_state(4, &0.0);
        assert_eq!(s.expval_sum_z(), 4.0);
        let mut t = Statevector::<Complex64>::zero_state(2, &0.0);
        t.apply_rotation(0, Pauli::Y, Angle::Scalar(PI / 3.0)).unwrap();
        assert!((t.expval_sum_z() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn run_circuit_examples() {
        let empty = CircuitSpec::from_gates(4, vec![]).unwrap();
        assert_eq!(run_circuit::<f64>(&empty, &[], &[]).unwrap(), 4.0);
        let ry = one_qubit(Pauli::Y, Binding::Param(0));
        assert!(run_circuit::<f64>(&ry, &[PI / 2.0], &[]).unwrap().abs() < 1e-15);
        assert!(matches!(run_circuit::<f64>(&ry, &[], &[]), Err(Error::Usage(_))));
    }

    #[test]
    fn shift_examples() {
        let ry = one_qubit(Pauli::Y, Binding::Param(0));
        assert!(param_shift_derivative::<f64>(&ry, &[0.0], &[], 0).unwrap().abs() < 1e-15);
        let d = param_shift_derivative::<f64>(&ry, &[PI / 2.0], &[], 0).unwrap();
        assert!((d + 1.0).abs() < 1e-15);
        assert!(matches!(
            param_shift_derivative::<f64>(&ry, &[0.0], &[], 1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn encoding_layer_examples() {
        let e = build_encoding_layer(4).unwrap();
        assert_eq!(run_circuit(&e, &[], &[0.0; 4]).unwrap(), 4.0);
        assert!((run_circuit(&e, &[], &[PI; 4]).unwrap() + 4.0).abs() < 1e-14);
        let one = build_encoding_layer(1).unwrap();
        assert!((run_circuit(&one, &[], &[PI]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn adjoint_matches_shift_rule_with_jets() {
        let enc = build_encoding_layer(3).unwrap();
        let spec = enc.then(&build_vqc(3, 2).unwrap()).unwrap();
        let x = jet_var(0.3, Axis::X, 3).unwrap();
        let y = jet_var(-0.4, Axis::Y, 3).unwrap();
        let inputs = [(x * y).sin() * 2.0, x.cos() + y, (x + y * 0.5).tanh() * 3.0];
        let params: Vec<f64> = (0..spec.n_params()).map(|k| 0.37 * k as f64 - 1.1).collect();
        let grads = sum_z_gradients(&spec, &params, &inputs).unwrap();
        for k in 0..spec.n_params() {
            let ps = param_shift_derivative(&spec, &params, &inputs, k).unwrap();
            for (a, b) in grads.params[k].coeffs().iter().zip(ps.coeffs()) {
                assert!((a - b).abs() < 1e-11, "param {k}: {a} vs {b}");
            }
        }
        for k in 0..spec.n_inputs() {
            let ps = input_shift_derivative(&spec, &params, &inputs, k, Observable::SumZ).unwrap();
            for (a, b) in grads.inputs[k].coeffs().iter().zip(ps.coeffs()) {
                assert!((a - b).abs() < 1e-11, "input {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn double_cnot_is_identity() {
        let spec = build_vqc(3, 1).unwrap();
        let params: Vec<f64> = (0..9).map(|k| 0.3 * k as f64).collect();
        let exec = execute::<f64>(&spec, &params, &[]).unwrap();
        let mut s = exec.state().clone();
        let before = s.amplitudes().to_vec();
        s.apply_cnot(0, 2).unwrap();
        s.apply_cnot(0, 2).unwrap();
        assert_eq!(before, s.amplitudes());
    }
}
