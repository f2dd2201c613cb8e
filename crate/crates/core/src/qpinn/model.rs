//! Field providers: the hybrid quantum model and (via `baseline`) the
//! classical MLP pair, behind one trait the loss code consumes.

use std::fmt::Debug;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::PinnModel;
use crate::circuits::{build_encoding_layer, build_vqc, segment, Binding, CircuitSpec, EmbeddingKind, GateOp, Layout, ModelConfig, ModelParams};
use crate::embeddings::{normalize, Domain, Embedding, EmbeddingTrace};
use crate::error::{Error, Result};
use crate::jet::{mul_adjoint, Jet, MAX_LEN};
use crate::qsim::{execute, gate_derivatives, input_shift_derivative, param_shift_derivative_with, Observable};

use super::physics::FieldSample;

/// Which fields to evaluate and at what jet order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub psi: Option<usize>,
    pub p: Option<usize>,
}

impl Request {
    pub const INTERIOR: Request = Request {
        psi: Some(3),
        p: Some(1),
    };
    pub const BOUNDARY: Request = Request { psi: Some(1), p: None };
    pub const PRESSURE: Request = Request { psi: None, p: Some(1) };
    pub const VALUES: Request = Request {
        psi: Some(1),
        p: Some(1),
    };

    fn max_order(&self) -> usize {
        self.psi.unwrap_or(1).max(self.p.unwrap_or(1))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Fields {
    pub psi: Option<Jet>,
    pub p: Option<Jet>,
}

/// Cotangents of a scalar objective on the field jets.
#[derive(Clone, Copy, Debug)]
pub struct Cotangents {
    pub psi: [f64; MAX_LEN],
    pub p: [f64; MAX_LEN],
}

impl Default for Cotangents {
    fn default() -> Self {
        Self {
            psi: [0.0; MAX_LEN],
            p: [0.0; MAX_LEN],
        }
    }
}

/// How circuit-parameter derivatives are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// One reverse sweep per circuit run.
    #[default]
    Adjoint,
    /// Two shifted runs per gate.
    ParameterShift,
}

/// A differentiable map from `(x, y, Θ)` to the `p` and `ψ` jets.
pub trait FieldModel: Send + Sync + Debug {
    fn config(&self) -> &ModelConfig;
    fn layout(&self) -> &Layout;
    fn domain(&self) -> &Domain;

    fn n_params(&self) -> usize {
        self.layout().total()
    }

    /// Seeded initial Θ.
    fn init_params(&self, rng: &mut dyn rand::RngCore) -> Vec<f64>;

    fn fields(&self, x: f64, y: f64, theta: &[f64], req: Request) -> Result<Fields>;

    /// Evaluate the requested fields, ask `seed` for cotangents on them and
    /// accumulate the parameter gradient into `grad`.
    fn pullback(
        &self,
        x: f64,
        y: f64,
        theta: &[f64],
        req: Request,
        grad: &mut [f64],
        seed: &mut dyn FnMut(&Fields) -> Cotangents,
    ) -> Result<Fields>;
}

pub(crate) fn check_theta(model: &dyn FieldModel, theta: &[f64]) -> Result<()> {
    if theta.len() != model.n_params() {
        return Err(Error::Usage(format!(
            "parameter vector has {} entries, model expects {}",
            theta.len(),
            model.n_params()
        )));
    }
    Ok(())
}

/// Build the field provider for a model configuration.
pub fn build_model(config: &ModelConfig, gradient: GradientMethod) -> Result<Box<dyn FieldModel>> {
    Ok(match config {
        ModelConfig::Qpinn { .. } => Box::new(QpinnModel::new(config.clone(), gradient)?),
        ModelConfig::Pinn { .. } => Box::new(PinnModel::new(config.clone())?),
    })
}

/// `p` at order 1 and `ψ` at order 3.
pub fn eval_fields(x: f64, y: f64, params: &ModelParams, model: &dyn FieldModel) -> Result<FieldSample> {
    if &params.layout != model.layout() {
        return Err(Error::Usage("parameter layout does not match the model".into()));
    }
    let f = model.fields(x, y, &params.theta, Request::INTERIOR)?;
    Ok(FieldSample {
        p: f.p.expect("requested"),
        psi: f.psi.expect("requested"),
    })
}

pub(crate) fn uniform(rng: &mut dyn rand::RngCore, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

/// Circuit-angle initialization half-width.
pub const ANGLE_INIT: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
enum Field {
    P,
    Psi,
}

/// Embedding, `Ry(α)` encoding and a hardware-efficient VQC read out as
/// `Σ Z`, once for `p` and once for `ψ`.
#[derive(Clone, Debug)]
pub struct QpinnModel {
    config: ModelConfig,
    layout: Layout,
    domain: Domain,
    embedding: Embedding,
    solver: CircuitSpec,
    sum_z: Vec<f64>,
    gradient: GradientMethod,
    emb_p: Range<usize>,
    emb_psi: Range<usize>,
    vqc_p: Range<usize>,
    vqc_psi: Range<usize>,
    shared: bool,
}

impl QpinnModel {
    pub fn new(config: ModelConfig, gradient: GradientMethod) -> Result<Self> {
        let ModelConfig::Qpinn {
            n_qubits,
            vqc_layers,
            ref embedding,
        } = config
        else {
            return Err(Error::Config("not a quantum model configuration".into()));
        };
        let layout = config.layout()?;
        let solver = build_encoding_layer(n_qubits)?.then(&build_vqc(n_qubits, vqc_layers)?)?;
        let (emb_p, emb_psi, shared) = match embedding {
            EmbeddingKind::Chebyshev => (0..0, 0..0, true),
            EmbeddingKind::Fnn { .. } => {
                let r = layout.range(segment::EMBEDDING_SHARED)?;
                (r.clone(), r, true)
            }
            EmbeddingKind::Qnn { .. } => (
                layout.range(segment::EMBEDDING_P)?,
                layout.range(segment::EMBEDDING_PSI)?,
                false,
            ),
        };
        Ok(Self {
            embedding: Embedding::new(embedding, n_qubits)?,
            sum_z: Observable::SumZ.diagonal(n_qubits),
            vqc_p: layout.range(segment::VQC_P)?,
            vqc_psi: layout.range(segment::VQC_PSI)?,
            solver,
            layout,
            domain: Domain::UNIT,
            config,
            gradient,
            emb_p,
            emb_psi,
            shared,
        })
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    /// Encoding layer followed by the variational circuit.
    pub fn solver_circuit(&self) -> &CircuitSpec {
        &self.solver
    }

    fn vqc(&self, f: Field) -> Range<usize> {
        match f {
            Field::P => self.vqc_p.clone(),
            Field::Psi => self.vqc_psi.clone(),
        }
    }

    fn emb(&self, f: Field) -> Range<usize> {
        match f {
            Field::P => self.emb_p.clone(),
            Field::Psi => self.emb_psi.clone(),
        }
    }

    fn wanted(req: Request) -> [(Field, Option<usize>); 2] {
        [(Field::P, req.p), (Field::Psi, req.psi)]
    }

    /// Embedding traces: one shared at the top order, or one per field.
    fn traces(&self, xt: &Jet, yt: &Jet, theta: &[f64], req: Request) -> Result<[Option<EmbeddingTrace>; 2]> {
        if self.shared {
            let t = self.embedding.forward(xt, yt, &theta[self.emb_p.clone()])?;
            Ok([Some(t), None])
        } else {
            let mut out = [None, None];
            for (slot, (f, order)) in Self::wanted(req).into_iter().enumerate() {
                if let Some(k) = order {
                    out[slot] = Some(
                        self.embedding
                            .forward(&xt.truncate(k), &yt.truncate(k), &theta[self.emb(f)])?,
                    );
                }
            }
            Ok(out)
        }
    }

    fn trace_for<'a>(&self, traces: &'a [Option<EmbeddingTrace>; 2], slot: usize) -> &'a EmbeddingTrace {
        if self.shared {
            traces[0].as_ref().expect("shared trace")
        } else {
            traces[slot].as_ref().expect("requested field trace")
        }
    }

    /// Ring derivatives of `Σ Z` w.r.t. each VQC parameter and each encoding
    /// angle.
    fn solver_derivatives(
        &self,
        vqc: &[f64],
        angles: &[Jet],
        exec: &crate::qsim::Execution<Jet<num_complex::Complex64>>,
    ) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let order = angles[0].order();
        let mut dparam = vec![Jet::zero(order); self.solver.n_params()];
        let mut dinput = vec![Jet::zero(order); self.solver.n_inputs()];
        match self.gradient {
            GradientMethod::Adjoint => {
                let per_gate = gate_derivatives(&self.solver, exec, &[&self.sum_z], |_| true).remove(0);
                for (g, d) in self.solver.gates().iter().zip(per_gate) {
                    if let (GateOp::Rotation { binding, .. }, Some(d)) = (g, d) {
                        match *binding {
                            Binding::Param(k) => dparam[k] = dparam[k] + d,
                            Binding::Input(k) => dinput[k] = dinput[k] + d,
                            Binding::InputScaled(k, s) => dinput[k] = dinput[k] + d * s,
                            Binding::Fixed(_) => {}
                        }
                    }
                }
            }
            GradientMethod::ParameterShift => {
                for (k, d) in dparam.iter_mut().enumerate() {
                    *d = param_shift_derivative_with(&self.solver, vqc, angles, k, Observable::SumZ)?;
                }
                for (k, d) in dinput.iter_mut().enumerate() {
                    *d = input_shift_derivative(&self.solver, vqc, angles, k, Observable::SumZ)?;
                }
            }
        }
        Ok((dparam, dinput))
    }

    fn embedding_backward(
        &self,
        trace: &EmbeddingTrace,
        xt: &Jet,
        yt: &Jet,
        theta_e: &[f64],
        adj: &[[f64; MAX_LEN]],
        grad: &mut [f64],
    ) -> Result<()> {
        match (&self.embedding, self.gradient) {
            (Embedding::Qnn { spec, .. }, GradientMethod::ParameterShift) => {
                let order = trace.angles()[0].order();
                let inputs = [xt.truncate(order), yt.truncate(order)];
                for (q, w) in adj.iter().enumerate() {
                    for (k, g) in grad.iter_mut().enumerate() {
                        let d = param_shift_derivative_with(spec, theta_e, &inputs, k, Observable::Z(q))?;
                        *g += std::f64::consts::PI * d.dot(w);
                    }
                }
            }
            _ => self.embedding.backward(trace, theta_e, adj, grad),
        }
        Ok(())
    }
}

impl FieldModel for QpinnModel {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn init_params(&self, rng: &mut dyn rand::RngCore) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.n_params());
        for seg in self.layout.segments() {
            match (&self.embedding, seg.name.as_str()) {
                (Embedding::Fnn(net), segment::EMBEDDING_SHARED) => theta.extend(net.init(rng)),
                _ => theta.extend(uniform(rng, seg.len, ANGLE_INIT)),
            }
        }
        theta
    }

    fn fields(&self, x: f64, y: f64, theta: &[f64], req: Request) -> Result<Fields> {
        check_theta(self, theta)?;
        let (xt, yt) = normalize(x, y, &self.domain, req.max_order())?;
        let traces = self.traces(&xt, &yt, theta, req)?;
        let mut out = Fields { psi: None, p: None };
        for (slot, (f, order)) in Self::wanted(req).into_iter().enumerate() {
            let Some(k) = order else { continue };
            let angles: Vec<Jet> = self
                .trace_for(&traces, slot)
                .angles()
                .iter()
                .map(|a| a.truncate(k))
                .collect();
            let exec = execute(&self.solver, &theta[self.vqc(f)], &angles)?;
            let value = exec.state().expval_diag(&self.sum_z);
            match f {
                Field::P => out.p = Some(value),
                Field::Psi => out.psi = Some(value),
            }
        }
        Ok(out)
    }

    fn pullback(
        &self,
        x: f64,
        y: f64,
        theta: &[f64],
        req: Request,
        grad: &mut [f64],
        seed: &mut dyn FnMut(&Fields) -> Cotangents,
    ) -> Result<Fields> {
        check_theta(self, theta)?;
        let (xt, yt) = normalize(x, y, &self.domain, req.max_order())?;
        let traces = self.traces(&xt, &yt, theta, req)?;
        let mut out = Fields { psi: None, p: None };
        let mut runs = Vec::with_capacity(2);
        for (slot, (f, order)) in Self::wanted(req).into_iter().enumerate() {
            let Some(k) = order else { continue };
            let angles: Vec<Jet> = self
                .trace_for(&traces, slot)
                .angles()
                .iter()
                .map(|a| a.truncate(k))
                .collect();
            let exec = execute(&self.solver, &theta[self.vqc(f)], &angles)?;
            let value = exec.state().expval_diag(&self.sum_z);
            match f {
                Field::P => out.p = Some(value),
                Field::Psi => out.psi = Some(value),
            }
            runs.push((slot, f, angles, exec));
        }
        let cot = seed(&out);
        let n = self.solver.n_inputs();
        let mut shared_adj = vec![[0.0; MAX_LEN]; n];
        for (slot, f, angles, exec) in runs {
            let w = match f {
                Field::P => &cot.p,
                Field::Psi => &cot.psi,
            };
            let vqc = self.vqc(f);
            let (dparam, dinput) = self.solver_derivatives(&theta[vqc.clone()], &angles, &exec)?;
            for (g, d) in grad[vqc].iter_mut().zip(&dparam) {
                *g += d.dot(w);
            }
            let adj: Vec<[f64; MAX_LEN]> = dinput.iter().map(|d| mul_adjoint(d, w)).collect();
            if self.shared {
                for (s, a) in shared_adj.iter_mut().zip(&adj) {
                    for (si, ai) in s.iter_mut().zip(a) {
                        *si += ai;
                    }
                }
            } else {
                let range = self.emb(f);
                let trace = self.trace_for(&traces, slot);
                self.embedding_backward(trace, &xt, &yt, &theta[range.clone()], &adj, &mut grad[range])?;
            }
        }
        if self.shared && self.embedding.n_params() > 0 {
            let range = self.emb_p.clone();
            let trace = self.trace_for(&traces, 0);
            self.embedding_backward(trace, &xt, &yt, &theta[range.clone()], &shared_adj, &mut grad[range])?;
        }
        Ok(out)
    }
}
