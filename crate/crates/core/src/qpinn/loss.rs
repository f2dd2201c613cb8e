//! The four-term physics-informed loss and its exact parameter gradient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::collocation::CollocationSet;
use super::model::{Cotangents, FieldModel, Fields, Request};
use super::physics::{boundary_term, interior_term, reference_term};

/// Default boundary weight `λ_B`.
pub const DEFAULT_LAMBDA_B: f64 = 10.0;

/// Points per work unit; partial sums are combined in chunk order so the
/// result does not depend on the worker count.
const CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub reynolds: f64,
    pub lambda_b: f64,
}

impl LossConfig {
    pub fn new(reynolds: f64) -> Self {
        Self {
            reynolds,
            lambda_b: DEFAULT_LAMBDA_B,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.reynolds > 0.0 && self.reynolds.is_finite()) {
            return Err(Error::Config(format!("reynolds must be positive, got {}", self.reynolds)));
        }
        if !(self.lambda_b >= 0.0 && self.lambda_b.is_finite()) {
            return Err(Error::Config(format!(
                "lambda_b must be non-negative, got {}",
                self.lambda_b
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub pde: f64,
    pub wall: f64,
    pub lid: f64,
    #[serde(rename = "ref")]
    pub reference: f64,
    pub total: f64,
    pub lambda_b: f64,
}

impl LossBreakdown {
    fn finish(mut self, lambda_b: f64) -> Self {
        self.lambda_b = lambda_b;
        self.total = self.pde + lambda_b * (self.wall + self.lid + self.reference);
        self
    }

    pub fn is_finite(&self) -> bool {
        [self.pde, self.wall, self.lid, self.reference, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug)]
enum Role {
    Interior,
    Wall,
    Lid,
    Reference,
}

#[derive(Clone, Copy)]
struct Task {
    role: Role,
    x: f64,
    y: f64,
    /// `1/|set|`
    weight: f64,
}

fn tasks(colloc: &CollocationSet) -> Result<Vec<Task>> {
    if colloc.interior.is_empty() {
        return Err(Error::Config("collocation set has no interior points".into()));
    }
    let mut out = Vec::with_capacity(colloc.len() + 1);
    let mut push = |role, pts: &[(f64, f64)]| {
        let weight = 1.0 / pts.len().max(1) as f64;
        out.extend(pts.iter().map(|&(x, y)| Task { role, x, y, weight }));
    };
    push(Role::Interior, &colloc.interior);
    push(Role::Wall, &colloc.wall);
    push(Role::Lid, &colloc.lid);
    push(Role::Reference, &[colloc.reference_point]);
    Ok(out)
}

impl Role {
    fn request(self) -> Request {
        match self {
            Role::Interior => Request::INTERIOR,
            Role::Wall | Role::Lid => Request::BOUNDARY,
            Role::Reference => Request::PRESSURE,
        }
    }
}

/// Contribution of one point to its term mean, and the cotangents of the
/// total loss on the point's field jets.
fn local(task: &Task, f: &Fields, cfg: &LossConfig) -> (f64, Cotangents) {
    let mut c = Cotangents::default();
    let lb = cfg.lambda_b;
    let v = match task.role {
        Role::Interior => {
            let nu = 1.0 / cfg.reynolds;
            let (v, cpsi, cp) = interior_term(f.psi.as_ref().expect("ψ"), f.p.as_ref().expect("p"), nu, task.weight);
            c.psi = cpsi;
            c.p = cp;
            v
        }
        Role::Wall | Role::Lid => {
            let u_b = if matches!(task.role, Role::Lid) { 1.0 } else { 0.0 };
            let (v, cpsi) = boundary_term(f.psi.as_ref().expect("ψ"), u_b, task.weight);
            c.psi = cpsi.map(|w| lb * w);
            v
        }
        Role::Reference => {
            let (v, cp) = reference_term(f.p.as_ref().expect("p"), task.weight);
            c.p = cp.map(|w| lb * w);
            v
        }
    };
    (v, c)
}

/// Term means `[pde, wall, lid, ref]`.
#[derive(Clone, Copy, Default)]
struct Parts([f64; 4]);

impl Parts {
    fn add(&mut self, role: Role, v: f64) {
        self.0[role as usize] += v;
    }

    fn merge(mut self, other: &Parts) -> Parts {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
        self
    }

    fn breakdown(&self, lambda_b: f64) -> LossBreakdown {
        LossBreakdown {
            pde: self.0[0],
            wall: self.0[1],
            lid: self.0[2],
            reference: self.0[3],
            ..Default::default()
        }
        .finish(lambda_b)
    }
}

pub fn total_loss(model: &dyn FieldModel, theta: &[f64], colloc: &CollocationSet, cfg: &LossConfig) -> Result<LossBreakdown> {
    cfg.validate()?;
    let tasks = tasks(colloc)?;
    let parts = tasks
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<Parts> {
            let mut p = Parts::default();
            for t in chunk {
                let f = model.fields(t.x, t.y, theta, t.role.request())?;
                p.add(t.role, local(t, &f, cfg).0);
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold(Parts::default(), Parts::merge).breakdown(cfg.lambda_b))
}

/// Loss breakdown and `∂ total / ∂Θ`.
pub fn loss_gradient(
    model: &dyn FieldModel,
    theta: &[f64],
    colloc: &CollocationSet,
    cfg: &LossConfig,
) -> Result<(LossBreakdown, Vec<f64>)> {
    cfg.validate()?;
    let tasks = tasks(colloc)?;
    let n = model.n_params();
    let partial = tasks
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<(Parts, Vec<f64>)> {
            let mut p = Parts::default();
            let mut g = vec![0.0; n];
            for t in chunk {
                let mut value = 0.0;
                model.pullback(t.x, t.y, theta, t.role.request(), &mut g, &mut |f| {
                    let (v, c) = local(t, f, cfg);
                    value = v;
                    c
                })?;
                p.add(t.role, value);
            }
            Ok((p, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grad = vec![0.0; n];
    let mut parts = Parts::default();
    for (p, g) in &partial {
        parts = parts.merge(p);
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    Ok((parts.breakdown(cfg.lambda_b), grad))
}
