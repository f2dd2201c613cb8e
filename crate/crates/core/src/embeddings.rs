//! Coordinate-to-angle maps in front of the solver circuits.
//!
//! Three strategies: a fixed Chebyshev tower, a classical FNN and a
//! quantum embedding circuit read out per qubit. Angles are jets so spatial
//! derivatives flow through to the solver outputs.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_qnn_embedding, Binding, CircuitSpec, EmbeddingKind, GateOp};
use crate::error::{Error, Result};
use crate::jet::{slot, Jet, MAX_LEN};
use crate::mlp::{Mlp, MlpTrace, OutputActivation};
use crate::qsim::{execute, gate_derivatives, Execution, Observable};

/// Default FNN hidden width (`2 → 52 → n`).
pub const DEFAULT_FNN_HIDDEN: usize = 52;

/// Largest `|x̃|` passed to `arccos`.
pub const ARCCOS_CLAMP: f64 = 1.0 - 1e-12;

const DOMAIN_TOL: f64 = 1e-12;

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self::UNIT
    }
}

impl Domain {
    pub const UNIT: Domain = Domain {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min - DOMAIN_TOL
            && x <= self.x_max + DOMAIN_TOL
            && y >= self.y_min - DOMAIN_TOL
            && y <= self.y_max + DOMAIN_TOL
    }
}

/// Affine map of `(x, y)` onto `[-1, 1]²`, as jets of the given order seeded
/// with `dx̃/dx = 2/width` and `dỹ/dy = 2/height`.
pub fn normalize(x: f64, y: f64, domain: &Domain, order: usize) -> Result<(Jet, Jet)> {
    if !(domain.contains(x, y)) {
        return Err(Error::Usage(format!("point ({x}, {y}) outside the domain")));
    }
    if !(1..=3).contains(&order) {
        return Err(Error::Config(format!("jet order {order} outside 1..3")));
    }
    let sx = 2.0 / (domain.x_max - domain.x_min);
    let sy = 2.0 / (domain.y_max - domain.y_min);
    let mut xt = Jet::constant(((x - domain.x_min) * sx - 1.0).clamp(-1.0, 1.0), order);
    let mut yt = Jet::constant(((y - domain.y_min) * sy - 1.0).clamp(-1.0, 1.0), order);
    xt.coeffs_mut()[slot(1, 0)] = sx;
    yt.coeffs_mut()[slot(0, 1)] = sy;
    Ok((xt, yt))
}

fn clamped_acos(t: &Jet) -> Jet {
    let mut c = *t;
    let v = c.value();
    if v.abs() > ARCCOS_CLAMP {
        c.coeffs_mut()[0] = ARCCOS_CLAMP.copysign(v);
    }
    c.acos().expect("clamped into (-1, 1)")
}

/// Chebyshev tower: for 1-based qubit `i` and `k = ⌈i/2⌉`,
/// `α_i = k·arccos(x̃)` for odd `i` and `k·arccos(ỹ)` for even `i`.
pub fn chebyshev_angles(xt: &Jet, yt: &Jet, n_qubits: usize) -> Vec<Jet> {
    let ax = clamped_acos(xt);
    let ay = clamped_acos(yt);
    (1..=n_qubits)
        .map(|i| {
            let k = i.div_ceil(2) as f64;
            if i % 2 == 1 {
                ax.scale(k)
            } else {
                ay.scale(k)
            }
        })
        .collect()
}

/// FNN network `2 → hidden → n_qubits`, tanh hidden layer, `π·tanh` output.
pub fn fnn_network(hidden: usize, n_qubits: usize) -> Result<Mlp> {
    Mlp::new(vec![2, hidden, n_qubits], OutputActivation::ScaledTanh(PI))
}

pub fn fnn_angles(xt: &Jet, yt: &Jet, theta_f: &[f64], hidden: usize, n_qubits: usize) -> Result<Vec<Jet>> {
    let net = fnn_network(hidden, n_qubits)?;
    Ok(net.forward(&[*xt, *yt], theta_f)?.output().to_vec())
}

fn check_qnn_spec(spec: &CircuitSpec) -> Result<()> {
    if spec.n_inputs() != 2 {
        return Err(Error::Usage(format!(
            "embedding circuit must read 2 inputs, found {}",
            spec.n_inputs()
        )));
    }
    Ok(())
}

fn z_diagonals(n_qubits: usize) -> Vec<Vec<f64>> {
    (0..n_qubits).map(|q| Observable::Z(q).diagonal(n_qubits)).collect()
}

/// `α_i = π·⟨Z_i⟩` after the embedding circuit on inputs `(x̃, ỹ)`.
pub fn qnn_angles(xt: &Jet, yt: &Jet, theta_q: &[f64], spec: &CircuitSpec) -> Result<Vec<Jet>> {
    check_qnn_spec(spec)?;
    let exec = execute(spec, theta_q, &[*xt, *yt])?;
    Ok(z_diagonals(spec.n_qubits())
        .iter()
        .map(|d| exec.state().expval_diag(d).scale(PI))
        .collect())
}

/// A built embedding ready for repeated evaluation.
#[derive(Clone, Debug)]
pub enum Embedding {
    Chebyshev { n_qubits: usize },
    Fnn(Mlp),
    Qnn { spec: CircuitSpec, diagonals: Vec<Vec<f64>> },
}

/// Forward values retained for [`Embedding::backward`].
#[derive(Clone, Debug)]
pub enum EmbeddingTrace {
    Fixed(Vec<Jet>),
    Fnn(MlpTrace),
    Qnn {
        angles: Vec<Jet>,
        exec: Execution<Jet<Complex64>>,
    },
}

impl EmbeddingTrace {
    pub fn angles(&self) -> &[Jet] {
        match self {
            EmbeddingTrace::Fixed(a) => a,
            EmbeddingTrace::Fnn(t) => t.output(),
            EmbeddingTrace::Qnn { angles, .. } => angles,
        }
    }
}

impl Embedding {
    pub fn new(kind: &EmbeddingKind, n_qubits: usize) -> Result<Self> {
        Ok(match *kind {
            EmbeddingKind::Chebyshev => Embedding::Chebyshev { n_qubits },
            EmbeddingKind::Fnn { hidden } => Embedding::Fnn(fnn_network(hidden, n_qubits)?),
            EmbeddingKind::Qnn { layers } => Embedding::Qnn {
                spec: build_qnn_embedding(n_qubits, layers)?,
                diagonals: z_diagonals(n_qubits),
            },
        })
    }

    pub fn n_params(&self) -> usize {
        match self {
            Embedding::Chebyshev { .. } => 0,
            Embedding::Fnn(net) => net.n_params(),
            Embedding::Qnn { spec, .. } => spec.n_params(),
        }
    }

    pub fn forward(&self, xt: &Jet, yt: &Jet, theta: &[f64]) -> Result<EmbeddingTrace> {
        match self {
            Embedding::Chebyshev { n_qubits } => {
                if !theta.is_empty() {
                    return Err(Error::Usage("chebyshev embedding takes no parameters".into()));
                }
                Ok(EmbeddingTrace::Fixed(chebyshev_angles(xt, yt, *n_qubits)))
            }
            Embedding::Fnn(net) => Ok(EmbeddingTrace::Fnn(net.forward(&[*xt, *yt], theta)?)),
            Embedding::Qnn { spec, diagonals } => {
                let exec = execute(spec, theta, &[*xt, *yt])?;
                let angles = diagonals
                    .iter()
                    .map(|d| exec.state().expval_diag(d).scale(PI))
                    .collect();
                Ok(EmbeddingTrace::Qnn { angles, exec })
            }
        }
    }

    /// Accumulate `∂(Σ_i w_i · α_i)/∂θ` into `grad` for cotangents `w_i` on
    /// the angle jets.
    pub fn backward(&self, trace: &EmbeddingTrace, theta: &[f64], cotangents: &[[f64; MAX_LEN]], grad: &mut [f64]) {
        match (self, trace) {
            (Embedding::Chebyshev { .. }, _) => {}
            (Embedding::Fnn(net), EmbeddingTrace::Fnn(t)) => net.backward(t, theta, cotangents, grad),
            (Embedding::Qnn { spec, diagonals }, EmbeddingTrace::Qnn { exec, .. }) => {
                let obs: Vec<&[f64]> = diagonals.iter().map(|d| d.as_slice()).collect();
                let per_gate = gate_derivatives(spec, exec, &obs, |g| {
                    matches!(
                        spec.gates()[g],
                        GateOp::Rotation {
                            binding: Binding::Param(_),
                            ..
                        }
                    )
                });
                for (w, dq) in cotangents.iter().zip(&per_gate) {
                    for (gate, d) in spec.gates().iter().zip(dq) {
                        if let (
                            GateOp::Rotation {
                                binding: Binding::Param(k),
                                ..
                            },
                            Some(d),
                        ) = (gate, d)
                        {
                            grad[*k] += PI * d.dot(w);
                        }
                    }
                }
            }
            _ => panic!("embedding trace does not match the embedding"),
        }
    }
}

/// Angles on an `nx × ny` node grid over `domain`, `x` varying fastest.
pub struct AngleGrid {
    pub points: Vec<(f64, f64)>,
    pub angles: Vec<Vec<f64>>,
}

pub fn angle_grid(embedding: &Embedding, theta: &[f64], nx: usize, ny: usize, domain: &Domain) -> Result<AngleGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Config(format!("angle grid needs at least 2×2 nodes, got {nx}×{ny}")));
    }
    let mut points = Vec::with_capacity(nx * ny);
    let mut angles = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = domain.y_min + (domain.y_max - domain.y_min) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x = domain.x_min + (domain.x_max - domain.x_min) * i as f64 / (nx - 1) as f64;
            let (xt, yt) = normalize(x, y, domain, 1)?;
            let trace = embedding.forward(&xt, &yt, theta)?;
            points.push((x, y));
            angles.push(trace.angles().iter().map(|a| a.value()).collect());
        }
    }
    Ok(AngleGrid { points, angles })
}

impl AngleGrid {
    /// CSV with columns `x, y, alpha_1..alpha_n`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let n = self.angles.first().map_or(0, Vec::len);
        let mut header = vec!["x".to_string(), "y".to_string()];
        header.extend((1..=n).map(|i| format!("alpha_{i}")));
        w.write_record(&header)?;
        for ((x, y), a) in self.points.iter().zip(&self.angles) {
            let mut row = vec![x.to_string(), y.to_string()];
            row.extend(a.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::fnn_param_count;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn normalize_examples() {
        let (x, y) = normalize(0.5, 0.5, &Domain::UNIT, 3).unwrap();
        assert!(close(x.value(), 0.0) && close(y.value(), 0.0));
        assert_eq!(x.partial(1, 0), Some(2.0));
        assert_eq!(y.partial(0, 1), Some(2.0));
        let (x, y) = normalize(0.0, 0.0, &Domain::UNIT, 1).unwrap();
        assert_eq!((x.value(), y.value()), (-1.0, -1.0));
        let (x, y) = normalize(1.0, 1.0, &Domain::UNIT, 1).unwrap();
        assert_eq!((x.value(), y.value()), (1.0, 1.0));
        assert!(matches!(normalize(1.1, 0.5, &Domain::UNIT, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn chebyshev_examples() {
        let (x, y) = normalize(0.5, 0.5, &Domain::UNIT, 3).unwrap();
        let a: Vec<f64> = chebyshev_angles(&x, &y, 4).iter().map(|a| a.value()).collect();
        let want = [PI / 2.0, PI / 2.0, PI, PI];
        assert!(a.iter().zip(want).all(|(a, b)| close(*a, b)), "{a:?}");

        let one = Jet::constant(1.0, 2);
        let a = chebyshev_angles(&one, &one, 1);
        assert!(a[0].value().abs() < 1e-5);
        assert!(a[0].coeffs().iter().all(|c| c.is_finite()));

        let c = Jet::constant(1f64.cos(), 1);
        let a = chebyshev_angles(&c, &c, 2);
        assert!(close(a[0].value(), 1.0) && close(a[1].value(), 1.0));
    }

    #[test]
    fn fnn_zero_parameters() {
        assert_eq!(fnn_param_count(DEFAULT_FNN_HIDDEN, 4), 368);
        assert_eq!(fnn_network(DEFAULT_FNN_HIDDEN, 4).unwrap().n_params(), 368);
        let (x, y) = normalize(0.3, 0.8, &Domain::UNIT, 3).unwrap();
        let a = fnn_angles(&x, &y, &[0.0; 368], DEFAULT_FNN_HIDDEN, 4).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|j| j.coeffs().iter().all(|c| *c == 0.0)));
        assert!(matches!(
            fnn_angles(&x, &y, &[0.0; 10], DEFAULT_FNN_HIDDEN, 4),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn qnn_zero_parameters_at_center() {
        let spec = build_qnn_embedding(4, 5).unwrap();
        let (x, y) = normalize(0.5, 0.5, &Domain::UNIT, 3).unwrap();
        let a = qnn_angles(&x, &y, &vec![0.0; spec.n_params()], &spec).unwrap();
        assert!(a.iter().all(|j| close(j.value(), PI)));
        assert!(matches!(qnn_angles(&x, &y, &[0.0; 3], &spec), Err(Error::Usage(_))));
    }

    fn fd_check(embedding: &Embedding, theta: &[f64], px: f64, py: f64) {
        let (xt, yt) = normalize(px, py, &Domain::UNIT, 3).unwrap();
        let jets = embedding.forward(&xt, &yt, theta).unwrap().angles().to_vec();
        for (i, jet) in jets.iter().enumerate() {
            let f = |x: f64, y: f64| {
                let (a, b) = normalize(x, y, &Domain::UNIT, 1).unwrap();
                embedding.forward(&a, &b, theta).unwrap().angles()[i].value()
            };
            let fd = fdcheck::partials(&f, px, py, 3, 1e-2);
            let hit = fdcheck::first_mismatch(jet.coeffs(), &fd, 1e-5);
            assert!(hit.is_none(), "angle {i}: {hit:?}");
        }
    }

    #[test]
    fn angle_jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cheb = Embedding::new(&EmbeddingKind::Chebyshev, 3).unwrap();
        fd_check(&cheb, &[], 0.37, 0.61);
        let fnn = Embedding::new(&EmbeddingKind::Fnn { hidden: 5 }, 3).unwrap();
        let theta: Vec<f64> = (0..fnn.n_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        fd_check(&fnn, &theta, 0.2, 0.7);
        let qnn = Embedding::new(&EmbeddingKind::Qnn { layers: 1 }, 2).unwrap();
        let theta: Vec<f64> = (0..qnn.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
        fd_check(&qnn, &theta, 0.45, 0.3);
    }

    #[test]
    fn qnn_backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let qnn = Embedding::new(&EmbeddingKind::Qnn { layers: 2 }, 3).unwrap();
        let theta: Vec<f64> = (0..qnn.n_params()).map(|_| rng.gen_range(-PI..PI)).collect();
        let (xt, yt) = normalize(0.3, 0.6, &Domain::UNIT, 3).unwrap();
        let w: Vec<[f64; MAX_LEN]> = (0..3)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        let objective = |t: &[f64]| {
            let tr = qnn.forward(&xt, &yt, t).unwrap();
            tr.angles().iter().zip(&w).map(|(a, w)| a.dot(w)).sum::<f64>()
        };
        let trace = qnn.forward(&xt, &yt, &theta).unwrap();
        let mut grad = vec![0.0; theta.len()];
        qnn.backward(&trace, &theta, &w, &mut grad);
        let fd = fdcheck::gradient(&objective, &theta, 1e-5);
        assert!(fdcheck::first_mismatch(&grad, &fd, 1e-7).is_none());
    }

    #[test]
    fn angle_grid_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("alpha.csv");
        let emb = Embedding::new(&EmbeddingKind::Chebyshev, 4).unwrap();
        angle_grid(&emb, &[], 3, 4, &Domain::UNIT).unwrap().write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,alpha_1,alpha_2,alpha_3,alpha_4"));
        assert_eq!(lines.count(), 12);
    }
}
