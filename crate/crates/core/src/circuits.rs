//! Gate programs for the solver, embedding, and encoding circuits, plus the
//! flat parameter layout of an assembled model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Where a rotation gate takes its angle from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Binding {
    /// Trainable parameter slot.
    Param(usize),
    /// Input slot, used as the angle directly.
    Input(usize),
    /// Input slot multiplied by a constant factor.
    InputScaled(usize, f64),
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum GateOp {
    Rotation {
        axis: Pauli,
        qubit: usize,
        binding: Binding,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// An ordered gate program with dense parameter and input slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    n_qubits: usize,
    gates: Vec<GateOp>,
    n_params: usize,
    n_inputs: usize,
}

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 8;

impl CircuitSpec {
    /// Validate a gate list and derive its slot counts.
    ///
    /// Qubit indices must be in range, CNOT endpoints distinct, and the
    /// parameter and input indices that occur must form `0..n` without gaps.
    pub fn from_gates(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut params = Vec::new();
        let mut inputs = Vec::new();
        for (i, g) in gates.iter().enumerate() {
            match *g {
                GateOp::Rotation { qubit, binding, .. } => {
                    if qubit >= n_qubits {
                        return Err(Error::Usage(format!("gate {i}: qubit {qubit} out of range")));
                    }
                    match binding {
                        Binding::Param(k) => params.push(k),
                        Binding::Input(k) | Binding::InputScaled(k, _) => inputs.push(k),
                        Binding::Fixed(_) => {}
                    }
                }
                GateOp::Cnot { control, target } => {
                    if control >= n_qubits || target >= n_qubits {
                        return Err(Error::Usage(format!("gate {i}: cnot index out of range")));
                    }
                    if control == target {
                        return Err(Error::Usage(format!("gate {i}: cnot control equals target")));
                    }
                }
            }
        }
        let n_params = dense_count(&mut params, "param")?;
        let n_inputs = dense_count(&mut inputs, "input")?;
        Ok(Self {
            n_qubits,
            gates,
            n_params,
            n_inputs,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// `self` followed by `next`, with `next`'s parameter and input slots
    /// shifted past this circuit's.
    pub fn then(&self, next: &CircuitSpec) -> Result<Self> {
        if self.n_qubits != next.n_qubits {
            return Err(Error::Usage(format!(
                "cannot compose {}-qubit and {}-qubit circuits",
                self.n_qubits, next.n_qubits
            )));
        }
        let (dp, di) = (self.n_params, self.n_inputs);
        let shifted = next.gates.iter().map(|g| match *g {
            GateOp::Rotation {
                axis,
                qubit,
                binding,
            } => GateOp::Rotation {
                axis,
                qubit,
                binding: match binding {
                    Binding::Param(k) => Binding::Param(k + dp),
                    Binding::Input(k) => Binding::Input(k + di),
                    Binding::InputScaled(k, f) => Binding::InputScaled(k + di, f),
                    Binding::Fixed(v) => Binding::Fixed(v),
                },
            },
            cnot => cnot,
        });
        let gates = self.gates.iter().copied().chain(shifted).collect();
        Self::from_gates(self.n_qubits, gates)
    }

    /// Gate indices bound to parameter `k`.
    pub fn gates_for_param(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.gates.iter().enumerate().filter_map(move |(i, g)| match g {
            GateOp::Rotation {
                binding: Binding::Param(p),
                ..
            } if *p == k => Some(i),
            _ => None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: CircuitSpec = serde_json::from_str(s)?;
        Self::from_gates(raw.n_qubits, raw.gates)
    }
}

fn dense_count(indices: &mut Vec<usize>, what: &str) -> Result<usize> {
    indices.sort_unstable();
    indices.dedup();
    for (expect, &got) in indices.iter().enumerate() {
        if expect != got {
            return Err(Error::Usage(format!("{what} slot {expect} is never used")));
        }
    }
    Ok(indices.len())
}

fn check_entangled(n_qubits: usize, n_layers: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(Error::Config(format!(
            "entangling circuits need at least 2 qubits, got {n_qubits}"
        )));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "at most {MAX_QUBITS} qubits supported, got {n_qubits}"
        )));
    }
    if n_layers == 0 {
        return Err(Error::Config("at least one layer required".into()));
    }
    Ok(())
}

fn trainable_block(gates: &mut Vec<GateOp>, n_qubits: usize, next_param: &mut usize) {
    for q in 0..n_qubits {
        for axis in [Pauli::X, Pauli::Y, Pauli::Z] {
            gates.push(GateOp::Rotation {
                axis,
                qubit: q,
                binding: Binding::Param(*next_param),
            });
            *next_param += 1;
        }
    }
}

fn cnot_chain(gates: &mut Vec<GateOp>, n_qubits: usize) {
    for q in 0..n_qubits - 1 {
        gates.push(GateOp::Cnot {
            control: q,
            target: q + 1,
        });
    }
}

/// Hardware-efficient ansatz: per layer Rx, Ry, Rz on every qubit, then a
/// linear CNOT chain `0→1, 1→2, …`.
pub fn build_vqc(n_qubits: usize, n_layers: usize) -> Result<CircuitSpec> {
    check_entangled(n_qubits, n_layers)?;
    let mut gates = Vec::with_capacity((4 * n_qubits - 1) * n_layers);
    let mut next = 0;
    for _ in 0..n_layers {
        trainable_block(&mut gates, n_qubits, &mut next);
        cnot_chain(&mut gates, n_qubits);
    }
    CircuitSpec::from_gates(n_qubits, gates)
}

/// Embedding circuit: per layer, `Ry(x̃)` on even qubits and `Ry(ỹ)` on odd
/// qubits, a trainable Rx/Ry/Rz block, then a CNOT chain. Inputs are
/// `(x̃, ỹ)` in slots 0 and 1.
pub fn build_qnn_embedding(n_qubits: usize, n_layers: usize) -> Result<CircuitSpec> {
    check_entangled(n_qubits, n_layers)?;
    let mut gates = Vec::with_capacity(5 * n_qubits * n_layers);
    let mut next = 0;
    for _ in 0..n_layers {
        for q in 0..n_qubits {
            gates.push(GateOp::Rotation {
                axis: Pauli::Y,
                qubit: q,
                binding: Binding::Input(q % 2),
            });
        }
        trainable_block(&mut gates, n_qubits, &mut next);
        cnot_chain(&mut gates, n_qubits);
    }
    CircuitSpec::from_gates(n_qubits, gates)
}

/// `⊗ Ry(α_i)` with `α_i` read from input slot `i`.
pub fn build_encoding_layer(n_qubits: usize) -> Result<CircuitSpec> {
    let gates = (0..n_qubits)
        .map(|q| GateOp::Rotation {
            axis: Pauli::Y,
            qubit: q,
            binding: Binding::Input(q),
        })
        .collect();
    CircuitSpec::from_gates(n_qubits, gates)
}

/// Coordinate-to-angle map used in front of the solver circuits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingKind {
    Chebyshev,
    Fnn {
        #[serde(default = "default_fnn_hidden")]
        hidden: usize,
    },
    Qnn {
        layers: usize,
    },
}

fn default_fnn_hidden() -> usize {
    52
}

impl EmbeddingKind {
    pub fn label(&self) -> &'static str {
        match self {
            EmbeddingKind::Chebyshev => "chebyshev",
            EmbeddingKind::Fnn { .. } => "fnn",
            EmbeddingKind::Qnn { .. } => "qnn",
        }
    }
}

/// Architecture of an assembled model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Two solver circuits (p and ψ) behind an embedding.
    Qpinn {
        n_qubits: usize,
        vqc_layers: usize,
        embedding: EmbeddingKind,
    },
    /// Two tanh MLPs `2 → hidden… → 1` (p and ψ).
    Pinn { hidden: Vec<usize> },
}

impl ModelConfig {
    pub fn kind_label(&self) -> &'static str {
        match self {
            ModelConfig::Qpinn { .. } => "qpinn",
            ModelConfig::Pinn { .. } => "pinn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Qpinn {
                n_qubits,
                vqc_layers,
                embedding,
            } => {
                check_entangled(*n_qubits, *vqc_layers)?;
                match embedding {
                    EmbeddingKind::Fnn { hidden: 0 } => {
                        Err(Error::Config("fnn hidden width must be positive".into()))
                    }
                    EmbeddingKind::Qnn { layers: 0 } => {
                        Err(Error::Config("qnn embedding needs at least one layer".into()))
                    }
                    _ => Ok(()),
                }
            }
            ModelConfig::Pinn { hidden } => {
                if hidden.is_empty() || hidden.contains(&0) {
                    Err(Error::Config("mlp hidden widths must be non-empty and positive".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Named segments of Θ, in storage order.
    pub fn layout(&self) -> Result<Layout> {
        self.validate()?;
        let mut b = LayoutBuilder::default();
        match self {
            ModelConfig::Qpinn {
                n_qubits,
                vqc_layers,
                embedding,
            } => {
                let vqc = 3 * n_qubits * vqc_layers;
                match embedding {
                    EmbeddingKind::Chebyshev => {
                        b.push(segment::VQC_P, vqc);
                        b.push(segment::VQC_PSI, vqc);
                    }
                    EmbeddingKind::Fnn { hidden } => {
                        b.push(segment::EMBEDDING_SHARED, fnn_param_count(*hidden, *n_qubits));
                        b.push(segment::VQC_P, vqc);
                        b.push(segment::VQC_PSI, vqc);
                    }
                    EmbeddingKind::Qnn { layers } => {
                        let emb = 3 * n_qubits * layers;
                        b.push(segment::EMBEDDING_P, emb);
                        b.push(segment::VQC_P, vqc);
                        b.push(segment::EMBEDDING_PSI, emb);
                        b.push(segment::VQC_PSI, vqc);
                    }
                }
            }
            ModelConfig::Pinn { hidden } => {
                let n = mlp_param_count(hidden);
                b.push(segment::PINN_P, n);
                b.push(segment::PINN_PSI, n);
            }
        }
        Ok(b.finish())
    }
}

/// Segment names used in [`Layout`].
pub mod segment {
    pub const EMBEDDING_P: &str = "embedding_p";
    pub const EMBEDDING_PSI: &str = "embedding_psi";
    pub const EMBEDDING_SHARED: &str = "embedding_shared";
    pub const VQC_P: &str = "vqc_p";
    pub const VQC_PSI: &str = "vqc_psi";
    pub const PINN_P: &str = "pinn_p";
    pub const PINN_PSI: &str = "pinn_psi";
}

/// `2 → hidden → n_out` with biases.
pub fn fnn_param_count(hidden: usize, n_out: usize) -> usize {
    3 * hidden + (hidden + 1) * n_out
}

/// `2 → hidden[0] → … → 1` with biases.
pub fn mlp_param_count(hidden: &[usize]) -> usize {
    std::iter::once(2)
        .chain(hidden.iter().copied())
        .zip(hidden.iter().copied().chain(std::iter::once(1)))
        .map(|(fan_in, fan_out)| (fan_in + 1) * fan_out)
        .sum()
}

/// Total trainable parameters of an assembled model.
pub fn total_param_count(config: &ModelConfig) -> Result<usize> {
    Ok(config.layout()?.total())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Contiguous named segments covering a flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    segments: Vec<Segment>,
}

#[derive(Default)]
struct LayoutBuilder {
    segments: Vec<Segment>,
    next: usize,
}

impl LayoutBuilder {
    fn push(&mut self, name: &str, len: usize) {
        self.segments.push(Segment {
            name: name.to_string(),
            offset: self.next,
            len,
        });
        self.next += len;
    }

    fn finish(self) -> Layout {
        Layout {
            segments: self.segments,
        }
    }
}

impl Layout {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total(&self) -> usize {
        self.segments.iter().map(|s| s.len).sum()
    }

    pub fn get(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn range(&self, name: &str) -> Result<std::ops::Range<usize>> {
        self.get(name)
            .map(Segment::range)
            .ok_or_else(|| Error::Usage(format!("layout has no segment `{name}`")))
    }
}

/// Flat trainable vector Θ together with its layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: Vec<f64>,
    pub layout: Layout,
}

impl ModelParams {
    pub fn new(theta: Vec<f64>, layout: Layout) -> Result<Self> {
        if theta.len() != layout.total() {
            return Err(Error::Usage(format!(
                "parameter vector has {} entries, layout expects {}",
                theta.len(),
                layout.total()
            )));
        }
        Ok(Self { theta, layout })
    }

    pub fn segment(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.theta[self.layout.range(name)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(axis: Pauli, qubit: usize, k: usize) -> GateOp {
        GateOp::Rotation {
            axis,
            qubit,
            binding: Binding::Param(k),
        }
    }

    #[test]
    fn vqc_counts_and_sequence() {
        assert_eq!(build_vqc(4, 10).unwrap().n_params(), 120);
        assert_eq!(build_vqc(4, 3).unwrap().n_params(), 36);
        let small = build_vqc(2, 1).unwrap();
        assert_eq!(small.n_params(), 6);
        assert_eq!(small.n_inputs(), 0);
        assert_eq!(
            small.gates(),
            &[
                rot(Pauli::X, 0, 0),
                rot(Pauli::Y, 0, 1),
                rot(Pauli::Z, 0, 2),
                rot(Pauli::X, 1, 3),
                rot(Pauli::Y, 1, 4),
                rot(Pauli::Z, 1, 5),
                GateOp::Cnot {
                    control: 0,
                    target: 1
                },
            ]
        );
        let fig = build_vqc(4, 3).unwrap();
        let cnots = fig
            .gates()
            .iter()
            .filter(|g| matches!(g, GateOp::Cnot { .. }))
            .count();
        assert_eq!(cnots, 9);
    }

    #[test]
    fn vqc_gate_count_formula() {
        for n in 2..=6 {
            for l in 1..=5 {
                assert_eq!(build_vqc(n, l).unwrap().gates().len(), 3 * n * l + (n - 1) * l);
            }
        }
    }

    #[test]
    fn entangler_needs_two_qubits() {
        assert!(matches!(build_vqc(1, 2), Err(Error::Config(_))));
        assert!(matches!(build_qnn_embedding(1, 2), Err(Error::Config(_))));
        assert!(matches!(build_vqc(2, 0), Err(Error::Config(_))));
    }

    #[test]
    fn embedding_counts() {
        assert_eq!(build_qnn_embedding(4, 5).unwrap().n_params(), 60);
        assert_eq!(build_qnn_embedding(4, 2).unwrap().n_params(), 24);
        let e = build_qnn_embedding(2, 1).unwrap();
        assert_eq!((e.n_params(), e.n_inputs()), (6, 2));
        // even qubits read x̃, odd qubits read ỹ
        assert_eq!(
            &e.gates()[..2],
            &[
                GateOp::Rotation {
                    axis: Pauli::Y,
                    qubit: 0,
                    binding: Binding::Input(0)
                },
                GateOp::Rotation {
                    axis: Pauli::Y,
                    qubit: 1,
                    binding: Binding::Input(1)
                },
            ]
        );
    }

    #[test]
    fn encoding_layer_shape() {
        let e = build_encoding_layer(4).unwrap();
        assert_eq!((e.n_params(), e.n_inputs(), e.gates().len()), (0, 4, 4));
    }

    #[test]
    fn published_parameter_counts() {
        let qnn = ModelConfig::Qpinn {
            n_qubits: 4,
            vqc_layers: 10,
            embedding: EmbeddingKind::Qnn { layers: 5 },
        };
        let fnn = ModelConfig::Qpinn {
            n_qubits: 4,
            vqc_layers: 10,
            embedding: EmbeddingKind::Fnn { hidden: 52 },
        };
        let pinn = ModelConfig::Pinn {
            hidden: vec![32; 4],
        };
        assert_eq!(total_param_count(&qnn).unwrap(), 360);
        assert_eq!(total_param_count(&fnn).unwrap(), 608);
        assert_eq!(total_param_count(&pinn).unwrap(), 6594);
        assert_eq!(fnn_param_count(52, 4), 368);
        assert_eq!(mlp_param_count(&[32; 4]), 3297);
    }

    #[test]
    fn layout_segments_tile_theta() {
        let cfg = ModelConfig::Qpinn {
            n_qubits: 4,
            vqc_layers: 10,
            embedding: EmbeddingKind::Qnn { layers: 5 },
        };
        let layout = cfg.layout().unwrap();
        let names: Vec<_> = layout.segments().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["embedding_p", "vqc_p", "embedding_psi", "vqc_psi"]);
        let mut next = 0;
        for s in layout.segments() {
            assert_eq!(s.offset, next);
            next += s.len;
        }
        assert_eq!(next, 360);
        assert!(ModelParams::new(vec![0.0; 359], layout).is_err());
    }

    #[test]
    fn gap_in_param_slots_rejected() {
        let gates = vec![rot(Pauli::X, 0, 0), rot(Pauli::Y, 0, 2)];
        assert!(matches!(CircuitSpec::from_gates(1, gates), Err(Error::Usage(_))));
    }

    #[test]
    fn compose_shifts_slots() {
        let enc = build_encoding_layer(2).unwrap();
        let vqc = build_vqc(2, 1).unwrap();
        let full = enc.then(&vqc).unwrap();
        assert_eq!((full.n_params(), full.n_inputs()), (6, 2));
        let emb = build_qnn_embedding(2, 1).unwrap();
        let twice = emb.then(&emb).unwrap();
        assert_eq!((twice.n_params(), twice.n_inputs()), (12, 4));
    }

    #[test]
    fn rebuild_is_deterministic_and_json_roundtrips() {
        let a = build_qnn_embedding(3, 2).unwrap();
        let b = build_qnn_embedding(3, 2).unwrap();
        assert_eq!(a, b);
        let back = CircuitSpec::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
    }
}
