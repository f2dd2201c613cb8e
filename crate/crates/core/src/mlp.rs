//! Jet-valued dense tanh networks with reverse accumulation.
//!
//! Used for the classical FNN embedding (`2 → h → n`, output `π·tanh`) and
//! for the classical PINN baseline (`2 → 32 → … → 1`, linear output).
//! Parameters are stored layer by layer as the row-major weight matrix
//! `W[out][in]` followed by the bias vector.

use rand::Rng;

use crate::error::{Error, Result};
use crate::jet::{mul_adjoint, Jet, MAX_LEN};

/// Activation applied after the last affine layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutputActivation {
    Linear,
    /// `scale · tanh(z)`
    ScaledTanh(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    output: OutputActivation,
}

/// Per-layer values kept from a forward pass.
#[derive(Clone, Debug)]
pub struct MlpTrace {
    /// Layer inputs: `activations[0]` is the network input.
    activations: Vec<Vec<Jet>>,
    /// Ring derivative of each layer's activation at its pre-activation;
    /// `None` for a linear output layer.
    slopes: Vec<Option<Vec<Jet>>>,
    output: Vec<Jet>,
}

impl MlpTrace {
    pub fn output(&self) -> &[Jet] {
        &self.output
    }
}

impl Mlp {
    /// `widths` lists every layer including input and output.
    pub fn new(widths: Vec<usize>, output: OutputActivation) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Config(format!("invalid mlp widths {widths:?}")));
        }
        Ok(Self { widths, output })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_params(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::Usage(format!(
                "mlp expects {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, inputs: &[Jet], theta: &[f64]) -> Result<MlpTrace> {
        self.check_len(theta)?;
        if inputs.len() != self.widths[0] {
            return Err(Error::Usage(format!(
                "mlp expects {} inputs, got {}",
                self.widths[0],
                inputs.len()
            )));
        }
        let n_layers = self.widths.len() - 1;
        let mut activations = vec![inputs.to_vec()];
        let mut slopes = Vec::with_capacity(n_layers);
        let mut offset = 0;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let w = &theta[offset..offset + fan_in * fan_out];
            let b = &theta[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
            offset += (fan_in + 1) * fan_out;
            let x = activations.last().expect("input layer");
            let z: Vec<Jet> = (0..fan_out)
                .map(|o| {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    let mut acc = x[0].constant_like(b[o]);
                    for (xi, wi) in x.iter().zip(row) {
                        acc = acc + xi.scale(*wi);
                    }
                    acc
                })
                .collect();
            let last = l + 1 == n_layers;
            if last && self.output == OutputActivation::Linear {
                slopes.push(None);
                activations.push(z);
            } else {
                let scale = match (last, self.output) {
                    (true, OutputActivation::ScaledTanh(s)) => s,
                    _ => 1.0,
                };
                let t: Vec<Jet> = z.iter().map(Jet::tanh).collect();
                // d(s·tanh z)/dz = s·(1 - tanh²z), as a jet
                let slope = t
                    .iter()
                    .map(|ti| (ti.constant_like(1.0) - *ti * *ti).scale(scale))
                    .collect();
                slopes.push(Some(slope));
                activations.push(t.iter().map(|ti| ti.scale(scale)).collect());
            }
        }
        let output = activations.pop().expect("output layer");
        Ok(MlpTrace {
            activations,
            slopes,
            output,
        })
    }

    /// Accumulate `∂(Σ_o w_o · output_o)/∂θ` into `grad`, where each `w_o`
    /// is a cotangent on the output jet's slots.
    pub fn backward(&self, trace: &MlpTrace, theta: &[f64], cotangents: &[[f64; MAX_LEN]], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), theta.len());
        let n_layers = self.widths.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for l in 0..n_layers {
            offsets.push(off);
            off += (self.widths[l] + 1) * self.widths[l + 1];
        }
        let mut adj_out: Vec<[f64; MAX_LEN]> = cotangents.to_vec();
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let x = &trace.activations[l];
            // through the activation
            let adj_z: Vec<[f64; MAX_LEN]> = match &trace.slopes[l] {
                Some(slope) => adj_out.iter().zip(slope).map(|(w, s)| mul_adjoint(s, w)).collect(),
                None => adj_out,
            };
            let wo = offsets[l];
            let bo = wo + fan_in * fan_out;
            let mut adj_x = vec![[0.0; MAX_LEN]; fan_in];
            for (o, az) in adj_z.iter().enumerate() {
                grad[bo + o] += az[0];
                let row = wo + o * fan_in;
                for (i, xi) in x.iter().enumerate() {
                    grad[row + i] += xi.dot(az);
                    if l > 0 {
                        let wv = theta[row + i];
                        for (a, v) in adj_x[i].iter_mut().zip(az) {
                            *a += wv * v;
                        }
                    }
                }
            }
            adj_out = adj_x;
        }
    }

    /// Uniform(±1/√fan_in) for weights and biases.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.n_params());
        for w in self.widths.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] + 1) * w[1] {
                theta.push(rng.gen_range(-bound..bound));
            }
        }
        theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{jet_var, Axis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_zero_output() {
        let net = Mlp::new(vec![2, 5, 3, 1], OutputActivation::Linear).unwrap();
        let x = jet_var(0.2, Axis::X, 3).unwrap();
        let y = jet_var(-0.3, Axis::Y, 3).unwrap();
        let out = net.forward(&[x, y], &vec![0.0; net.n_params()]).unwrap();
        assert!(out.output()[0].coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn wrong_length_rejected() {
        let net = Mlp::new(vec![2, 3, 1], OutputActivation::Linear).unwrap();
        let x = jet_var(0.2, Axis::X, 1).unwrap();
        assert!(matches!(net.forward(&[x, x], &[0.0; 3]), Err(Error::Usage(_))));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let net = Mlp::new(vec![2, 4, 3, 2], OutputActivation::ScaledTanh(2.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let theta = net.init(&mut rng);
        let x = jet_var(0.4, Axis::X, 3).unwrap();
        let y = jet_var(-0.1, Axis::Y, 3).unwrap();
        let w = [
            [0.5, -0.2, 0.3, 0.1, 0.7, -0.4, 0.2, 0.05, -0.3, 0.6],
            [-0.1, 0.4, 0.2, -0.6, 0.3, 0.1, -0.2, 0.5, 0.15, -0.05],
        ];
        let objective = |t: &[f64]| {
            let tr = net.forward(&[x, y], t).unwrap();
            tr.output()[0].dot(&w[0]) + tr.output()[1].dot(&w[1])
        };
        let trace = net.forward(&[x, y], &theta).unwrap();
        let mut grad = vec![0.0; theta.len()];
        net.backward(&trace, &theta, &w, &mut grad);
        let fd = fdcheck::gradient(&objective, &theta, 1e-5);
        assert!(fdcheck::first_mismatch(&grad, &fd, 1e-7).is_none());
    }
}
