//! Classical PINN baseline: two tanh MLPs `2 → hidden… → 1`, one for `p`
//! and one for `ψ`, on the same normalized inputs as the quantum models.

use crate::circuits::{segment, Layout, ModelConfig};
use crate::embeddings::{normalize, Domain};
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_LEN};
use crate::mlp::{Mlp, OutputActivation};
use crate::qpinn::model::{check_theta, Cotangents, FieldModel, Fields, Request};

/// Default hidden widths of each network.
pub const DEFAULT_HIDDEN: [usize; 4] = [32; 4];

/// Layer widths of one network, input and output included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
}

impl MlpSpec {
    pub fn new(hidden: &[usize]) -> Self {
        let mut widths = vec![2];
        widths.extend_from_slice(hidden);
        widths.push(1);
        Self { widths }
    }

    pub fn n_params(&self) -> usize {
        self.widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    fn network(&self) -> Result<Mlp> {
        Mlp::new(self.widths.clone(), OutputActivation::Linear)
    }
}

impl Default for MlpSpec {
    fn default() -> Self {
        Self::new(&DEFAULT_HIDDEN)
    }
}

/// Jet-valued network output; the order follows the inputs.
pub fn mlp_eval(xt: &Jet, yt: &Jet, spec: &MlpSpec, theta: &[f64]) -> Result<Jet> {
    Ok(spec.network()?.forward(&[*xt, *yt], theta)?.output()[0])
}

#[derive(Clone, Debug)]
pub struct PinnModel {
    config: ModelConfig,
    layout: Layout,
    domain: Domain,
    net: Mlp,
}

impl PinnModel {
    pub fn new(config: ModelConfig) -> Result<Self> {
        let ModelConfig::Pinn { ref hidden } = config else {
            return Err(Error::Config("not a classical model configuration".into()));
        };
        let layout = config.layout()?;
        Ok(Self {
            net: MlpSpec::new(hidden).network()?,
            layout,
            domain: Domain::UNIT,
            config,
        })
    }

    fn ranges(&self) -> [std::ops::Range<usize>; 2] {
        [
            self.layout.range(segment::PINN_P).expect("pinn layout"),
            self.layout.range(segment::PINN_PSI).expect("pinn layout"),
        ]
    }
}

impl FieldModel for PinnModel {
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
        let mut theta = self.net.init(rng);
        theta.extend(self.net.init(rng));
        theta
    }

    fn fields(&self, x: f64, y: f64, theta: &[f64], req: Request) -> Result<Fields> {
        check_theta(self, theta)?;
        let mut out = Fields { psi: None, p: None };
        let [rp, rpsi] = self.ranges();
        if let Some(k) = req.p {
            let (xt, yt) = normalize(x, y, &self.domain, k)?;
            out.p = Some(self.net.forward(&[xt, yt], &theta[rp])?.output()[0]);
        }
        if let Some(k) = req.psi {
            let (xt, yt) = normalize(x, y, &self.domain, k)?;
            out.psi = Some(self.net.forward(&[xt, yt], &theta[rpsi])?.output()[0]);
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
        let [rp, rpsi] = self.ranges();
        let mut out = Fields { psi: None, p: None };
        let mut traces = Vec::with_capacity(2);
        for (order, range, is_p) in [(req.p, rp, true), (req.psi, rpsi, false)] {
            let Some(k) = order else { continue };
            let (xt, yt) = normalize(x, y, &self.domain, k)?;
            let trace = self.net.forward(&[xt, yt], &theta[range.clone()])?;
            if is_p {
                out.p = Some(trace.output()[0]);
            } else {
                out.psi = Some(trace.output()[0]);
            }
            traces.push((trace, range, is_p));
        }
        let cot = seed(&out);
        for (trace, range, is_p) in traces {
            let w: [f64; MAX_LEN] = if is_p { cot.p } else { cot.psi };
            self.net.backward(&trace, &theta[range.clone()], &[w], &mut grad[range]);
        }
        Ok(out)
    }
}

/// Loss gradient of the classical baseline.
pub fn pinn_loss_gradient(
    model: &PinnModel,
    theta: &[f64],
    colloc: &crate::qpinn::CollocationSet,
    loss: &crate::qpinn::LossConfig,
) -> Result<Vec<f64>> {
    Ok(crate::qpinn::loss_gradient(model, theta, colloc, loss)?.1)
}
