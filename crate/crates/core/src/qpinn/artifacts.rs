//! Loss history CSV and parameter checkpoints.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuits::{Layout, ModelParams};
use crate::error::{Error, Result};

use super::train::{EpochRecord, TrainConfig};

pub const HISTORY_HEADER: [&str; 8] = ["epoch", "L_pde", "L_wall", "L_lid", "L_ref", "total", "rel_l2_u", "rel_l2_p"];

/// Write the loss history; missing metrics are left empty.
pub fn write_history_csv(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HISTORY_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in history {
        w.write_record([
            r.epoch.to_string(),
            format!("{:e}", r.loss.pde),
            format!("{:e}", r.loss.wall),
            format!("{:e}", r.loss.lid),
            format!("{:e}", r.loss.reference),
            format!("{:e}", r.loss.total),
            opt(r.rel_l2_u),
            opt(r.rel_l2_p),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Trained parameters with everything needed to rebuild the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    /// `"qpinn"` or `"pinn"`.
    pub kind: String,
    pub config: TrainConfig,
    pub seed: u64,
    pub layout: Layout,
    pub theta: Vec<f64>,
}

impl Checkpoint {
    pub fn new(config: &TrainConfig, params: &ModelParams) -> Self {
        Self {
            kind: config.model.kind_label().to_string(),
            config: config.clone(),
            seed: config.seed,
            layout: params.layout.clone(),
            theta: params.theta.clone(),
        }
    }

    /// Parameters checked against the layout the config implies.
    pub fn params(&self) -> Result<ModelParams> {
        let expected = self.config.model.layout()?;
        if expected != self.layout {
            return Err(Error::Usage("checkpoint layout does not match its model configuration".into()));
        }
        if self.kind != self.config.model.kind_label() {
            return Err(Error::Usage(format!(
                "checkpoint kind {:?} does not match its model configuration",
                self.kind
            )));
        }
        ModelParams::new(self.theta.clone(), self.layout.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let c: Checkpoint = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        c.params()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{EmbeddingKind, ModelConfig};
    use crate::qpinn::LossBreakdown;

    fn config() -> TrainConfig {
        TrainConfig::new(
            ModelConfig::Qpinn {
                n_qubits: 2,
                vqc_layers: 1,
                embedding: EmbeddingKind::Chebyshev,
            },
            10.0,
            3,
        )
    }

    #[test]
    fn checkpoint_round_trip_and_layout_check() {
        let cfg = config();
        let layout = cfg.model.layout().unwrap();
        let params = ModelParams::new((0..layout.total()).map(|k| k as f64 * 0.1).collect(), layout).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let ck = Checkpoint::new(&cfg, &params);
        ck.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), ck);

        let mut bad = ck.clone();
        bad.theta.pop();
        assert!(matches!(bad.params(), Err(Error::Usage(_))));
        bad = ck.clone();
        bad.config.model = ModelConfig::Qpinn {
            n_qubits: 3,
            vqc_layers: 1,
            embedding: EmbeddingKind::Chebyshev,
        };
        assert!(matches!(bad.params(), Err(Error::Usage(_))));
    }

    #[test]
    fn history_has_fixed_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let rec = EpochRecord {
            epoch: 0,
            loss: LossBreakdown::default(),
            rel_l2_u: Some(0.5),
            rel_l2_p: None,
        };
        write_history_csv(&path, &[rec]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HISTORY_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "0,0e0,0e0,0e0,0e0,0e0,5e-1,");
    }
}
