//! Run manifests: everything needed to repeat a run, plus what it wrote.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use qcavity::embeddings::ARCCOS_CLAMP;
use qcavity::qpinn::{TrainConfig, ANGLE_INIT};
use qcavity::reference::ReferenceConfig;

use crate::error::{CliError, CliResult};

pub const MANIFEST_VERSION: u32 = 1;
pub const FIELD_SCHEMA: &str = "fields/v1: x,y,u,v,p,speed";
pub const HISTORY_SCHEMA: &str = "history/v1: epoch,L_pde,L_wall,L_lid,L_ref,total,rel_l2_u,rel_l2_p";
pub const ERROR_SCHEMA: &str = "errors/v1: x,y,speed_error,p_error";
pub const METRICS_SCHEMA: &str = "metrics/v1: {speed,pressure} x {mse,rel_l2,max_abs}";

/// Modelling choices the configuration does not spell out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decisions {
    pub lambda_b: f64,
    pub initializer: String,
    pub optimizer: serde_json::Value,
    pub sharing: String,
    pub epoch: String,
    pub gradient: String,
    pub normalization: String,
}

impl Decisions {
    pub fn for_training(config: &TrainConfig) -> Self {
        Self {
            lambda_b: config.lambda_b,
            initializer: format!(
                "circuit angles ~ U(-{ANGLE_INIT}, {ANGLE_INIT}); mlp weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); ChaCha8 seeded with config.seed"
            ),
            optimizer: serde_json::to_value(config.optimizer).unwrap_or_default(),
            sharing: "separate solver circuits for p and psi; qnn embedding per field; fnn embedding shared; chebyshev fixed".into(),
            epoch: "one optimizer step; history row 0 is the initial state".into(),
            gradient: format!("{:?}", config.gradient).to_lowercase(),
            normalization: format!("unit square mapped to [-1, 1]^2; arccos argument clamped to {ARCCOS_CLAMP}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub command: String,
    pub code_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_params: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decisions: Option<Decisions>,
    pub threads: usize,
    /// File name to schema tag.
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub summary: serde_json::Value,
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            command: command.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            started_unix: now_unix(),
            finished_unix: 0,
            config: None,
            reference: None,
            seed: None,
            n_params: None,
            decisions: None,
            threads: rayon::current_num_threads(),
            outputs: BTreeMap::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn output(&mut self, name: &str, schema: &str) {
        self.outputs.insert(name.into(), schema.into());
    }

    pub fn write(mut self, dir: &Path) -> CliResult<()> {
        self.finished_unix = now_unix();
        self.output("manifest.json", &format!("manifest/v{MANIFEST_VERSION}"));
        write_json(&dir.join("manifest.json"), &self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
