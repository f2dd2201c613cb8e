//! Training configuration files.
//!
//! A config is a JSON `TrainConfig`; a run manifest is accepted in its place
//! and replays the configuration it recorded.

use std::path::Path;

use qcavity::qpinn::TrainConfig;

use crate::error::{CliError, CliResult};

pub fn parse_config(text: &str) -> CliResult<TrainConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
    let config: TrainConfig = if value.get("manifest_version").is_some() {
        let inner = value
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::Usage("manifest records no training config".into()))?;
        serde_path_to_error::deserialize(inner).map_err(schema_error)?
    } else {
        serde_path_to_error::deserialize(value).map_err(schema_error)?
    };
    config.validate()?;
    Ok(config)
}

fn schema_error(e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    CliError::Usage(format!("config field `{path}`: {}", e.into_inner()))
}

pub fn load_config(path: &Path) -> CliResult<TrainConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const QNN: &str = r#"{
        "model": {"kind": "qpinn", "n_qubits": 4, "vqc_layers": 10, "embedding": {"kind": "qnn", "layers": 5}},
        "reynolds": 10.0,
        "epochs": 3
    }"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config(QNN).unwrap();
        assert_eq!(c.lambda_b, 10.0);
        assert_eq!((c.grid.nx, c.grid.ny), (50, 50));
        assert_eq!(c.model.layout().unwrap().total(), 360);
    }

    #[test]
    fn unknown_embedding_names_the_field() {
        let bad = QNN.replace(r#""kind": "qnn""#, r#""kind": "banana""#);
        let CliError::Usage(msg) = parse_config(&bad).unwrap_err() else { panic!() };
        assert!(msg.contains("`model`") && msg.contains("banana"), "{msg}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let bad = QNN.replace(r#""epochs": 3"#, r#""epochs": 3, "epoch": 4"#);
        let CliError::Usage(msg) = parse_config(&bad).unwrap_err() else { panic!() };
        assert!(msg.contains("epoch"), "{msg}");
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let bad = QNN.replace(r#""epochs": 3"#, r#""epochs": 0"#);
        assert!(matches!(parse_config(&bad), Err(CliError::Usage(_))));
    }

    #[test]
    fn manifest_replays_its_config() {
        let config = parse_config(QNN).unwrap();
        let manifest = serde_json::json!({"manifest_version": 1, "config": config});
        assert_eq!(parse_config(&manifest.to_string()).unwrap(), config);
    }
}
