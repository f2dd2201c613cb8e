use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use qcavity::circuits::{segment, EmbeddingKind, ModelConfig, ModelParams};
use qcavity::embeddings::{normalize, Domain, Embedding};
use qcavity::jet::Jet;
use qcavity::qpinn::{build_model, grid_coord, predict_grid, train_with, write_history_csv, Checkpoint, TrainConfig};
use qcavity::reference::{metrics, solve_reference, FieldGrid, FieldMetrics, Metrics, ReferenceConfig};

use crate::config::load_config;
use crate::error::{CliError, CliResult};
use crate::manifest::{
    write_json, Decisions, RunManifest, ERROR_SCHEMA, FIELD_SCHEMA, HISTORY_SCHEMA, METRICS_SCHEMA,
};
use crate::svg::write_heatmap;

fn prepare_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_fields(path: &Path, grid: &FieldGrid) -> CliResult<()> {
    grid.write_csv(path).map_err(|e| CliError::io(path, e))
}

fn read_fields(path: &Path) -> CliResult<FieldGrid> {
    match FieldGrid::read_csv(path) {
        Err(e @ (qcavity::Error::Io(_) | qcavity::Error::Csv(_))) => Err(CliError::io(path, e)),
        other => Ok(other?),
    }
}

pub struct ReferenceArgs {
    pub reynolds: f64,
    pub nx: usize,
    pub ny: usize,
    pub beta: Option<f64>,
    pub steady_tol: Option<f64>,
    pub svg: bool,
    pub out: PathBuf,
}

pub fn reference(args: &ReferenceArgs) -> CliResult<()> {
    let mut cfg = ReferenceConfig::new(args.reynolds, args.nx, args.ny);
    if let Some(b) = args.beta {
        cfg.beta = b;
    }
    if let Some(t) = args.steady_tol {
        cfg.steady_tol = t;
    }
    prepare_dir(&args.out)?;
    let mut manifest = RunManifest::new("reference");
    manifest.reference = Some(cfg);
    let (grid, report) = solve_reference(&cfg)?;
    write_fields(&args.out.join("fields.csv"), &grid)?;
    manifest.output("fields.csv", FIELD_SCHEMA);
    if args.svg {
        write_heatmap(&args.out.join("speed.svg"), &grid.speed(), grid.nx, grid.ny, "speed")?;
        write_heatmap(&args.out.join("pressure.svg"), &grid.p, grid.nx, grid.ny, "pressure")?;
        manifest.output("speed.svg", "svg");
        manifest.output("pressure.svg", "svg");
    }
    manifest.summary = json!({ "report": report });
    manifest.write(&args.out)?;
    println!(
        "reference Re {} {}x{}: {} steps, residual {:e}, divergence {:e}",
        cfg.reynolds, cfg.nx, cfg.ny, report.steps, report.residual, report.divergence
    );
    Ok(())
}

/// Train and write checkpoint, history and manifest into `out`. On a
/// non-finite abort the offending state is dumped before returning.
pub fn run_training(config: &TrainConfig, reference: Option<&FieldGrid>, out: &Path, verbose: bool) -> CliResult<f64> {
    prepare_dir(out)?;
    let mut manifest = RunManifest::new("train");
    manifest.config = Some(config.clone());
    manifest.seed = Some(config.seed);
    manifest.n_params = Some(config.model.layout()?.total());
    manifest.decisions = Some(Decisions::for_training(config));
    let mut observer = |r: &qcavity::qpinn::EpochRecord| {
        if verbose {
            eprintln!(
                "epoch {:>4} total {:.6e} pde {:.3e} wall {:.3e} lid {:.3e} ref {:.3e}",
                r.epoch, r.loss.total, r.loss.pde, r.loss.wall, r.loss.lid, r.loss.reference
            );
        }
    };
    let outcome = match train_with(config, reference, &mut observer) {
        Ok(o) => o,
        Err(qcavity::Error::NonFinite { what, epoch, params }) => {
            let dump = out.join("nonfinite_dump.json");
            write_json(&dump, &json!({ "what": what, "epoch": epoch, "config": config, "params": params }))?;
            manifest.output("nonfinite_dump.json", "dump/v1");
            manifest.summary = json!({ "status": "non_finite", "what": what, "epoch": epoch });
            manifest.write(out)?;
            return Err(CliError::Numerical(format!(
                "non-finite {what} at epoch {epoch}; state written to {}",
                dump.display()
            )));
        }
        Err(e) => return Err(e.into()),
    };
    Checkpoint::new(config, &outcome.params)
        .save(&out.join("checkpoint.json"))
        .map_err(|e| CliError::io(&out.join("checkpoint.json"), e))?;
    manifest.output("checkpoint.json", "checkpoint/v1");
    let history = out.join("loss_history.csv");
    write_history_csv(&history, &outcome.history).map_err(|e| CliError::io(&history, e))?;
    manifest.output("loss_history.csv", HISTORY_SCHEMA);
    let last = outcome.history.last().expect("history has the initial row");
    manifest.summary = json!({
        "status": outcome.status,
        "initial_loss": outcome.initial_loss(),
        "final_loss": outcome.final_loss(),
        "epochs_run": last.epoch,
        "rel_l2_u": last.rel_l2_u,
        "rel_l2_p": last.rel_l2_p,
    });
    manifest.write(out)?;
    Ok(outcome.final_loss())
}

pub fn train(config: &Path, reference: Option<&Path>, out: &Path) -> CliResult<()> {
    let config = load_config(config)?;
    let reference = reference.map(read_fields).transpose()?;
    let final_loss = run_training(&config, reference.as_ref(), out, true)?;
    println!("final loss {final_loss:e}");
    Ok(())
}

#[derive(Serialize)]
struct MetricRow {
    mse: f64,
    rel_l2: f64,
    max_abs: f64,
}

impl From<FieldMetrics> for MetricRow {
    fn from(m: FieldMetrics) -> Self {
        Self {
            mse: m.mse,
            rel_l2: m.rel_l2,
            max_abs: m.max_abs,
        }
    }
}

fn metrics_json(m: &Metrics) -> serde_json::Value {
    json!({ "speed": MetricRow::from(m.speed), "pressure": MetricRow::from(m.pressure) })
}

fn compare(pred: &FieldGrid, reference: &FieldGrid, out: &Path, svg: bool, manifest: &mut RunManifest) -> CliResult<()> {
    let m = metrics(pred, reference)?;
    write_json(&out.join("metrics.json"), &metrics_json(&m))?;
    manifest.output("metrics.json", METRICS_SCHEMA);

    let path = out.join("errors.csv");
    let (ps, rs) = (pred.speed(), reference.speed());
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
    let io = |e| CliError::io(&path, e);
    w.write_record(["x", "y", "speed_error", "p_error"]).map_err(io)?;
    let mut speed_err = Vec::with_capacity(pred.len());
    for k in 0..pred.len() {
        let (x, y) = pred.coord(k);
        let ds = ps[k] - rs[k];
        let dp = (pred.p[k] - pred.p[0]) - (reference.p[k] - reference.p[0]);
        speed_err.push(ds.abs());
        w.write_record([x.to_string(), y.to_string(), ds.to_string(), dp.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    manifest.output("errors.csv", ERROR_SCHEMA);
    if svg {
        write_heatmap(&out.join("speed_error.svg"), &speed_err, pred.nx, pred.ny, "|speed error|")?;
        manifest.output("speed_error.svg", "svg");
    }
    manifest.summary = metrics_json(&m);
    println!(
        "speed rel-L2 {:.4e}, pressure rel-L2 {:.4e}",
        m.speed.rel_l2, m.pressure.rel_l2
    );
    Ok(())
}

pub fn infer(checkpoint: &Path, reference: &Path, out: &Path, svg: bool) -> CliResult<()> {
    let ckpt = match Checkpoint::load(checkpoint) {
        Err(e @ qcavity::Error::Io(_)) => return Err(CliError::io(checkpoint, e)),
        Err(e) => return Err(CliError::Usage(format!("{}: {e}", checkpoint.display()))),
        Ok(c) => c,
    };
    let params = ckpt.params()?;
    let reference = read_fields(reference)?;
    prepare_dir(out)?;
    let mut manifest = RunManifest::new("infer");
    manifest.config = Some(ckpt.config.clone());
    manifest.seed = Some(ckpt.seed);
    manifest.n_params = Some(params.theta.len());
    let model = build_model(&ckpt.config.model, ckpt.config.gradient)?;
    let pred = predict_grid(model.as_ref(), &params.theta, reference.nx, reference.ny)?;
    write_fields(&out.join("predicted.csv"), &pred)?;
    manifest.output("predicted.csv", FIELD_SCHEMA);
    if svg {
        write_heatmap(&out.join("speed.svg"), &pred.speed(), pred.nx, pred.ny, "predicted speed")?;
        write_heatmap(&out.join("pressure.svg"), &pred.p, pred.nx, pred.ny, "predicted pressure")?;
        manifest.output("speed.svg", "svg");
        manifest.output("pressure.svg", "svg");
    }
    compare(&pred, &reference, out, svg, &mut manifest)?;
    manifest.write(out)
}

pub fn metrics_cmd(prediction: &Path, reference: &Path, out: &Path) -> CliResult<()> {
    let pred = read_fields(prediction)?;
    let reference = read_fields(reference)?;
    prepare_dir(out)?;
    let mut manifest = RunManifest::new("metrics");
    compare(&pred, &reference, out, false, &mut manifest)?;
    manifest.write(out)
}

fn embedding_variants(config: &ModelConfig) -> CliResult<(usize, usize, usize, usize)> {
    let ModelConfig::Qpinn {
        n_qubits,
        vqc_layers,
        embedding,
    } = config
    else {
        return Err(CliError::Usage("embedding comparison needs a qpinn model config".into()));
    };
    let hidden = match embedding {
        EmbeddingKind::Fnn { hidden } => *hidden,
        _ => qcavity::embeddings::DEFAULT_FNN_HIDDEN,
    };
    let layers = match embedding {
        EmbeddingKind::Qnn { layers } => *layers,
        _ => 5,
    };
    Ok((*n_qubits, *vqc_layers, hidden, layers))
}

/// Angle grid of one embedding with its parameters.
fn angle_grid(kind: &EmbeddingKind, n_qubits: usize, theta: &[f64], nx: usize, ny: usize) -> CliResult<Vec<Vec<f64>>> {
    let emb = Embedding::new(kind, n_qubits)?;
    let mut cols = vec![Vec::with_capacity(nx * ny); n_qubits];
    for j in 0..ny {
        for i in 0..nx {
            let (xt, yt) = normalize(grid_coord(i, nx), grid_coord(j, ny), &Domain::UNIT, 1)?;
            let trace = emb.forward(&xt, &yt, theta)?;
            for (c, a) in cols.iter_mut().zip(trace.angles()) {
                c.push(Jet::value(a));
            }
        }
    }
    Ok(cols)
}

fn write_angles(path: &Path, cols: &[Vec<f64>], nx: usize, ny: usize) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend((1..=cols.len()).map(|i| format!("alpha_{i}")));
    w.write_record(&header).map_err(|e| CliError::io(path, e))?;
    for k in 0..nx * ny {
        let mut row = vec![grid_coord(k % nx, nx).to_string(), grid_coord(k / nx, ny).to_string()];
        row.extend(cols.iter().map(|c| c[k].to_string()));
        w.write_record(&row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn compare_embeddings(config: &Path, checkpoints: &[PathBuf], nx: usize, ny: usize, out: &Path, svg: bool) -> CliResult<()> {
    let config = load_config(config)?;
    let (n_qubits, vqc_layers, hidden, layers) = embedding_variants(&config.model)?;
    if nx < 2 || ny < 2 {
        return Err(CliError::Usage("angle grid needs at least 2×2 points".into()));
    }
    prepare_dir(out)?;
    let mut manifest = RunManifest::new("compare-embeddings");
    manifest.config = Some(config.clone());
    manifest.seed = Some(config.seed);

    let mut trained = Vec::new();
    for path in checkpoints {
        let ckpt = Checkpoint::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        match &ckpt.config.model {
            ModelConfig::Qpinn { n_qubits: n, .. } if *n == n_qubits => {
                trained.push((ckpt.params()?, path.display().to_string(), ckpt.config.model.clone()))
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: not a {n_qubits}-qubit qpinn checkpoint",
                    path.display()
                )))
            }
        }
    }

    let mut sources = json!({});
    let kinds = [
        EmbeddingKind::Chebyshev,
        EmbeddingKind::Fnn { hidden },
        EmbeddingKind::Qnn { layers },
    ];
    for kind in kinds {
        let label = kind.label();
        let from_checkpoint = trained.iter().find(|(_, _, m)| match m {
            ModelConfig::Qpinn { embedding, .. } => embedding.label() == label,
            ModelConfig::Pinn { .. } => false,
        });
        let (params, source, model_cfg) = match from_checkpoint {
            Some(found) => found.clone(),
            None => {
                let model_cfg = ModelConfig::Qpinn {
                    n_qubits,
                    vqc_layers,
                    embedding: kind.clone(),
                };
                let model = build_model(&model_cfg, config.gradient)?;
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                let theta = model.init_params(&mut rng);
                (
                    ModelParams::new(theta, model.layout().clone())?,
                    format!("initialized, seed {}", config.seed),
                    model_cfg,
                )
            }
        };
        let ModelConfig::Qpinn { embedding, .. } = &model_cfg else { unreachable!() };
        sources[label] = json!(source);
        let branches: Vec<(String, &str)> = match embedding {
            EmbeddingKind::Chebyshev => vec![(label.to_string(), "")],
            EmbeddingKind::Fnn { .. } => vec![(label.to_string(), segment::EMBEDDING_SHARED)],
            EmbeddingKind::Qnn { .. } => vec![
                (format!("{label}_psi"), segment::EMBEDDING_PSI),
                (format!("{label}_p"), segment::EMBEDDING_P),
            ],
        };
        for (name, seg) in branches {
            let theta = if seg.is_empty() { &[][..] } else { params.segment(seg)? };
            let cols = angle_grid(embedding, n_qubits, theta, nx, ny)?;
            let file = format!("angles_{name}.csv");
            write_angles(&out.join(&file), &cols, nx, ny)?;
            manifest.output(&file, &format!("angles/v1: x,y,alpha_1..alpha_{n_qubits}"));
            if svg {
                for (i, c) in cols.iter().enumerate() {
                    let file = format!("angles_{name}_{}.svg", i + 1);
                    write_heatmap(&out.join(&file), c, nx, ny, &format!("{name} alpha_{}", i + 1))?;
                    manifest.output(&file, "svg");
                }
            }
        }
    }
    manifest.summary = json!({ "parameters": sources });
    manifest.write(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    Qubits,
    Reynolds,
}

pub struct SweepArgs {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub config: PathBuf,
    pub out: PathBuf,
    pub parallel: bool,
}

fn sweep_models(base: &ModelConfig, n_qubits: usize) -> CliResult<Vec<(&'static str, ModelConfig)>> {
    let (_, vqc_layers, hidden, layers) = embedding_variants(base)?;
    Ok([
        EmbeddingKind::Chebyshev,
        EmbeddingKind::Fnn { hidden },
        EmbeddingKind::Qnn { layers },
    ]
    .into_iter()
    .map(|e| {
        (
            e.label(),
            ModelConfig::Qpinn {
                n_qubits,
                vqc_layers,
                embedding: e,
            },
        )
    })
    .collect())
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    if args.values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let base = load_config(&args.config)?;
    let ModelConfig::Qpinn { n_qubits, .. } = base.model else {
        return Err(CliError::Usage("sweep needs a qpinn model config".into()));
    };
    let mut runs = Vec::new();
    for &value in &args.values {
        let (qubits, reynolds) = match args.axis {
            SweepAxis::Qubits => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(CliError::Usage(format!("qubit count must be a positive integer, got {value}")));
                }
                (value as usize, base.reynolds)
            }
            SweepAxis::Reynolds => (n_qubits, value),
        };
        for (label, model) in sweep_models(&base.model, qubits)? {
            let mut config = base.clone();
            config.model = model;
            config.reynolds = reynolds;
            runs.push((value, label, config));
        }
    }
    prepare_dir(&args.out)?;
    let axis = match args.axis {
        SweepAxis::Qubits => "qubits",
        SweepAxis::Reynolds => "reynolds",
    };
    let run_one = |(value, label, config): &(f64, &'static str, TrainConfig)| -> (f64, &'static str, Result<f64, String>) {
        let dir = args.out.join(format!("{axis}_{value}")).join(label);
        let result = config
            .validate()
            .map_err(CliError::from)
            .and_then(|_| run_training(config, None, &dir, false))
            .map_err(|e| e.to_string());
        match &result {
            Ok(l) => eprintln!("{axis} {value} {label}: final loss {l:e}"),
            Err(e) => eprintln!("{axis} {value} {label}: {e}"),
        }
        (*value, label, result)
    };
    let results: Vec<_> = if args.parallel {
        runs.par_iter().map(run_one).collect()
    } else {
        runs.iter().map(run_one).collect()
    };

    let path = args.out.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
    w.write_record([axis, "chebyshev", "fnn", "qnn"]).map_err(|e| CliError::io(&path, e))?;
    let mut failures = Vec::new();
    for &value in &args.values {
        let mut row = vec![value.to_string()];
        for label in ["chebyshev", "fnn", "qnn"] {
            let cell = results
                .iter()
                .find(|(v, l, _)| *v == value && *l == label)
                .map(|(_, _, r)| r);
            row.push(match cell {
                Some(Ok(loss)) => format!("{loss:e}"),
                Some(Err(e)) => {
                    failures.push(json!({ axis: value, "model": label, "error": e }));
                    "NaN".into()
                }
                None => "NaN".into(),
            });
        }
        w.write_record(&row).map_err(|e| CliError::io(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let mut manifest = RunManifest::new("sweep");
    manifest.config = Some(base.clone());
    manifest.seed = Some(base.seed);
    manifest.decisions = Some(Decisions::for_training(&base));
    manifest.output("summary.csv", &format!("sweep/v1: {axis},chebyshev,fnn,qnn (final total loss)"));
    manifest.summary = json!({ "axis": axis, "values": args.values, "parallel": args.parallel, "failures": failures });
    manifest.write(&args.out)?;
    println!("sweep over {} {axis} values: {} runs, {} failed", args.values.len(), results.len(), failures.len());
    Ok(())
}
