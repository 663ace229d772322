//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use tactus::config::{demo_config, SystemConfig, SystemGeometry};
use tactus::control::GainPresets;
use tactus::error::{Error, Result};
use tactus::models::{
    cross_validate, default_ablation_masks, knn_fit, mlp_train, Classifier, ConfusionMatrix,
    FeatureMask, LabeledDataset, MlpTrainConfig, ModelMetadata, ModelSpec, TrainedModel,
};
use tactus::pipeline::PipelineConfig;
use tactus::replay::{replay_trace, ReplayOptions};
use tactus::simgen::{generate, ScenarioSpec};
use tactus::traces::{
    assemble_dataset, files_hash, fit_scaling_over_traces, load_model, read_replay_log, read_trace,
    save_model, write_replay_log, write_trace, EvalReport, EvalRow, TraceFile,
};

fn load_config(path: Option<PathBuf>) -> Result<SystemConfig<f64>> {
    match path {
        Some(path) => SystemConfig::load(&path),
        None => Ok(demo_config()),
    }
}

fn config_hash(config: &SystemConfig<f64>) -> Result<String> {
    Ok(tactus::traces::content_hash(config.to_toml()?.as_bytes()))
}

/// Expand a glob into a sorted list of trace paths.
fn resolve_traces(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| Error::Config(format!("bad glob `{pattern}`: {e}")))?
        .filter_map(|entry| entry.ok())
        .collect();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "glob `{pattern}` matched no trace files"
        )));
    }
    let mut paths = paths;
    paths.sort();
    Ok(paths)
}

fn read_traces(paths: &[PathBuf]) -> Result<Vec<TraceFile<f64>>> {
    paths.iter().map(|p| read_trace::<f64>(p)).collect()
}

struct AssembledCorpus {
    dataset: LabeledDataset<f64>,
    scaling: tactus::features::ScalingParams<f64>,
    corpus_hash: String,
}

fn assemble(
    pattern: &str,
    config: &SystemConfig<f64>,
    geometry: &SystemGeometry<f64>,
) -> Result<AssembledCorpus> {
    let paths = resolve_traces(pattern)?;
    let traces = read_traces(&paths)?;
    let scaling = fit_scaling_over_traces(&traces, geometry)?;
    let dataset = assemble_dataset(&traces, geometry, &config.id, &scaling)?;
    Ok(AssembledCorpus {
        dataset,
        scaling,
        corpus_hash: files_hash(&paths)?,
    })
}

pub fn gen(
    config_path: Option<PathBuf>,
    spec_path: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<()> {
    let config = load_config(config_path)?;
    let mut spec = ScenarioSpec::<f64>::load(spec_path)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let trace = generate(&spec, &config)?;
    write_trace(out, &trace)?;
    let positives = trace
        .frames
        .iter()
        .filter(|f| f.label == Some(true))
        .count();
    println!(
        "wrote {}: frames={}, positives={}, scenario={}, seed={}",
        out.display(),
        trace.frames.len(),
        positives,
        trace.header.scenario.as_deref().unwrap_or("?"),
        spec.seed
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn train(
    config_path: Option<PathBuf>,
    traces: &str,
    model_kind: &str,
    k: usize,
    features: &str,
    out: &Path,
    seed: u64,
    epochs: usize,
    learning_rate: f64,
) -> Result<()> {
    let config = load_config(config_path)?;
    let geometry = config.geometry()?;
    let mask = FeatureMask::parse(features)?;
    let corpus = assemble(traces, &config, &geometry)?;

    let classifier = match model_kind {
        "knn" => Classifier::Knn(knn_fit(&corpus.dataset, &mask, k)?),
        "mlp" => Classifier::Mlp(mlp_train(
            &corpus.dataset,
            &mask,
            &MlpTrainConfig {
                epochs,
                learning_rate,
                seed,
            },
        )?),
        other => return Err(Error::Config(format!("unknown model kind `{other}`"))),
    };
    let model = TrainedModel {
        mask,
        scaling: corpus.scaling,
        classifier,
        metadata: ModelMetadata {
            seed,
            n_samples: corpus.dataset.len(),
            positive_fraction: corpus.dataset.positive_fraction(),
        },
    };
    save_model(out, &model)?;
    println!(
        "wrote {}: kind={}, features={}, rows={}, positive_fraction={:.3}",
        out.display(),
        model.kind_name(),
        model.mask,
        model.metadata.n_samples,
        model.metadata.positive_fraction
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    config_path: Option<PathBuf>,
    traces: &str,
    model_path: Option<&Path>,
    retrain: bool,
    model_kind: &str,
    k: usize,
    features: &str,
    folds: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let config = load_config(config_path)?;
    let geometry = config.geometry()?;

    let (row, corpus_hash) = match (model_path, retrain) {
        (Some(path), false) => {
            // Stored model: score it on the assembled dataset with its own
            // frozen scaling.
            let model = load_model::<f64>(path)?;
            let paths = resolve_traces(traces)?;
            let trace_files = read_traces(&paths)?;
            let dataset = assemble_dataset(&trace_files, &geometry, &config.id, &model.scaling)?;
            let mut confusion = ConfusionMatrix::default();
            for (fv, truth) in &dataset.rows {
                let pred = model.predict(fv)?;
                confusion.record(*truth, pred.label);
            }
            (
                EvalRow::new(
                    model.kind_name().to_string(),
                    model.mask.to_string(),
                    &confusion,
                    1,
                    seed,
                ),
                files_hash(&paths)?,
            )
        }
        (None, true) => {
            let mask = FeatureMask::parse(features)?;
            let corpus = assemble(traces, &config, &geometry)?;
            let spec = match model_kind {
                "knn" => ModelSpec::Knn { k },
                "mlp" => ModelSpec::Mlp {
                    epochs: 2000,
                    learning_rate: 0.5,
                },
                other => return Err(Error::Config(format!("unknown model kind `{other}`"))),
            };
            let cv = cross_validate(&corpus.dataset, &mask, &spec, folds, seed)?;
            (
                EvalRow::new(spec.to_string(), mask.to_string(), &cv.pooled, folds, seed),
                corpus.corpus_hash,
            )
        }
        _ => {
            return Err(Error::Config(
                "eval needs exactly one of --model <file> or --retrain".into(),
            ))
        }
    };

    let report = EvalReport::new(vec![row], corpus_hash, config_hash(&config)?);
    print!("{}", report.format_table());
    report.save(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn ablate(
    config_path: Option<PathBuf>,
    traces: &str,
    masks: Option<&str>,
    model_kind: &str,
    k: usize,
    folds: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let config = load_config(config_path)?;
    let geometry = config.geometry()?;
    let corpus = assemble(traces, &config, &geometry)?;

    let masks: Vec<FeatureMask> = match masks {
        Some(list) => list
            .split(';')
            .map(FeatureMask::parse)
            .collect::<Result<_>>()?,
        None => default_ablation_masks(),
    };
    let spec = match model_kind {
        "knn" => ModelSpec::Knn { k },
        "mlp" => ModelSpec::Mlp {
            epochs: 2000,
            learning_rate: 0.5,
        },
        other => return Err(Error::Config(format!("unknown model kind `{other}`"))),
    };
    let rows = tactus::models::ablation_study(&corpus.dataset, &masks, &[spec], folds, seed)?;

    let eval_rows: Vec<EvalRow> = rows
        .iter()
        .map(|row| {
            EvalRow::new(
                row.spec.to_string(),
                row.mask.to_string(),
                &row.pooled,
                folds,
                seed,
            )
        })
        .collect();
    let report = EvalReport::new(eval_rows, corpus.corpus_hash, config_hash(&config)?);
    print!("{}", report.format_table());
    report.save(out)?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn replay(
    config_path: Option<PathBuf>,
    trace_path: &Path,
    model_path: &Path,
    control: bool,
    window: f64,
    out: &Path,
) -> Result<()> {
    let config = load_config(config_path)?;
    let geometry = config.geometry()?;
    let trace = read_trace::<f64>(trace_path)?;
    if trace.header.chain_id != config.id {
        return Err(Error::Config(format!(
            "trace was recorded against config `{}`, loaded `{}`",
            trace.header.chain_id, config.id
        )));
    }
    let model = load_model::<f64>(model_path)?;
    let gains = GainPresets::from_config(&config.gains, geometry.chain.dof())?;
    let inertia = vec![config.gains.inertia; geometry.chain.dof()];
    let pipeline = PipelineConfig::new(window, config.pipeline.threshold)?;

    let outcome = replay_trace(
        &trace,
        &model,
        &geometry,
        &gains,
        &inertia,
        &ReplayOptions::new(control, pipeline),
    )?;
    write_replay_log(out, &outcome.log)?;

    let s = &outcome.summary;
    println!(
        "replayed {} ({} frames, control {}):",
        trace_path.display(),
        s.frames,
        if control { "on" } else { "off" }
    );
    println!(
        "  intentional frames: {} ({:.1}%), transitions: {}, stiff frames: {}",
        s.intentional_frames,
        100.0 * s.intentional_frames as f64 / s.frames.max(1) as f64,
        s.transitions,
        s.stiff_frames
    );
    println!(
        "  max EE deviation: {:.4} m overall, {:.4} m within unintentional intervals",
        s.max_deviation, s.max_unintentional_deviation
    );
    println!("wrote {}", out.display());
    Ok(())
}

pub fn export_plot(log_path: &Path, out: &Path) -> Result<()> {
    let log = read_replay_log::<f64>(log_path)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(out)?);
    writeln!(
        file,
        "t,gamma,d,d_dot,alpha,alpha_dot,raw_score,raw_label,smoothed,intention,\
         ee_x,ee_y,ee_z,ee_speed,force_proxy,mode"
    )?;
    for frame in &log.frames {
        let [gamma, d, d_dot, alpha, alpha_dot] = frame.features;
        let ee = frame.ee.unwrap_or([f64::NAN; 3]);
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            frame.frame.t,
            gamma,
            d,
            d_dot,
            alpha,
            alpha_dot,
            frame.raw_score,
            u8::from(frame.raw_label),
            frame.smoothed,
            u8::from(frame.intention),
            ee[0],
            ee[1],
            ee[2],
            frame.ee_speed.unwrap_or(f64::NAN),
            frame.force_proxy.unwrap_or(f64::NAN),
            frame.mode.as_deref().unwrap_or("")
        )?;
    }
    file.flush()?;
    println!("wrote {} ({} rows)", out.display(), log.frames.len());
    Ok(())
}
