//! Durable formats and dataset assembly.
//!
//! A trace file is line-delimited JSON: the first line is the header, every
//! following line one frame. Numbers are serialized with the shortest
//! representation that round-trips, so `read(write(t))` reproduces every
//! numeric field bit-exactly. Timestamps must strictly increase.
//!
//! Trace frame schema (units in brackets):
//!
//! | field      | content                                                  |
//! |------------|----------------------------------------------------------|
//! | `t`        | timestamp [s]                                            |
//! | `sensors`  | sensor bits as a `'0'`/`'1'` string, indexed by sensor id |
//! | `keypoints`| map keypoint name -> `{u, v [px], c (confidence), d [m]}` |
//! | `gaze`     | `{origin [px], direction}` in the image plane, optional  |
//! | `q`        | joint angles [rad]                                       |
//! | `label`    | ground truth (`true` = intentional), optional            |
//! | `tau_ext`  | external joint torques [N m], optional                   |
//!
//! Model containers and evaluation reports are single JSON documents, also
//! versioned through a `format_version` field.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::ScalingParams;
use crate::models::{
    Classifier, ConfusionMatrix, FeatureMask, KnnModel, LabeledDataset, MlpModel, ModelMetadata,
    TrainedModel,
};
use crate::scalar::Real;

pub const TRACE_FORMAT_VERSION: u32 = 1;
pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// One 2D keypoint record: pixel position, confidence, optional depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeypointRecord<T> {
    pub u: T,
    pub v: T,
    pub c: T,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub d: Option<T>,
}

/// The gaze ray in the image plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeRecord<T> {
    pub origin: [T; 2],
    pub direction: [T; 2],
}

/// One multimodal sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame<T: 'static> {
    pub t: T,
    #[serde(with = "bit_string")]
    pub sensors: Vec<bool>,
    pub keypoints: BTreeMap<crate::perception::KeypointName, KeypointRecord<T>>,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub gaze: Option<GazeRecord<T>>,
    pub q: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub label: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub tau_ext: Option<Vec<T>>,
}

mod bit_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], ser: S) -> Result<S::Ok, S::Error> {
        let text: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        ser.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<bool>, D::Error> {
        let text = String::deserialize(de)?;
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(serde::de::Error::custom(format!(
                    "invalid sensor bit `{other}`"
                ))),
            })
            .collect()
    }
}

/// Static POI as carried in a trace header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord<T> {
    pub name: String,
    pub pixel: [T; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader<T> {
    pub format_version: u32,
    pub chain_id: String,
    pub layout_id: String,
    pub camera_id: String,
    pub pois: Vec<PoiRecord<T>>,
    /// Nominal camera frame rate [Hz]; informative only.
    pub frame_rate_hint: T,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile<T: 'static> {
    pub header: TraceHeader<T>,
    pub frames: Vec<TraceFrame<T>>,
}

fn check_serializable_frame<T: Real>(frame: &TraceFrame<T>, line: usize) -> Result<()> {
    let finite = frame.t.is_finite()
        && frame.q.iter().all(|v| v.is_finite())
        && frame.keypoints.values().all(|kp| {
            kp.u.is_finite()
                && kp.v.is_finite()
                && kp.c.is_finite()
                && kp.d.is_none_or(|d| d.is_finite())
        });
    if !finite {
        return Err(Error::TraceParse {
            line,
            message: "frame contains non-finite numbers".into(),
        });
    }
    Ok(())
}

fn check_monotone<T: Real>(frames: &[TraceFrame<T>]) -> Result<()> {
    for (i, pair) in frames.windows(2).enumerate() {
        if pair[1].t <= pair[0].t {
            // Line i+3: 1-based, after the header line and the first frame.
            return Err(Error::NonMonotoneTimestamp { line: i + 3 });
        }
    }
    Ok(())
}

/// Write a trace file; the inverse of [`read_trace`] bit-exactly.
pub fn write_trace<T>(path: &Path, trace: &TraceFile<T>) -> Result<()>
where
    T: Real + Serialize,
{
    check_monotone(&trace.frames)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = serde_json::to_string(&trace.header)?;
    writeln!(out, "{header}")?;
    for (i, frame) in trace.frames.iter().enumerate() {
        check_serializable_frame(frame, i + 2)?;
        let line = serde_json::to_string(frame)?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read a trace file, validating version and timestamp order.
pub fn read_trace<T>(path: &Path) -> Result<TraceFile<T>>
where
    T: Real + DeserializeOwned,
{
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines.next().transpose()?.ok_or_else(|| Error::TraceParse {
        line: 1,
        message: "empty file, missing header".into(),
    })?;
    let header: TraceHeader<T> =
        serde_json::from_str(&header_line).map_err(|e| Error::TraceParse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
    if header.format_version != TRACE_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            expected: TRACE_FORMAT_VERSION,
            found: header.format_version,
        });
    }

    let mut frames = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: TraceFrame<T> = serde_json::from_str(&line).map_err(|e| Error::TraceParse {
            line: idx + 2,
            message: e.to_string(),
        })?;
        frames.push(frame);
    }
    check_monotone(&frames)?;
    Ok(TraceFile { header, frames })
}

/// Versioned, self-describing classifier container.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile<T: 'static> {
    pub format_version: u32,
    pub kind: String,
    pub mask: FeatureMask,
    pub scaling: ScalingParams<T>,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub knn: Option<KnnModel<T>>,
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub mlp: Option<MlpModel<T>>,
    pub metadata: ModelMetadata,
}

pub fn save_model<T>(path: &Path, model: &TrainedModel<T>) -> Result<()>
where
    T: Real + Serialize,
{
    let (kind, knn, mlp) = match &model.classifier {
        Classifier::Knn(m) => ("knn", Some(m.clone()), None),
        Classifier::Mlp(m) => ("mlp", None, Some(m.clone())),
    };
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        kind: kind.to_string(),
        mask: model.mask,
        scaling: model.scaling,
        knn,
        mlp,
        metadata: model.metadata.clone(),
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model<T>(path: &Path) -> Result<TrainedModel<T>>
where
    T: Real + DeserializeOwned,
{
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile<T> = serde_json::from_str(&text)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            expected: MODEL_FORMAT_VERSION,
            found: file.format_version,
        });
    }
    let classifier = match (file.kind.as_str(), file.knn, file.mlp) {
        ("knn", Some(m), None) => Classifier::Knn(m),
        ("mlp", None, Some(m)) => Classifier::Mlp(m),
        (kind, _, _) => {
            return Err(Error::Serialization(format!(
                "model file kind `{kind}` does not match its payload"
            )))
        }
    };
    Ok(TrainedModel {
        mask: file.mask,
        scaling: file.scaling,
        classifier,
        metadata: file.metadata,
    })
}

/// One row of an evaluation report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRow {
    pub model: String,
    pub mask: String,
    pub accuracy: f64,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub folds: usize,
    pub seed: u64,
}

impl EvalRow {
    pub fn new(
        model: String,
        mask: String,
        pooled: &ConfusionMatrix,
        folds: usize,
        seed: u64,
    ) -> Self {
        Self {
            model,
            mask,
            // Accuracy is derived from the pooled counts so the report
            // satisfies accuracy = (TP+TN)/total exactly.
            accuracy: pooled.accuracy(),
            tp: pooled.tp,
            tn: pooled.tn,
            fp: pooled.fp,
            fn_: pooled.fn_,
            folds,
            seed,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Evaluation report: per-(model, mask) rows plus input provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub rows: Vec<EvalRow>,
    pub corpus_hash: String,
    pub config_hash: String,
}

impl EvalReport {
    pub fn new(rows: Vec<EvalRow>, corpus_hash: String, config_hash: String) -> Self {
        Self {
            format_version: REPORT_FORMAT_VERSION,
            rows,
            corpus_hash,
            config_hash,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let report: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if report.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: REPORT_FORMAT_VERSION,
                found: report.format_version,
            });
        }
        Ok(report)
    }

    /// Human-readable table with the confusion counts in the column order
    /// TP, TN, FP, FN.
    pub fn format_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:<16} {:>8} {:>6} {:>6} {:>6} {:>6}\n",
            "model", "features", "accuracy", "TP", "TN", "FP", "FN"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<12} {:<16} {:>8.4} {:>6} {:>6} {:>6} {:>6}\n",
                row.model, row.mask, row.accuracy, row.tp, row.tn, row.fp, row.fn_
            ));
        }
        out
    }
}

/// One replayed frame: the original trace fields plus the appended
/// feature, intention, and arm columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFrame<T: 'static> {
    #[serde(flatten)]
    pub frame: TraceFrame<T>,
    /// `[gamma', d', d_dot', alpha', alpha_dot']`.
    pub features: [T; 5],
    pub raw_score: T,
    pub raw_label: bool,
    pub smoothed: T,
    pub intention: bool,
    /// Simulated joint positions (present when the controller ran).
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub q_sim: Option<Vec<T>>,
    /// Simulated end-effector position.
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub ee: Option<[T; 3]>,
    /// End-effector speed over the last frame interval.
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub ee_speed: Option<T>,
    /// Commanded-torque norm; stands in for the interaction force.
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub force_proxy: Option<T>,
    /// Controller stiffness mode, `compliant` or `stiff`.
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub mode: Option<String>,
}

/// Replay log: the trace header followed by one replayed frame per line.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayLog<T: 'static> {
    pub header: TraceHeader<T>,
    pub frames: Vec<ReplayFrame<T>>,
}

pub fn write_replay_log<T>(path: &Path, log: &ReplayLog<T>) -> Result<()>
where
    T: Real + Serialize,
{
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", serde_json::to_string(&log.header)?)?;
    for frame in &log.frames {
        writeln!(out, "{}", serde_json::to_string(frame)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_replay_log<T>(path: &Path) -> Result<ReplayLog<T>>
where
    T: Real + DeserializeOwned,
{
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines.next().transpose()?.ok_or_else(|| Error::TraceParse {
        line: 1,
        message: "empty file, missing header".into(),
    })?;
    let header: TraceHeader<T> =
        serde_json::from_str(&header_line).map_err(|e| Error::TraceParse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
    if header.format_version != TRACE_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            expected: TRACE_FORMAT_VERSION,
            found: header.format_version,
        });
    }
    let mut frames = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: ReplayFrame<T> = serde_json::from_str(&line).map_err(|e| Error::TraceParse {
            line: idx + 2,
            message: e.to_string(),
        })?;
        frames.push(frame);
    }
    Ok(ReplayLog { header, frames })
}

/// SHA-256 of a byte slice, hex-encoded. Used for provenance fields.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the contents of several files, in the given order.
pub fn files_hash(paths: &[std::path::PathBuf]) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        hasher.update(std::fs::read(path)?);
    }
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Assemble a labeled dataset from trace files: per-trace feature
/// extraction in timestamp order, stream state reset between traces.
///
/// Every frame must be labeled; headers must reference the same config id
/// as `geometry` was built from.
pub fn assemble_dataset<T: Real>(
    traces: &[TraceFile<T>],
    geometry: &crate::config::SystemGeometry<T>,
    config_id: &str,
    scaling: &ScalingParams<T>,
) -> Result<LabeledDataset<T>> {
    let mut rows = Vec::new();
    for (trace_idx, trace) in traces.iter().enumerate() {
        if trace.header.chain_id != config_id {
            return Err(Error::Assembly(format!(
                "trace {trace_idx} was recorded against config `{}`, expected `{}`",
                trace.header.chain_id, config_id
            )));
        }
        let mut state = crate::features::FeatureStreamState::new();
        for (frame_idx, frame) in trace.frames.iter().enumerate() {
            let label = frame.label.ok_or_else(|| {
                Error::Assembly(format!("trace {trace_idx} frame {frame_idx} is unlabeled"))
            })?;
            let fv = crate::pipeline::extract_features(frame, geometry, scaling, &mut state)?;
            rows.push((fv, label));
        }
    }
    Ok(LabeledDataset::new(rows))
}

/// Fit scaling parameters over trace files (raw pass, per-trace streams).
pub fn fit_scaling_over_traces<T: Real>(
    traces: &[TraceFile<T>],
    geometry: &crate::config::SystemGeometry<T>,
) -> Result<ScalingParams<T>> {
    let mut streams = Vec::new();
    for trace in traces {
        let mut stream = Vec::with_capacity(trace.frames.len());
        for frame in &trace.frames {
            stream.push(crate::pipeline::raw_frame_features(frame, geometry)?);
        }
        streams.push(stream);
    }
    crate::features::fit_scaling(&streams)
}
