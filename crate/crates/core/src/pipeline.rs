//! The real-time per-frame loop: observation -> features -> classifier ->
//! moving-window smoothing -> binary intention.
//!
//! The smoothing window averages the raw binary classifier outputs over a
//! time span (1 s by default). The smoothed intention is intentional only
//! when the window mean strictly exceeds the threshold, so a tie resolves
//! to unintentional.
//!
//! Missing-data policy: a frame whose skeleton fails validation (or whose
//! wrists are unobserved) is still processed; the hand-distance and
//! hand-angle features saturate at 1, which steers the classifier toward
//! unintentional.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use nalgebra::{Point2, Vector2};

use crate::config::SystemGeometry;
use crate::error::{Error, Result};
use crate::features::{
    frame_features, FeatureStreamState, FeatureVector, Poi, PoiKind, PoiSet, RawFrame,
    ScalingParams, SensorSnapshot,
};
use crate::kinematics::{JointConfig, SensorId};
use crate::models::{Prediction, TrainedModel};
use crate::perception::{validate_skeleton, GazeEstimate, Keypoint2D, KeypointName, Skeleton};
use crate::scalar::Real;
use crate::traces::TraceFrame;

/// Decision state fed by raw classifier outputs.
#[derive(Debug, Clone)]
pub struct IntentionState<T: Real> {
    /// Raw classifier score of the newest frame.
    pub raw_score: T,
    /// Raw classifier label of the newest frame.
    pub raw_label: bool,
    /// Recent raw labels with their timestamps, newest last.
    window: VecDeque<(T, bool)>,
    /// Arithmetic mean of the window.
    pub smoothed_mean: T,
    /// Smoothed binary intention; unintentional by default.
    pub intention: bool,
    /// Timestamp of the most recent intention flip.
    pub last_transition: Option<T>,
    last_timestamp: Option<T>,
}

impl<T: Real> IntentionState<T> {
    pub fn new() -> Self {
        Self {
            raw_score: T::zero(),
            raw_label: false,
            window: VecDeque::new(),
            smoothed_mean: T::zero(),
            intention: false,
            last_transition: None,
            last_timestamp: None,
        }
    }

    /// Empty the window and return to the safe default (unintentional).
    pub fn reset(&mut self) {
        *self = Self::new();
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Push one raw output and recompute the smoothed intention.
    ///
    /// Samples strictly older than `newest - span` leave the window.
    /// Ties at the threshold resolve to unintentional.
    pub fn update(
        &mut self,
        timestamp: T,
        raw: Prediction<T>,
        span: T,
        threshold: T,
    ) -> Result<bool> {
        if let Some(last) = self.last_timestamp {
            if timestamp <= last {
                return Err(Error::StreamOrder(format!(
                    "frame timestamp {} does not increase past {}",
                    timestamp.as_f64(),
                    last.as_f64()
                )));
            }
        }
        self.last_timestamp = Some(timestamp);
        self.raw_score = raw.score;
        self.raw_label = raw.label;

        self.window.push_back((timestamp, raw.label));
        let horizon = timestamp - span;
        while matches!(self.window.front(), Some(&(t, _)) if t < horizon) {
            self.window.pop_front();
        }

        let positives = self.window.iter().filter(|(_, l)| *l).count();
        self.smoothed_mean = T::of(positives as f64 / self.window.len() as f64);
        let intention = self.smoothed_mean > threshold;
        if intention != self.intention {
            self.last_transition = Some(timestamp);
        }
        self.intention = intention;
        Ok(intention)
    }
}

impl<T: Real> Default for IntentionState<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-stream pipeline state: backward-difference history plus the
/// smoothing window. One instance per interaction stream, single writer.
#[derive(Debug, Clone, Default)]
pub struct PipelineState<T: Real> {
    pub features: FeatureStreamState<T>,
    pub intention: IntentionState<T>,
}

impl<T: Real> PipelineState<T> {
    pub fn new() -> Self {
        Self {
            features: FeatureStreamState::new(),
            intention: IntentionState::new(),
        }
    }

    pub fn reset(&mut self) {
        self.features.reset();
        self.intention.reset();
    }
}

/// Smoothing parameters for the decision layer.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig<T: Real> {
    pub window_span: T,
    pub threshold: T,
}

impl<T: Real> PipelineConfig<T> {
    pub fn new(window_span: T, threshold: T) -> Result<Self> {
        if window_span <= T::zero() {
            return Err(Error::Config("window span must be positive".into()));
        }
        if threshold <= T::zero() || threshold >= T::one() {
            return Err(Error::Config("threshold must lie in (0, 1)".into()));
        }
        Ok(Self {
            window_span,
            threshold,
        })
    }

    pub fn from_system(spec: &crate::config::PipelineSpec<T>) -> Result<Self> {
        PipelineConfig::new(spec.window_span, spec.threshold)
    }
}

/// Everything one pipeline step produces.
#[derive(Debug, Clone)]
pub struct StepOutput<T: Real> {
    pub features: FeatureVector<T>,
    pub raw: Prediction<T>,
    pub smoothed_mean: T,
    pub intention: bool,
}

/// Latest-intention cell that a control loop (or any reader) can poll
/// while the pipeline thread keeps stepping. Plain atomic publish.
#[derive(Debug, Clone, Default)]
pub struct SharedIntention {
    cell: Arc<AtomicU8>,
}

impl SharedIntention {
    pub fn new() -> Self {
        Self {
            cell: Arc::new(AtomicU8::new(0)),
        }
    }

    pub fn publish(&self, intention: bool) {
        self.cell.store(u8::from(intention), Ordering::Release);
    }

    pub fn latest(&self) -> bool {
        self.cell.load(Ordering::Acquire) != 0
    }
}

/// Artifacts of turning one trace frame into feature inputs.
struct FrameGeometryView<T: Real> {
    snapshot: SensorSnapshot<T>,
    gaze: Option<GazeEstimate<T>>,
    pois: PoiSet<T>,
}

fn build_frame_view<T: Real>(
    frame: &TraceFrame<T>,
    geometry: &SystemGeometry<T>,
) -> Result<FrameGeometryView<T>> {
    if frame.sensors.len() != geometry.layout.len() {
        return Err(Error::InputShape(format!(
            "frame carries {} sensor bits, layout has {} sensors",
            frame.sensors.len(),
            geometry.layout.len()
        )));
    }
    let positions = geometry.sensor_positions(&JointConfig::new(frame.q.clone()))?;
    let gamma: BTreeMap<SensorId, bool> = frame
        .sensors
        .iter()
        .enumerate()
        .map(|(i, &bit)| (SensorId(i as u32), bit))
        .collect();
    let snapshot = SensorSnapshot::new(gamma, positions)?;

    // Skeleton: project, validate; a rejected skeleton contributes no
    // wrist observations (missing-data policy).
    let mut skeleton = Skeleton::new(
        frame
            .keypoints
            .iter()
            .map(|(name, kp)| {
                (
                    *name,
                    Keypoint2D {
                        u: kp.u,
                        v: kp.v,
                        confidence: kp.c,
                        depth: kp.d,
                    },
                )
            })
            .collect(),
    );
    skeleton.project(&geometry.intrinsics);
    let usable = validate_skeleton(&skeleton, &geometry.bounds).is_accept();

    let mut pois: Vec<Poi<T>> = geometry
        .static_pois
        .iter()
        .map(|(name, pixel)| Poi {
            name: name.clone(),
            kind: PoiKind::Static,
            pixel: *pixel,
            world: None,
        })
        .collect();
    if usable {
        for (name, kind) in [
            (KeypointName::WristLeft, PoiKind::HandLeft),
            (KeypointName::WristRight, PoiKind::HandRight),
        ] {
            let (Some(pixel), Some(world)) = (skeleton.pixel(name), skeleton.point3d(name)) else {
                continue;
            };
            pois.push(Poi {
                name: format!("{name:?}"),
                kind,
                pixel: Point2::new(pixel.x, pixel.y),
                world: Some(world),
            });
        }
    }

    let gaze = frame.gaze.as_ref().and_then(|g| {
        GazeEstimate::new(
            Point2::new(g.origin[0], g.origin[1]),
            Vector2::new(g.direction[0], g.direction[1]),
        )
        .ok()
    });

    Ok(FrameGeometryView {
        snapshot,
        gaze,
        pois: PoiSet::new(pois)?,
    })
}

/// Turn one trace frame into the scaled feature vector, advancing the
/// stream state.
pub fn extract_features<T: Real>(
    frame: &TraceFrame<T>,
    geometry: &SystemGeometry<T>,
    scaling: &ScalingParams<T>,
    state: &mut FeatureStreamState<T>,
) -> Result<FeatureVector<T>> {
    let view = build_frame_view(frame, geometry)?;
    let features = frame_features(&view.snapshot, view.gaze.as_ref(), &view.pois, scaling);
    crate::features::reduce(&features, frame.t, state, scaling)
}

/// Raw (unscaled) per-frame observations for fitting scaling parameters.
pub fn raw_frame_features<T: Real>(
    frame: &TraceFrame<T>,
    geometry: &SystemGeometry<T>,
) -> Result<RawFrame<T>> {
    let view = build_frame_view(frame, geometry)?;
    // The raw distance/angle lists do not depend on the scaling values;
    // unit placeholders keep the call well-formed.
    let placeholder = ScalingParams::new(T::one(), T::one(), T::pi(), T::one())?;
    let features = frame_features(&view.snapshot, view.gaze.as_ref(), &view.pois, &placeholder);
    Ok(RawFrame {
        timestamp: frame.t,
        touched: features.touched,
        raw_distances: features.raw_distances,
        raw_angles: features.raw_angles,
    })
}

/// Run one frame through the whole recognition path.
pub fn step<T: Real>(
    frame: &TraceFrame<T>,
    model: &TrainedModel<T>,
    state: &mut PipelineState<T>,
    config: &PipelineConfig<T>,
    geometry: &SystemGeometry<T>,
) -> Result<StepOutput<T>> {
    let features = extract_features(frame, geometry, &model.scaling, &mut state.features)?;
    let raw = model.predict(&features)?;
    state
        .intention
        .update(frame.t, raw, config.window_span, config.threshold)?;
    Ok(StepOutput {
        features,
        raw,
        smoothed_mean: state.intention.smoothed_mean,
        intention: state.intention.intention,
    })
}
