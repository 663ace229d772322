//! The feature layer: gated hand-distance and hand-speed, gaze angle with
//! closest-hand assignment, gaze speed, and the reduction to the
//! five-component vector `[gamma', d', d_dot', alpha', alpha_dot']`.
//!
//! Gating: a sensor that is not touched contributes the maximum scaled
//! distance of 1, so untouched sensors never pull the minimum down. Speeds
//! are single-step backward differences of the already-reduced, scaled
//! series, normalized by the rate maxima seen during training and clamped
//! into `[0, 1]`.
//!
//! Hand gaze angles follow an asymmetric closest-hand rule: the left hand
//! angle is computed when some active sensor is at least as close to the
//! left wrist as to the right (ties go left), the right hand angle only
//! when some active sensor is strictly closer to the right wrist. Static
//! POIs are not subject to any of these conditions.
//!
//! Missing-data policy: when a sensor is active but no wrist observation
//! is available, the hand distance and hand gaze angles saturate at 1,
//! which biases the classifier toward unintentional.

use std::collections::BTreeMap;

use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::SensorId;
use crate::perception::GazeEstimate;
use crate::scalar::{clamp_unit, Real};

/// Left/right hand tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Hand {
    Left,
    Right,
}

/// Binary sensor states and world positions for one frame.
#[derive(Debug, Clone)]
pub struct SensorSnapshot<T: Real> {
    gamma: BTreeMap<SensorId, bool>,
    positions: BTreeMap<SensorId, Point3<T>>,
}

impl<T: Real> SensorSnapshot<T> {
    /// Both maps must cover exactly the same sensor ids.
    pub fn new(
        gamma: BTreeMap<SensorId, bool>,
        positions: BTreeMap<SensorId, Point3<T>>,
    ) -> Result<Self> {
        if gamma.len() != positions.len() || !gamma.keys().eq(positions.keys()) {
            return Err(Error::InputShape(
                "sensor snapshot gamma/position id sets differ".into(),
            ));
        }
        Ok(Self { gamma, positions })
    }

    pub fn gamma(&self, id: SensorId) -> Result<bool> {
        self.gamma
            .get(&id)
            .copied()
            .ok_or(Error::UnknownSensor(id.0))
    }

    pub fn position(&self, id: SensorId) -> Result<Point3<T>> {
        self.positions
            .get(&id)
            .copied()
            .ok_or(Error::UnknownSensor(id.0))
    }

    pub fn any_active(&self) -> bool {
        self.gamma.values().any(|&g| g)
    }

    pub fn active_ids(&self) -> impl Iterator<Item = SensorId> + '_ {
        self.gamma.iter().filter_map(|(id, &g)| g.then_some(*id))
    }

    pub fn ids(&self) -> impl Iterator<Item = SensorId> + '_ {
        self.gamma.keys().copied()
    }
}

/// Kind of a point of interest for gaze analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoiKind {
    HandLeft,
    HandRight,
    Static,
}

/// One gaze target: hands carry both an image point and a world point;
/// static POIs (tool, monitor, part) only need the image point.
#[derive(Debug, Clone)]
pub struct Poi<T: Real> {
    pub name: String,
    pub kind: PoiKind,
    pub pixel: Point2<T>,
    pub world: Option<Point3<T>>,
}

/// The gaze targets considered in one frame.
#[derive(Debug, Clone, Default)]
pub struct PoiSet<T: Real> {
    pois: Vec<Poi<T>>,
}

impl<T: Real> PoiSet<T> {
    /// At most one left-hand and one right-hand entry; hands must carry a
    /// world point.
    pub fn new(pois: Vec<Poi<T>>) -> Result<Self> {
        for kind in [PoiKind::HandLeft, PoiKind::HandRight] {
            let hands: Vec<_> = pois.iter().filter(|p| p.kind == kind).collect();
            if hands.len() > 1 {
                return Err(Error::InputShape(format!(
                    "duplicate {kind:?} entry in POI set"
                )));
            }
            if let Some(hand) = hands.first() {
                if hand.world.is_none() {
                    return Err(Error::InputShape(format!(
                        "{kind:?} POI needs a world point"
                    )));
                }
            }
        }
        Ok(Self { pois })
    }

    pub fn hand(&self, hand: Hand) -> Option<&Poi<T>> {
        let kind = match hand {
            Hand::Left => PoiKind::HandLeft,
            Hand::Right => PoiKind::HandRight,
        };
        self.pois.iter().find(|p| p.kind == kind)
    }

    pub fn statics(&self) -> impl Iterator<Item = &Poi<T>> {
        self.pois.iter().filter(|p| p.kind == PoiKind::Static)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Poi<T>> {
        self.pois.iter()
    }
}

/// Scaling maxima fitted on training data, frozen afterwards.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ScalingParams<T> {
    /// Max observed hand-to-sensor distance, meters.
    pub d_max: T,
    /// Max observed rate of change of the scaled distance, 1/s.
    pub d_dot_max: T,
    /// Max observed gaze angle, radians.
    pub alpha_max: T,
    /// Max observed rate of change of the scaled gaze angle, 1/s.
    pub alpha_dot_max: T,
}

impl<T: Real> ScalingParams<T> {
    pub fn new(d_max: T, d_dot_max: T, alpha_max: T, alpha_dot_max: T) -> Result<Self> {
        for (name, v) in [
            ("d_max", d_max),
            ("d_dot_max", d_dot_max),
            ("alpha_max", alpha_max),
            ("alpha_dot_max", alpha_dot_max),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::ScalingFit(format!(
                    "{name} must be strictly positive, got {}",
                    v.as_f64()
                )));
            }
        }
        Ok(Self {
            d_max,
            d_dot_max,
            alpha_max,
            alpha_dot_max,
        })
    }
}

/// The reduced feature vector; every component lies in `[0, 1]` and the
/// touch component is exactly 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub gamma_prime: T,
    pub d_prime: T,
    pub d_dot_prime: T,
    pub alpha_prime: T,
    pub alpha_dot_prime: T,
}

impl<T: Real> FeatureVector<T> {
    pub fn new(
        touched: bool,
        d_prime: T,
        d_dot_prime: T,
        alpha_prime: T,
        alpha_dot_prime: T,
    ) -> Self {
        Self {
            gamma_prime: if touched { T::one() } else { T::zero() },
            d_prime: clamp_unit(d_prime),
            d_dot_prime: clamp_unit(d_dot_prime),
            alpha_prime: clamp_unit(alpha_prime),
            alpha_dot_prime: clamp_unit(alpha_dot_prime),
        }
    }

    /// Component order matches the TS, HP, HS, GA, GS feature flags.
    pub fn as_array(&self) -> [T; 5] {
        [
            self.gamma_prime,
            self.d_prime,
            self.d_dot_prime,
            self.alpha_prime,
            self.alpha_dot_prime,
        ]
    }
}

/// Backward-difference state for one stream; one instance per interaction
/// stream, single writer.
#[derive(Debug, Clone, Default)]
pub struct FeatureStreamState<T: Real> {
    previous: Option<StreamSample<T>>,
}

#[derive(Debug, Clone, Copy)]
struct StreamSample<T> {
    timestamp: T,
    d_prime: T,
    alpha_prime: T,
}

impl<T: Real> FeatureStreamState<T> {
    pub fn new() -> Self {
        Self { previous: None }
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }

    /// Compute both speeds for the new sample and advance the state.
    /// The first sample of a stream yields zero speeds.
    pub fn advance(
        &mut self,
        timestamp: T,
        d_prime: T,
        alpha_prime: T,
        scaling: &ScalingParams<T>,
    ) -> Result<(T, T)> {
        let speeds = match &self.previous {
            None => (T::zero(), T::zero()),
            Some(prev) => {
                if timestamp <= prev.timestamp {
                    return Err(Error::StreamOrder(format!(
                        "timestamp {} does not increase past {}",
                        timestamp.as_f64(),
                        prev.timestamp.as_f64()
                    )));
                }
                let dt = timestamp - prev.timestamp;
                (
                    backward_difference(d_prime, prev.d_prime, dt, scaling.d_dot_max)?,
                    backward_difference(alpha_prime, prev.alpha_prime, dt, scaling.alpha_dot_max)?,
                )
            }
        };
        self.previous = Some(StreamSample {
            timestamp,
            d_prime,
            alpha_prime,
        });
        Ok(speeds)
    }
}

/// Single-step backward difference, normalized by `rate_max` and clamped
/// into `[0, 1]`.
pub fn backward_difference<T: Real>(current: T, previous: T, dt: T, rate_max: T) -> Result<T> {
    if dt <= T::zero() {
        return Err(Error::StreamOrder("non-positive time step".into()));
    }
    if rate_max <= T::zero() {
        return Err(Error::ScalingFit("rate_max must be positive".into()));
    }
    Ok(clamp_unit((current - previous).abs() / dt / rate_max))
}

/// Scaled, gated distance between one hand position and one sensor.
///
/// An inactive sensor reports exactly 1 regardless of geometry; an active
/// sensor reports the Euclidean distance over `d_max`, clamped to 1.
pub fn hand_distance<T: Real>(
    hand_position: &Point3<T>,
    sensor: SensorId,
    snapshot: &SensorSnapshot<T>,
    scaling: &ScalingParams<T>,
) -> Result<T> {
    if !snapshot.gamma(sensor)? {
        return Ok(T::one());
    }
    let sensor_position = snapshot.position(sensor)?;
    let raw = (hand_position - sensor_position).norm();
    Ok(clamp_unit(raw / scaling.d_max))
}

/// Gaze angles for the hands (closest-hand rule) and every static POI.
#[derive(Debug, Clone)]
pub struct GazeAngles<T: Real> {
    pub alpha_left: T,
    pub alpha_right: T,
    /// Scaled angle per static POI, in POI order.
    pub static_alphas: Vec<(String, T)>,
}

impl<T: Real> GazeAngles<T> {
    /// Minimum over all POIs; 1 when nothing was computable.
    pub fn minimum(&self) -> T {
        self.static_alphas
            .iter()
            .map(|(_, a)| *a)
            .fold(self.alpha_left.min(self.alpha_right), T::min)
    }
}

/// Which hands the closest-hand rule selects, given raw (unclamped)
/// hand-to-sensor distances. Ties on a sensor go to the left hand; the
/// right hand needs a sensor strictly closer to it.
pub fn selected_hands<T: Real>(
    snapshot: &SensorSnapshot<T>,
    left: Option<&Point3<T>>,
    right: Option<&Point3<T>>,
) -> (bool, bool) {
    if !snapshot.any_active() {
        return (false, false);
    }
    let mut select_left = false;
    let mut select_right = false;
    for id in snapshot.active_ids() {
        let p = match snapshot.position(id) {
            Ok(p) => p,
            Err(_) => continue,
        };
        // A missing wrist never competes: its distance is +infinity.
        let d_left = left.map(|h| (h - p).norm());
        let d_right = right.map(|h| (h - p).norm());
        match (d_left, d_right) {
            (Some(dl), Some(dr)) => {
                if dl <= dr {
                    select_left = true;
                } else {
                    select_right = true;
                }
            }
            (Some(_), None) => select_left = true,
            (None, Some(_)) => select_right = true,
            (None, None) => {}
        }
    }
    (select_left, select_right)
}

/// Compute the hand and static-POI gaze angles for one frame.
///
/// A hand angle is 1 unless the closest-hand rule selects that hand and
/// its image point is usable. Static POI angles are computed
/// unconditionally. A degenerate gaze (or none at all) saturates every
/// angle at 1.
pub fn assign_hands_and_gaze<T: Real>(
    snapshot: &SensorSnapshot<T>,
    gaze: Option<&GazeEstimate<T>>,
    pois: &PoiSet<T>,
    scaling: &ScalingParams<T>,
) -> GazeAngles<T> {
    let saturated = GazeAngles {
        alpha_left: T::one(),
        alpha_right: T::one(),
        static_alphas: pois.statics().map(|p| (p.name.clone(), T::one())).collect(),
    };
    let Some(gaze) = gaze else {
        return saturated;
    };

    let scaled_angle = |pixel: &Point2<T>| -> Option<T> {
        crate::perception::gaze_angle_to_point(gaze, pixel)
            .ok()
            .map(|a| clamp_unit(a / scaling.alpha_max))
    };

    let left_world = pois.hand(Hand::Left).and_then(|p| p.world);
    let right_world = pois.hand(Hand::Right).and_then(|p| p.world);
    let (select_left, select_right) =
        selected_hands(snapshot, left_world.as_ref(), right_world.as_ref());

    let hand_alpha = |selected: bool, hand: Hand| -> T {
        if !selected {
            return T::one();
        }
        pois.hand(hand)
            .and_then(|p| scaled_angle(&p.pixel))
            .unwrap_or_else(T::one)
    };

    GazeAngles {
        alpha_left: hand_alpha(select_left, Hand::Left),
        alpha_right: hand_alpha(select_right, Hand::Right),
        static_alphas: pois
            .statics()
            .map(|p| {
                (
                    p.name.clone(),
                    scaled_angle(&p.pixel).unwrap_or_else(T::one),
                )
            })
            .collect(),
    }
}

/// Everything the reduction needs from one frame, before speeds.
#[derive(Debug, Clone)]
pub struct FrameFeatures<T: Real> {
    pub touched: bool,
    /// Reduced scaled distance: min over hands and sensors, 1 by default.
    pub d_prime: T,
    /// Reduced scaled gaze angle: min over all POIs, 1 by default.
    pub alpha_prime: T,
    /// Raw (unscaled, unclamped) distances for every (hand, active sensor)
    /// pair; used for fitting `d_max`.
    pub raw_distances: Vec<T>,
    /// Raw gaze angles (radians) for every computed POI angle; used for
    /// fitting `alpha_max`.
    pub raw_angles: Vec<T>,
}

/// Compute the gated distance reduction and gaze angles for one frame.
/// Wrist observations enter through the hand entries of the POI set;
/// an absent entry means the wrist was not (reliably) observed.
pub fn frame_features<T: Real>(
    snapshot: &SensorSnapshot<T>,
    gaze: Option<&GazeEstimate<T>>,
    pois: &PoiSet<T>,
    scaling: &ScalingParams<T>,
) -> FrameFeatures<T> {
    let touched = snapshot.any_active();

    let mut d_prime = T::one();
    let mut raw_distances = Vec::new();
    for hand in [Hand::Left, Hand::Right] {
        let Some(world) = pois.hand(hand).and_then(|p| p.world) else {
            continue;
        };
        for id in snapshot.active_ids() {
            if let Ok(p) = snapshot.position(id) {
                let raw = (world - p).norm();
                raw_distances.push(raw);
                d_prime = d_prime.min(clamp_unit(raw / scaling.d_max));
            }
        }
    }

    let angles = assign_hands_and_gaze(snapshot, gaze, pois, scaling);
    let mut raw_angles = Vec::new();
    if let Some(gaze) = gaze {
        let left_world = pois.hand(Hand::Left).and_then(|p| p.world);
        let right_world = pois.hand(Hand::Right).and_then(|p| p.world);
        let (select_left, select_right) =
            selected_hands(snapshot, left_world.as_ref(), right_world.as_ref());
        for poi in pois.iter() {
            let computed = match poi.kind {
                PoiKind::Static => true,
                PoiKind::HandLeft => select_left,
                PoiKind::HandRight => select_right,
            };
            if computed {
                if let Ok(a) = crate::perception::gaze_angle_to_point(gaze, &poi.pixel) {
                    raw_angles.push(a);
                }
            }
        }
    }

    FrameFeatures {
        touched,
        d_prime,
        alpha_prime: angles.minimum(),
        raw_distances,
        raw_angles,
    }
}

/// Reduce one frame to the five-component vector, advancing the stream
/// state for the backward differences.
pub fn reduce<T: Real>(
    frame: &FrameFeatures<T>,
    timestamp: T,
    state: &mut FeatureStreamState<T>,
    scaling: &ScalingParams<T>,
) -> Result<FeatureVector<T>> {
    let (d_dot, alpha_dot) = state.advance(timestamp, frame.d_prime, frame.alpha_prime, scaling)?;
    Ok(FeatureVector::new(
        frame.touched,
        frame.d_prime,
        d_dot,
        frame.alpha_prime,
        alpha_dot,
    ))
}

/// Raw per-frame observations used to fit [`ScalingParams`].
#[derive(Debug, Clone)]
pub struct RawFrame<T: Real> {
    pub timestamp: T,
    pub touched: bool,
    pub raw_distances: Vec<T>,
    pub raw_angles: Vec<T>,
}

/// Fit scaling maxima from training frames.
///
/// Distance and angle maxima come straight from the raw observations. The
/// rate maxima are the largest single-step backward differences of the
/// scaled, reduced series, computed per stream (the outer `Vec` separates
/// streams so differences never cross a stream boundary).
pub fn fit_scaling<T: Real>(streams: &[Vec<RawFrame<T>>]) -> Result<ScalingParams<T>> {
    let mut d_max = T::zero();
    let mut alpha_max = T::zero();
    let mut any_active = false;
    for stream in streams {
        for frame in stream {
            any_active |= frame.touched;
            for &d in &frame.raw_distances {
                d_max = d_max.max(d);
            }
            for &a in &frame.raw_angles {
                alpha_max = alpha_max.max(a);
            }
        }
    }
    if !any_active {
        return Err(Error::ScalingFit(
            "training data has no frame with an active sensor".into(),
        ));
    }
    if !(d_max.is_finite() && d_max > T::zero()) {
        return Err(Error::ScalingFit(
            "no positive hand-to-sensor distance observed".into(),
        ));
    }
    if !(alpha_max.is_finite() && alpha_max > T::zero()) {
        return Err(Error::ScalingFit("no positive gaze angle observed".into()));
    }

    let mut d_dot_max = T::zero();
    let mut alpha_dot_max = T::zero();
    for stream in streams {
        let mut prev: Option<(T, T, T)> = None;
        for frame in stream {
            let d_scaled = frame
                .raw_distances
                .iter()
                .map(|&d| clamp_unit(d / d_max))
                .fold(T::one(), T::min);
            let d_scaled = if frame.touched { d_scaled } else { T::one() };
            let a_scaled = frame
                .raw_angles
                .iter()
                .map(|&a| clamp_unit(a / alpha_max))
                .fold(T::one(), T::min);
            if let Some((t_prev, d_prev, a_prev)) = prev {
                let dt = frame.timestamp - t_prev;
                if dt <= T::zero() {
                    return Err(Error::StreamOrder(
                        "training frame timestamps must strictly increase".into(),
                    ));
                }
                d_dot_max = d_dot_max.max((d_scaled - d_prev).abs() / dt);
                alpha_dot_max = alpha_dot_max.max((a_scaled - a_prev).abs() / dt);
            }
            prev = Some((frame.timestamp, d_scaled, a_scaled));
        }
    }
    if !(d_dot_max > T::zero() && alpha_dot_max > T::zero()) {
        return Err(Error::ScalingFit(
            "training data is constant; rate maxima are degenerate".into(),
        ));
    }
    ScalingParams::new(d_max, d_dot_max, alpha_max, alpha_dot_max)
}
