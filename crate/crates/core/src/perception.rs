//! Vision-side geometry: pinhole back-projection of 2D keypoints with
//! depth, skeleton plausibility validation, and 2D gaze-angle primitives.
//!
//! Gaze stays in the image plane: angles are measured between the gaze ray
//! and the pixel-space ray from the head centroid to a point of interest.

use std::collections::BTreeMap;

use nalgebra::{Point2, Point3, Unit, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Named skeleton keypoints tracked by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeypointName {
    Head,
    Neck,
    ShoulderLeft,
    ShoulderRight,
    ElbowLeft,
    ElbowRight,
    WristLeft,
    WristRight,
    HipLeft,
    HipRight,
}

impl KeypointName {
    pub const ALL: [KeypointName; 10] = [
        KeypointName::Head,
        KeypointName::Neck,
        KeypointName::ShoulderLeft,
        KeypointName::ShoulderRight,
        KeypointName::ElbowLeft,
        KeypointName::ElbowRight,
        KeypointName::WristLeft,
        KeypointName::WristRight,
        KeypointName::HipLeft,
        KeypointName::HipRight,
    ];
}

/// A 2D keypoint with detection confidence and (optionally) aligned depth.
///
/// A keypoint with confidence 0 is treated as absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint2D<T: Real> {
    pub u: T,
    pub v: T,
    pub confidence: T,
    pub depth: Option<T>,
}

impl<T: Real> Keypoint2D<T> {
    pub fn present(&self) -> bool {
        self.confidence > T::zero()
    }
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy)]
pub struct CameraIntrinsics<T: Real> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T) -> Result<Self> {
        if fx <= T::zero() || fy <= T::zero() {
            return Err(Error::Config("focal lengths must be positive".into()));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Project a 3D camera-frame point to pixel coordinates plus depth.
    /// Inverse of [`project_keypoint`]; used by the simulator and as the
    /// round-trip oracle in tests.
    pub fn project_to_pixel(&self, p: &Point3<T>) -> (Point2<T>, T) {
        let u = p.x / p.z * self.fx + self.cx;
        let v = p.y / p.z * self.fy + self.cy;
        (Point2::new(u, v), p.z)
    }
}

/// Pinhole back-projection of a keypoint into the camera frame.
///
/// Returns `None` when the keypoint is absent or carries no depth: a
/// missing measurement stays missing.
pub fn project_keypoint<T: Real>(
    kp: &Keypoint2D<T>,
    intrinsics: &CameraIntrinsics<T>,
) -> Option<Point3<T>> {
    if !kp.present() {
        return None;
    }
    let depth = kp.depth?;
    if depth <= T::zero() {
        return None;
    }
    Some(Point3::new(
        (kp.u - intrinsics.cx) * depth / intrinsics.fx,
        (kp.v - intrinsics.cy) * depth / intrinsics.fy,
        depth,
    ))
}

/// A skeleton observation: 2D keypoints plus their 3D projections.
#[derive(Debug, Clone, Default)]
pub struct Skeleton<T: Real> {
    pub keypoints: BTreeMap<KeypointName, Keypoint2D<T>>,
    pub keypoints3d: BTreeMap<KeypointName, Point3<T>>,
}

impl<T: Real> Skeleton<T> {
    pub fn new(keypoints: BTreeMap<KeypointName, Keypoint2D<T>>) -> Self {
        Self {
            keypoints,
            keypoints3d: BTreeMap::new(),
        }
    }

    /// Fill `keypoints3d` for every present keypoint that has depth.
    pub fn project(&mut self, intrinsics: &CameraIntrinsics<T>) {
        self.keypoints3d = self
            .keypoints
            .iter()
            .filter_map(|(name, kp)| project_keypoint(kp, intrinsics).map(|p| (*name, p)))
            .collect();
    }

    pub fn pixel(&self, name: KeypointName) -> Option<Point2<T>> {
        self.keypoints
            .get(&name)
            .filter(|kp| kp.present())
            .map(|kp| Point2::new(kp.u, kp.v))
    }

    pub fn point3d(&self, name: KeypointName) -> Option<Point3<T>> {
        self.keypoints3d.get(&name).copied()
    }
}

/// Limb segments whose lengths are checked during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LimbSegment {
    UpperArmLeft,
    UpperArmRight,
    ForearmLeft,
    ForearmRight,
    ShoulderWidth,
}

impl LimbSegment {
    pub fn endpoints(self) -> (KeypointName, KeypointName) {
        match self {
            LimbSegment::UpperArmLeft => (KeypointName::ShoulderLeft, KeypointName::ElbowLeft),
            LimbSegment::UpperArmRight => (KeypointName::ShoulderRight, KeypointName::ElbowRight),
            LimbSegment::ForearmLeft => (KeypointName::ElbowLeft, KeypointName::WristLeft),
            LimbSegment::ForearmRight => (KeypointName::ElbowRight, KeypointName::WristRight),
            LimbSegment::ShoulderWidth => (KeypointName::ShoulderLeft, KeypointName::ShoulderRight),
        }
    }
}

/// Per-segment nominal length ranges, in meters.
#[derive(Debug, Clone)]
pub struct LimbLengthBounds<T: Real> {
    bounds: BTreeMap<LimbSegment, (T, T)>,
    max_missing_fraction: T,
}

impl<T: Real> LimbLengthBounds<T> {
    pub fn new(entries: Vec<(LimbSegment, T, T)>, max_missing_fraction: T) -> Result<Self> {
        let mut bounds = BTreeMap::new();
        for (seg, lo, hi) in entries {
            if lo <= T::zero() || lo >= hi {
                return Err(Error::Config(format!(
                    "limb bounds for {seg:?} must satisfy 0 < min < max"
                )));
            }
            bounds.insert(seg, (lo, hi));
        }
        if max_missing_fraction < T::zero() || max_missing_fraction > T::one() {
            return Err(Error::Config(
                "max_missing_fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            bounds,
            max_missing_fraction,
        })
    }

    pub fn segments(&self) -> impl Iterator<Item = (&LimbSegment, &(T, T))> {
        self.bounds.iter()
    }
}

/// Outcome of skeleton validation. Rejection is a normal result, not an
/// error.
#[derive(Debug, Clone, PartialEq)]
pub enum SkeletonCheck {
    /// Plausible skeleton; keypoints absent in the observation are listed
    /// so downstream code can apply its missing-data policy.
    Accept {
        absent: Vec<KeypointName>,
    },
    Reject {
        reason: String,
    },
}

impl SkeletonCheck {
    pub fn is_accept(&self) -> bool {
        matches!(self, SkeletonCheck::Accept { .. })
    }
}

/// Check limb lengths of the 3D-projected skeleton against nominal ranges
/// and reject implausible detections (the "mini skeleton" failure mode).
///
/// A checked limb is only measurable when both endpoints have 3D
/// projections; a limb with a missing endpoint is skipped, but a frame
/// missing more than the configured fraction of keypoints is rejected
/// outright.
pub fn validate_skeleton<T: Real>(
    skeleton: &Skeleton<T>,
    bounds: &LimbLengthBounds<T>,
) -> SkeletonCheck {
    let absent: Vec<KeypointName> = KeypointName::ALL
        .iter()
        .filter(|name| skeleton.point3d(**name).is_none())
        .copied()
        .collect();
    let missing_fraction = T::of(absent.len() as f64) / T::of(KeypointName::ALL.len() as f64);
    if missing_fraction > bounds.max_missing_fraction {
        return SkeletonCheck::Reject {
            reason: format!(
                "{} of {} keypoints missing",
                absent.len(),
                KeypointName::ALL.len()
            ),
        };
    }

    for (segment, (lo, hi)) in bounds.segments() {
        let (a, b) = segment.endpoints();
        let (Some(pa), Some(pb)) = (skeleton.point3d(a), skeleton.point3d(b)) else {
            continue;
        };
        let length = (pa - pb).norm();
        if length < *lo || length > *hi {
            return SkeletonCheck::Reject {
                reason: format!(
                    "segment {segment:?} length {:.3} m outside [{:.3}, {:.3}]",
                    length.as_f64(),
                    lo.as_f64(),
                    hi.as_f64()
                ),
            };
        }
    }
    SkeletonCheck::Accept { absent }
}

/// A 2D gaze ray: origin at the head centroid, unit direction in pixels.
#[derive(Debug, Clone, Copy)]
pub struct GazeEstimate<T: Real> {
    pub origin: Point2<T>,
    pub direction: Unit<Vector2<T>>,
}

impl<T: Real> GazeEstimate<T> {
    /// Build a gaze ray, normalizing the direction. A near-zero direction
    /// is degenerate.
    pub fn new(origin: Point2<T>, direction: Vector2<T>) -> Result<Self> {
        let direction = Unit::try_new(direction, T::of(1e-12)).ok_or_else(|| {
            Error::DegenerateGeometry("gaze direction has (near-)zero length".into())
        })?;
        Ok(Self { origin, direction })
    }
}

/// Angle in `[0, pi]` between the gaze ray and the ray from the gaze
/// origin to `poi`, both in the image plane.
pub fn gaze_angle_to_point<T: Real>(gaze: &GazeEstimate<T>, poi: &Point2<T>) -> Result<T> {
    let to_poi = poi - gaze.origin;
    let norm = to_poi.norm();
    if norm <= T::of(1e-12) {
        return Err(Error::DegenerateGeometry(
            "POI coincides with the gaze origin".into(),
        ));
    }
    let cos = (gaze.direction.dot(&to_poi) / norm).clamp(-T::one(), T::one());
    Ok(cos.acos())
}
