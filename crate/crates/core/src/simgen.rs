//! Deterministic synthetic interaction scenarios.
//!
//! Each scenario animates a human actor (10-keypoint skeleton, overhead
//! camera view) interacting with the sensor-covered arm, and emits a
//! labeled trace: sensor bits under a zero-order-hold scan, noisy 2D
//! keypoints with depth, a gaze ray following a saccade-and-dwell process,
//! joint configuration, optional external torques.
//!
//! Scenario kinds:
//!
//! - manipulation: a wrist reaches a sensor along minimum-jerk segments,
//!   holds contact while the gaze dwells on the hand/tool, retracts.
//!   Touching, attentive frames are intentional.
//! - distracted: identical contact, but during scheduled windows the gaze
//!   departs to a point far from every POI while the hand keeps pushing;
//!   those frames are unintentional.
//! - collision: the actor's elbow bumps a sensor while both wrists stay
//!   away and the gaze wanders; unintentional throughout.
//! - idle: no contact at all.
//! - mixed: manipulation with a distraction window and a push, for replay
//!   demonstrations.
//!
//! Occlusion events reproduce the two overhead-camera artifacts: wrist
//! keypoints dropping out entirely (confidence 0), and the depth of a
//! tracked wrist jumping to an occluder surface closer to the camera.
//!
//! The ground-truth label rule: a frame is intentional iff some emitted
//! sensor bit is on, a true contact exists, the body part nearest an
//! active sensor is a wrist, and no distraction window covers the frame.
//! Emitted bits lag true contact by up to one scan period, so contact
//! onsets are unintentional until the scan catches up and stale bits after
//! release are unintentional tails.

use nalgebra::{Point2, Point3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{SystemConfig, SystemGeometry};
use crate::error::{Error, Result};
use crate::kinematics::{JointConfig, SensorId};
use crate::models::LabeledDataset;
use crate::perception::KeypointName;
use crate::scalar::Real;
use crate::traces::{
    GazeRecord, KeypointRecord, PoiRecord, TraceFile, TraceFrame, TraceHeader, TRACE_FORMAT_VERSION,
};

/// Contact distance between a body point and a sensor, meters.
const CONTACT_RADIUS: f64 = 0.05;
/// Tactile scan period per sensor group, seconds.
const SCAN_PERIOD: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Manipulation,
    Distracted,
    Collision,
    Idle,
    Mixed,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseLevels<T> {
    /// Keypoint pixel jitter, standard deviation in pixels.
    pub keypoint_px_sigma: T,
    /// Gaze direction jitter, standard deviation in radians.
    pub gaze_angle_sigma: T,
    /// Depth noise, standard deviation in meters.
    pub depth_sigma: T,
}

impl<T: Real> Default for NoiseLevels<T> {
    fn default() -> Self {
        Self {
            keypoint_px_sigma: T::of(2.5),
            gaze_angle_sigma: T::of(0.11),
            depth_sigma: T::of(0.012),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActorGeometry<T> {
    pub upper_arm: T,
    pub forearm: T,
    pub shoulder_width: T,
    /// Pelvis-center standing position in the world frame; `None` places
    /// the actor within reach of the chosen sensor.
    #[serde(skip_serializing_if = "Option::is_none", default = "Option::default")]
    pub stand: Option<[T; 3]>,
}

impl<T: Real> Default for ActorGeometry<T> {
    fn default() -> Self {
        Self {
            upper_arm: T::of(0.30),
            forearm: T::of(0.27),
            shoulder_width: T::of(0.40),
            stand: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EventKind<T> {
    /// Gaze departs to a far point; frames inside are unintentional.
    Distraction,
    /// Both wrist keypoints drop out (confidence 0, no depth).
    OcclusionDropout,
    /// The touching wrist's depth jumps toward the camera by `delta` m.
    OcclusionDepthJump { delta: T },
    /// External torque pushing the arm, ramped over `ramp` seconds.
    Push { torque: T, ramp: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledEvent<T> {
    pub start: T,
    pub end: T,
    #[serde(flatten)]
    pub event: EventKind<T>,
}

impl<T: Real> ScheduledEvent<T> {
    fn covers(&self, t: T) -> bool {
        t >= self.start && t < self.end
    }
}

/// Full description of one synthetic scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec<T> {
    pub kind: ScenarioKind,
    /// Trace length in seconds.
    pub duration: T,
    pub seed: u64,
    /// Camera frame rate in Hz.
    pub frame_rate: T,
    pub noise: NoiseLevels<T>,
    pub actor: ActorGeometry<T>,
    /// Explicit events; an empty list derives a seeded default schedule
    /// for the scenario kind.
    #[serde(default = "Vec::new")]
    pub schedule: Vec<ScheduledEvent<T>>,
    /// Fraction of contact time covered by wrist-dropout occlusions when
    /// the schedule lists none (manipulation/distracted/mixed).
    pub occlusion_rate: T,
    /// Fraction of contact time affected by depth-jump occlusions when
    /// the schedule lists none.
    pub depth_jump_rate: T,
}

impl<T: Real> ScenarioSpec<T> {
    pub fn new(kind: ScenarioKind, duration: f64, seed: u64) -> Self {
        Self {
            kind,
            duration: T::of(duration),
            seed,
            frame_rate: T::of(15.0),
            noise: NoiseLevels::default(),
            actor: ActorGeometry::default(),
            schedule: Vec::new(),
            occlusion_rate: T::zero(),
            depth_jump_rate: T::zero(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.duration <= T::zero() || self.frame_rate <= T::zero() {
            return Err(Error::Generation(
                "duration and frame rate must be positive".into(),
            ));
        }
        for sigma in [
            self.noise.keypoint_px_sigma,
            self.noise.gaze_angle_sigma,
            self.noise.depth_sigma,
        ] {
            if sigma < T::zero() {
                return Err(Error::Generation("noise sigmas must be >= 0".into()));
            }
        }
        for event in &self.schedule {
            if event.start < T::zero() || event.end > self.duration || event.start >= event.end {
                return Err(Error::Generation(format!(
                    "event window [{}, {}] outside the scenario duration",
                    event.start.as_f64(),
                    event.end.as_f64()
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real + Serialize + serde::de::DeserializeOwned> ScenarioSpec<T> {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad scenario spec: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Minimum-jerk blend, `s(0) = 0`, `s(1) = 1`, zero velocity and
/// acceleration at both ends.
fn min_jerk<T: Real>(tau: T) -> T {
    let tau = tau.clamp(T::zero(), T::one());
    let t3 = tau * tau * tau;
    t3 * (T::of(10.0) - T::of(15.0) * tau + T::of(6.0) * tau * tau)
}

/// Piecewise minimum-jerk path through time-stamped knots; constant
/// before the first and after the last.
struct MinJerkPath<T: Real> {
    knots: Vec<(T, Point3<T>)>,
}

impl<T: Real> MinJerkPath<T> {
    fn new(knots: Vec<(T, Point3<T>)>) -> Self {
        debug_assert!(knots.windows(2).all(|w| w[1].0 > w[0].0));
        Self { knots }
    }

    fn at(&self, t: T) -> Point3<T> {
        match self.knots.iter().position(|&(kt, _)| kt > t) {
            Some(0) => self.knots[0].1,
            None => self.knots.last().expect("non-empty path").1,
            Some(i) => {
                let (t0, a) = self.knots[i - 1];
                let (t1, b) = self.knots[i];
                let s = min_jerk((t - t0) / (t1 - t0));
                Point3::from(a.coords + (b.coords - a.coords) * s)
            }
        }
    }
}

/// Saccade-and-dwell gaze: piecewise-constant targets with short linear
/// transitions between them.
struct GazePlan<T: Real> {
    /// (switch time, new target); transitions last `saccade` seconds.
    targets: Vec<(T, Point2<T>)>,
    saccade: T,
}

impl<T: Real> GazePlan<T> {
    fn target_at(&self, t: T) -> Point2<T> {
        let mut current = self.targets[0].1;
        for &(switch, target) in &self.targets {
            if t < switch {
                break;
            }
            let progress = ((t - switch) / self.saccade).clamp(T::zero(), T::one());
            current = Point2::from(current.coords + (target.coords - current.coords) * progress);
        }
        current
    }
}

/// True (noise-free) actor state for one frame.
struct BodyPose<T: Real> {
    points: Vec<(KeypointName, Point3<T>)>,
    wrist_left: Point3<T>,
    wrist_right: Point3<T>,
    elbow_right: Point3<T>,
}

/// Place an elbow for a 2-link arm: exact upper-arm and forearm lengths,
/// elbow pushed toward `hint` (usually downward, away from the camera).
fn solve_elbow<T: Real>(
    shoulder: &Point3<T>,
    wrist: &Point3<T>,
    upper: T,
    fore: T,
    hint: &Vector3<T>,
) -> Point3<T> {
    let axis = wrist - shoulder;
    let reach = axis.norm();
    let reach = reach.max(T::of(1e-6));
    let u = axis / reach;
    // Law of cosines along the shoulder-wrist axis.
    let along =
        ((reach * reach + upper * upper - fore * fore) / (T::of(2.0) * reach)).clamp(-upper, upper);
    let out = (upper * upper - along * along).max(T::zero()).sqrt();
    let perp = hint - u * hint.dot(&u);
    let perp_norm = perp.norm();
    let perp = if perp_norm > T::of(1e-9) {
        perp / perp_norm
    } else {
        // Hint collinear with the arm axis: any orthogonal works.
        let alt = Vector3::new(u.z, T::zero(), -u.x);
        let alt_norm = alt.norm().max(T::of(1e-9));
        alt / alt_norm
    };
    Point3::from(shoulder.coords + u * along + perp * out)
}

/// Rig the whole body around a shoulder-midpoint and facing direction.
#[derive(Clone)]
struct BodyRig<T: Real> {
    shoulder_mid: Point3<T>,
    /// Unit horizontal facing direction (toward the workspace).
    facing: Vector2<T>,
    upper_arm: T,
    forearm: T,
    shoulder_width: T,
}

impl<T: Real> BodyRig<T> {
    fn lateral(&self) -> Vector2<T> {
        // Right-hand side of the actor when facing along `facing`.
        Vector2::new(-self.facing.y, self.facing.x)
    }

    fn shoulder(&self, side: T) -> Point3<T> {
        let lat = self.lateral() * (self.shoulder_width * T::of(0.5) * side);
        Point3::new(
            self.shoulder_mid.x + lat.x,
            self.shoulder_mid.y + lat.y,
            self.shoulder_mid.z,
        )
    }

    /// Wrist resting position beside the hip.
    fn rest_wrist(&self, side: T) -> Point3<T> {
        let lat = self.lateral() * (self.shoulder_width * T::of(0.55) * side);
        Point3::new(
            self.shoulder_mid.x + lat.x - self.facing.x * T::of(0.02),
            self.shoulder_mid.y + lat.y - self.facing.y * T::of(0.02),
            self.shoulder_mid.z + T::of(0.38),
        )
    }

    fn pose(&self, wrist_left: Point3<T>, wrist_right: Point3<T>) -> BodyPose<T> {
        let down = Vector3::new(T::zero(), T::zero(), T::one());
        let shoulder_l = self.shoulder(-T::one());
        let shoulder_r = self.shoulder(T::one());
        let hint_l = down - Vector3::new(self.lateral().x, self.lateral().y, T::zero());
        let hint_r = down + Vector3::new(self.lateral().x, self.lateral().y, T::zero());
        let elbow_l = solve_elbow(
            &shoulder_l,
            &wrist_left,
            self.upper_arm,
            self.forearm,
            &hint_l,
        );
        let elbow_r = solve_elbow(
            &shoulder_r,
            &wrist_right,
            self.upper_arm,
            self.forearm,
            &hint_r,
        );

        let neck = Point3::new(
            self.shoulder_mid.x,
            self.shoulder_mid.y,
            self.shoulder_mid.z - T::of(0.05),
        );
        let head = Point3::new(
            neck.x + self.facing.x * T::of(0.06),
            neck.y + self.facing.y * T::of(0.06),
            neck.z - T::of(0.14),
        );
        let hip_l = {
            let lat = self.lateral() * (self.shoulder_width * T::of(0.30));
            Point3::new(
                self.shoulder_mid.x - lat.x,
                self.shoulder_mid.y - lat.y,
                self.shoulder_mid.z + T::of(0.32),
            )
        };
        let hip_r = {
            let lat = self.lateral() * (self.shoulder_width * T::of(0.30));
            Point3::new(
                self.shoulder_mid.x + lat.x,
                self.shoulder_mid.y + lat.y,
                self.shoulder_mid.z + T::of(0.32),
            )
        };

        BodyPose {
            points: vec![
                (KeypointName::Head, head),
                (KeypointName::Neck, neck),
                (KeypointName::ShoulderLeft, shoulder_l),
                (KeypointName::ShoulderRight, shoulder_r),
                (KeypointName::ElbowLeft, elbow_l),
                (KeypointName::ElbowRight, elbow_r),
                (KeypointName::WristLeft, wrist_left),
                (KeypointName::WristRight, wrist_right),
                (KeypointName::HipLeft, hip_l),
                (KeypointName::HipRight, hip_r),
            ],
            wrist_left,
            wrist_right,
            elbow_right: elbow_r,
        }
    }
}

/// Which body part makes true contact this frame, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ContactPart {
    Wrist,
    Other,
}

struct ScenarioPlan<T: Real> {
    rig: BodyRig<T>,
    /// Path of the actively animated point.
    active_path: MinJerkPath<T>,
    /// The animated point is the right wrist unless this is a collision,
    /// where the rig itself translates so the elbow lands on the sensor.
    collision: bool,
    gaze: GazePlan<T>,
    distractions: Vec<(T, T)>,
    dropouts: Vec<(T, T)>,
    depth_jumps: Vec<(T, T, T)>,
    pushes: Vec<ScheduledEvent<T>>,
}

fn pick<T: Real>(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> T {
    T::of(rng.gen_range(lo..hi))
}

/// Choose a target sensor the actor can plausibly reach: prefer sensors
/// in the upper half of the arm's extent (closer to the camera).
fn choose_target_sensor<T: Real>(
    sensors: &std::collections::BTreeMap<SensorId, Point3<T>>,
    rng: &mut ChaCha8Rng,
) -> (SensorId, Point3<T>) {
    let mut candidates: Vec<(SensorId, Point3<T>)> =
        sensors.iter().map(|(id, p)| (*id, *p)).collect();
    candidates.sort_by(|a, b| {
        a.1.z
            .partial_cmp(&b.1.z)
            .expect("finite")
            .then(a.0.cmp(&b.0))
    });
    let upper = &candidates[..candidates.len() / 2];
    upper[rng.gen_range(0..upper.len())]
}

fn default_joint_config<T: Real>(
    geometry: &SystemGeometry<T>,
    rng: &mut ChaCha8Rng,
) -> JointConfig<T> {
    let nominal = [0.3, 0.45, 0.0, 0.7, 0.0, 0.35, 0.0];
    let angles = geometry
        .chain
        .links()
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let base = T::of(nominal.get(i).copied().unwrap_or(0.0));
            let jitter: T = pick(rng, -0.15, 0.15);
            (base + jitter).clamp(link.limits.0, link.limits.1)
        })
        .collect();
    JointConfig::new(angles)
}

/// Gaze target far away from every static POI: opposite the POI centroid
/// as seen from the head pixel, with a seeded wobble.
fn far_gaze_target<T: Real>(
    head_px: Point2<T>,
    static_pois: &[(String, Point2<T>)],
    rng: &mut ChaCha8Rng,
) -> Point2<T> {
    let mut centroid = Vector2::new(T::zero(), T::zero());
    for (_, p) in static_pois {
        let d = p - head_px;
        let n = d.norm().max(T::of(1e-9));
        centroid += d / n;
    }
    let n = centroid.norm();
    let away = if n > T::of(1e-9) {
        -centroid / n
    } else {
        Vector2::new(-T::one(), T::zero())
    };
    let wobble: T = pick(rng, -0.25, 0.25);
    let (sin, cos) = wobble.sin_cos();
    let rotated = Vector2::new(away.x * cos - away.y * sin, away.x * sin + away.y * cos);
    head_px + rotated * T::of(420.0)
}

/// Split `total` seconds of coverage into 1-3 windows inside `[lo, hi]`.
fn scatter_windows<T: Real>(lo: T, hi: T, total: T, rng: &mut ChaCha8Rng) -> Vec<(T, T)> {
    let span = hi - lo;
    if total <= T::zero() || span <= total {
        if span > T::zero() && total > T::zero() {
            return vec![(lo, hi)];
        }
        return Vec::new();
    }
    let pieces = rng.gen_range(1..=3usize);
    let piece_len = total / T::of(pieces as f64);
    let mut windows = Vec::new();
    let slot = span / T::of(pieces as f64);
    for i in 0..pieces {
        let slot_lo = lo + slot * T::of(i as f64);
        let latest = slot - piece_len;
        if latest <= T::zero() {
            continue;
        }
        let offset: T = pick(rng, 0.0, latest.as_f64());
        windows.push((slot_lo + offset, slot_lo + offset + piece_len));
    }
    windows
}

struct PlanContext<'a, T: Real> {
    geometry: &'a SystemGeometry<T>,
    sensors: std::collections::BTreeMap<SensorId, Point3<T>>,
    tool_px: Point2<T>,
}

fn build_plan<T: Real>(
    spec: &ScenarioSpec<T>,
    ctx: &PlanContext<'_, T>,
    rng: &mut ChaCha8Rng,
) -> Result<ScenarioPlan<T>> {
    let duration = spec.duration;
    let (target_sensor, target) = choose_target_sensor(&ctx.sensors, rng);

    // Stand so the right shoulder can reach the target comfortably.
    let reach = spec.actor.upper_arm + spec.actor.forearm;
    let stand_from_target = |rng: &mut ChaCha8Rng| -> Point3<T> {
        let angle: T = pick(rng, -0.5, 0.5);
        let (sin, cos) = angle.sin_cos();
        let dir = Vector2::new(
            T::one() * cos - T::zero() * sin,
            T::one() * sin + T::zero() * cos,
        );
        let distance = reach * T::of(0.5);
        Point3::new(
            target.x + dir.x * distance,
            target.y + dir.y * distance,
            target.z - T::of(0.28),
        )
    };
    let shoulder_mid = match spec.actor.stand {
        Some([x, y, z]) => Point3::new(x, y, z - T::of(0.32)),
        None => stand_from_target(rng),
    };
    let to_target = Vector2::new(target.x - shoulder_mid.x, target.y - shoulder_mid.y);
    let facing_norm = to_target.norm().max(T::of(1e-9));
    let rig = BodyRig {
        shoulder_mid,
        facing: to_target / facing_norm,
        upper_arm: spec.actor.upper_arm,
        forearm: spec.actor.forearm,
        shoulder_width: spec.actor.shoulder_width,
    };

    // Reachability: for hand contact the shoulder must reach the target
    // with a margin. A colliding or idle actor only needs to stand there.
    let shoulder_r = rig.shoulder(T::one());
    let needed = (target - shoulder_r).norm();
    let wrist_contact = matches!(
        spec.kind,
        ScenarioKind::Manipulation | ScenarioKind::Distracted | ScenarioKind::Mixed
    );
    if wrist_contact && needed > reach - T::of(0.02) {
        return Err(Error::Generation(format!(
            "target sensor {} is {:.2} m from the shoulder, reach is {:.2} m",
            target_sensor,
            needed.as_f64(),
            reach.as_f64()
        )));
    }

    let rest = rig.rest_wrist(T::one());
    let head_guess = Point3::new(shoulder_mid.x, shoulder_mid.y, shoulder_mid.z - T::of(0.19));
    let (head_px, _) = ctx.geometry.intrinsics.project_to_pixel(&head_guess);

    // Contact plan: reach in, hold, retract. Collisions are brief bumps;
    // manipulation holds span the middle of the trace.
    let reach_time: T = pick(rng, 0.6, 0.9);
    let collision = matches!(spec.kind, ScenarioKind::Collision);
    let (hold_start, hold_end) = if collision {
        let len = pick::<T>(rng, 1.2, 2.2).min(duration * T::of(0.5));
        let start = duration * pick::<T>(rng, 0.30, 0.45);
        (start, (start + len).min(duration * T::of(0.9)))
    } else {
        (
            duration * pick::<T>(rng, 0.30, 0.38),
            duration * pick::<T>(rng, 0.72, 0.80),
        )
    };
    let reach_start = (hold_start - reach_time).max(T::of(0.05));

    let active_path = match spec.kind {
        ScenarioKind::Idle => {
            // Wander near the body without reaching anything.
            let mut knots = vec![(T::zero(), rest)];
            let mut t = T::of(1.0);
            while t < duration {
                let wander = Point3::new(
                    rest.x + pick::<T>(rng, -0.12, 0.12),
                    rest.y + pick::<T>(rng, -0.12, 0.12),
                    rest.z + pick::<T>(rng, -0.10, 0.05),
                );
                knots.push((t, wander));
                t += pick::<T>(rng, 1.0, 2.2);
            }
            MinJerkPath::new(knots)
        }
        ScenarioKind::Collision => {
            // The rig translates as a whole; move the shoulder midpoint by
            // exactly the offset that puts the resting right elbow on the
            // target sensor.
            let rest_pose = rig.pose(rig.rest_wrist(-T::one()), rig.rest_wrist(T::one()));
            let bumped = Point3::from(shoulder_mid.coords + (target - rest_pose.elbow_right));
            MinJerkPath::new(vec![
                (T::zero(), shoulder_mid),
                (reach_start, shoulder_mid),
                (hold_start, bumped),
                (hold_end, bumped),
                (hold_end + reach_time, shoulder_mid),
            ])
        }
        _ => MinJerkPath::new(vec![
            (T::zero(), rest),
            (reach_start, rest),
            (hold_start, target),
            (hold_end, target),
            (hold_end + reach_time, rest),
        ]),
    };

    // Distraction windows.
    let mut distractions: Vec<(T, T)> = spec
        .schedule
        .iter()
        .filter(|e| matches!(e.event, EventKind::Distraction))
        .map(|e| (e.start, e.end))
        .collect();
    if distractions.is_empty()
        && matches!(spec.kind, ScenarioKind::Distracted | ScenarioKind::Mixed)
    {
        // The distraction sits inside the contact hold, so the hand keeps
        // pushing while the gaze leaves.
        let hold_len = hold_end - hold_start;
        let len = hold_len * pick::<T>(rng, 0.42, 0.55);
        let start = hold_start + (hold_len - len) * pick::<T>(rng, 0.4, 0.7);
        distractions.push((start, start + len));
    }

    // Occlusion windows stay clear of distraction windows: they cover
    // attentive contact, where the actor leans over the arm.
    let mut dropouts: Vec<(T, T)> = spec
        .schedule
        .iter()
        .filter(|e| matches!(e.event, EventKind::OcclusionDropout))
        .map(|e| (e.start, e.end))
        .collect();
    let mut depth_jumps: Vec<(T, T, T)> = spec
        .schedule
        .iter()
        .filter_map(|e| match e.event {
            EventKind::OcclusionDepthJump { delta } => Some((e.start, e.end, delta)),
            _ => None,
        })
        .collect();
    if !collision && !matches!(spec.kind, ScenarioKind::Idle) {
        let attentive_end = distractions
            .first()
            .map(|&(s, _)| s - T::of(0.2))
            .unwrap_or(hold_end);
        if dropouts.is_empty() && spec.occlusion_rate > T::zero() {
            let total = (attentive_end - hold_start) * spec.occlusion_rate;
            dropouts = scatter_windows(hold_start + T::of(0.3), attentive_end, total, rng);
        }
        if depth_jumps.is_empty() && spec.depth_jump_rate > T::zero() {
            let total = (attentive_end - hold_start) * spec.depth_jump_rate;
            let delta: T = pick(rng, 0.5, 0.7);
            depth_jumps = scatter_windows(hold_start + T::of(0.3), attentive_end, total, rng)
                .into_iter()
                .filter(|w| !dropouts.iter().any(|d| w.0 < d.1 && d.0 < w.1))
                .map(|(s, e)| (s, e, delta))
                .collect();
        }
    }

    // Pushes: explicit schedule, else defaults per kind.
    let mut pushes: Vec<ScheduledEvent<T>> = spec
        .schedule
        .iter()
        .filter(|e| matches!(e.event, EventKind::Push { .. }))
        .copied()
        .collect();
    if pushes.is_empty() {
        match spec.kind {
            ScenarioKind::Distracted | ScenarioKind::Mixed => {
                // Gentle guiding force while touching, stronger lean while
                // distracted.
                pushes.push(ScheduledEvent {
                    start: hold_start,
                    end: hold_end,
                    event: EventKind::Push {
                        torque: T::of(0.8),
                        ramp: T::of(1.0),
                    },
                });
                if let Some(&(s, e)) = distractions.first() {
                    pushes.push(ScheduledEvent {
                        start: s,
                        end: e,
                        event: EventKind::Push {
                            torque: T::of(2.5),
                            ramp: T::of(1.6),
                        },
                    });
                }
            }
            ScenarioKind::Collision => {
                pushes.push(ScheduledEvent {
                    start: hold_start,
                    end: hold_end,
                    event: EventKind::Push {
                        torque: T::of(4.0),
                        ramp: T::of(1.0),
                    },
                });
            }
            ScenarioKind::Manipulation => {
                pushes.push(ScheduledEvent {
                    start: hold_start,
                    end: hold_end,
                    event: EventKind::Push {
                        torque: T::of(0.8),
                        ramp: T::of(1.0),
                    },
                });
            }
            ScenarioKind::Idle => {}
        }
    }

    // Gaze plan: dwell on the hand/tool/part while working, glance at the
    // monitor occasionally, look far away while distracted or colliding.
    let mut targets: Vec<(T, Point2<T>)> = Vec::new();
    let statics = &ctx.geometry.static_pois;
    let monitor = statics
        .iter()
        .find(|(n, _)| n == "monitor")
        .map(|(_, p)| *p)
        .unwrap_or(ctx.tool_px);
    let part = statics
        .iter()
        .find(|(n, _)| n == "part")
        .map(|(_, p)| *p)
        .unwrap_or(ctx.tool_px);
    let mut t = T::zero();
    let hand_target_px = {
        let (px, _) = ctx.geometry.intrinsics.project_to_pixel(&target);
        px
    };
    targets.push((T::zero(), monitor));
    while t < duration {
        let in_distraction = distractions.iter().any(|&(s, e)| t >= s && t < e);
        let next = if matches!(spec.kind, ScenarioKind::Collision) || in_distraction {
            far_gaze_target(head_px, statics, rng)
        } else if matches!(spec.kind, ScenarioKind::Idle) {
            match rng.gen_range(0..4) {
                0 => monitor,
                1 => part,
                2 => far_gaze_target(head_px, statics, rng),
                _ => ctx.tool_px,
            }
        } else if t < hold_start {
            // Approach: look where the hand is going, or at the monitor.
            if rng.gen_bool(0.7) {
                hand_target_px
            } else {
                monitor
            }
        } else {
            match rng.gen_range(0..10) {
                0 => monitor,
                1..=3 => ctx.tool_px,
                4..=5 => part,
                _ => hand_target_px,
            }
        };
        targets.push((t, next));
        let dwell: T = pick(rng, 0.5, 2.0);
        t += dwell;
        // Force a re-draw right at distraction boundaries.
        for &(s, e) in &distractions {
            if t > s && t - dwell < s {
                t = s;
            } else if t > e && t - dwell < e {
                t = e;
            }
        }
    }
    let gaze = GazePlan {
        targets,
        saccade: T::of(0.12),
    };

    Ok(ScenarioPlan {
        rig,
        active_path,
        collision,
        gaze,
        distractions,
        dropouts,
        depth_jumps,
        pushes,
    })
}

/// Generate one labeled trace. Deterministic for a given `(spec, config)`.
pub fn generate<T: Real>(spec: &ScenarioSpec<T>, config: &SystemConfig<T>) -> Result<TraceFile<T>> {
    spec.validate()?;
    let geometry = config.geometry()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let q = default_joint_config(&geometry, &mut rng);
    let sensors = geometry.sensor_positions(&q)?;
    let ee = geometry.end_effector(&q)?;
    let (tool_px, _) = geometry.intrinsics.project_to_pixel(&ee);
    let ctx = PlanContext {
        geometry: &geometry,
        sensors: sensors.clone(),
        tool_px,
    };
    let plan = build_plan(spec, &ctx, &mut rng)?;

    let dt = T::one() / spec.frame_rate;
    let n_frames = (spec.duration.as_f64() * spec.frame_rate.as_f64()).floor() as usize;
    let dof = geometry.chain.dof();

    // Zero-order-hold scan state: two groups, staggered by half a period.
    let group_of =
        |id: SensorId| -> usize { usize::from(geometry.layout.sensors()[id.0 as usize].link >= 4) };
    let mut held_bits = vec![false; geometry.layout.len()];
    let mut next_scan = [T::zero(), T::of(SCAN_PERIOD / 2.0)];

    let px_sigma = spec.noise.keypoint_px_sigma.as_f64();
    let gaze_sigma = spec.noise.gaze_angle_sigma.as_f64();
    let depth_sigma = spec.noise.depth_sigma.as_f64();
    let px_noise = Normal::new(0.0, px_sigma.max(1e-12)).expect("valid sigma");
    let gaze_noise = Normal::new(0.0, gaze_sigma.max(1e-12)).expect("valid sigma");
    let depth_noise = Normal::new(0.0, depth_sigma.max(1e-12)).expect("valid sigma");

    let mut frames = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let t = dt * T::of(i as f64);

        // True body pose.
        let tremor = |rng: &mut ChaCha8Rng| -> Vector3<T> {
            Vector3::new(
                pick(rng, -0.006, 0.006),
                pick(rng, -0.006, 0.006),
                pick(rng, -0.006, 0.006),
            )
        };
        let pose = if plan.collision {
            let mid = plan.active_path.at(t);
            let rig = BodyRig {
                shoulder_mid: mid,
                ..plan.rig.clone()
            };
            let wl = rig.rest_wrist(-T::one());
            let wr = Point3::from(rig.rest_wrist(T::one()).coords + tremor(&mut rng));
            rig.pose(wl, wr)
        } else {
            let wr = Point3::from(plan.active_path.at(t).coords + tremor(&mut rng));
            let wl = Point3::from(plan.rig.rest_wrist(-T::one()).coords + tremor(&mut rng));
            plan.rig.pose(wl, wr)
        };

        // True contacts: nearest body part per active sensor.
        let contact_radius = T::of(CONTACT_RADIUS);
        let mut true_contact: Vec<bool> = vec![false; geometry.layout.len()];
        let mut contact_part: Option<ContactPart> = None;
        for (id, spos) in &sensors {
            let d_wrist = (pose.wrist_right - spos)
                .norm()
                .min((pose.wrist_left - spos).norm());
            let d_elbow = (pose.elbow_right - spos).norm();
            if d_wrist <= contact_radius || d_elbow <= contact_radius {
                true_contact[id.0 as usize] = true;
                let part = if d_wrist <= d_elbow {
                    ContactPart::Wrist
                } else {
                    ContactPart::Other
                };
                // The part nearest to any active sensor decides the label;
                // scenarios do not mix contact kinds within one frame.
                contact_part = Some(match contact_part {
                    Some(ContactPart::Wrist) | None if part == ContactPart::Wrist => {
                        ContactPart::Wrist
                    }
                    Some(existing) => existing,
                    None => part,
                });
            }
        }

        // Scan update per group.
        for (g, scan_at) in next_scan.iter_mut().enumerate() {
            if t >= *scan_at {
                for (idx, held) in held_bits.iter_mut().enumerate() {
                    if group_of(SensorId(idx as u32)) == g {
                        *held = true_contact[idx];
                    }
                }
                *scan_at += T::of(SCAN_PERIOD);
            }
        }
        let emitted_any = held_bits.iter().any(|&b| b);

        // Ground-truth label.
        let attentive = !plan.distractions.iter().any(|&(s, e)| t >= s && t < e);
        let label = emitted_any
            && true_contact.iter().any(|&c| c)
            && contact_part == Some(ContactPart::Wrist)
            && attentive;

        // Occlusions active this frame.
        let dropped = plan.dropouts.iter().any(|&(s, e)| t >= s && t < e);
        let depth_jump = plan
            .depth_jumps
            .iter()
            .find(|&&(s, e, _)| t >= s && t < e)
            .map(|&(_, _, delta)| delta);

        // Emit keypoints: exact projection plus observation noise.
        let mut keypoints = std::collections::BTreeMap::new();
        for (name, point) in &pose.points {
            let (px, depth) = geometry.intrinsics.project_to_pixel(point);
            let is_wrist = matches!(name, KeypointName::WristLeft | KeypointName::WristRight);
            if dropped && is_wrist {
                keypoints.insert(
                    *name,
                    KeypointRecord {
                        u: px.x,
                        v: px.y,
                        c: T::zero(),
                        d: None,
                    },
                );
                continue;
            }
            let mut depth = depth + T::of(depth_noise.sample(&mut rng));
            if *name == KeypointName::WristRight {
                if let Some(delta) = depth_jump {
                    depth = (depth - delta).max(T::of(0.15));
                }
            }
            keypoints.insert(
                *name,
                KeypointRecord {
                    u: px.x + T::of(px_noise.sample(&mut rng)),
                    v: px.y + T::of(px_noise.sample(&mut rng)),
                    c: T::of(rng.gen_range(0.82..1.0)),
                    d: Some(depth.max(T::of(0.1))),
                },
            );
        }

        // Gaze ray from the noisy head pixel toward the planned target.
        let head_record = keypoints[&KeypointName::Head];
        let origin = Point2::new(head_record.u, head_record.v);
        let target_px = plan.gaze.target_at(t);
        let to_target = target_px - origin;
        let norm = to_target.norm().max(T::of(1e-9));
        let dir = to_target / norm;
        let jitter = T::of(gaze_noise.sample(&mut rng));
        let (sin, cos) = jitter.sin_cos();
        let dir = Vector2::new(dir.x * cos - dir.y * sin, dir.x * sin + dir.y * cos);

        // External torque: quadratic-ramped pushes on the proximal joints.
        let mut tau = vec![T::zero(); dof];
        let mut any_push = false;
        for push in &plan.pushes {
            if !push.covers(t) {
                continue;
            }
            if let EventKind::Push { torque, ramp } = push.event {
                let ramp_progress = ((t - push.start) / ramp).clamp(T::zero(), T::one());
                let level = torque * ramp_progress * ramp_progress;
                let pattern = [0.0, 0.6, 1.0, 0.5, 0.2, 0.0, 0.0];
                for (j, tau_j) in tau.iter_mut().enumerate() {
                    *tau_j += level * T::of(pattern.get(j).copied().unwrap_or(0.0));
                }
                any_push = true;
            }
        }

        frames.push(TraceFrame {
            t,
            sensors: held_bits.clone(),
            keypoints,
            gaze: Some(GazeRecord {
                origin: [origin.x, origin.y],
                direction: [dir.x, dir.y],
            }),
            q: q.angles.clone(),
            label: Some(label),
            tau_ext: any_push.then_some(tau),
        });
    }

    Ok(TraceFile {
        header: TraceHeader {
            format_version: TRACE_FORMAT_VERSION,
            chain_id: config.id.clone(),
            layout_id: config.id.clone(),
            camera_id: config.id.clone(),
            pois: config
                .pois
                .iter()
                .map(|p| PoiRecord {
                    name: p.name.clone(),
                    pixel: p.pixel,
                })
                .collect(),
            frame_rate_hint: spec.frame_rate,
            scenario: Some(format!("{:?}", spec.kind).to_lowercase()),
            seed: Some(spec.seed),
        },
        frames,
    })
}

/// The default training mix: manipulation traces (some heavily occluded),
/// distracted traces, collisions, and idle filler, sized for roughly
/// `target_frames` at 15 Hz and a positive fraction near 0.27.
pub fn default_corpus_specs<T: Real>(base_seed: u64, target_frames: usize) -> Vec<ScenarioSpec<T>> {
    // 20 traces x 10 s x 15 Hz = 3000 frames at the default target.
    let unit = (target_frames as f64 / 20.0 / 15.0).max(4.0);
    let mut specs = Vec::new();
    let mut seed = base_seed.wrapping_mul(1_000_003);
    let mut push = |kind, duration, occl: f64, jump: f64| {
        seed = seed.wrapping_add(0x9E37_79B9);
        let mut spec = ScenarioSpec::<T>::new(kind, duration, seed);
        spec.occlusion_rate = T::of(occl);
        spec.depth_jump_rate = T::of(jump);
        specs.push(spec);
    };
    // Nine manipulation traces; six carry substantial wrist dropouts and
    // one mixes in depth jumps.
    push(ScenarioKind::Manipulation, unit, 0.0, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.0, 0.08);
    push(ScenarioKind::Manipulation, unit, 0.0, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.55, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.5, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.55, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.5, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.45, 0.0);
    push(ScenarioKind::Manipulation, unit, 0.5, 0.0);
    // Five distracted traces with moderate occlusion outside the
    // distraction window.
    push(ScenarioKind::Distracted, unit, 0.3, 0.0);
    push(ScenarioKind::Distracted, unit, 0.25, 0.0);
    push(ScenarioKind::Distracted, unit, 0.3, 0.0);
    push(ScenarioKind::Distracted, unit, 0.0, 0.0);
    push(ScenarioKind::Distracted, unit, 0.25, 0.0);
    // Three collisions, three idle.
    push(ScenarioKind::Collision, unit, 0.0, 0.0);
    push(ScenarioKind::Collision, unit, 0.0, 0.0);
    push(ScenarioKind::Collision, unit, 0.0, 0.0);
    push(ScenarioKind::Idle, unit, 0.0, 0.0);
    push(ScenarioKind::Idle, unit, 0.0, 0.0);
    push(ScenarioKind::Idle, unit, 0.0, 0.0);
    specs
}

/// Everything `build_corpus` produces.
pub struct Corpus<T: Real> {
    pub traces: Vec<TraceFile<T>>,
    pub dataset: LabeledDataset<T>,
    pub scaling: crate::features::ScalingParams<T>,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub traces: usize,
    pub frames: usize,
    pub positives: usize,
    pub positive_fraction: f64,
}

/// Generate every spec, fit scaling over the whole corpus, and assemble
/// the labeled dataset.
pub fn build_corpus<T: Real>(
    specs: &[ScenarioSpec<T>],
    config: &SystemConfig<T>,
) -> Result<Corpus<T>> {
    let kinds: std::collections::BTreeSet<_> =
        specs.iter().map(|s| format!("{:?}", s.kind)).collect();
    if kinds.len() < 2 {
        return Err(Error::Corpus(
            "corpus specs must cover at least two scenario kinds".into(),
        ));
    }
    let geometry = config.geometry()?;
    let traces: Vec<TraceFile<T>> = specs
        .iter()
        .map(|spec| generate(spec, config))
        .collect::<Result<_>>()?;

    let scaling = crate::traces::fit_scaling_over_traces(&traces, &geometry)?;
    let dataset = crate::traces::assemble_dataset(&traces, &geometry, &config.id, &scaling)?;
    if !dataset.has_both_classes() {
        return Err(Error::Corpus(
            "corpus contains a single class; adjust the scenario mix".into(),
        ));
    }
    let stats = CorpusStats {
        traces: traces.len(),
        frames: dataset.len(),
        positives: dataset.positives(),
        positive_fraction: dataset.positive_fraction(),
    };
    Ok(Corpus {
        traces,
        dataset,
        scaling,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::demo_config;

    fn config() -> SystemConfig<f64> {
        demo_config::<f64>()
    }

    #[test]
    fn same_seed_gives_bitwise_identical_traces() {
        let spec = ScenarioSpec::<f64>::new(ScenarioKind::Manipulation, 4.0, 7);
        let a = generate(&spec, &config()).unwrap();
        let b = generate(&spec, &config()).unwrap();
        assert_eq!(a, b);
        let different = generate(
            &ScenarioSpec::<f64>::new(ScenarioKind::Manipulation, 4.0, 8),
            &config(),
        )
        .unwrap();
        assert_ne!(a, different);
    }

    #[test]
    fn manipulation_touching_frames_are_intentional_with_small_features() {
        let mut spec = ScenarioSpec::<f64>::new(ScenarioKind::Manipulation, 8.0, 3);
        spec.noise.keypoint_px_sigma = 0.0;
        spec.noise.gaze_angle_sigma = 0.0;
        spec.noise.depth_sigma = 0.0;
        let cfg = config();
        let trace = generate(&spec, &cfg).unwrap();
        let geometry = cfg.geometry().unwrap();
        let scaling =
            crate::traces::fit_scaling_over_traces(std::slice::from_ref(&trace), &geometry)
                .unwrap();
        let mut state = crate::features::FeatureStreamState::new();
        let mut touched_intentional = 0;
        let mut labeled = 0;
        for frame in &trace.frames {
            let fv =
                crate::pipeline::extract_features(frame, &geometry, &scaling, &mut state).unwrap();
            if frame.label.unwrap() {
                labeled += 1;
                assert_eq!(fv.gamma_prime, 1.0, "intentional frame without touch");
                if fv.d_prime < 0.25 && fv.alpha_prime < 0.45 {
                    touched_intentional += 1;
                }
            }
        }
        assert!(labeled > 30, "manipulation must produce intentional frames");
        // The bulk of intentional frames look like close-hand, attended
        // touches.
        assert!(
            touched_intentional as f64 >= 0.8 * labeled as f64,
            "{touched_intentional} of {labeled} intentional frames look right"
        );
    }

    #[test]
    fn collision_contact_is_unintentional_with_far_wrists() {
        let spec = ScenarioSpec::<f64>::new(ScenarioKind::Collision, 8.0, 11);
        let cfg = config();
        let trace = generate(&spec, &cfg).unwrap();
        let geometry = cfg.geometry().unwrap();
        let scaling =
            crate::traces::fit_scaling_over_traces(std::slice::from_ref(&trace), &geometry)
                .unwrap();
        let mut state = crate::features::FeatureStreamState::new();
        let mut touched = 0;
        for frame in &trace.frames {
            assert_eq!(frame.label, Some(false), "collisions are never intentional");
            let fv =
                crate::pipeline::extract_features(frame, &geometry, &scaling, &mut state).unwrap();
            if fv.gamma_prime == 1.0 {
                touched += 1;
                assert!(
                    fv.d_prime > 0.12,
                    "wrists must stay away from the bumped sensor, d' = {}",
                    fv.d_prime
                );
            }
        }
        assert!(touched > 20, "collision never activated a sensor");
    }

    #[test]
    fn unreachable_actor_is_a_generation_error() {
        let mut spec = ScenarioSpec::<f64>::new(ScenarioKind::Manipulation, 4.0, 5);
        spec.actor.stand = Some([3.0, 3.0, 1.4]);
        assert!(matches!(
            generate(&spec, &config()),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn generated_skeletons_pass_validation() {
        let cfg = config();
        let geometry = cfg.geometry().unwrap();
        for kind in [
            ScenarioKind::Manipulation,
            ScenarioKind::Distracted,
            ScenarioKind::Collision,
            ScenarioKind::Idle,
        ] {
            let spec = ScenarioSpec::<f64>::new(kind, 6.0, 21);
            let trace = generate(&spec, &cfg).unwrap();
            let mut rejected = 0;
            for frame in &trace.frames {
                let mut skeleton = crate::perception::Skeleton::new(
                    frame
                        .keypoints
                        .iter()
                        .map(|(name, kp)| {
                            (
                                *name,
                                crate::perception::Keypoint2D {
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
                if !crate::perception::validate_skeleton(&skeleton, &geometry.bounds).is_accept() {
                    rejected += 1;
                }
            }
            assert_eq!(
                rejected, 0,
                "noise-level artifacts must not fail validation ({kind:?})"
            );
        }
    }

    #[test]
    fn dropout_windows_produce_missing_wrists_with_touch() {
        let mut spec = ScenarioSpec::<f64>::new(ScenarioKind::Manipulation, 8.0, 13);
        spec.occlusion_rate = 0.5;
        let trace = generate(&spec, &config()).unwrap();
        let dropped_while_touching = trace
            .frames
            .iter()
            .filter(|f| {
                f.label == Some(true)
                    && f.keypoints[&KeypointName::WristRight].c == 0.0
                    && f.keypoints[&KeypointName::WristLeft].c == 0.0
            })
            .count();
        assert!(
            dropped_while_touching > 10,
            "expected intentional frames with dropped wrists, got {dropped_while_touching}"
        );
    }

    #[test]
    fn depth_jump_rejects_skeleton_via_forearm_length() {
        let mut spec = ScenarioSpec::<f64>::new(ScenarioKind::Manipulation, 8.0, 17);
        spec.depth_jump_rate = 0.4;
        let cfg = config();
        let geometry = cfg.geometry().unwrap();
        let trace = generate(&spec, &cfg).unwrap();
        let mut jumped = 0;
        for frame in &trace.frames {
            let mut skeleton = crate::perception::Skeleton::new(
                frame
                    .keypoints
                    .iter()
                    .map(|(name, kp)| {
                        (
                            *name,
                            crate::perception::Keypoint2D {
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
            if !crate::perception::validate_skeleton(&skeleton, &geometry.bounds).is_accept() {
                jumped += 1;
            }
        }
        assert!(jumped > 5, "depth jumps should trip the limb-length check");
    }

    #[test]
    fn corpus_stats_and_class_balance() {
        let specs = default_corpus_specs::<f64>(1, 3000);
        let corpus = build_corpus(&specs, &config()).unwrap();
        assert_eq!(corpus.stats.traces, 20);
        assert!(
            corpus.stats.frames >= 2900 && corpus.stats.frames <= 3100,
            "corpus size {}",
            corpus.stats.frames
        );
        assert_eq!(
            corpus.stats.positives,
            corpus.dataset.positives(),
            "stats must agree with the dataset"
        );
        assert!(
            (0.2..=0.35).contains(&corpus.stats.positive_fraction),
            "positive fraction {}",
            corpus.stats.positive_fraction
        );
    }

    #[test]
    fn single_kind_corpus_rejected() {
        let specs = vec![
            ScenarioSpec::<f64>::new(ScenarioKind::Idle, 4.0, 1),
            ScenarioSpec::<f64>::new(ScenarioKind::Idle, 4.0, 2),
        ];
        assert!(matches!(
            build_corpus(&specs, &config()),
            Err(Error::Corpus(_))
        ));
    }

    #[test]
    fn scenario_spec_toml_round_trip() {
        let mut spec = ScenarioSpec::<f64>::new(ScenarioKind::Distracted, 10.0, 42);
        spec.schedule.push(ScheduledEvent {
            start: 3.0,
            end: 6.0,
            event: EventKind::Distraction,
        });
        spec.schedule.push(ScheduledEvent {
            start: 3.0,
            end: 6.0,
            event: EventKind::Push {
                torque: 2.5,
                ramp: 1.5,
            },
        });
        let text = spec.to_toml().unwrap();
        let back: ScenarioSpec<f64> = toml::from_str(&text).unwrap();
        assert_eq!(back.kind, spec.kind);
        assert_eq!(back.schedule, spec.schedule);
        assert_eq!(back.seed, spec.seed);
    }
}
