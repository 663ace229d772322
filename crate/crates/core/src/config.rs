//! Structured config file family: kinematic chain, sensor layout, camera
//! intrinsics, limb-length bounds, points of interest, impedance gains, and
//! pipeline defaults.
//!
//! Configs are TOML with a `format_version` field. All lengths are meters,
//! all angles radians, pixels for image-plane quantities. Rotations in the
//! file are roll-pitch-yaw (extrinsic XYZ), matching the usual URDF origin
//! convention.
//!
//! The world frame is the camera frame: x right, y down in the image,
//! z pointing away from the camera (depth). The chain's `base` pose places
//! the robot in that frame.

use std::path::Path;

use nalgebra::{Isometry3, Point2, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{KinematicChain, Link, SensorId, SensorLayout, SensorMount};
use crate::perception::{CameraIntrinsics, LimbLengthBounds, LimbSegment};
use crate::scalar::Real;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// A rigid transform as stored in config files: xyz translation plus
/// roll-pitch-yaw.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PoseSpec<T> {
    pub xyz: [T; 3],
    pub rpy: [T; 3],
}

impl<T: Real> PoseSpec<T> {
    pub fn identity() -> Self {
        Self {
            xyz: [T::zero(); 3],
            rpy: [T::zero(); 3],
        }
    }

    pub fn from_xyz(x: T, y: T, z: T) -> Self {
        Self {
            xyz: [x, y, z],
            rpy: [T::zero(); 3],
        }
    }

    pub fn to_isometry(&self) -> Isometry3<T> {
        let rot = UnitQuaternion::from_euler_angles(self.rpy[0], self.rpy[1], self.rpy[2]);
        Isometry3::from_parts(
            Translation3::new(self.xyz[0], self.xyz[1], self.xyz[2]),
            rot,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkSpec<T> {
    /// Joint axis in the previous link's frame; must be unit-norm.
    pub axis: [T; 3],
    /// Fixed offset applied after the joint rotation.
    pub offset: PoseSpec<T>,
    /// Joint limits in radians.
    pub limits: [T; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSpec<T> {
    /// Pose of the chain base in the world (camera) frame.
    pub base: PoseSpec<T>,
    pub links: Vec<LinkSpec<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensorSpec<T> {
    pub id: u32,
    pub link: usize,
    pub mount: PoseSpec<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraSpec<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimbBoundsSpec<T> {
    /// Per-segment `[min, max]` lengths in meters.
    pub upper_arm: [T; 2],
    pub forearm: [T; 2],
    pub shoulder_width: [T; 2],
    /// Reject a skeleton when more than this fraction of keypoints is
    /// missing.
    pub max_missing_fraction: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StaticPoiSpec<T> {
    pub name: String,
    /// Image-plane location in pixels.
    pub pixel: [T; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainsSpec<T> {
    pub kp_low: T,
    pub kd_low: T,
    pub kp_high: T,
    pub kd_high: T,
    /// Per-joint inertia for the toy integrator.
    pub inertia: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineSpec<T> {
    /// Moving-window span in seconds.
    pub window_span: T,
    /// Decision threshold on the smoothed mean; ties resolve to
    /// unintentional.
    pub threshold: T,
}

/// Top-level config: everything the system needs to turn trace frames into
/// intention decisions and torque commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    pub format_version: u32,
    /// Identifier echoed into trace headers for provenance checks.
    pub id: String,
    pub chain: ChainSpec<T>,
    pub sensors: Vec<SensorSpec<T>>,
    pub camera: CameraSpec<T>,
    pub limb_bounds: LimbBoundsSpec<T>,
    pub pois: Vec<StaticPoiSpec<T>>,
    pub gains: GainsSpec<T>,
    pub pipeline: PipelineSpec<T>,
}

impl<T: Real + Serialize + serde::de::DeserializeOwned> SystemConfig<T> {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        if cfg.format_version != CONFIG_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: CONFIG_FORMAT_VERSION,
                found: cfg.format_version,
            });
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

impl<T: Real> SystemConfig<T> {
    pub fn chain(&self) -> Result<KinematicChain<T>> {
        let links = self
            .chain
            .links
            .iter()
            .map(|spec| {
                let axis = Vector3::new(spec.axis[0], spec.axis[1], spec.axis[2]);
                Ok(Link {
                    axis: Unit::try_new(axis, T::of(1e-9)).ok_or_else(|| {
                        Error::Config("chain link axis is not unit-norm".to_string())
                    })?,
                    offset: spec.offset.to_isometry(),
                    limits: (spec.limits[0], spec.limits[1]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        KinematicChain::new(links)
    }

    pub fn layout(&self, chain: &KinematicChain<T>) -> Result<SensorLayout<T>> {
        let mounts = self
            .sensors
            .iter()
            .map(|s| SensorMount {
                id: SensorId(s.id),
                link: s.link,
                mount: s.mount.to_isometry(),
            })
            .collect();
        SensorLayout::new(mounts, chain.dof())
    }

    pub fn base_pose(&self) -> Isometry3<T> {
        self.chain.base.to_isometry()
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics<T>> {
        CameraIntrinsics::new(
            self.camera.fx,
            self.camera.fy,
            self.camera.cx,
            self.camera.cy,
        )
    }

    pub fn limb_bounds(&self) -> Result<LimbLengthBounds<T>> {
        LimbLengthBounds::new(
            [
                (LimbSegment::UpperArmLeft, self.limb_bounds.upper_arm),
                (LimbSegment::UpperArmRight, self.limb_bounds.upper_arm),
                (LimbSegment::ForearmLeft, self.limb_bounds.forearm),
                (LimbSegment::ForearmRight, self.limb_bounds.forearm),
                (LimbSegment::ShoulderWidth, self.limb_bounds.shoulder_width),
            ]
            .into_iter()
            .map(|(seg, [lo, hi])| (seg, lo, hi))
            .collect(),
            self.limb_bounds.max_missing_fraction,
        )
    }

    pub fn static_pois(&self) -> Vec<(String, Point2<T>)> {
        self.pois
            .iter()
            .map(|p| (p.name.clone(), Point2::new(p.pixel[0], p.pixel[1])))
            .collect()
    }

    /// Bundle the runtime geometry. Fails early on any invalid section.
    pub fn geometry(&self) -> Result<SystemGeometry<T>> {
        let chain = self.chain()?;
        let layout = self.layout(&chain)?;
        if self.gains.kp_low <= T::zero()
            || self.gains.kd_low <= T::zero()
            || self.gains.kp_high <= self.gains.kp_low
            || self.gains.kd_high <= self.gains.kd_low
            || self.gains.inertia <= T::zero()
        {
            return Err(Error::Config(
                "gains must be positive with high presets above low presets".to_string(),
            ));
        }
        if self.pipeline.window_span <= T::zero()
            || self.pipeline.threshold <= T::zero()
            || self.pipeline.threshold >= T::one()
        {
            return Err(Error::Config(
                "pipeline needs window_span > 0 and threshold in (0, 1)".to_string(),
            ));
        }
        Ok(SystemGeometry {
            base: self.base_pose(),
            intrinsics: self.intrinsics()?,
            bounds: self.limb_bounds()?,
            static_pois: self.static_pois(),
            chain,
            layout,
        })
    }
}

/// Runtime form of the config: parsed, validated, ready for per-frame use.
#[derive(Debug, Clone)]
pub struct SystemGeometry<T: Real> {
    pub chain: KinematicChain<T>,
    pub layout: SensorLayout<T>,
    pub base: Isometry3<T>,
    pub intrinsics: CameraIntrinsics<T>,
    pub bounds: LimbLengthBounds<T>,
    pub static_pois: Vec<(String, Point2<T>)>,
}

impl<T: Real> SystemGeometry<T> {
    /// World position of every sensor for the given joint configuration.
    pub fn sensor_positions(
        &self,
        q: &crate::kinematics::JointConfig<T>,
    ) -> Result<std::collections::BTreeMap<SensorId, nalgebra::Point3<T>>> {
        let frames = crate::kinematics::forward_kinematics(&self.chain, q)?;
        let world: Vec<_> = frames.iter().map(|f| self.base * f).collect();
        crate::kinematics::sensor_world_positions(&self.layout, &world)
    }

    /// World position of the end effector.
    pub fn end_effector(
        &self,
        q: &crate::kinematics::JointConfig<T>,
    ) -> Result<nalgebra::Point3<T>> {
        let frames = crate::kinematics::forward_kinematics(&self.chain, q)?;
        let world: Vec<_> = frames.iter().map(|f| self.base * f).collect();
        Ok(crate::kinematics::end_effector_position(&world))
    }
}

/// The built-in demo configuration: a 7-DOF arm with link lengths summing
/// to 1.0 m, 46 sensors (rings of 4 on the large links, 2 on the small
/// ones), a slightly-overhead camera, and the default gain presets.
pub fn demo_config<T: Real>() -> SystemConfig<T> {
    let r = T::of;
    let pi = T::pi();

    let axes = [
        [0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let lengths = [0.10, 0.15, 0.20, 0.20, 0.15, 0.12, 0.08];
    let links = axes
        .iter()
        .zip(lengths)
        .map(|(axis, len)| LinkSpec {
            axis: [r(axis[0]), r(axis[1]), r(axis[2])],
            offset: PoseSpec::from_xyz(r(len), T::zero(), T::zero()),
            limits: [-pi, pi],
        })
        .collect();

    // Ring layout: sensors sit on the link segment behind each frame
    // origin, at two stations along the link, spread around the link axis.
    let mut sensors = Vec::new();
    let mut next_id = 0u32;
    let ring_counts = [4usize, 4, 4, 4, 2, 2, 3];
    let radius = 0.04;
    for (link, (&count, len)) in ring_counts.iter().zip(lengths).enumerate() {
        for station in [0.25, 0.75] {
            for s in 0..count {
                let angle = 2.0 * std::f64::consts::PI * (s as f64) / (count as f64);
                sensors.push(SensorSpec {
                    id: next_id,
                    link,
                    mount: PoseSpec {
                        xyz: [
                            r(-len * station),
                            r(radius * angle.cos()),
                            r(radius * angle.sin()),
                        ],
                        rpy: [T::zero(); 3],
                    },
                });
                next_id += 1;
            }
        }
    }
    debug_assert_eq!(sensors.len(), 46);

    SystemConfig {
        format_version: CONFIG_FORMAT_VERSION,
        id: "demo-v1".to_string(),
        chain: ChainSpec {
            base: PoseSpec {
                xyz: [r(-0.45), r(0.25), r(1.80)],
                rpy: [T::zero(); 3],
            },
            links,
        },
        sensors,
        camera: CameraSpec {
            fx: r(600.0),
            fy: r(600.0),
            cx: r(640.0),
            cy: r(360.0),
        },
        limb_bounds: LimbBoundsSpec {
            upper_arm: [r(0.20), r(0.45)],
            forearm: [r(0.20), r(0.45)],
            shoulder_width: [r(0.25), r(0.55)],
            max_missing_fraction: r(0.5),
        },
        pois: vec![
            StaticPoiSpec {
                name: "tool".to_string(),
                pixel: [r(520.0), r(430.0)],
            },
            StaticPoiSpec {
                name: "monitor".to_string(),
                pixel: [r(980.0), r(170.0)],
            },
            StaticPoiSpec {
                name: "part".to_string(),
                pixel: [r(560.0), r(520.0)],
            },
        ],
        gains: GainsSpec {
            kp_low: r(5.0),
            kd_low: r(2.0),
            kp_high: r(200.0),
            kd_high: r(20.0),
            inertia: r(1.0),
        },
        pipeline: PipelineSpec {
            window_span: r(1.0),
            threshold: r(0.5),
        },
    }
}
