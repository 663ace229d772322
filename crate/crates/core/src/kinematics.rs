//! Serial-chain forward kinematics and tactile sensor placement.
//!
//! The chain is an ordered list of revolute joints. Each link stores the
//! joint axis (in the frame of the previous link) and a fixed offset
//! transform. The per-joint convention is rotation first, offset second:
//!
//! ```text
//! frame[i] = frame[i-1] * Rot(axis[i], q[i]) * offset[i]
//! ```
//!
//! so a link with offset translation `(1, 0, 0)`, axis `z`, and `q = pi/2`
//! puts its tip at `(0, 1, 0)`. Sensors are mounted on links through a
//! fixed mount transform; their world position is the translation part of
//! `frame[link] * mount`.

use std::collections::BTreeMap;

use nalgebra::{Isometry3, Point3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance for the unit-axis invariant.
pub const AXIS_NORM_TOL: f64 = 1e-9;
/// Tolerance for rotation-part orthonormality.
pub const ROTATION_ORTHO_TOL: f64 = 1e-6;

/// Identifier of one tactile sensor; ids are dense `0..n_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SensorId(pub u32);

impl std::fmt::Display for SensorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One revolute link: joint axis, fixed offset, and joint limits.
#[derive(Debug, Clone)]
pub struct Link<T: Real> {
    pub axis: Unit<Vector3<T>>,
    pub offset: Isometry3<T>,
    /// Joint limits in radians, `lower <= q <= upper`.
    pub limits: (T, T),
}

/// Serial kinematic chain of revolute joints.
#[derive(Debug, Clone)]
pub struct KinematicChain<T: Real> {
    links: Vec<Link<T>>,
}

impl<T: Real> KinematicChain<T> {
    /// Build a chain, validating the unit-axis and rigid-transform
    /// invariants.
    pub fn new(links: Vec<Link<T>>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::InputShape("chain needs at least one link".into()));
        }
        for (i, link) in links.iter().enumerate() {
            let norm_err = (link.axis.norm() - T::one()).abs();
            if norm_err > T::of(AXIS_NORM_TOL) {
                return Err(Error::InputShape(format!(
                    "link {i}: joint axis is not unit-norm"
                )));
            }
            if !rotation_is_orthonormal(&link.offset, T::of(ROTATION_ORTHO_TOL)) {
                return Err(Error::InputShape(format!(
                    "link {i}: offset rotation is not orthonormal"
                )));
            }
            if link.limits.0 >= link.limits.1 {
                return Err(Error::InputShape(format!(
                    "link {i}: joint limits must satisfy lower < upper"
                )));
            }
        }
        Ok(Self { links })
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link<T>] {
        &self.links
    }

    /// Sum of link offset translation lengths: an upper bound on how far
    /// any point rigidly attached to the chain can sit from the base.
    pub fn reach_radius(&self) -> T {
        self.links
            .iter()
            .fold(T::zero(), |acc, l| acc + l.offset.translation.vector.norm())
    }

    /// Check a joint configuration against length and limits.
    pub fn validate_config(&self, q: &JointConfig<T>) -> Result<()> {
        if q.angles.len() != self.dof() {
            return Err(Error::InputShape(format!(
                "joint config has {} entries, chain has {} dof",
                q.angles.len(),
                self.dof()
            )));
        }
        for (i, (&angle, link)) in q.angles.iter().zip(&self.links).enumerate() {
            if !angle.is_finite() {
                return Err(Error::InputShape(format!("joint {i}: non-finite angle")));
            }
            if angle < link.limits.0 || angle > link.limits.1 {
                return Err(Error::InputShape(format!(
                    "joint {i}: angle outside limits"
                )));
            }
        }
        Ok(())
    }
}

/// Joint angles in radians, one entry per link.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig<T: Real> {
    pub angles: Vec<T>,
}

impl<T: Real> JointConfig<T> {
    pub fn new(angles: Vec<T>) -> Self {
        Self { angles }
    }

    pub fn zeros(dof: usize) -> Self {
        Self {
            angles: vec![T::zero(); dof],
        }
    }
}

/// One sensor mount: which link it sits on and where in the link frame.
#[derive(Debug, Clone)]
pub struct SensorMount<T: Real> {
    pub id: SensorId,
    pub link: usize,
    pub mount: Isometry3<T>,
}

/// Placement of every tactile sensor on the chain.
#[derive(Debug, Clone)]
pub struct SensorLayout<T: Real> {
    sensors: Vec<SensorMount<T>>,
}

impl<T: Real> SensorLayout<T> {
    /// Build a layout, validating dense unique ids and link references.
    pub fn new(sensors: Vec<SensorMount<T>>, dof: usize) -> Result<Self> {
        let mut seen = vec![false; sensors.len()];
        for s in &sensors {
            let idx = s.id.0 as usize;
            if idx >= sensors.len() || seen[idx] {
                return Err(Error::Layout(format!(
                    "sensor ids must be unique and dense 0..{}, got {}",
                    sensors.len(),
                    s.id
                )));
            }
            seen[idx] = true;
            if s.link >= dof {
                return Err(Error::Layout(format!(
                    "sensor {} mounted on link {} but chain has {} links",
                    s.id, s.link, dof
                )));
            }
        }
        Ok(Self { sensors })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn sensors(&self) -> &[SensorMount<T>] {
        &self.sensors
    }
}

/// World frame of every link for the given joint configuration.
///
/// Frame `i` depends only on joints `0..=i`; composition is left-to-right.
pub fn forward_kinematics<T: Real>(
    chain: &KinematicChain<T>,
    q: &JointConfig<T>,
) -> Result<Vec<Isometry3<T>>> {
    if q.angles.len() != chain.dof() {
        return Err(Error::InputShape(format!(
            "joint config has {} entries, chain has {} dof",
            q.angles.len(),
            chain.dof()
        )));
    }
    let mut frames = Vec::with_capacity(chain.dof());
    let mut current = Isometry3::identity();
    for (link, &angle) in chain.links().iter().zip(&q.angles) {
        let joint = Isometry3::from_parts(
            nalgebra::Translation3::identity(),
            nalgebra::UnitQuaternion::from_axis_angle(&link.axis, angle),
        );
        current = current * joint * link.offset;
        frames.push(current);
    }
    Ok(frames)
}

/// Cartesian position of every sensor given the link frames.
pub fn sensor_world_positions<T: Real>(
    layout: &SensorLayout<T>,
    frames: &[Isometry3<T>],
) -> Result<BTreeMap<SensorId, Point3<T>>> {
    let mut positions = BTreeMap::new();
    for s in layout.sensors() {
        let frame = frames.get(s.link).ok_or_else(|| {
            Error::Layout(format!(
                "sensor {} references link {} but only {} frames given",
                s.id,
                s.link,
                frames.len()
            ))
        })?;
        let world = frame * s.mount;
        positions.insert(s.id, Point3::from(world.translation.vector));
    }
    Ok(positions)
}

/// World position of the chain tip (last link frame origin).
pub fn end_effector_position<T: Real>(frames: &[Isometry3<T>]) -> Point3<T> {
    frames
        .last()
        .map(|f| Point3::from(f.translation.vector))
        .unwrap_or_else(Point3::origin)
}

fn rotation_is_orthonormal<T: Real>(iso: &Isometry3<T>, tol: T) -> bool {
    let r = iso.rotation.to_rotation_matrix();
    let m = r.matrix();
    let should_be_identity = m.transpose() * m;
    let mut max_err = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { T::one() } else { T::zero() };
            max_err = max_err.max((should_be_identity[(i, j)] - expected).abs());
        }
    }
    max_err <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix4, Translation3, UnitQuaternion};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn translation_link(x: f64, y: f64, z: f64, axis: Unit<Vector3<f64>>) -> Link<f64> {
        Link {
            axis,
            offset: Isometry3::from_parts(Translation3::new(x, y, z), UnitQuaternion::identity()),
            limits: (-std::f64::consts::PI, std::f64::consts::PI),
        }
    }

    fn demo_chain() -> KinematicChain<f64> {
        // Alternating axes, link lengths summing to 1.0 m.
        let axes = [
            Vector3::z_axis(),
            Vector3::y_axis(),
            Vector3::x_axis(),
            Vector3::y_axis(),
            Vector3::x_axis(),
            Vector3::y_axis(),
            Vector3::z_axis(),
        ];
        let lengths = [0.10, 0.15, 0.20, 0.20, 0.15, 0.12, 0.08];
        let links = axes
            .iter()
            .zip(lengths)
            .map(|(axis, len)| translation_link(len, 0.0, 0.0, *axis))
            .collect();
        KinematicChain::new(links).unwrap()
    }

    #[test]
    fn zero_config_accumulates_offsets() {
        let chain = demo_chain();
        let frames = forward_kinematics(&chain, &JointConfig::zeros(7)).unwrap();
        // With identity rotations each frame is the running product of the
        // fixed offsets, i.e. the partial sums of the link lengths along x.
        let mut expected_x = 0.0;
        for (frame, len) in frames
            .iter()
            .zip([0.10, 0.15, 0.20, 0.20, 0.15, 0.12, 0.08])
        {
            expected_x += len;
            assert_relative_eq!(frame.translation.x, expected_x, epsilon = 1e-12);
            assert_relative_eq!(frame.translation.y, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_link_quarter_turn_rotates_before_translating() {
        let chain =
            KinematicChain::new(vec![translation_link(1.0, 0.0, 0.0, Vector3::z_axis())]).unwrap();
        let frames =
            forward_kinematics(&chain, &JointConfig::new(vec![std::f64::consts::FRAC_PI_2]))
                .unwrap();
        assert_relative_eq!(frames[0].translation.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(frames[0].translation.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(frames[0].translation.z, 0.0, epsilon = 1e-12);
    }

    /// Independent oracle: compose raw homogeneous 4x4 matrices.
    fn matrix_product_oracle(chain: &KinematicChain<f64>, q: &[f64]) -> Vec<Matrix4<f64>> {
        let mut out = Vec::new();
        let mut current = Matrix4::identity();
        for (link, &angle) in chain.links().iter().zip(q) {
            let rot = UnitQuaternion::from_axis_angle(&link.axis, angle)
                .to_rotation_matrix()
                .to_homogeneous();
            let off = link.offset.to_homogeneous();
            current = current * rot * off;
            out.push(current);
        }
        out
    }

    #[test]
    fn fk_matches_matrix_product_oracle() {
        let chain = demo_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let q: Vec<f64> = (0..7).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let frames = forward_kinematics(&chain, &JointConfig::new(q.clone())).unwrap();
            let oracle = matrix_product_oracle(&chain, &q);
            for (frame, matrix) in frames.iter().zip(&oracle) {
                for (i, axis) in ["x", "y", "z"].iter().enumerate() {
                    let got = frame.translation.vector[i];
                    let want = matrix[(i, 3)];
                    assert!(
                        (got - want).abs() < 1e-9,
                        "position {axis} mismatch: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn fk_rejects_wrong_length_config() {
        let chain = demo_chain();
        let err = forward_kinematics(&chain, &JointConfig::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::InputShape(_)));
    }

    #[test]
    fn fk_is_deterministic_bitwise() {
        let chain = demo_chain();
        let q = JointConfig::new(vec![0.3, -0.8, 1.2, 0.1, -0.4, 0.9, -1.1]);
        let a = forward_kinematics(&chain, &q).unwrap();
        let b = forward_kinematics(&chain, &q).unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.to_homogeneous(), fb.to_homogeneous());
        }
    }

    #[test]
    fn frames_stay_orthonormal() {
        let chain = demo_chain();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let q: Vec<f64> = (0..7).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let frames = forward_kinematics(&chain, &JointConfig::new(q)).unwrap();
            for frame in &frames {
                assert!(rotation_is_orthonormal(frame, 1e-6));
            }
        }
    }

    #[test]
    fn sensor_positions_follow_mounts() {
        let chain = demo_chain();
        let frames = forward_kinematics(&chain, &JointConfig::zeros(7)).unwrap();

        // Identity mount: sensor sits at the link origin.
        let layout = SensorLayout::new(
            vec![SensorMount {
                id: SensorId(0),
                link: 2,
                mount: Isometry3::identity(),
            }],
            7,
        )
        .unwrap();
        let pos = sensor_world_positions(&layout, &frames).unwrap();
        let link_origin = Point3::from(frames[2].translation.vector);
        assert_relative_eq!(pos[&SensorId(0)], link_origin, epsilon = 1e-12);

        // Pure translation mount on an identity-rotation frame.
        let layout = SensorLayout::new(
            vec![SensorMount {
                id: SensorId(0),
                link: 0,
                mount: Isometry3::translation(0.0, 0.0, 0.05),
            }],
            7,
        )
        .unwrap();
        let pos = sensor_world_positions(&layout, &frames).unwrap();
        assert_relative_eq!(pos[&SensorId(0)].z, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn dangling_link_index_is_a_layout_error() {
        let err = SensorLayout::<f64>::new(
            vec![SensorMount {
                id: SensorId(0),
                link: 9,
                mount: Isometry3::identity(),
            }],
            7,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Layout(_)));
    }

    #[test]
    fn duplicate_or_sparse_ids_rejected() {
        let mount = |id| SensorMount::<f64> {
            id: SensorId(id),
            link: 0,
            mount: Isometry3::identity(),
        };
        assert!(SensorLayout::new(vec![mount(0), mount(0)], 7).is_err());
        assert!(SensorLayout::new(vec![mount(0), mount(2)], 7).is_err());
        assert!(SensorLayout::new(vec![mount(0), mount(1)], 7).is_ok());
    }

    #[test]
    fn demo_layout_positions_within_reach() {
        let config = crate::config::demo_config::<f64>();
        let chain = config.chain().unwrap();
        let layout = config.layout(&chain).unwrap();
        assert_eq!(layout.len(), 46);

        // Reach bound: sum of link lengths plus the largest mount offset.
        let max_mount = layout
            .sensors()
            .iter()
            .map(|s| s.mount.translation.vector.norm())
            .fold(0.0f64, f64::max);
        let bound = chain.reach_radius() + max_mount + 1e-12;

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let q: Vec<f64> = chain
                .links()
                .iter()
                .map(|l| rng.gen_range(l.limits.0..l.limits.1))
                .collect();
            let frames = forward_kinematics(&chain, &JointConfig::new(q)).unwrap();
            let positions = sensor_world_positions(&layout, &frames).unwrap();
            assert_eq!(positions.len(), 46);
            for p in positions.values() {
                assert!(p.coords.norm() <= bound, "sensor outside reach bound");
                assert!(p.coords.iter().all(|c| c.is_finite()));
            }
        }
    }

    #[test]
    fn sensor_positions_continuous_in_q() {
        let chain = demo_chain();
        let config = crate::config::demo_config::<f64>();
        let layout = config.layout(&chain).unwrap();
        let eps = 1e-6;
        let q0 = vec![0.4, -0.2, 0.7, 0.3, -0.5, 0.8, 0.1];
        let frames0 = forward_kinematics(&chain, &JointConfig::new(q0.clone())).unwrap();
        let pos0 = sensor_world_positions(&layout, &frames0).unwrap();
        let reach = chain.reach_radius()
            + layout
                .sensors()
                .iter()
                .map(|s| s.mount.translation.vector.norm())
                .fold(0.0f64, f64::max);
        for joint in 0..7 {
            let mut q = q0.clone();
            q[joint] += eps;
            let frames = forward_kinematics(&chain, &JointConfig::new(q)).unwrap();
            let pos = sensor_world_positions(&layout, &frames).unwrap();
            for (id, p) in &pos {
                let moved = (p - pos0[id]).norm();
                assert!(
                    moved < reach * eps * 2.0,
                    "sensor {id} moved {moved} for eps {eps}"
                );
            }
        }
    }
}
