//! Joint impedance control with intention-modulated stiffness, plus a toy
//! semi-implicit Euler integrator so simulated external forces produce
//! motion.
//!
//! The safety stop works by switching between a low-stiffness preset
//! (intentional touch: the user guides the arm) and a high-stiffness
//! preset (unintentional: the arm resists). On every intention transition
//! the desired joint positions snap to the current positions and the
//! desired velocities reset to zero, so the spring holds the arm where the
//! transition happened instead of yanking it back.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Joint-space state of the arm plus its setpoints and last command.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState<T: Real> {
    pub q: Vec<T>,
    pub q_dot: Vec<T>,
    pub q_desired: Vec<T>,
    pub q_dot_desired: Vec<T>,
    pub tau: Vec<T>,
}

impl<T: Real> ArmState<T> {
    /// Arm at rest at `q` with the setpoint on top of it.
    pub fn at_rest(q: Vec<T>) -> Self {
        let dof = q.len();
        Self {
            q_desired: q.clone(),
            q,
            q_dot: vec![T::zero(); dof],
            q_dot_desired: vec![T::zero(); dof],
            tau: vec![T::zero(); dof],
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    fn check_dims(&self) -> Result<()> {
        let dof = self.q.len();
        if [
            self.q_dot.len(),
            self.q_desired.len(),
            self.q_dot_desired.len(),
        ]
        .iter()
        .any(|&l| l != dof)
        {
            return Err(Error::InputShape(
                "arm state vectors have inconsistent lengths".into(),
            ));
        }
        Ok(())
    }
}

/// Per-joint stiffness and damping.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceGains<T: Real> {
    pub k_p: Vec<T>,
    pub k_d: Vec<T>,
}

impl<T: Real> ImpedanceGains<T> {
    pub fn uniform(dof: usize, k_p: T, k_d: T) -> Result<Self> {
        if k_p <= T::zero() || k_d <= T::zero() {
            return Err(Error::Config("gains must be strictly positive".into()));
        }
        Ok(Self {
            k_p: vec![k_p; dof],
            k_d: vec![k_d; dof],
        })
    }
}

/// Low (compliant) and high (stiff) presets; high dominates low entrywise.
#[derive(Debug, Clone)]
pub struct GainPresets<T: Real> {
    pub low: ImpedanceGains<T>,
    pub high: ImpedanceGains<T>,
}

impl<T: Real> GainPresets<T> {
    pub fn new(low: ImpedanceGains<T>, high: ImpedanceGains<T>) -> Result<Self> {
        let dominated = low.k_p.iter().zip(&high.k_p).all(|(l, h)| h > l)
            && low.k_d.iter().zip(&high.k_d).all(|(l, h)| h > l);
        if !dominated || low.k_p.len() != high.k_p.len() {
            return Err(Error::Config(
                "high presets must exceed low presets entrywise".into(),
            ));
        }
        Ok(Self { low, high })
    }

    pub fn from_config(gains: &crate::config::GainsSpec<T>, dof: usize) -> Result<Self> {
        GainPresets::new(
            ImpedanceGains::uniform(dof, gains.kp_low, gains.kd_low)?,
            ImpedanceGains::uniform(dof, gains.kp_high, gains.kd_high)?,
        )
    }
}

/// Controller stiffness mode; compliant while the touch is intentional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StiffnessMode {
    Compliant,
    Stiff,
}

/// State of the safety stop: current mode and the intention it reflects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SafetyStopState {
    pub mode: StiffnessMode,
    pub previous_intention: bool,
}

impl SafetyStopState {
    /// Safe initial state: treat the stream as unintentional until told
    /// otherwise.
    pub fn new() -> Self {
        Self {
            mode: StiffnessMode::Stiff,
            previous_intention: false,
        }
    }
}

impl Default for SafetyStopState {
    fn default() -> Self {
        Self::new()
    }
}

/// Joint impedance law: `tau = -k_p (q - q_d) - k_d (q_dot - q_dot_d)`,
/// entrywise.
pub fn impedance_torque<T: Real>(state: &ArmState<T>, gains: &ImpedanceGains<T>) -> Result<Vec<T>> {
    state.check_dims()?;
    if gains.k_p.len() != state.dof() || gains.k_d.len() != state.dof() {
        return Err(Error::InputShape(
            "gain vectors do not match the arm's dof".into(),
        ));
    }
    Ok((0..state.dof())
        .map(|i| {
            -gains.k_p[i] * (state.q[i] - state.q_desired[i])
                - gains.k_d[i] * (state.q_dot[i] - state.q_dot_desired[i])
        })
        .collect())
}

/// Apply the intention to the safety stop. On any transition the desired
/// positions snap to the current positions and desired velocities reset
/// to zero.
///
/// Returns the gains preset the control loop should use next.
pub fn safety_update<'a, T: Real>(
    intention: bool,
    arm: &mut ArmState<T>,
    stop: &mut SafetyStopState,
    presets: &'a GainPresets<T>,
) -> &'a ImpedanceGains<T> {
    if intention != stop.previous_intention {
        arm.q_desired = arm.q.clone();
        arm.q_dot_desired = vec![T::zero(); arm.dof()];
        stop.previous_intention = intention;
    }
    stop.mode = if intention {
        StiffnessMode::Compliant
    } else {
        StiffnessMode::Stiff
    };
    match stop.mode {
        StiffnessMode::Compliant => &presets.low,
        StiffnessMode::Stiff => &presets.high,
    }
}

/// One semi-implicit Euler step of the toy per-joint dynamics:
/// `q_dot += dt (tau_cmd + tau_ext) / inertia; q += dt q_dot`.
pub fn integrate<T: Real>(
    arm: &mut ArmState<T>,
    tau_command: &[T],
    tau_external: &[T],
    dt: T,
    inertia: &[T],
) -> Result<()> {
    arm.check_dims()?;
    if tau_command.len() != arm.dof()
        || tau_external.len() != arm.dof()
        || inertia.len() != arm.dof()
    {
        return Err(Error::InputShape(
            "torque/inertia vectors do not match the arm's dof".into(),
        ));
    }
    if dt <= T::zero() {
        return Err(Error::InputShape("dt must be positive".into()));
    }
    if inertia.iter().any(|&i| i <= T::zero()) {
        return Err(Error::InputShape("inertia must be positive".into()));
    }
    for i in 0..arm.dof() {
        let total = tau_command[i] + tau_external[i];
        arm.q_dot[i] += dt * total / inertia[i];
        arm.q[i] += dt * arm.q_dot[i];
    }
    arm.tau.clear();
    arm.tau.extend_from_slice(tau_command);
    Ok(())
}
