//! Replay a recorded trace through the recognition pipeline and,
//! optionally, the intention-modulated impedance controller.
//!
//! The observation channel (sensor bits, keypoints, gaze, joint config)
//! comes from the trace as recorded. The actuation channel is simulated:
//! the arm integrates the impedance command plus the trace's external
//! torques, starting from the first frame's joint configuration. Without
//! the controller the arm stays compliant (low stiffness, no setpoint
//! resets), which is the no-safety-stop baseline.

use crate::config::SystemGeometry;
use crate::control::{
    impedance_torque, integrate, safety_update, ArmState, GainPresets, SafetyStopState,
    StiffnessMode,
};
use crate::error::{Error, Result};
use crate::kinematics::JointConfig;
use crate::models::TrainedModel;
use crate::pipeline::{step, PipelineConfig, PipelineState};
use crate::scalar::Real;
use crate::traces::{ReplayFrame, ReplayLog, TraceFile};

#[derive(Debug, Clone, Copy)]
pub struct ReplayOptions<T: Real> {
    /// Engage the safety stop (stiffness modulation + setpoint resets).
    pub control: bool,
    pub pipeline: PipelineConfig<T>,
    /// Controller integration substep, seconds.
    pub substep: T,
}

impl<T: Real> ReplayOptions<T> {
    pub fn new(control: bool, pipeline: PipelineConfig<T>) -> Self {
        Self {
            control,
            pipeline,
            substep: T::of(0.002),
        }
    }
}

/// Aggregate numbers the CLI prints as the scenario verdict.
#[derive(Debug, Clone)]
pub struct ReplaySummary {
    pub frames: usize,
    pub intentional_frames: usize,
    pub transitions: usize,
    pub stiff_frames: usize,
    /// Largest end-effector excursion from the start of any contiguous
    /// unintentional interval, meters.
    pub max_unintentional_deviation: f64,
    /// Largest excursion from the initial end-effector position, meters.
    pub max_deviation: f64,
}

pub struct ReplayOutcome<T: Real> {
    pub log: ReplayLog<T>,
    pub summary: ReplaySummary,
}

/// Run the whole trace through the pipeline and the simulated arm.
pub fn replay_trace<T: Real>(
    trace: &TraceFile<T>,
    model: &TrainedModel<T>,
    geometry: &SystemGeometry<T>,
    gains: &GainPresets<T>,
    inertia: &[T],
    options: &ReplayOptions<T>,
) -> Result<ReplayOutcome<T>> {
    let first = trace
        .frames
        .first()
        .ok_or_else(|| Error::InputShape("cannot replay an empty trace".into()))?;
    if first.q.len() != geometry.chain.dof() {
        return Err(Error::InputShape(format!(
            "trace joint config has {} entries, chain has {} dof",
            first.q.len(),
            geometry.chain.dof()
        )));
    }

    let mut pipeline_state = PipelineState::new();
    let mut arm = ArmState::at_rest(first.q.clone());
    let mut stop = SafetyStopState::new();
    let zero_tau = vec![T::zero(); arm.dof()];

    let ee_start = geometry.end_effector(&JointConfig::new(arm.q.clone()))?;
    let mut ee_anchor = ee_start;
    let mut ee_previous = ee_start;
    let mut previous_t = None;
    let mut previous_intention = false;

    let mut frames = Vec::with_capacity(trace.frames.len());
    let mut summary = ReplaySummary {
        frames: trace.frames.len(),
        intentional_frames: 0,
        transitions: 0,
        stiff_frames: 0,
        max_unintentional_deviation: 0.0,
        max_deviation: 0.0,
    };

    for frame in &trace.frames {
        let output = step(
            frame,
            model,
            &mut pipeline_state,
            &options.pipeline,
            geometry,
        )?;
        if output.intention {
            summary.intentional_frames += 1;
        }
        if output.intention != previous_intention {
            summary.transitions += 1;
            // New interval: measure deviations from here.
            ee_anchor = geometry.end_effector(&JointConfig::new(arm.q.clone()))?;
        }
        previous_intention = output.intention;

        let active = if options.control {
            safety_update(output.intention, &mut arm, &mut stop, gains)
        } else {
            &gains.low
        };
        if options.control && stop.mode == StiffnessMode::Stiff {
            summary.stiff_frames += 1;
        }

        // Integrate the arm from the previous frame time to this one.
        let mut frame_span = None;
        if let Some(prev_t) = previous_t {
            let span: T = frame.t - prev_t;
            frame_span = Some(span);
            let steps = (span.as_f64() / options.substep.as_f64()).ceil().max(1.0) as usize;
            let dt = span / T::of(steps as f64);
            let tau_ext = frame.tau_ext.as_deref().unwrap_or(&zero_tau);
            if tau_ext.len() != arm.dof() {
                return Err(Error::InputShape(
                    "external torque length does not match the chain".into(),
                ));
            }
            for _ in 0..steps {
                let tau_cmd = impedance_torque(&arm, active)?;
                integrate(&mut arm, &tau_cmd, tau_ext, dt, inertia)?;
            }
        }
        previous_t = Some(frame.t);

        let ee = geometry.end_effector(&JointConfig::new(arm.q.clone()))?;
        let ee_speed = frame_span
            .map(|span| (ee - ee_previous).norm() / span)
            .unwrap_or_else(T::zero);
        ee_previous = ee;
        let dev_from_anchor = (ee - ee_anchor).norm().as_f64();
        if !output.intention {
            summary.max_unintentional_deviation =
                summary.max_unintentional_deviation.max(dev_from_anchor);
        }
        summary.max_deviation = summary.max_deviation.max((ee - ee_start).norm().as_f64());

        let force_proxy = arm.tau.iter().fold(T::zero(), |acc, &t| acc + t * t).sqrt();
        frames.push(ReplayFrame {
            frame: frame.clone(),
            features: output.features.as_array(),
            raw_score: output.raw.score,
            raw_label: output.raw.label,
            smoothed: output.smoothed_mean,
            intention: output.intention,
            q_sim: Some(arm.q.clone()),
            ee: Some([ee.x, ee.y, ee.z]),
            ee_speed: Some(ee_speed),
            force_proxy: Some(force_proxy),
            mode: Some(
                match (options.control, stop.mode) {
                    (false, _) => "compliant",
                    (true, StiffnessMode::Compliant) => "compliant",
                    (true, StiffnessMode::Stiff) => "stiff",
                }
                .to_string(),
            ),
        });
    }

    Ok(ReplayOutcome {
        log: ReplayLog {
            header: trace.header.clone(),
            frames,
        },
        summary,
    })
}

/// Deviation of the end effector during `[start, end)`, measured against
/// its position at the window start. Used by scenario-level checks.
pub fn interval_deviation<T: Real>(log: &ReplayLog<T>, start: T, end: T) -> Option<f64> {
    let mut anchor: Option<[T; 3]> = None;
    let mut max_dev: Option<f64> = None;
    for frame in &log.frames {
        if frame.frame.t < start || frame.frame.t >= end {
            continue;
        }
        let ee = frame.ee?;
        let anchor = *anchor.get_or_insert(ee);
        let dev = ((ee[0] - anchor[0]).powi(2)
            + (ee[1] - anchor[1]).powi(2)
            + (ee[2] - anchor[2]).powi(2))
        .sqrt()
        .as_f64();
        max_dev = Some(max_dev.map_or(dev, |m: f64| m.max(dev)));
    }
    max_dev
}
