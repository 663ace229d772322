//! Multimodal touch intention and attention recognition for physical
//! human-robot interaction.
//!
//! A robot covered in binary tactile sensors cannot tell a deliberate touch
//! from an accidental one. This crate combines the tactile signal with
//! vision-side observations (skeleton keypoints projected to 3D, a 2D gaze
//! ray) into a reduced five-component feature vector, classifies each frame
//! as intentional or unintentional, smooths the decision over a moving
//! window, and modulates a joint impedance controller so that unintentional
//! contact is met with high stiffness (a safety stop).
//!
//! The crate is organised around the data path:
//!
//! - [`kinematics`]: serial-chain forward kinematics and tactile sensor
//!   placement, giving each sensor's Cartesian position per frame.
//! - [`perception`]: pinhole back-projection of 2D keypoints with depth,
//!   skeleton plausibility validation, gaze/POI angle primitives.
//! - [`features`]: gated hand-distance, hand-speed, gaze-angle and
//!   gaze-speed features, reduced to the five-component vector.
//! - [`models`]: from-scratch kNN and a small feed-forward network,
//!   feature-mask ablation, k-fold cross-validation, confusion matrices.
//! - [`pipeline`]: the per-frame loop with moving-window smoothing.
//! - [`control`]: joint impedance control with intention-modulated
//!   stiffness and a toy integrator.
//! - [`simgen`]: deterministic synthetic interaction scenarios used for
//!   training corpora and replay demonstrations.
//! - [`replay`]: drive a recorded trace through the pipeline and the
//!   simulated arm, with and without the safety stop.
//! - [`traces`]: durable file formats (traces, datasets, model containers,
//!   evaluation reports, replay logs).
//! - [`config`]: the structured config file family (chain, sensor layout,
//!   camera, POIs, gains).
//!
//! All numeric code is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the type aliases at the crate root fix the default
//! `f64` instantiation used by the CLI and the shipped file formats.

pub mod config;
pub mod control;
pub mod error;
pub mod features;
pub mod kinematics;
pub mod models;
pub mod perception;
pub mod pipeline;
pub mod replay;
pub mod scalar;
pub mod simgen;
pub mod traces;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default `f64` instantiations used by the CLI and the on-disk formats.
pub type KinematicChainF64 = kinematics::KinematicChain<f64>;
pub type SensorLayoutF64 = kinematics::SensorLayout<f64>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type ScalingParamsF64 = features::ScalingParams<f64>;
pub type TrainedModelF64 = models::TrainedModel<f64>;
pub type LabeledDatasetF64 = models::LabeledDataset<f64>;
pub type TraceFileF64 = traces::TraceFile<f64>;
pub type SystemConfigF64 = config::SystemConfig<f64>;
