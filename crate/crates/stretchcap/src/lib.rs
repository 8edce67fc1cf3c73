//! Capacitive stretch-sensor arrays: simulation, read-out decoding and dense
//! surface reconstruction.
//!
//! A soft sensor sheet carries electrode strips on two layers; wherever a top
//! strip crosses a bottom strip they form a plate capacitor (a *sensor cell*)
//! whose capacitance tracks the local area change of the sheet. This crate
//! models the whole pipeline around such arrays:
//!
//! - [`layout`] — electrode strips, sensor cells, the rest-state triangle mesh
//!   and marker-vertex selection.
//! - [`capmodel`] — plate-capacitor physics and the per-triangle forward model
//!   mapping deformation to capacitance ratios.
//! - [`readout`] — the time-multiplexed measurement plan, least-squares
//!   decoding and timer-frequency conversion.
//! - [`deform`] — rigid Procrustes alignment and an as-rigid-as-possible
//!   surface solver driven by sparse positional constraints.
//! - [`mocap`] — capture sessions, fragmented optical marker tracks and the
//!   semi-automatic labeling pipeline.
//! - [`regress`] — a fully connected network (and a linear baseline) mapping
//!   per-cell capacitances to marker positions.
//! - [`synth`] — analytic deformation scenarios, track corruption and session
//!   emission for end-to-end testing without hardware.
//! - [`pipeline`] — configuration, persistence and the command layer behind
//!   the `stretchcap` binary.
//!
//! The `examples/` directory holds one runnable example per capability; start
//! with `readout_decode` and `synth_session`.

pub mod capmodel;
pub mod deform;
pub mod geometry;
pub mod layout;
pub mod mocap;
pub mod pipeline;
pub mod readout;
pub mod regress;
pub mod synth;

pub use capmodel::CapacitorParams;
pub use layout::{ElectrodeStrip, SensorCell, SensorLayout, SensorMesh};
pub use readout::{MeasurementPlan, TimerConfig};
