//! Dynamics of pin-slider bipods and hexapods used as passive
//! microvibration isolators.
//!
//! The crate covers the planar bipod transfer functions in closed form,
//! counting rules for frames and mechanisms, the full nonlinear rigid-body
//! model of a payload carried by spring-damper struts with massive ends,
//! time integration, linearisation about rest and frequency-response
//! extraction from steady-state simulation.

pub mod bipod2d;
pub mod config;
pub mod error;
pub mod math;
pub mod model;
pub mod presets;
pub mod series;
pub mod simulate;
pub mod structure;
pub mod tfx;

pub use error::{Error, Result};
