//! Time integration under ramped sinusoidal loads, linearisation about
//! rest and modal analysis.

pub mod dop853;
mod modes;

pub use modes::{linearize_at_rest, natural_frequencies, ModalReport, Mode, ModeKind};

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::math::Vec12;
use crate::model::{Load, ManipulatorModel, ReactionOutputs};

/// Payload load channel in body axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputChannel {
    Fx,
    Fy,
    Fz,
    Tx,
    Ty,
    Tz,
}

impl InputChannel {
    pub const ALL: [InputChannel; 6] = [Self::Fx, Self::Fy, Self::Fz, Self::Tx, Self::Ty, Self::Tz];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Unit load pattern `[force, torque]`.
    pub fn direction(self) -> [f64; 6] {
        let mut d = [0.0; 6];
        d[self.index()] = 1.0;
        d
    }

    pub fn unit(self) -> &'static str {
        if self.index() < 3 {
            "N"
        } else {
            "N*m"
        }
    }
}

impl fmt::Display for InputChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["Fx", "Fy", "Fz", "Tx", "Ty", "Tz"][self.index()])
    }
}

impl FromStr for InputChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('_', "").to_ascii_lowercase();
        let i = ["fx", "fy", "fz", "tx", "ty", "tz"]
            .iter()
            .position(|c| *c == key)
            .ok_or_else(|| Error::invalid("input channel", format!("`{s}` is not one of Fx Fy Fz Tx Ty Tz")))?;
        Ok(Self::ALL[i])
    }
}

/// Ramped sinusoidal load on the payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationSpec {
    /// Load pattern `[Fx, Fy, Fz, Tx, Ty, Tz]` scaled by `amplitude`.
    pub direction: [f64; 6],
    pub frequency: f64,
    pub amplitude: f64,
    pub ramp: f64,
    pub duration: f64,
}

impl ExcitationSpec {
    pub fn new(channel: InputChannel, frequency: f64, amplitude: f64, ramp: f64, duration: f64) -> Result<Self> {
        Self::along(channel.direction(), frequency, amplitude, ramp, duration)
    }

    pub fn along(direction: [f64; 6], frequency: f64, amplitude: f64, ramp: f64, duration: f64) -> Result<Self> {
        let s = Self { direction, frequency, amplitude, ramp, duration };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid("frequency", "must be positive"));
        }
        if !(self.ramp > 0.0) {
            return Err(Error::invalid("ramp", "must be positive"));
        }
        if !(self.duration > self.ramp) || !self.duration.is_finite() {
            return Err(Error::invalid("duration", "must exceed the ramp time"));
        }
        if !self.amplitude.is_finite() || self.direction.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn load(&self, t: f64) -> Load {
        let a = excitation_signal(self, t);
        Load::from_array(self.direction.map(|d| d * a))
    }
}

/// Ramp envelope times the carrier, scaled by the amplitude.
pub fn excitation_signal(spec: &ExcitationSpec, t: f64) -> f64 {
    let carrier = (TAU * spec.frequency * t).sin();
    let envelope = if t <= 0.0 {
        0.0
    } else if t < spec.ramp {
        (PI * t / (2.0 * spec.ramp)).sin().powi(2)
    } else {
        1.0
    };
    spec.amplitude * envelope * carrier
}

/// Default ramp: at least 40 cycles, and five decay times of the least
/// damped mode when it is damped.
pub fn default_ramp(frequency: f64, min_damping_ratio: f64) -> f64 {
    let cycles = 40.0 / frequency;
    if min_damping_ratio > 0.0 {
        cycles.max(5.0 / (TAU * frequency * min_damping_ratio))
    } else {
        cycles
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub samples_per_period: usize,
    /// Samples earlier than this are not stored.
    pub record_from: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-24, samples_per_period: 40, record_from: 0.0 }
    }
}

// Blocks are positions, angles, velocities and angular rates. Components that
// symmetry keeps at zero carry only roundoff, some 1e-15 of the largest block.
const BLOCK_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec12>,
    pub reactions: Vec<ReactionOutputs>,
    pub stats: dop853::Stats,
}

/// Integrates the model from rest under `excitation` until its duration.
pub fn integrate(
    model: &ManipulatorModel,
    excitation: &ExcitationSpec,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    integrate_from(model, excitation, Vec12::zeros(), opts)
}

/// As [`integrate`] but from an arbitrary initial state.
pub fn integrate_from(
    model: &ManipulatorModel,
    excitation: &ExcitationSpec,
    y0: Vec12,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    excitation.validate()?;
    if opts.samples_per_period < 10 {
        return Err(Error::invalid("samples_per_period", "must be at least 10"));
    }
    let spacing = excitation.period() / opts.samples_per_period as f64;
    let first = (opts.record_from.max(0.0) / spacing).ceil() as usize;
    let last = (excitation.duration / spacing * (1.0 + 1e-12)).floor() as usize;
    let times: Vec<f64> = (first..=last).map(|k| (k as f64 * spacing).min(excitation.duration)).collect();

    let settings = dop853::Options {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: excitation.period() / 10.0,
        block: 3,
        block_floor: BLOCK_FLOOR,
        ..Default::default()
    };
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        reactions: Vec::with_capacity(times.len()),
        stats: Default::default(),
    };
    let rhs = |t: f64, y: &Vec12| model.derivative(y, &excitation.load(t));
    traj.stats = dop853::integrate(rhs, 0.0, y0, excitation.duration, &times, &settings, |t, y| {
        traj.reactions.push(model.reactions(y, &excitation.load(t))?);
        traj.times.push(t);
        traj.states.push(*y);
        Ok(())
    })?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn spec() -> ExcitationSpec {
        ExcitationSpec::new(InputChannel::Fz, 2.0, 3.0, 4.0, 10.0).unwrap()
    }

    #[test]
    fn signal_envelope() {
        let s = spec();
        assert_eq!(excitation_signal(&s, 0.0), 0.0);
        let at = excitation_signal(&s, s.ramp);
        assert!((at - 3.0 * (TAU * 2.0 * s.ramp).sin()).abs() < 1e-12);
        // envelope slope vanishes at both ends of the ramp
        let env = |t: f64| (PI * t / (2.0 * s.ramp)).sin().powi(2);
        let h = 1e-6;
        assert!(((env(h) - env(0.0)) / h).abs() < 1e-5);
        assert!(((env(s.ramp) - env(s.ramp - h)) / h).abs() < 1e-5);
    }

    #[test]
    fn channel_names_round_trip() {
        for c in InputChannel::ALL {
            assert_eq!(c.to_string().parse::<InputChannel>().unwrap(), c);
        }
        assert_eq!("F_y".parse::<InputChannel>().unwrap(), InputChannel::Fy);
        assert!("Fw".parse::<InputChannel>().is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ExcitationSpec::new(InputChannel::Fx, 0.0, 1.0, 1.0, 2.0).is_err());
        assert!(ExcitationSpec::new(InputChannel::Fx, 1.0, 1.0, 0.0, 2.0).is_err());
        assert!(ExcitationSpec::new(InputChannel::Fx, 1.0, 1.0, 3.0, 2.0).is_err());
    }

    #[test]
    fn default_ramp_covers_decay() {
        assert_eq!(default_ramp(10.0, 0.0), 4.0);
        let r = default_ramp(0.8, 0.007);
        assert!((r - 5.0 / (TAU * 0.8 * 0.007)).abs() < 1e-12);
    }

    #[test]
    fn zero_load_keeps_rest() {
        let model = presets::model("hexapod-1-cubic").unwrap();
        let s = ExcitationSpec { amplitude: 0.0, ..spec() };
        let traj = integrate(&model, &s, &IntegrationOptions::default()).unwrap();
        assert!(traj.states.iter().all(|y| y.norm() < 1e-12));
        assert_eq!(traj.times.len(), 801);
    }

    #[test]
    fn samples_are_uniform_and_dense_enough() {
        let model = presets::model("hexapod-2-conic").unwrap();
        let s = ExcitationSpec::new(InputChannel::Fx, 5.0, 1.0, 1.0, 2.0).unwrap();
        let traj = integrate(&model, &s, &IntegrationOptions::default()).unwrap();
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
            assert!(w[1] - w[0] <= 1.0 / (10.0 * s.frequency));
        }
        assert_eq!(*traj.times.last().unwrap(), 2.0);
    }
}
