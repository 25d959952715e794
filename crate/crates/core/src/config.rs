//! TOML model and analysis files.
//!
//! ```toml
//! [strut]
//! stiffness = 5000.0      # N/m
//! damping = 7.2           # N s/m
//! length = 0.3            # m
//! top_mass = 0.6          # kg
//! bottom_mass = 0.4
//! top_cm = 0.7            # fraction of length from the top pin
//! bottom_cm = 0.2         # fraction of length from the base joint
//! top_inertia = 2.5e-3    # kg m^2, about the part's centre of mass
//! bottom_inertia = 1.9e-3
//!
//! [payload]
//! mass = 25.0
//! inertia = [0.7608, 0.7608, 0.48]
//!
//! [geometry]              # omit for a planar bipod
//! top_radius = 0.245
//! pair_angle = "2pi/5 rad"
//! plane_angle = "108 deg"
//! pin_separation = "30 deg"
//! cm_depth = 0.03
//! formulation = "link"    # or "bipod"
//!
//! [analysis]              # all optional
//! fmin = 0.1
//! fmax = 1000.0
//! points_per_decade = 30
//! amplitude = 1e-6
//! rel_tol = 1e-9
//! ramp = 59.1
//! settle_periods = 10.0
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Deserializer};

use crate::bipod2d::StrutProperties;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::model::{build_hexapod, Formulation, GeometryParams, ManipulatorModel, PayloadProperties};
use crate::presets::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

/// Parses an angle such as `72 deg`, `1.2566 rad` or `2pi/5 rad`.
///
/// A value without a unit is accepted only when `default` is given.
pub fn parse_angle(text: &str, default: Option<AngleUnit>) -> Result<f64> {
    let bad = |why: &str| Error::Config(format!("angle `{text}`: {why}"));
    let t = text.trim();
    let (value, unit) = if let Some(v) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
        (v, AngleUnit::Degrees)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, AngleUnit::Radians)
    } else {
        (t, default.ok_or_else(|| bad("needs a `deg` or `rad` suffix"))?)
    };
    let v = parse_pi_expr(value.trim()).ok_or_else(|| bad("expected a number or a multiple of pi"))?;
    if !v.is_finite() {
        return Err(bad("must be finite"));
    }
    Ok(match unit {
        AngleUnit::Degrees => v.to_radians(),
        AngleUnit::Radians => v,
    })
}

// `x`, or `[x][*]pi[/y]` with optional sign.
fn parse_pi_expr(s: &str) -> Option<f64> {
    let Some(at) = s.find("pi") else {
        return s.parse().ok();
    };
    let (coef, rest) = (&s[..at], &s[at + 2..]);
    let coef = coef.trim().trim_end_matches('*').trim();
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse().ok()?,
    };
    let rest = rest.trim();
    let d = match rest.strip_prefix('/') {
        Some(den) => den.trim().parse().ok()?,
        None if rest.is_empty() => 1.0,
        None => return None,
    };
    Some(c * PI / d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_angle(&s, None).map(Angle).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadSection {
    pub mass: f64,
    /// Principal inertias, kg m^2; needed for hexapods.
    pub inertia: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub top_radius: f64,
    pub pair_angle: Angle,
    pub plane_angle: Angle,
    pub pin_separation: Angle,
    pub cm_depth: f64,
    #[serde(default)]
    pub formulation: Formulation,
}

impl GeometrySection {
    pub fn params(&self) -> GeometryParams {
        GeometryParams {
            top_radius: self.top_radius,
            pair_angle: self.pair_angle.0,
            plane_angle: self.plane_angle.0,
            pin_separation: self.pin_separation.0,
            cm_depth: self.cm_depth,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub fmin: Option<f64>,
    pub fmax: Option<f64>,
    pub points_per_decade: Option<usize>,
    pub amplitude: Option<f64>,
    pub rel_tol: Option<f64>,
    pub ramp: Option<f64>,
    pub settle_periods: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub strut: StrutProperties,
    pub payload: PayloadSection,
    pub geometry: Option<GeometrySection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.strut.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn preset(&self) -> Result<Preset> {
        let Some(geometry) = &self.geometry else {
            if !(self.payload.mass > 0.0) {
                return Err(Error::Config("payload mass must be positive".into()));
            }
            return Ok(Preset::Bipod { strut: self.strut, payload_mass: self.payload.mass });
        };
        let inertia = self
            .payload
            .inertia
            .ok_or_else(|| Error::Config("a hexapod needs `payload.inertia`".into()))?;
        Ok(Preset::Hexapod {
            geometry: geometry.params(),
            strut: self.strut,
            payload: PayloadProperties::new(self.payload.mass, Vec3::from(inertia))?,
        })
    }

    pub fn formulation(&self) -> Formulation {
        self.geometry.as_ref().map(|g| g.formulation).unwrap_or_default()
    }

    pub fn model(&self) -> Result<ManipulatorModel> {
        match self.preset()? {
            Preset::Hexapod { geometry, strut, payload } => {
                build_hexapod(&geometry, &strut, &payload, self.formulation())
            }
            Preset::Bipod { .. } => Err(Error::Config("no [geometry] section: the file describes a planar bipod".into())),
        }
    }
}
