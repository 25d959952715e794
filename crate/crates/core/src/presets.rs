//! Named, reproducible model definitions.

use std::f64::consts::PI;

use crate::bipod2d::StrutProperties;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::model::{build_hexapod, Formulation, GeometryParams, ManipulatorModel, PayloadProperties};

pub const BIPOD: &str = "bipod-table1";
pub const HEXAPODS: [&str; 3] = ["hexapod-1-cubic", "hexapod-2-conic", "hexapod-3-general"];
const MASSLESS_PREFIX: &str = "massless-";

pub const PAYLOAD_MASS: f64 = 25.0;

pub fn table_strut() -> StrutProperties {
    StrutProperties {
        stiffness: 5.0e3,
        damping: 7.2,
        length: 0.3,
        top_mass: 0.6,
        bottom_mass: 0.4,
        top_cm: 0.7,
        bottom_cm: 0.2,
        top_inertia: 2.5e-3,
        bottom_inertia: 1.9e-3,
    }
}

pub fn hexapod_payload() -> PayloadProperties {
    PayloadProperties::new(PAYLOAD_MASS, Vec3::new(0.7608, 0.7608, 0.48)).expect("valid payload")
}

/// Platform layout of a named hexapod (a `massless-` prefix is accepted).
pub fn geometry(name: &str) -> Result<GeometryParams> {
    let base = GeometryParams {
        top_radius: 0.245,
        pair_angle: PI / 2.0,
        plane_angle: PI / 2.0,
        pin_separation: 0.0,
        cm_depth: 0.03,
    };
    match name.strip_prefix(MASSLESS_PREFIX).unwrap_or(name) {
        "hexapod-1-cubic" => Ok(GeometryParams { plane_angle: 2.0_f64.sqrt().atan(), ..base }),
        "hexapod-2-conic" => Ok(base),
        "hexapod-3-general" => Ok(GeometryParams {
            pair_angle: 2.0 * PI / 5.0,
            plane_angle: 3.0 * PI / 5.0,
            pin_separation: PI / 6.0,
            ..base
        }),
        _ => Err(unknown(name)),
    }
}

/// Every preset name.
pub fn names() -> Vec<String> {
    std::iter::once(BIPOD)
        .chain(HEXAPODS)
        .flat_map(|n| [n.to_string(), format!("{MASSLESS_PREFIX}{n}")])
        .collect()
}

fn unknown(name: &str) -> Error {
    Error::UnknownPreset { name: name.to_string(), available: names().join(", ") }
}

#[derive(Debug, Clone)]
pub enum Preset {
    /// Planar bipod inputs.
    Bipod { strut: StrutProperties, payload_mass: f64 },
    Hexapod { geometry: GeometryParams, strut: StrutProperties, payload: PayloadProperties },
}

pub fn load(name: &str) -> Result<Preset> {
    let (massless, base) = match name.strip_prefix(MASSLESS_PREFIX) {
        Some(rest) => (true, rest),
        None => (false, name),
    };
    let strut = if massless { table_strut().massless() } else { table_strut() };
    if base == BIPOD {
        return Ok(Preset::Bipod { strut, payload_mass: PAYLOAD_MASS });
    }
    if !HEXAPODS.contains(&base) {
        return Err(unknown(name));
    }
    Ok(Preset::Hexapod { geometry: geometry(base)?, strut, payload: hexapod_payload() })
}

pub fn model_with(name: &str, formulation: Formulation) -> Result<ManipulatorModel> {
    match load(name)? {
        Preset::Hexapod { geometry, strut, payload } => build_hexapod(&geometry, &strut, &payload, formulation),
        Preset::Bipod { .. } => Err(Error::Config(format!("`{name}` is a planar bipod preset, not a 3D model"))),
    }
}

/// A hexapod preset in the per-link formulation.
pub fn model(name: &str) -> Result<ManipulatorModel> {
    model_with(name, Formulation::Link)
}
