use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use super::{Axis, LinkFrame, LinkKind, ManipulatorModel, PayloadProperties};
use crate::bipod2d::StrutProperties;
use crate::error::{Error, Result};
use crate::math::{rot313, Mat3, Vec3};

/// Hexapod layout built from three identical bipods spaced 120° apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    /// Radius of the pin circle on the payload platform.
    pub top_radius: f64,
    /// Angle between the two struts of a bipod.
    pub pair_angle: f64,
    /// Angle between each bipod plane and the platform.
    pub plane_angle: f64,
    /// Angular separation of the two pins of a bipod on the pin circle.
    pub pin_separation: f64,
    /// Height of the platform plane above the payload centre of mass.
    pub cm_depth: f64,
}

impl GeometryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.top_radius > 0.0) {
            return Err(Error::invalid("top_radius", "must be positive"));
        }
        if !(self.pair_angle > 0.0 && self.pair_angle < PI) {
            return Err(Error::invalid("pair_angle", "must lie in (0, pi)"));
        }
        if !(self.plane_angle > 0.0 && self.plane_angle < PI) {
            return Err(Error::invalid("plane_angle", "must lie in (0, pi)"));
        }
        if !self.pin_separation.is_finite() || !self.cm_depth.is_finite() {
            return Err(Error::invalid("geometry", "angles and offsets must be finite"));
        }
        Ok(())
    }

    /// Radius of the slider circle on the base for struts of `length`.
    pub fn base_radius(&self, length: f64) -> f64 {
        let rotation = rot313(0.0, self.plane_angle - PI, FRAC_PI_2 + self.pair_angle / 2.0);
        let foot = pin(self, FRAC_PI_2 + self.pin_separation / 2.0) + rotation * Vec3::x() * length;
        foot.xy().norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// One frame per strut.
    #[default]
    Link,
    /// One frame per bipod; needs coincident pins and perpendicular struts.
    Bipod,
}

const BIPOD_TOLERANCE: f64 = 1e-12;

/// Builds the six-strut platform in either formulation.
pub fn build_hexapod(
    p: &GeometryParams,
    strut: &StrutProperties,
    payload: &PayloadProperties,
    formulation: Formulation,
) -> Result<ManipulatorModel> {
    p.validate()?;
    strut.validate()?;
    let lean = p.plane_angle - PI;
    let mut frames = Vec::with_capacity(6);
    for j in 0..3 {
        let azimuth = j as f64 * TAU / 3.0;
        match formulation {
            Formulation::Link => {
                for sign in [1.0, -1.0] {
                    let rotation = rot313(azimuth, lean, FRAC_PI_2 + sign * p.pair_angle / 2.0);
                    let at = FRAC_PI_2 + azimuth + sign * p.pin_separation / 2.0;
                    frames.push(LinkFrame {
                        rotation,
                        anchor: pin(p, at),
                        kind: LinkKind::Single(Axis::X),
                    });
                }
            }
            Formulation::Bipod => {
                if p.pin_separation.abs() > BIPOD_TOLERANCE {
                    return Err(Error::Config(
                        "bipod formulation requires coincident pins (zero pin separation)".into(),
                    ));
                }
                if (p.pair_angle - FRAC_PI_2).abs() > BIPOD_TOLERANCE {
                    return Err(Error::Config(
                        "bipod formulation requires perpendicular struts (pair angle of 90 deg)".into(),
                    ));
                }
                let rotation = rot313(azimuth, lean, (PI - p.pair_angle) / 2.0);
                frames.push(LinkFrame {
                    rotation,
                    anchor: pin(p, FRAC_PI_2 + azimuth),
                    kind: LinkKind::Bipod,
                });
            }
        }
    }
    // base centre: slider rest positions all share one height
    let first = &frames[0];
    let foot = first.rotation * Vec3::x() * strut.length + first.anchor;
    let ground = Vec3::new(0.0, 0.0, foot.z);
    ManipulatorModel::new(frames, *strut, payload.clone(), ground)
}

fn pin(p: &GeometryParams, angle: f64) -> Vec3 {
    Vec3::new(p.top_radius * angle.cos(), p.top_radius * angle.sin(), p.cm_depth)
}

/// Minimal models used to cross-check the formulations.
#[derive(Debug, Clone)]
pub struct DegenerateModels {
    /// One perpendicular bipod pinned at the centre of mass.
    pub bipod: ManipulatorModel,
    /// The same two struts as separate single-link frames.
    pub split: ManipulatorModel,
    /// A payload hanging from one vertical strut.
    pub single: ManipulatorModel,
}

pub fn degenerate_models(strut: &StrutProperties, payload: &PayloadProperties) -> Result<DegenerateModels> {
    // struts leave the pin at ±45° in the x-z plane, both pointing down
    let a = FRAC_1_SQRT_2;
    let first = Vec3::new(-a, 0.0, -a);
    let second = Vec3::new(a, 0.0, -a);
    let rotation = Mat3::from_columns(&[first, second, first.cross(&second)]);
    let frame = |kind| LinkFrame { rotation, anchor: Vec3::zeros(), kind };
    let ground = Vec3::new(0.0, 0.0, -a * strut.length);

    let bipod = ManipulatorModel::new(vec![frame(LinkKind::Bipod)], *strut, payload.clone(), ground)?;
    let split = ManipulatorModel::new(
        vec![frame(LinkKind::Single(Axis::X)), frame(LinkKind::Single(Axis::Y))],
        *strut,
        payload.clone(),
        ground,
    )?;
    let down = Mat3::from_columns(&[-Vec3::z(), Vec3::y(), Vec3::x()]);
    let single = ManipulatorModel::new(
        vec![LinkFrame { rotation: down, anchor: Vec3::zeros(), kind: LinkKind::Single(Axis::X) }],
        *strut,
        payload.clone(),
        Vec3::new(0.0, 0.0, -strut.length),
    )?;
    Ok(DegenerateModels { bipod, split, single })
}
