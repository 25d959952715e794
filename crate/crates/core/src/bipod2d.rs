//! Closed-form planar analysis of a bipod with perpendicular struts and
//! pin-pin joints.
//!
//! Frequencies are in Hz at the API boundary.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::Complex;
use serde::Deserialize;

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Complex response along the two base-joint axes.
pub type Tf2 = [Complex64; 2];

/// Stiffness, damping and the two-part mass split of a single strut.
///
/// The strut is modelled as a top and a bottom rigid part joined by a
/// spring-damper; `top_cm` and `bottom_cm` locate each part's centre of
/// mass as a fraction of the strut length from its outer pin.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrutProperties {
    pub stiffness: f64,
    pub damping: f64,
    pub length: f64,
    pub top_mass: f64,
    pub bottom_mass: f64,
    pub top_cm: f64,
    pub bottom_cm: f64,
    pub top_inertia: f64,
    pub bottom_inertia: f64,
}

impl StrutProperties {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.stiffness,
            self.damping,
            self.length,
            self.top_mass,
            self.bottom_mass,
            self.top_cm,
            self.bottom_cm,
            self.top_inertia,
            self.bottom_inertia,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("strut", "all properties must be finite"));
        }
        if self.stiffness <= 0.0 {
            return Err(Error::invalid("stiffness", "must be positive"));
        }
        if self.length <= 0.0 {
            return Err(Error::invalid("length", "must be positive"));
        }
        if self.damping < 0.0 {
            return Err(Error::invalid("damping", "must be non-negative"));
        }
        if self.top_mass < 0.0 || self.bottom_mass < 0.0 {
            return Err(Error::invalid("mass", "strut part masses must be non-negative"));
        }
        if self.top_inertia < 0.0 || self.bottom_inertia < 0.0 {
            return Err(Error::invalid("inertia", "strut part inertias must be non-negative"));
        }
        for (name, eta) in [("top_cm", self.top_cm), ("bottom_cm", self.bottom_cm)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::invalid(name, "centre-of-mass fraction must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Total strut mass.
    pub fn mass(&self) -> f64 {
        self.top_mass + self.bottom_mass
    }

    /// Mass-weighted centre-of-mass fraction of the whole strut.
    pub fn mean_cm(&self) -> f64 {
        let m = self.mass();
        if m == 0.0 {
            0.0
        } else {
            (self.top_cm * self.top_mass + self.bottom_cm * self.bottom_mass) / m
        }
    }

    /// Same strut with every mass and inertia set to zero.
    pub fn massless(&self) -> Self {
        Self { top_mass: 0.0, bottom_mass: 0.0, top_inertia: 0.0, bottom_inertia: 0.0, ..*self }
    }

    /// Same strut with the damper removed.
    pub fn undamped(&self) -> Self {
        Self { damping: 0.0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipodCoefficients {
    /// Effective mass seen by the axial strut.
    pub dyn_mass: f64,
    /// Inertia of the shear strut about its base pin.
    pub strut_inertia: f64,
    /// Shear-to-axial force ratio at high frequency.
    pub lambda: f64,
}

pub fn coefficients(strut: &StrutProperties, payload_mass: f64) -> Result<BipodCoefficients> {
    strut.validate()?;
    if !(payload_mass > 0.0) || !payload_mass.is_finite() {
        return Err(Error::invalid("payload_mass", "must be positive"));
    }
    let s = strut;
    let l2 = s.length * s.length;
    let dyn_mass = payload_mass + s.top_mass + s.top_cm * s.top_mass + s.bottom_cm * s.bottom_mass;
    let strut_inertia = s.top_inertia
        + s.bottom_inertia
        + (s.top_mass * s.top_cm * s.top_cm + s.bottom_mass * s.bottom_cm * s.bottom_cm) * l2;
    let lambda = dyn_mass * l2 / (strut_inertia + (payload_mass + s.top_mass) * l2) - 1.0;
    Ok(BipodCoefficients { dyn_mass, strut_inertia, lambda })
}

/// Coefficients `[s², s¹, s⁰]` of the common denominator of both transfer functions.
pub fn denominator(coeffs: &BipodCoefficients, strut: &StrutProperties) -> [f64; 3] {
    let g = coeffs.lambda + 1.0;
    [coeffs.dyn_mass, g * strut.damping, g * strut.stiffness]
}

fn laplace(freq: f64) -> Complex64 {
    Complex64::new(0.0, TAU * freq)
}

fn eval_denominator(coeffs: &BipodCoefficients, strut: &StrutProperties, s: Complex64) -> Complex64 {
    let [a2, a1, a0] = denominator(coeffs, strut);
    s * s * a2 + s * a1 + a0
}

/// Input force to axial base reaction.
pub fn tf_axial(coeffs: &BipodCoefficients, strut: &StrutProperties, freq: f64) -> Complex64 {
    let s = laplace(freq);
    let num = -(coeffs.lambda + 1.0) * (s * strut.damping + strut.stiffness);
    num / eval_denominator(coeffs, strut, s)
}

/// Input force to shear base reaction.
pub fn tf_shear(coeffs: &BipodCoefficients, strut: &StrutProperties, freq: f64) -> Complex64 {
    let s = laplace(freq);
    let num = s * s * (coeffs.lambda * coeffs.dyn_mass);
    num / eval_denominator(coeffs, strut, s)
}

/// Reaction vectors at the two base joints for an input at angle `alpha`
/// from the first strut axis.
pub fn tf_base_joints(
    coeffs: &BipodCoefficients,
    strut: &StrutProperties,
    freq: f64,
    alpha: f64,
) -> (Tf2, Tf2) {
    let axial = tf_axial(coeffs, strut, freq);
    let shear = tf_shear(coeffs, strut, freq);
    let (sa, ca) = alpha.sin_cos();
    ([axial * ca, shear * sa], [shear * ca, axial * sa])
}

/// Semi-major axis of the ellipse traced by `Re(v e^{jt})`.
pub fn total_force_magnitude(v: &Tf2) -> f64 {
    let norm2 = v[0].norm_sqr() + v[1].norm_sqr();
    let sq = v[0] * v[0] + v[1] * v[1];
    ((norm2 + sq.norm()) / 2.0).sqrt()
}

/// Resonance of the real-strut bipod in Hz.
pub fn natural_frequency(coeffs: &BipodCoefficients, strut: &StrutProperties) -> f64 {
    ((coeffs.lambda + 1.0) * strut.stiffness / coeffs.dyn_mass).sqrt() / TAU
}

/// Stiffness and damping of the two ±45° struts projected onto a load
/// direction at `alpha`.
pub fn projected_stiffness(strut: &StrutProperties, alpha: f64) -> (f64, f64) {
    let mut k = 0.0;
    let mut c = 0.0;
    for axis in [-FRAC_PI_4, FRAC_PI_4] {
        let cos2 = (alpha - axis).cos().powi(2);
        k += strut.stiffness * cos2;
        c += strut.damping * cos2;
    }
    (k, c)
}

/// Equivalent one-degree-of-freedom stiffness and damping when strut mass
/// is neglected.
pub fn massless_equivalent(strut: &StrutProperties, payload_mass: f64) -> Result<(f64, f64)> {
    strut.validate()?;
    if !(payload_mass > 0.0) {
        return Err(Error::invalid("payload_mass", "must be positive"));
    }
    Ok(projected_stiffness(strut, 0.0))
}

/// Transmitted-force ratio of a one-degree-of-freedom isolator.
pub fn oscillator_tf(stiffness: f64, damping: f64, mass: f64, freq: f64) -> Complex64 {
    let s = laplace(freq);
    let num = s * damping + stiffness;
    num / (s * s * mass + num)
}
