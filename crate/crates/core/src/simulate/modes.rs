use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{Complex, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::math::{Mat12, Vec12};
use crate::model::{Load, ManipulatorModel};

const FD_STEP: f64 = 1e-7;
/// Share of an eigenvector's norm needed to call a mode axis-dominant.
const DOMINANCE: f64 = 0.8;
/// Relative frequency gap below which modes are reported as repeated.
const REPEAT_TOL: f64 = 1e-6;

/// Jacobian of the state derivative at rest with no load, by central
/// differences.
pub fn linearize_at_rest(model: &ManipulatorModel) -> Result<Mat12> {
    let rest = Vec12::zeros();
    let load = Load::default();
    let mut a = Mat12::zeros();
    for j in 0..12 {
        let h = FD_STEP * rest[j].abs().max(1.0);
        let mut plus = rest;
        plus[j] += h;
        let mut minus = rest;
        minus[j] -= h;
        let col = (model.derivative(&plus, &load)? - model.derivative(&minus, &load)?) / (2.0 * h);
        a.set_column(j, &col);
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// Coupled lateral translation and tilt.
    InPlane,
    VerticalTranslation,
    VerticalRotation,
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeKind::InPlane => "in-plane",
            ModeKind::VerticalTranslation => "vertical translation",
            ModeKind::VerticalRotation => "vertical rotation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Damped natural frequency in Hz.
    pub frequency: f64,
    /// Modulus of the eigenvalue over 2π.
    pub undamped_frequency: f64,
    pub damping_ratio: f64,
    pub kind: ModeKind,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalReport {
    /// Distinct modes in ascending frequency.
    pub modes: Vec<Mode>,
}

impl ModalReport {
    /// All frequencies with repeats expanded, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().flat_map(|m| std::iter::repeat(m.frequency).take(m.multiplicity)).collect()
    }

    pub fn of_kind(&self, kind: ModeKind) -> Vec<f64> {
        self.modes.iter().filter(|m| m.kind == kind).map(|m| m.frequency).collect()
    }

    pub fn min_damping_ratio(&self) -> f64 {
        self.modes.iter().map(|m| m.damping_ratio).fold(f64::INFINITY, f64::min)
    }
}

type CMat = SMatrix<Complex<f64>, 12, 12>;
type CVec = SVector<Complex<f64>, 12>;

/// Oscillatory modes of the linearised system, classified by the state
/// components that dominate each eigenvector.
pub fn natural_frequencies(model: &ManipulatorModel) -> Result<ModalReport> {
    let a = linearize_at_rest(model)?;
    let eig = a.complex_eigenvalues();
    let mut roots: Vec<Complex<f64>> = eig.iter().copied().filter(|l| l.im > 0.0).collect();
    roots.sort_by(|x, y| x.im.total_cmp(&y.im));

    let ac: CMat = a.map(|x| Complex::new(x, 0.0));
    let mut modes: Vec<Mode> = Vec::new();
    for root in roots {
        let v = eigenvector(&ac, root)?;
        let share = |idx: &[usize]| idx.iter().map(|&i| v[i].norm_sqr()).sum::<f64>() / v.norm_squared();
        let kind = if share(&[2, 8]) >= DOMINANCE {
            ModeKind::VerticalTranslation
        } else if share(&[3, 11]) >= DOMINANCE {
            ModeKind::VerticalRotation
        } else {
            ModeKind::InPlane
        };
        let mode = Mode {
            frequency: root.im / TAU,
            undamped_frequency: root.norm() / TAU,
            damping_ratio: -root.re / root.norm(),
            kind,
            multiplicity: 1,
        };
        match modes.last_mut() {
            Some(prev)
                if prev.kind == kind
                    && (mode.frequency - prev.frequency).abs() <= REPEAT_TOL * mode.frequency =>
            {
                prev.multiplicity += 1
            }
            _ => modes.push(mode),
        }
    }
    Ok(ModalReport { modes })
}

/// Inverse iteration with a shift just off the eigenvalue.
fn eigenvector(a: &CMat, root: Complex<f64>) -> Result<CVec> {
    let shift = root * (1.0 + 1e-10);
    let lu = (a - CMat::identity() * shift).lu();
    let mut v = CVec::from_fn(|i, _| Complex::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    for _ in 0..3 {
        v = lu.solve(&v).ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
        v /= Complex::new(v.norm(), 0.0);
    }
    Ok(v)
}
