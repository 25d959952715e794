//! Counting rules for frames and spatial mechanisms.

use std::fmt;

use crate::error::{Error, Result};

/// Joint, member and support-reaction counts of a planar frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Maxwell2dCounts {
    pub joints: u32,
    pub members: u32,
    pub reactions: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determinacy {
    /// Fewer constraints than equilibrium equations; the frame is a mechanism.
    Mechanism,
    /// Constraint count matches; necessary but not sufficient for rigidity.
    IsostaticCandidate,
    /// Redundant constraints.
    StaticallyIndeterminate,
}

impl fmt::Display for Determinacy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Determinacy::Mechanism => "kinematically indeterminate (mechanism)",
            Determinacy::IsostaticCandidate => "isostatic candidate",
            Determinacy::StaticallyIndeterminate => "statically indeterminate",
        })
    }
}

/// Returns `r + s - 2j` and its classification.
pub fn maxwell2d(c: Maxwell2dCounts) -> (i64, Determinacy) {
    let n = c.reactions as i64 + c.members as i64 - 2 * c.joints as i64;
    let class = match n {
        n if n < 0 => Determinacy::Mechanism,
        0 => Determinacy::IsostaticCandidate,
        _ => Determinacy::StaticallyIndeterminate,
    };
    (n, class)
}

/// Moving-body count, internal degrees of freedom and the freedom of each joint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mobility3dCounts {
    pub bodies: u32,
    pub internal_dofs: u32,
    pub joint_freedoms: Vec<u32>,
}

impl Mobility3dCounts {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.joint_freedoms.iter().find(|&&f| f > 6) {
            return Err(Error::invalid("joint_freedoms", format!("joint freedom {f} exceeds 6")));
        }
        Ok(())
    }
}

/// Spatial mobility `6n + b - Σ(6 - f_i)`.
///
/// `internal_dofs` is taken as given; callers decide whether it counts
/// one prismatic freedom per strut or something else.
pub fn mobility3d(c: &Mobility3dCounts) -> Result<i64> {
    c.validate()?;
    let constraints: i64 = c.joint_freedoms.iter().map(|&f| 6 - f as i64).sum();
    Ok(6 * c.bodies as i64 + c.internal_dofs as i64 - constraints)
}
