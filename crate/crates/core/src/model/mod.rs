//! Nonlinear rigid-body model of a payload carried by pin-slider struts.
//!
//! The world frame has its origin at the nominal payload centre of mass.
//! The state is `y = [position, 3-2-1 angles, velocity, body angular velocity]`.

mod geometry;
mod reactions;

pub use geometry::{build_hexapod, degenerate_models, DegenerateModels, Formulation, GeometryParams};
pub use reactions::ReactionOutputs;

use crate::bipod2d::StrutProperties;
use crate::error::{Error, Result};
use crate::math::{euler_basis, rot321, rot321_minus_identity, skew, solve_linear, Mat12, Mat3, Vec12, Vec3};

/// Local axis a strut is aligned with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::x(),
            Axis::Y => Vec3::y(),
        }
    }
}

/// Which struts hang from a pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// One strut along the given local axis.
    Single(Axis),
    /// Two perpendicular struts along local x and y sharing the pin.
    Bipod,
}

impl LinkKind {
    pub fn axes(self) -> &'static [Axis] {
        match self {
            LinkKind::Single(Axis::X) => &[Axis::X],
            LinkKind::Single(Axis::Y) => &[Axis::Y],
            LinkKind::Bipod => &[Axis::X, Axis::Y],
        }
    }
}

/// A pin joint on the payload and the orientation of its strut frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFrame {
    /// Strut frame to world.
    pub rotation: Mat3,
    /// World position of the pin at rest.
    pub anchor: Vec3,
    pub kind: LinkKind,
}

/// Projector onto the constrained directions and strut mass scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMatrices {
    pub projector: Mat3,
    pub mass_scaling: Mat3,
}

impl LinkMatrices {
    pub fn new(kind: LinkKind, strut: &StrutProperties) -> Self {
        let ms = strut.mass();
        let ratio = if ms > 0.0 { strut.bottom_mass / ms } else { 0.0 };
        let projector = kind.axes().iter().fold(Mat3::zeros(), |p, a| {
            let e = a.unit();
            p + e * e.transpose()
        });
        let n = kind.axes().len() as f64;
        let mass_scaling = Mat3::identity() * n - projector * ratio;
        Self { projector, mass_scaling }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadProperties {
    pub mass: f64,
    /// Principal inertia tensor in body axes.
    pub inertia: Mat3,
    /// Orientation of the body frame at rest.
    pub rest_orientation: Mat3,
}

impl PayloadProperties {
    pub fn new(mass: f64, principal: Vec3) -> Result<Self> {
        let p = Self {
            mass,
            inertia: Mat3::from_diagonal(&principal),
            rest_orientation: Mat3::identity(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::invalid("payload mass", "must be positive"));
        }
        if !(0..3).all(|i| self.inertia[(i, i)] > 0.0) || self.inertia.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("payload inertia", "principal inertias must be positive"));
        }
        let r = &self.rest_orientation;
        if (r.transpose() * r - Mat3::identity()).norm() > 1e-12 || (r.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("rest orientation", "must be a proper rotation"));
        }
        Ok(())
    }
}

/// Force and torque applied to the payload, in body axes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Load {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Load {
    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            force: Vec3::new(v[0], v[1], v[2]),
            torque: Vec3::new(v[3], v[4], v[5]),
        }
    }
}

/// Payload state split into its four blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParts {
    pub position: Vec3,
    pub angles: Vec3,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
}

impl StateParts {
    pub fn of(y: &Vec12) -> Self {
        Self {
            position: y.fixed_rows::<3>(0).into(),
            angles: y.fixed_rows::<3>(3).into(),
            velocity: y.fixed_rows::<3>(6).into(),
            angular_velocity: y.fixed_rows::<3>(9).into(),
        }
    }

    pub fn to_vector(&self) -> Vec12 {
        let mut y = Vec12::zeros();
        y.fixed_rows_mut::<3>(0).copy_from(&self.position);
        y.fixed_rows_mut::<3>(3).copy_from(&self.angles);
        y.fixed_rows_mut::<3>(6).copy_from(&self.velocity);
        y.fixed_rows_mut::<3>(9).copy_from(&self.angular_velocity);
        y
    }

    pub fn attitude(&self) -> Mat3 {
        rot321(self.angles.x, self.angles.y, self.angles.z)
    }

    /// `attitude() - I`.
    pub fn attitude_step(&self) -> Mat3 {
        rot321_minus_identity(self.angles.x, self.angles.y, self.angles.z)
    }
}

/// Pin motion expressed in its strut frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMotion {
    pub displacement: Vec3,
    pub velocity: Vec3,
}

#[derive(Debug, Clone, Copy)]
struct FrameCache {
    body_anchor: Vec3,
    matrices: LinkMatrices,
    /// Mass scaling rotated into world axes.
    world_scaling: Mat3,
}

/// Payload, struts and link frames; immutable once built.
#[derive(Debug, Clone)]
pub struct ManipulatorModel {
    frames: Vec<LinkFrame>,
    strut: StrutProperties,
    payload: PayloadProperties,
    ground_point: Vec3,
    cache: Vec<FrameCache>,
    world_scaling_sum: Mat3,
}

impl ManipulatorModel {
    pub fn new(
        frames: Vec<LinkFrame>,
        strut: StrutProperties,
        payload: PayloadProperties,
        ground_point: Vec3,
    ) -> Result<Self> {
        strut.validate()?;
        payload.validate()?;
        if frames.is_empty() {
            return Err(Error::invalid("frames", "a manipulator needs at least one link"));
        }
        for f in &frames {
            let r = &f.rotation;
            if (r.transpose() * r - Mat3::identity()).norm() > 1e-12 || (r.determinant() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("frames", "link frame rotation must be a proper rotation"));
            }
        }
        let r0 = payload.rest_orientation;
        let cache: Vec<FrameCache> = frames
            .iter()
            .map(|f| {
                let matrices = LinkMatrices::new(f.kind, &strut);
                FrameCache {
                    body_anchor: r0.transpose() * f.anchor,
                    matrices,
                    world_scaling: f.rotation * matrices.mass_scaling * f.rotation.transpose(),
                }
            })
            .collect();
        let world_scaling_sum = cache.iter().fold(Mat3::zeros(), |s, c| s + c.world_scaling);
        Ok(Self { frames, strut, payload, ground_point, cache, world_scaling_sum })
    }

    pub fn frames(&self) -> &[LinkFrame] {
        &self.frames
    }

    pub fn strut(&self) -> &StrutProperties {
        &self.strut
    }

    pub fn payload(&self) -> &PayloadProperties {
        &self.payload
    }

    /// Point about which ground moments are reported.
    pub fn ground_point(&self) -> Vec3 {
        self.ground_point
    }

    pub fn link_matrices(&self, frame: usize) -> LinkMatrices {
        self.cache[frame].matrices
    }

    pub fn body_anchor(&self, frame: usize) -> Vec3 {
        self.cache[frame].body_anchor
    }

    /// Number of individual struts (a bipod frame carries two).
    pub fn strut_count(&self) -> usize {
        self.frames.iter().map(|f| f.kind.axes().len()).sum()
    }

    /// Copy of the model with modified strut properties.
    pub fn with_strut(&self, strut: StrutProperties) -> Result<Self> {
        Self::new(self.frames.clone(), strut, self.payload.clone(), self.ground_point)
    }

    fn local_motion(&self, i: usize, s: &StateParts, attitude: &Mat3) -> JointMotion {
        let f = &self.frames[i];
        let ub = self.cache[i].body_anchor;
        // (R - R0) ub, formed without cancellation so small rotations stay
        // accurate to full relative precision
        let offset = s.attitude_step() * ub + (Mat3::identity() - self.payload.rest_orientation) * ub;
        let rt = f.rotation.transpose();
        JointMotion {
            displacement: rt * (s.position + offset),
            velocity: rt * (s.velocity + attitude * s.angular_velocity.cross(&ub)),
        }
    }

    /// Displacement and velocity of every pin in its strut frame.
    pub fn joint_kinematics(&self, y: &Vec12) -> Vec<JointMotion> {
        let s = StateParts::of(y);
        let attitude = s.attitude();
        (0..self.frames.len()).map(|i| self.local_motion(i, &s, &attitude)).collect()
    }

    /// Pin accelerations in strut frames given the payload accelerations.
    pub fn joint_accelerations(&self, y: &Vec12, accel: &Vec3, angular_accel: &Vec3) -> Vec<Vec3> {
        let s = StateParts::of(y);
        let attitude = s.attitude();
        let w = s.angular_velocity;
        self.frames
            .iter()
            .zip(&self.cache)
            .map(|(f, c)| {
                let ub = c.body_anchor;
                let a = accel + attitude * (angular_accel.cross(&ub) + w.cross(&w.cross(&ub)));
                f.rotation.transpose() * a
            })
            .collect()
    }

    /// Mass matrix and right-hand side of `M ẏ = g`.
    pub fn assemble_system(&self, y: &Vec12, load: &Load) -> Result<(Mat12, Vec12)> {
        let s = StateParts::of(y);
        let basis = euler_basis(s.angles.y, s.angles.z)?;
        let attitude = s.attitude();
        let w = s.angular_velocity;
        let ms = self.strut.mass();
        let (k, c) = (self.strut.stiffness, self.strut.damping);
        let w_skew2 = skew(&w) * skew(&w);

        let mut coupling = Mat3::zeros();
        let mut rot_inertia = Mat3::zeros();
        let mut force = Vec3::zeros();
        let mut torque = Vec3::zeros();
        for (i, (f, cache)) in self.frames.iter().zip(&self.cache).enumerate() {
            let ub = cache.body_anchor;
            let m = self.local_motion(i, &s, &attitude);
            let rs = attitude * skew(&ub);
            let sw = cache.world_scaling * rs;
            coupling += sw;
            rot_inertia -= rs.transpose() * sw;
            let spring = f.rotation * (cache.matrices.projector * (m.displacement * k + m.velocity * c));
            let pin_force = spring + cache.world_scaling * (attitude * (w_skew2 * ub)) * ms;
            force += pin_force;
            torque += ub.cross(&(attitude.transpose() * pin_force));
        }

        let inertia = &self.payload.inertia;
        let mut mm = Mat12::zeros();
        mm.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
        mm.fixed_view_mut::<3, 3>(3, 3).copy_from(&basis);
        let trans = Mat3::identity() * self.payload.mass + self.world_scaling_sum * ms;
        mm.fixed_view_mut::<3, 3>(6, 6).copy_from(&trans);
        mm.fixed_view_mut::<3, 3>(6, 9).copy_from(&(-coupling * ms));
        mm.fixed_view_mut::<3, 3>(9, 6).copy_from(&(-coupling.transpose() * ms));
        mm.fixed_view_mut::<3, 3>(9, 9).copy_from(&(-rot_inertia * ms + inertia));
        debug_assert!({
            let b = mm.fixed_view::<6, 6>(6, 6);
            (b - b.transpose()).norm() <= 1e-10 * b.norm()
        });

        let mut g = Vec12::zeros();
        g.fixed_rows_mut::<3>(0).copy_from(&s.velocity);
        g.fixed_rows_mut::<3>(3).copy_from(&w);
        g.fixed_rows_mut::<3>(6).copy_from(&(attitude * load.force - force));
        g.fixed_rows_mut::<3>(9).copy_from(&(load.torque - torque - w.cross(&(inertia * w))));
        Ok((mm, g))
    }

    /// State derivative `ẏ = M⁻¹ g`.
    pub fn derivative(&self, y: &Vec12, load: &Load) -> Result<Vec12> {
        let (m, g) = self.assemble_system(y, load)?;
        solve_linear(&m, &g)
    }

    /// Payload kinetic energy plus strut kinetic and elastic energy.
    pub fn energy(&self, y: &Vec12) -> f64 {
        let s = StateParts::of(y);
        let w = s.angular_velocity;
        let ms = self.strut.mass();
        let k = self.strut.stiffness;
        let mut e = 0.5 * self.payload.mass * s.velocity.norm_squared()
            + 0.5 * w.dot(&(self.payload.inertia * w));
        for (m, c) in self.joint_kinematics(y).iter().zip(&self.cache) {
            let p = &c.matrices.projector;
            e += 0.5 * ms * m.velocity.dot(&(c.matrices.mass_scaling * m.velocity));
            e += 0.5 * k * (p * m.displacement).norm_squared();
        }
        e
    }
}
