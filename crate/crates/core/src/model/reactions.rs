use super::{JointMotion, Load, ManipulatorModel};
use crate::error::Result;
use crate::math::{skew, Mat3, Vec12, Vec3};

/// Forces and moments passed to the ground at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionOutputs {
    /// Force transmitted by each frame, world axes.
    pub frame_forces: Vec<Vec3>,
    pub total_force: Vec3,
    /// Moment about the model's ground point.
    pub ground_moment: Vec3,
    /// World position of each slider, one per strut.
    pub slider_positions: Vec<Vec3>,
    /// Roller reaction moment of each slider in its strut frame.
    pub slider_moments: Vec<Vec3>,
}

impl ManipulatorModel {
    /// Spring-damper force of each frame in world axes and their sum.
    pub fn reaction_forces(&self, motion: &[JointMotion]) -> (Vec<Vec3>, Vec3) {
        let (k, c) = (self.strut.stiffness, self.strut.damping);
        let forces: Vec<Vec3> = self
            .frames
            .iter()
            .zip(&self.cache)
            .zip(motion)
            .map(|((f, cache), m)| {
                f.rotation * (cache.matrices.projector * (m.displacement * k + m.velocity * c))
            })
            .collect();
        let mut total = Vec3::zeros();
        for f in &forces {
            total += f;
        }
        (forces, total)
    }

    /// Moment of the strut forces about `point` and the slider positions.
    pub fn ground_moment(&self, point: &Vec3, motion: &[JointMotion]) -> (Vec3, Vec<Vec3>) {
        let (k, c) = (self.strut.stiffness, self.strut.damping);
        let len = self.strut.length;
        let mut moment = Vec3::zeros();
        let mut sliders = Vec::with_capacity(self.strut_count());
        for (f, m) in self.frames.iter().zip(motion) {
            for axis in f.kind.axes() {
                let e = axis.unit();
                let along = e * e.transpose();
                let slider = f.rotation * ((Mat3::identity() - along) * m.displacement + e * len) + f.anchor;
                let force = f.rotation * (along * (m.displacement * k + m.velocity * c));
                moment -= skew(&(point - slider)) * force;
                sliders.push(slider);
            }
        }
        (moment, sliders)
    }

    /// Roller moments from the pin accelerations, one per strut.
    pub fn slider_moments(&self, accelerations: &[Vec3]) -> Vec<Vec3> {
        let s = &self.strut;
        let ms = s.mass();
        let scale = s.mean_cm() * s.length * ms;
        self.frames
            .iter()
            .zip(accelerations)
            .flat_map(|(f, a)| f.kind.axes().iter().map(move |axis| axis.unit().cross(a) * scale))
            .collect()
    }

    /// All reaction outputs at state `y` under `load`.
    pub fn reactions(&self, y: &Vec12, load: &Load) -> Result<ReactionOutputs> {
        let yd = self.derivative(y, load)?;
        let motion = self.joint_kinematics(y);
        let (frame_forces, total_force) = self.reaction_forces(&motion);
        let (ground_moment, slider_positions) = self.ground_moment(&self.ground_point, &motion);
        let accel: Vec3 = yd.fixed_rows::<3>(6).into();
        let angular: Vec3 = yd.fixed_rows::<3>(9).into();
        let slider_moments = self.slider_moments(&self.joint_accelerations(y, &accel, &angular));
        Ok(ReactionOutputs { frame_forces, total_force, ground_moment, slider_positions, slider_moments })
    }
}
