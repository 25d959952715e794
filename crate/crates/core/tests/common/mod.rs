#![allow(dead_code)]

use nalgebra::Rotation3;
use pinslider::math::{Vec12, Vec3};
use pinslider::model::{Load, ManipulatorModel, StateParts};
use rand::rngs::StdRng;
use rand::Rng;

/// Body rates from 3-2-1 angle rates, written out term by term.
fn body_rates(angles: &Vec3, rates: &Vec3) -> Vec3 {
    let (pitch, roll) = (angles.y, angles.z);
    let (yaw_dot, pitch_dot, roll_dot) = (rates.x, rates.y, rates.z);
    Vec3::new(
        roll_dot - yaw_dot * pitch.sin(),
        pitch_dot * roll.cos() + yaw_dot * pitch.cos() * roll.sin(),
        -pitch_dot * roll.sin() + yaw_dot * pitch.cos() * roll.cos(),
    )
}

/// Equation residual for the candidate derivative `yd`, summed strut by strut
/// from pin kinematics and the forces each strut puts on its pin.
pub fn newton_euler_residual(model: &ManipulatorModel, y: &Vec12, yd: &Vec12, load: &Load) -> Vec12 {
    let s = StateParts::of(y);
    let d = StateParts::of(yd);
    let (yaw, pitch, roll) = (s.angles.x, s.angles.y, s.angles.z);
    let attitude = Rotation3::from_euler_angles(roll, pitch, yaw).into_inner();
    let w = s.angular_velocity;
    let (accel, alpha) = (d.velocity, d.angular_velocity);

    let strut = model.strut();
    let (k, c) = (strut.stiffness, strut.damping);
    let (m_strut, m_bottom) = (strut.top_mass + strut.bottom_mass, strut.bottom_mass);

    let mut force = model.payload().mass * accel - attitude * load.force;
    let inertia = model.payload().inertia;
    let mut torque = inertia * alpha + w.cross(&(inertia * w)) - load.torque;
    for (i, frame) in model.frames().iter().enumerate() {
        let ub = model.body_anchor(i);
        let stretch = s.position + attitude * ub - frame.anchor;
        let pin_velocity = s.velocity + attitude * w.cross(&ub);
        let pin_accel = accel + attitude * (alpha.cross(&ub) + w.cross(&w.cross(&ub)));
        for axis in frame.kind.axes() {
            let e = frame.rotation * axis.unit();
            let spring = e * (k * e.dot(&stretch) + c * e.dot(&pin_velocity));
            // the bottom end rides the slider and only follows transverse motion
            let inertial = pin_accel * m_strut - e * (m_bottom * e.dot(&pin_accel));
            let on_pin = spring + inertial;
            force += on_pin;
            torque += ub.cross(&(attitude.transpose() * on_pin));
        }
    }

    let mut r = Vec12::zeros();
    r.fixed_rows_mut::<3>(0).copy_from(&(d.position - s.velocity));
    r.fixed_rows_mut::<3>(3).copy_from(&(body_rates(&s.angles, &d.angles) - w));
    r.fixed_rows_mut::<3>(6).copy_from(&force);
    r.fixed_rows_mut::<3>(9).copy_from(&torque);
    r
}

/// Largest oracle mismatch relative to the size of the assembled terms.
pub fn oracle_mismatch(model: &ManipulatorModel, y: &Vec12, yd: &Vec12, load: &Load) -> f64 {
    let (m, g) = model.assemble_system(y, load).expect("state away from gimbal lock");
    let lhs = m * yd;
    let assembled = lhs - g;
    let direct = newton_euler_residual(model, y, yd, load);
    let scale = lhs.amax().max(g.amax());
    (assembled - direct).amax() / scale
}

fn uniform3(rng: &mut StdRng, half_width: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.gen_range(-half_width..half_width))
}

/// A state with large but physically plausible excursions.
pub fn random_state(rng: &mut StdRng) -> Vec12 {
    StateParts {
        position: uniform3(rng, 5e-3),
        angles: uniform3(rng, 0.3),
        velocity: uniform3(rng, 0.05),
        angular_velocity: uniform3(rng, 0.5),
    }
    .to_vector()
}

pub fn random_derivative(rng: &mut StdRng) -> Vec12 {
    Vec12::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_load(rng: &mut StdRng) -> Load {
    Load { force: uniform3(rng, 10.0), torque: uniform3(rng, 2.0) }
}

/// A small free-vibration starting point that excites every mode.
pub fn displaced_state() -> Vec12 {
    StateParts {
        position: Vec3::new(1e-3, -5e-4, 8e-4),
        angles: Vec3::new(2e-3, -1e-3, 1.5e-3),
        velocity: Vec3::new(-2e-3, 1e-3, 3e-3),
        angular_velocity: Vec3::new(5e-3, -4e-3, 1e-2),
    }
    .to_vector()
}

/// Largest state difference over two sampled runs, relative to the largest state.
pub fn trajectory_gap(a: &[Vec12], b: &[Vec12]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().map(|y| y.amax()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max) / scale
}
