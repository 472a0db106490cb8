//! Small rotation and angle helpers shared across the crate.
//!
//! Euler angles follow one fixed convention everywhere: intrinsic XYZ,
//! i.e. `R = Rx(a) * Ry(b) * Rz(c)`, angles in radians. A body whose
//! only rotation is a heading about the world z axis therefore has
//! Euler angles `(0, 0, yaw)`.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use std::f64::consts::{PI, TAU};

/// Wrap an angle to the half-open interval `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Rotation about the world z axis.
pub fn yaw_rotation(yaw: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), yaw)
}

/// Quaternion for a rotation about the world z axis.
pub fn yaw_quaternion(yaw: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw)
}

/// Rotate a 2D-embedded vector by `yaw` (z component untouched).
pub fn rotate_yaw(v: Vector3<f64>, yaw: f64) -> Vector3<f64> {
    let (s, c) = yaw.sin_cos();
    Vector3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Heading of a rotation: the angle of its rotated x axis projected onto
/// the ground plane. Returns `None` when the rotated x axis is within
/// `1e-6` of vertical and the heading is undefined.
pub fn heading_of(rot: &UnitQuaternion<f64>) -> Option<f64> {
    let fwd = rot * Vector3::x();
    if fwd.x.hypot(fwd.y) < 1e-6 {
        None
    } else {
        Some(fwd.y.atan2(fwd.x))
    }
}

/// Build a rotation from intrinsic XYZ Euler angles.
pub fn rotation_from_euler_xyz(e: Vector3<f64>) -> UnitQuaternion<f64> {
    let qx = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), e.x);
    let qy = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), e.y);
    let qz = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), e.z);
    qx * qy * qz
}

/// Extract intrinsic XYZ Euler angles from a rotation, each wrapped to
/// `(-pi, pi]`. At gimbal lock (`|sin b| = 1`) the z angle is set to 0.
pub fn euler_xyz_of(rot: &UnitQuaternion<f64>) -> Vector3<f64> {
    let m: Matrix3<f64> = rot.to_rotation_matrix().into_inner();
    // R = Rx(a)*Ry(b)*Rz(c)  =>  m[(0,2)] = sin b
    let sb = m[(0, 2)].clamp(-1.0, 1.0);
    let b = sb.asin();
    if sb.abs() < 1.0 - 1e-9 {
        let a = (-m[(1, 2)]).atan2(m[(2, 2)]);
        let c = (-m[(0, 1)]).atan2(m[(0, 0)]);
        Vector3::new(wrap_angle(a), wrap_angle(b), wrap_angle(c))
    } else {
        let a = m[(2, 1)].atan2(m[(1, 1)]);
        Vector3::new(wrap_angle(a), wrap_angle(b), 0.0)
    }
}

/// Angular velocity that carries `from` onto `to` over `dt` seconds,
/// as a world-frame axis-times-angle vector divided by `dt`.
pub fn angular_velocity_between(
    from: &UnitQuaternion<f64>,
    to: &UnitQuaternion<f64>,
    dt: f64,
) -> Vector3<f64> {
    (to * from.inverse()).scaled_axis() / dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wrap_keeps_pi_positive() {
        assert_abs_diff_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(1.5 * PI), -0.5 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-3.0 * TAU + 0.25), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn euler_round_trips_through_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let e = Vector3::new(
                rng.random_range(-1.4..1.4),
                rng.random_range(-1.4..1.4),
                rng.random_range(-3.0..3.0),
            );
            let q = rotation_from_euler_xyz(e);
            let back = euler_xyz_of(&q);
            let q2 = rotation_from_euler_xyz(back);
            assert!(q.angle_to(&q2) < 1e-9, "e={e:?} back={back:?}");
        }
    }

    #[test]
    fn pure_yaw_has_yaw_in_z_slot() {
        let q = yaw_quaternion(0.8);
        let e = euler_xyz_of(&q);
        assert_abs_diff_eq!(e.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.z, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(heading_of(&q).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn heading_undefined_when_facing_up() {
        let q = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), -std::f64::consts::FRAC_PI_2);
        assert!(heading_of(&q).is_none());
    }

    #[test]
    fn angular_velocity_matches_axis_angle() {
        let from = yaw_quaternion(0.1);
        let to = yaw_quaternion(0.4);
        let w = angular_velocity_between(&from, &to, 0.1);
        assert_abs_diff_eq!(w.z, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.x, 0.0, epsilon = 1e-12);
    }
}
