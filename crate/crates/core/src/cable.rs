//! Force-feedback cable length and servo target from the finger pose.
//!
//! Routing points live in the local frames of the base (0), the proximal (1),
//! middle (2) and distal (3) phalanx. Frame `n` is reached from frame `n-1`
//! by a rotation of `theta_n` about z and a translation of `-l_{n-1}` along x.
//! The cable length is the polyline through the seven global points plus the
//! slack allowance; the servo angle is that length over the flange radius.

use crate::model::{Finger, GloveGeometry, ROUTING_POINTS};
use nalgebra::{Matrix4, Point3, Vector4};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CableError {
    #[error("{finger}: expected {ROUTING_POINTS} routing points, found {found}")]
    MissingRoutingPoints { finger: Finger, found: usize },
    #[error("{finger}: routing point {index} references frame {frame}")]
    BadFrame {
        finger: Finger,
        index: usize,
        frame: u8,
    },
}

/// Bend angles `[theta1, theta2, theta3]` driving the cable path, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FingerPose {
    pub theta: [f64; 3],
}

impl FingerPose {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        FingerPose {
            theta: [theta1, theta2, theta3],
        }
    }

    pub fn zero() -> Self {
        FingerPose::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CablePath {
    /// O1', A1', A2', B1', B2', C1', C2' in the base frame, mm.
    pub global_points: [Point3<f64>; ROUTING_POINTS],
    /// Total cable length including slack, mm.
    pub length: f64,
    /// Absolute servo angle, radians.
    pub servo_angle: f64,
}

/// Homogeneous transform from frame `n-1` to frame `n`.
pub fn frame_transform(theta: f64, l_prev: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    Matrix4::new(
        c, -s, 0.0, -l_prev, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// Base-to-frame transforms `[T00, T01, T01*T12, T01*T12*T23]`.
pub fn chain_transforms(pose: &FingerPose, geometry: &GloveGeometry) -> [Matrix4<f64>; 4] {
    let l = geometry.segments();
    let t01 = frame_transform(pose.theta[0], l[0]);
    let t02 = t01 * frame_transform(pose.theta[1], l[1]);
    let t03 = t02 * frame_transform(pose.theta[2], l[2]);
    [Matrix4::identity(), t01, t02, t03]
}

/// Global routing points and cable length for `finger` at `pose`.
pub fn cable_length(
    pose: &FingerPose,
    geometry: &GloveGeometry,
    finger: Finger,
) -> Result<CablePath, CableError> {
    let route = geometry.route(finger);
    if route.points.len() != ROUTING_POINTS {
        return Err(CableError::MissingRoutingPoints {
            finger,
            found: route.points.len(),
        });
    }
    let chain = chain_transforms(pose, geometry);
    let mut global = [Point3::origin(); ROUTING_POINTS];
    for (index, (p, out)) in route.points.iter().zip(global.iter_mut()).enumerate() {
        let t = chain.get(p.frame as usize).ok_or(CableError::BadFrame {
            finger,
            index,
            frame: p.frame,
        })?;
        let h = t * Vector4::new(p.position[0], p.position[1], p.position[2], 1.0);
        *out = Point3::new(h.x, h.y, h.z);
    }
    let path: f64 = global.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let length = path + geometry.sigma;
    Ok(CablePath {
        global_points: global,
        length,
        servo_angle: length / geometry.rs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServoMode {
    /// `theta_s = L_a / r_s`.
    Absolute,
    /// Relative to the zero pose; the payout command used by the control loop.
    Delta,
}

pub fn servo_target(
    pose: &FingerPose,
    geometry: &GloveGeometry,
    finger: Finger,
    mode: ServoMode,
) -> Result<f64, CableError> {
    let abs = cable_length(pose, geometry, finger)?.servo_angle;
    Ok(match mode {
        ServoMode::Absolute => abs,
        ServoMode::Delta => abs - cable_length(&FingerPose::zero(), geometry, finger)?.servo_angle,
    })
}

/// Precomputed zero-pose servo angles so the control loop can issue delta
/// commands with one path evaluation.
#[derive(Debug, Clone)]
pub struct CableFollower {
    geometry: GloveGeometry,
    zero: [f64; 5],
}

impl CableFollower {
    pub fn new(geometry: GloveGeometry) -> Result<Self, CableError> {
        let mut zero = [0.0; 5];
        for f in Finger::ALL {
            zero[f.index()] = cable_length(&FingerPose::zero(), &geometry, f)?.servo_angle;
        }
        Ok(CableFollower { geometry, zero })
    }

    pub fn geometry(&self) -> &GloveGeometry {
        &self.geometry
    }

    /// Delta servo target for `finger` at `pose`, radians.
    pub fn delta_target(&self, finger: Finger, pose: &FingerPose) -> f64 {
        let abs = cable_length(pose, &self.geometry, finger)
            .expect("routes validated at construction")
            .servo_angle;
        abs - self.zero[finger.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{Rotation3, Translation3, Vector3};

    #[test]
    fn transform_examples() {
        assert_eq!(frame_transform(0.0, 0.0), Matrix4::identity());
        let t = frame_transform(0.0, 44.33);
        let p = t * Vector4::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(p, Vector4::new(-44.33, 0.0, 0.0, 1.0));
        let q =
            frame_transform(std::f64::consts::FRAC_PI_2, 0.0) * Vector4::new(1.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(q, Vector4::new(0.0, 1.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn zero_pose_is_collinear_span() {
        let g = GloveGeometry::default();
        let path = cable_length(&FingerPose::zero(), &g, Finger::Index).unwrap();
        let span = g.l0 + g.l1 + g.l2 + 0.7 * g.l3;
        assert_abs_diff_eq!(path.length, span + 2.0, epsilon = 1e-9);
        assert!(path.global_points.iter().all(|p| p.y == 8.0));
    }

    #[test]
    fn sigma_shifts_length_exactly() {
        let mut g = GloveGeometry::default();
        let pose = FingerPose::new(0.4, 0.7, 0.2);
        let with = cable_length(&pose, &g, Finger::Middle).unwrap().length;
        g.sigma = 0.0;
        let without = cable_length(&pose, &g, Finger::Middle).unwrap().length;
        assert_abs_diff_eq!(with - without, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn servo_targets() {
        let mut g = GloveGeometry::default();
        let zero = FingerPose::zero();
        assert_eq!(
            servo_target(&zero, &g, Finger::Ring, ServoMode::Delta).unwrap(),
            0.0
        );
        // rs equal to the cable length gives one radian.
        g.rs = cable_length(&zero, &g, Finger::Ring).unwrap().length;
        assert_abs_diff_eq!(
            servo_target(&zero, &g, Finger::Ring, ServoMode::Absolute).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn missing_points_error() {
        let mut g = GloveGeometry::default();
        g.routing[3].points.truncate(4);
        assert_eq!(
            cable_length(&FingerPose::zero(), &g, Finger::Ring).unwrap_err(),
            CableError::MissingRoutingPoints {
                finger: Finger::Ring,
                found: 4
            }
        );
        g.routing[3] = GloveGeometry::default().routing[3].clone();
        g.routing[3].points[2].frame = 9;
        assert!(matches!(
            cable_length(&FingerPose::zero(), &g, Finger::Ring).unwrap_err(),
            CableError::BadFrame {
                index: 2,
                frame: 9,
                ..
            }
        ));
    }

    #[test]
    fn rigid_motion_leaves_length_unchanged() {
        let g = GloveGeometry::default();
        let path = cable_length(&FingerPose::new(0.3, 0.9, 0.5), &g, Finger::Index).unwrap();
        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let tr = Translation3::from(Vector3::new(12.0, -4.0, 100.0));
        let moved: Vec<_> = path.global_points.iter().map(|p| tr * (rot * p)).collect();
        let len: f64 = moved.windows(2).map(|w| (w[1] - w[0]).norm()).sum::<f64>() + g.sigma;
        assert_abs_diff_eq!(len, path.length, epsilon = 1e-9);
    }

    #[test]
    fn follower_matches_delta_target() {
        let g = GloveGeometry::default();
        let follower = CableFollower::new(g.clone()).unwrap();
        let pose = FingerPose::new(0.2, 0.5, 0.3);
        assert_abs_diff_eq!(
            follower.delta_target(Finger::Pinky, &pose),
            servo_target(&pose, &g, Finger::Pinky, ServoMode::Delta).unwrap(),
            epsilon = 1e-15
        );
    }
}
