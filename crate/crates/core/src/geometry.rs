//! Exact Ackermann kinematics in the vehicle frame (x right, y forward).
//!
//! Relative poses follow the circular-arc model: after time `tau_i` the
//! vehicle has rotated by `omega * tau_i` and translated along the arc whose
//! radius is fixed by the displacement `d` travelled over the scale interval
//! `tau`. Positive `omega` is a forward right turn.

use libm::{cos, sin};

/// Below this `|omega * tau|` the L'Hôpital limit of the translation is used.
pub const LIMIT_SWITCH: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point is behind the camera (forward coordinate {depth})")]
    PointBehindCamera { depth: f64 },
    #[error("omega * tau = {angle} is a nonzero multiple of pi; scale is undefined")]
    DegenerateScale { angle: f64 },
}

/// Motion parameters of one constant-velocity arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckermannParams {
    /// Rotational velocity, rad/s.
    pub omega: f64,
    /// Scale-fixing interval, s.
    pub tau: f64,
    /// Forward displacement over `tau`.
    pub d: f64,
}

impl AckermannParams {
    pub fn new(omega: f64, tau: f64) -> Self {
        Self { omega, tau, d: 1.0 }
    }

    pub fn with_displacement(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    fn in_limit(&self) -> bool {
        (self.omega * self.tau).abs() < LIMIT_SWITCH
    }
}

/// In-plane rigid transform with `p0 = R(theta) * p_i + t`, where
/// `R(theta) = [[cos, sin], [-sin, cos]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPose {
    pub rotation: f64,
    pub translation: [f64; 2],
}

impl PlanarPose {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Maps a point expressed in this pose's frame back to the reference frame.
    pub fn to_reference(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = (sin(self.rotation), cos(self.rotation));
        [
            c * p[0] + s * p[1] + self.translation[0],
            -s * p[0] + c * p[1] + self.translation[1],
        ]
    }

    /// Maps a reference-frame point into this pose's frame.
    pub fn from_reference(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = (sin(self.rotation), cos(self.rotation));
        let q = [p[0] - self.translation[0], p[1] - self.translation[1]];
        [c * q[0] - s * q[1], s * q[0] + c * q[1]]
    }

    /// `self` followed by `next`, where `next` is expressed in `self`'s frame.
    pub fn compose(&self, next: &PlanarPose) -> PlanarPose {
        PlanarPose {
            rotation: self.rotation + next.rotation,
            translation: self.to_reference(next.translation),
        }
    }
}

/// Landmark position in the reference (window start) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint2D {
    pub p0x: f64,
    pub p0y: f64,
}

impl WorldPoint2D {
    pub fn new(p0x: f64, p0y: f64) -> Self {
        Self { p0x, p0y }
    }
}

/// Pose of the vehicle `tau_i` seconds after the reference frame.
pub fn relative_pose(params: &AckermannParams, tau_i: f64) -> PlanarPose {
    let theta_i = params.omega * tau_i;
    let translation = if params.in_limit() {
        // First-order series; equals (0, d tau_i / tau) at omega = 0.
        let k = params.d * tau_i / params.tau;
        [0.5 * k * theta_i, k]
    } else {
        let r = params.d / sin(params.omega * params.tau);
        let half = sin(0.5 * theta_i);
        [r * 2.0 * half * half, r * sin(theta_i)]
    };
    PlanarPose {
        rotation: theta_i,
        translation,
    }
}

/// Normalized horizontal image coordinate of `point` seen from `pose`.
pub fn project_bearing(point: &WorldPoint2D, pose: &PlanarPose) -> Result<f64, GeometryError> {
    let [px, py] = pose.from_reference([point.p0x, point.p0y]);
    if py <= 0.0 {
        return Err(GeometryError::PointBehindCamera { depth: py });
    }
    Ok(px / py)
}

/// Exact trigonometric incidence coefficients `(a1, a2, a3)` such that
/// `a1 * p0x + a2 * p0y + a3 * d = 0` for a noise-free bearing.
pub fn exact_incidence_row(
    x_i: f64,
    tau_i: f64,
    params: &AckermannParams,
) -> Result<[f64; 3], GeometryError> {
    let theta_i = params.omega * tau_i;
    let (s, c) = (sin(theta_i), cos(theta_i));
    // 1 - cos is evaluated as 2 sin^2(theta/2) to avoid cancellation.
    let a1 = -x_i * s + c;
    let a2 = -x_i * c - s;
    let a3 = if params.in_limit() {
        // Series of (x sin + 1 - cos) / sin(omega tau) to first order in omega.
        (x_i * tau_i + 0.5 * params.omega * tau_i * tau_i) / params.tau
    } else {
        let denom = sin(params.omega * params.tau);
        if denom.abs() < 1e-12 {
            return Err(GeometryError::DegenerateScale {
                angle: params.omega * params.tau,
            });
        }
        let half = sin(0.5 * theta_i);
        (x_i * s + 2.0 * half * half) / denom
    };
    Ok([a1, a2, a3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn straight_line_limit() {
        let pose = relative_pose(&AckermannParams::new(0.0, 0.3), 0.15);
        assert_eq!(pose.rotation, 0.0);
        assert!(close(pose.translation[0], 0.0, 1e-15));
        assert!(close(pose.translation[1], 0.5, 1e-15));
    }

    #[test]
    fn quarter_turn() {
        let tau = 0.3;
        let params = AckermannParams::new(FRAC_PI_2 / tau, tau);
        let pose = relative_pose(&params, tau);
        assert!(close(pose.rotation, FRAC_PI_2, 1e-15));
        assert!(close(pose.translation[0], 1.0, 1e-12));
        assert!(close(pose.translation[1], 1.0, 1e-12));
    }

    #[test]
    fn direct_substitution() {
        // d / sin(0.09) * (1 - cos(0.06), sin(0.06)), evaluated independently.
        let pose = relative_pose(&AckermannParams::new(0.3, 0.3), 0.2);
        assert!(close(pose.rotation, 0.06, 1e-15));
        assert!(close(pose.translation[0], 0.020_021_018_150_075_25, 1e-12));
        assert!(close(pose.translation[1], 0.667_167_049_474_042_5, 1e-12));
    }

    #[test]
    fn bearings() {
        let id = PlanarPose::identity();
        assert_eq!(
            project_bearing(&WorldPoint2D::new(0.0, 5.0), &id).unwrap(),
            0.0
        );
        assert_eq!(
            project_bearing(&WorldPoint2D::new(1.0, 1.0), &id).unwrap(),
            1.0
        );
        let err = project_bearing(&WorldPoint2D::new(1.0, -1.0), &id).unwrap_err();
        assert!(matches!(err, GeometryError::PointBehindCamera { .. }));
    }

    #[test]
    fn bearing_under_motion() {
        // theta = 0.1, t = (1/sin 0.12) (1 - cos 0.1, sin 0.1);
        // p_i = R^T (p0 - t) evaluated by hand in a scratch script.
        let pose = relative_pose(&AckermannParams::new(0.4, 0.3), 0.25);
        let x = project_bearing(&WorldPoint2D::new(0.5, 4.0), &pose).unwrap();
        assert!(close(x, 0.043_773_771_364_993_79, 1e-12), "{x}");
    }

    #[test]
    fn incidence_at_origin() {
        let row = exact_incidence_row(0.0, 0.0, &AckermannParams::new(0.7, 0.3)).unwrap();
        assert_eq!(row, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn incidence_direct_evaluation() {
        let row = exact_incidence_row(0.2, 0.1, &AckermannParams::new(0.5, 0.3)).unwrap();
        // -0.2 sin .05 + cos .05, -0.2 cos .05 - sin .05, (0.2 sin .05 - cos .05 + 1)/sin .15
        assert!(close(row[0], 0.988_754_426_540_830_6, 1e-12));
        assert!(close(row[1], -0.249_729_221_349_671_6, 1e-12));
        assert!(close(row[2], 0.075_252_368_809_923_1, 1e-12));
    }

    #[test]
    fn incidence_vanishes_on_clean_sample() {
        let params = AckermannParams::new(0.35, 0.3).with_displacement(1.3);
        let p = WorldPoint2D::new(-0.7, 6.0);
        for k in 0..10 {
            let tau_i = 0.03 * k as f64;
            let x = project_bearing(&p, &relative_pose(&params, tau_i)).unwrap();
            let a = exact_incidence_row(x, tau_i, &params).unwrap();
            let r = a[0] * p.p0x + a[1] * p.p0y + a[2] * params.d;
            assert!(r.abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn degenerate_scale() {
        let params = AckermannParams::new(core::f64::consts::PI / 0.3, 0.3);
        let err = exact_incidence_row(0.1, 0.1, &params).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateScale { .. }));
    }

    #[test]
    fn limit_branch_is_continuous() {
        let tau = 0.3;
        let above = relative_pose(&AckermannParams::new(1.0001 * LIMIT_SWITCH / tau, tau), 0.2);
        let below = relative_pose(&AckermannParams::new(0.9999 * LIMIT_SWITCH / tau, tau), 0.2);
        let (trig, limit) = (above, below);
        let dx = trig.translation[0] - limit.translation[0];
        let dy = trig.translation[1] - limit.translation[1];
        assert!(libm::hypot(dx, dy) < 1e-9);
    }

    #[test]
    fn compose_matches_single_arc() {
        let params = AckermannParams::new(0.8, 0.3).with_displacement(2.0);
        let a = relative_pose(&params, 0.1);
        let whole = relative_pose(&params, 0.25);
        let chained = a.compose(&relative_pose(&params, 0.15));
        assert!(close(chained.rotation, whole.rotation, 1e-15));
        assert!(close(chained.translation[0], whole.translation[0], 1e-12));
        assert!(close(chained.translation[1], whole.translation[1], 1e-12));
    }
}
