use serde::{Deserialize, Serialize};

use super::{DynamicsError, Trajectory};
use crate::geom::P2;
use crate::model::P3;
use crate::render::{Camera, Intrinsics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnboardMount {
    pub mount_height: f64,
    /// Heading relative to the host's direction of travel, degrees CCW.
    pub yaw_offset_deg: f64,
    /// Sideways shift from the host's lane center, meters, positive left.
    pub lateral_offset_m: f64,
    /// Index of the host trajectory in the slice given to [`camera_pose`].
    pub host: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveillanceMount {
    pub position: [f64; 2],
    /// Ground elevation of the mast; the lift height is added on top.
    pub base_height: f64,
    /// Heading at the start of the sweep, degrees CCW from east.
    pub base_yaw_deg: f64,
    pub rotation_rate_deg: f64,
    pub rotation_range_deg: f64,
    pub lift_rate: f64,
    pub lift_min: f64,
    pub lift_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RigMount {
    Onboard(OnboardMount),
    Surveillance(SurveillanceMount),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub intrinsics: Intrinsics,
    /// Downward tilt in degrees.
    pub pitch_deg: f64,
    pub mount: RigMount,
}

impl CameraRig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let i = &self.intrinsics;
        let bad = |m: &str| Err(DynamicsError::InvalidRig(m.to_string()));
        if i.width == 0 || i.height == 0 {
            return bad("image size must be positive");
        }
        if !(i.hfov_deg > 0.0 && i.hfov_deg < 180.0) {
            return bad("field of view must lie in (0, 180) degrees");
        }
        if !(i.near > 0.0) {
            return bad("near plane must be positive");
        }
        if let RigMount::Surveillance(s) = &self.mount {
            if !(s.lift_min < s.lift_max) {
                return bad("lift range minimum must be below its maximum");
            }
            if s.rotation_rate_deg < 0.0 || s.lift_rate < 0.0 || s.rotation_range_deg < 0.0 {
                return bad("sweep rates and ranges must be nonnegative");
            }
        }
        Ok(())
    }
}

/// Ping-pong wave: rises from 0 to `range` at unit slope, then falls back.
pub fn triangular(x: f64, range: f64) -> f64 {
    if range <= 0.0 {
        return 0.0;
    }
    let m = x.rem_euclid(2.0 * range);
    if m <= range {
        m
    } else {
        2.0 * range - m
    }
}

/// Camera for `rig` at time `t`. Onboard rigs ride on `hosts[mount.host]`.
pub fn camera_pose(rig: &CameraRig, t: f64, hosts: &[Trajectory]) -> Result<Camera, DynamicsError> {
    let pitch = rig.pitch_deg.to_radians();
    match &rig.mount {
        RigMount::Onboard(m) => {
            let host = hosts.get(m.host).ok_or(DynamicsError::UnknownHost(m.host))?;
            let pose = host.pose_at(t).ok_or(DynamicsError::HostInactive { host: m.host, t })?;
            let (s, c) = pose.yaw.sin_cos();
            let side = P2::new(-s, c) * m.lateral_offset_m;
            let position = P3::new(
                pose.position.x + side.x,
                pose.position.y + side.y,
                pose.position.z + m.mount_height,
            );
            Ok(Camera::look(
                position,
                pose.yaw + m.yaw_offset_deg.to_radians(),
                pitch,
                0.0,
                rig.intrinsics,
            ))
        }
        RigMount::Surveillance(m) => {
            let yaw = m.base_yaw_deg + triangular(m.rotation_rate_deg * t, m.rotation_range_deg);
            let lift = m.lift_min + triangular(m.lift_rate * t, m.lift_max - m.lift_min);
            Ok(Camera::look(
                P3::new(m.position[0], m.position[1], m.base_height + lift),
                yaw.to_radians(),
                pitch,
                0.0,
                rig.intrinsics,
            ))
        }
    }
}
