use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::model::{P3, V3};

/// Image size, horizontal field of view and near plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub width: u32,
    pub height: u32,
    pub hfov_deg: f64,
    pub near: f64,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self {
            width: 500,
            height: 375,
            hfov_deg: 60.0,
            near: 0.5,
        }
    }
}

impl Intrinsics {
    pub fn focal_px(&self) -> f64 {
        (self.width as f64 / 2.0) / (self.hfov_deg.to_radians() / 2.0).tan()
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Pinhole camera. Camera space is x right, y down, z forward; `rotation`
/// maps camera-space directions to world space (x east, y north, z up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: P3,
    pub rotation: Rotation3<f64>,
    pub intrinsics: Intrinsics,
}

/// Result of projecting a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Visible { u: f64, v: f64, z: f64 },
    BehindCamera,
}

impl Camera {
    /// Camera at `position` looking along heading `yaw` (radians CCW from
    /// east), tilted down by `pitch` and rolled clockwise about the view axis
    /// by `roll`.
    pub fn look(position: P3, yaw: f64, pitch: f64, roll: f64, intrinsics: Intrinsics) -> Self {
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let forward = V3::new(cy * cp, sy * cp, -sp);
        let right = V3::new(sy, -cy, 0.0);
        let down = forward.cross(&right);
        let base = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[right, down, forward]));
        let rolled = base * Rotation3::from_axis_angle(&V3::z_axis(), roll);
        Self {
            position,
            rotation: rolled,
            intrinsics,
        }
    }

    pub fn forward(&self) -> V3 {
        self.rotation * V3::z()
    }

    pub fn world_to_camera(&self, p: &P3) -> P3 {
        P3::from(self.rotation.inverse() * (p - self.position))
    }

    pub fn camera_to_world(&self, p: &P3) -> P3 {
        self.position + self.rotation * p.coords
    }

    pub fn project(&self, p: &P3) -> Projection {
        self.project_camera_space(&self.world_to_camera(p))
    }

    pub fn project_camera_space(&self, c: &P3) -> Projection {
        if c.z <= self.intrinsics.near {
            return Projection::BehindCamera;
        }
        let f = self.intrinsics.focal_px();
        let (cx, cy) = self.intrinsics.principal_point();
        Projection::Visible {
            u: cx + f * c.x / c.z,
            v: cy + f * c.y / c.z,
            z: c.z,
        }
    }

    /// World point at image position `(u, v)` and camera depth `z`.
    pub fn unproject(&self, u: f64, v: f64, z: f64) -> P3 {
        let f = self.intrinsics.focal_px();
        let (cx, cy) = self.intrinsics.principal_point();
        self.camera_to_world(&P3::new((u - cx) / f * z, (v - cy) / f * z, z))
    }

    /// Unit world-space direction through image position `(u, v)`.
    pub fn ray(&self, u: f64, v: f64) -> V3 {
        let f = self.intrinsics.focal_px();
        let (cx, cy) = self.intrinsics.principal_point();
        (self.rotation * V3::new((u - cx) / f, (v - cy) / f, 1.0)).normalize()
    }

    /// Heading, downward tilt and roll, inverting [`Camera::look`].
    pub fn yaw_pitch_roll(&self) -> (f64, f64, f64) {
        let f = self.forward();
        let yaw = f.y.atan2(f.x);
        let pitch = (-f.z).clamp(-1.0, 1.0).asin();
        let unrolled = Camera::look(self.position, yaw, pitch, 0.0, self.intrinsics);
        let r = unrolled.rotation.inverse() * self.rotation;
        let roll = r[(1, 0)].atan2(r[(0, 0)]);
        (yaw, pitch, roll)
    }
}
