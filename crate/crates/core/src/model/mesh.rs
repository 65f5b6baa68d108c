use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use thiserror::Error;

use super::SemanticClass;

pub type P3 = Point3<f64>;
pub type V3 = Vector3<f64>;
pub type Albedo = [f32; 3];

const AREA_EPS: f64 = 1e-12;

/// Rigid placement: translation plus heading about +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: P3,
    /// Radians counterclockwise from +x (east).
    pub yaw: f64,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: P3::new(0.0, 0.0, 0.0),
        yaw: 0.0,
    };

    pub fn new(position: P3, yaw: f64) -> Self {
        Self { position, yaw }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::from(self.position.coords),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), self.yaw),
        )
    }

    pub fn transform_point(&self, p: &P3) -> P3 {
        let (s, c) = self.yaw.sin_cos();
        P3::new(
            c * p.x - s * p.y + self.position.x,
            s * p.x + c * p.y + self.position.y,
            p.z + self.position.z,
        )
    }

    pub fn inverse_transform_point(&self, p: &P3) -> P3 {
        let (s, c) = self.yaw.sin_cos();
        let d = p - self.position;
        P3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {index} of {vertices}")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        vertices: usize,
    },
    #[error("triangle {0} has zero area")]
    Degenerate(usize),
    #[error("instance id {instance} does not match triangle classes (annotatable: {annotatable})")]
    InstanceMismatch { instance: u32, annotatable: bool },
    #[error("attribute arrays have inconsistent lengths")]
    AttributeLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: P3,
    pub max: P3,
}

impl Aabb {
    pub fn corners(&self) -> [P3; 8] {
        let (a, b) = (self.min, self.max);
        [
            P3::new(a.x, a.y, a.z),
            P3::new(b.x, a.y, a.z),
            P3::new(b.x, b.y, a.z),
            P3::new(a.x, b.y, a.z),
            P3::new(a.x, a.y, b.z),
            P3::new(b.x, a.y, b.z),
            P3::new(b.x, b.y, b.z),
            P3::new(a.x, b.y, b.z),
        ]
    }
}

/// Indexed triangle mesh with flat per-triangle class and albedo.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<P3>,
    pub triangles: Vec<[u32; 3]>,
    pub classes: Vec<SemanticClass>,
    pub albedo: Vec<Albedo>,
    /// Optional per-vertex colors, interpolated across each triangle in
    /// place of its flat albedo. Empty, or one entry per vertex.
    pub vertex_albedo: Vec<Albedo>,
    /// Nonzero only for meshes of annotatable classes.
    pub instance: u32,
}

impl Mesh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn add_vertex(&mut self, p: P3) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    /// Adds a triangle unless it is degenerate. Returns whether it was kept.
    pub fn add_triangle(&mut self, tri: [u32; 3], class: SemanticClass, albedo: Albedo) -> bool {
        let [a, b, c] = tri.map(|i| self.vertices[i as usize]);
        if (b - a).cross(&(c - a)).norm() <= AREA_EPS {
            return false;
        }
        self.triangles.push(tri);
        self.classes.push(class);
        self.albedo.push(albedo);
        true
    }

    pub fn append(&mut self, other: &Mesh) {
        let base = self.vertices.len() as u32;
        match (self.vertex_albedo.is_empty(), other.vertex_albedo.is_empty()) {
            (true, true) => {}
            (false, false) => self.vertex_albedo.extend_from_slice(&other.vertex_albedo),
            (true, false) => {
                self.vertex_albedo = self.flat_vertex_albedo();
                self.vertex_albedo.extend_from_slice(&other.vertex_albedo);
            }
            (false, true) => self.vertex_albedo.extend(other.flat_vertex_albedo()),
        }
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
        self.classes.extend_from_slice(&other.classes);
        self.albedo.extend_from_slice(&other.albedo);
    }

    /// Per-vertex colors taken from the last triangle using each vertex.
    fn flat_vertex_albedo(&self) -> Vec<Albedo> {
        let mut out = vec![[0.5; 3]; self.vertices.len()];
        for (tri, a) in self.triangles.iter().zip(&self.albedo) {
            for &i in tri {
                out[i as usize] = *a;
            }
        }
        out
    }

    pub fn bounds(&self) -> Option<Aabb> {
        let mut it = self.triangles.iter().flatten().map(|&i| self.vertices[i as usize]);
        let first = it.next()?;
        Some(it.fold(Aabb { min: first, max: first }, |b, p| Aabb {
            min: b.min.inf(&p),
            max: b.max.sup(&p),
        }))
    }

    pub fn normal(&self, tri: usize) -> V3 {
        let [a, b, c] = self.triangles[tri].map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.triangles.len();
        if self.classes.len() != n
            || self.albedo.len() != n
            || !(self.vertex_albedo.is_empty() || self.vertex_albedo.len() == self.vertices.len())
        {
            return Err(MeshError::AttributeLength);
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= self.vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    index,
                    vertices: self.vertices.len(),
                });
            }
            let [a, b, c] = tri.map(|i| self.vertices[i as usize]);
            if (b - a).cross(&(c - a)).norm() <= AREA_EPS {
                return Err(MeshError::Degenerate(t));
            }
        }
        let annotatable = self.classes.iter().any(|c| c.is_annotatable());
        if !self.classes.is_empty() && annotatable != (self.instance > 0) {
            return Err(MeshError::InstanceMismatch {
                instance: self.instance,
                annotatable,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn pose_round_trip() {
        let pose = Pose::new(P3::new(3.0, -2.0, 0.5), 0.7);
        let p = P3::new(1.0, 2.0, 3.0);
        let q = pose.inverse_transform_point(&pose.transform_point(&p));
        assert!((p - q).norm() < 1e-12);
        let iso = pose.isometry() * p;
        assert!((iso - pose.transform_point(&p)).norm() < 1e-12);
    }

    #[test]
    fn quarter_turn() {
        let pose = Pose::new(P3::origin(), FRAC_PI_2);
        let q = pose.transform_point(&P3::new(1.0, 0.0, 0.0));
        assert!((q - P3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_triangles_rejected() {
        let mut m = Mesh::new();
        let a = m.add_vertex(P3::new(0.0, 0.0, 0.0));
        let b = m.add_vertex(P3::new(1.0, 0.0, 0.0));
        let c = m.add_vertex(P3::new(2.0, 0.0, 0.0));
        assert!(!m.add_triangle([a, b, c], SemanticClass::Road, [1.0; 3]));
        assert!(m.validate().is_ok());
        m.triangles.push([a, b, 7]);
        m.classes.push(SemanticClass::Road);
        m.albedo.push([1.0; 3]);
        assert!(matches!(m.validate(), Err(MeshError::IndexOutOfRange { .. })));
    }

    #[test]
    fn instance_must_match_class() {
        let mut m = Mesh::new();
        let a = m.add_vertex(P3::new(0.0, 0.0, 0.0));
        let b = m.add_vertex(P3::new(1.0, 0.0, 0.0));
        let c = m.add_vertex(P3::new(0.0, 1.0, 0.0));
        m.add_triangle([a, b, c], SemanticClass::Car, [1.0; 3]);
        assert!(m.validate().is_err());
        m.instance = 4;
        assert!(m.validate().is_ok());
    }
}
