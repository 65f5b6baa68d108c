//! Mesh builders for prisms, cylinders, cones and flat quads. All append to an
//! existing mesh in its local frame.

use std::f64::consts::TAU;

use super::mesh::{Albedo, Mesh, P3};
use super::SemanticClass;
use crate::geom::{self, P2};

pub const ROUND_SEGMENTS: usize = 8;

/// Flat polygon facing +z at height `z`.
pub fn add_polygon(mesh: &mut Mesh, ring: &[P2], z: f64, class: SemanticClass, albedo: Albedo) {
    let base = mesh.vertices.len() as u32;
    for p in ring {
        mesh.add_vertex(P3::new(p.x, p.y, z));
    }
    for [a, b, c] in geom::triangulate(ring) {
        mesh.add_triangle([a, b, c].map(|i| base + i as u32), class, albedo);
    }
}

/// Extruded prism over a CCW ring: one quad per edge plus a roof cap, no
/// bottom. Vertices are shared so the result is watertight apart from the
/// open bottom. A zero-height prism degenerates to its roof polygon.
pub fn add_prism(
    mesh: &mut Mesh,
    ring: &[P2],
    z0: f64,
    z1: f64,
    class: SemanticClass,
    albedo: Albedo,
) {
    if z1 - z0 <= 1e-9 {
        add_polygon(mesh, ring, z0.max(z1), class, albedo);
        return;
    }
    let n = ring.len() as u32;
    let base = mesh.vertices.len() as u32;
    for p in ring {
        mesh.add_vertex(P3::new(p.x, p.y, z0));
    }
    for p in ring {
        mesh.add_vertex(P3::new(p.x, p.y, z1));
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let (b0, b1, t0, t1) = (base + i, base + j, base + n + i, base + n + j);
        mesh.add_triangle([b0, b1, t1], class, albedo);
        mesh.add_triangle([b0, t1, t0], class, albedo);
    }
    for [a, b, c] in geom::triangulate(ring) {
        mesh.add_triangle([a, b, c].map(|i| base + n + i as u32), class, albedo);
    }
}

pub fn rect(center: P2, sx: f64, sy: f64) -> Vec<P2> {
    let (hx, hy) = (sx / 2.0, sy / 2.0);
    vec![
        P2::new(center.x - hx, center.y - hy),
        P2::new(center.x + hx, center.y - hy),
        P2::new(center.x + hx, center.y + hy),
        P2::new(center.x - hx, center.y + hy),
    ]
}

pub fn circle(center: P2, radius: f64, segments: usize) -> Vec<P2> {
    (0..segments)
        .map(|k| {
            let a = TAU * k as f64 / segments as f64;
            P2::new(center.x + radius * a.cos(), center.y + radius * a.sin())
        })
        .collect()
}

/// Axis-aligned box sitting on `z0`.
#[allow(clippy::too_many_arguments)]
pub fn add_box(
    mesh: &mut Mesh,
    center: P2,
    sx: f64,
    sy: f64,
    z0: f64,
    z1: f64,
    class: SemanticClass,
    albedo: Albedo,
) {
    add_prism(mesh, &rect(center, sx, sy), z0, z1, class, albedo);
}

pub fn add_cylinder(
    mesh: &mut Mesh,
    center: P2,
    radius: f64,
    z0: f64,
    z1: f64,
    class: SemanticClass,
    albedo: Albedo,
) {
    add_prism(mesh, &circle(center, radius, ROUND_SEGMENTS), z0, z1, class, albedo);
}

pub fn add_cone(
    mesh: &mut Mesh,
    center: P2,
    radius: f64,
    z0: f64,
    z1: f64,
    class: SemanticClass,
    albedo: Albedo,
) {
    let ring = circle(center, radius, ROUND_SEGMENTS);
    let base = mesh.vertices.len() as u32;
    for p in &ring {
        mesh.add_vertex(P3::new(p.x, p.y, z0));
    }
    let apex = mesh.add_vertex(P3::new(center.x, center.y, z1));
    let n = ring.len() as u32;
    for i in 0..n {
        mesh.add_triangle([base + i, base + (i + 1) % n, apex], class, albedo);
    }
}

/// Planar quad from four corners in order (two triangles).
pub fn add_quad(mesh: &mut Mesh, corners: [P3; 4], class: SemanticClass, albedo: Albedo) {
    let idx = corners.map(|p| mesh.add_vertex(p));
    mesh.add_triangle([idx[0], idx[1], idx[2]], class, albedo);
    mesh.add_triangle([idx[0], idx[2], idx[3]], class, albedo);
}

#[cfg(test)]
pub(crate) fn open_edges(mesh: &Mesh) -> Vec<(u32, u32)> {
    use std::collections::BTreeMap;
    let mut count: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    count.into_iter().filter(|(_, c)| *c != 2).map(|(e, _)| e).collect()
}
