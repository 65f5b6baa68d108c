//! Low-poly vehicle templates. Local frame: +x forward, +y left, z up, origin
//! at the ground under the vehicle's center.

use serde::{Deserialize, Serialize};

use super::mesh::{Albedo, Mesh};
use super::primitives::{add_box, add_cylinder};
use super::SemanticClass;
use crate::geom::P2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleKind {
    Car,
    Bus,
    Truck,
}

impl VehicleKind {
    pub const ALL: [VehicleKind; 3] = [VehicleKind::Car, VehicleKind::Bus, VehicleKind::Truck];

    /// Overall (length, width, height) in meters.
    pub fn dimensions(self) -> (f64, f64, f64) {
        match self {
            VehicleKind::Car => (4.5, 1.8, 1.55),
            VehicleKind::Bus => (12.0, 2.5, 3.2),
            VehicleKind::Truck => (8.0, 2.5, 3.5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VehicleKind::Car => "car",
            VehicleKind::Bus => "bus",
            VehicleKind::Truck => "truck",
        }
    }
}

const PAINTS: [Albedo; 6] = [
    [0.75, 0.1, 0.1],
    [0.1, 0.2, 0.6],
    [0.85, 0.85, 0.85],
    [0.08, 0.08, 0.08],
    [0.5, 0.5, 0.52],
    [0.2, 0.45, 0.25],
];
const GLASS: Albedo = [0.12, 0.16, 0.2];
const TYRE: Albedo = [0.04, 0.04, 0.04];

fn wheels(m: &mut Mesh, axles: &[f64], width: f64, radius: f64) {
    let y = width / 2.0 - radius - 0.02;
    for &x in axles {
        for y in [-y, y] {
            // Upright cylinders read as wheels from road-level viewpoints.
            add_cylinder(m, P2::new(x, y), radius, 0.0, radius * 1.4, SemanticClass::Car, TYRE);
        }
    }
}

/// Mesh for a vehicle of `kind`; `paint` picks one of a fixed set of body
/// colors. Every triangle is class `car`.
pub fn vehicle_mesh(kind: VehicleKind, paint: usize, instance: u32) -> Mesh {
    let body = PAINTS[paint % PAINTS.len()];
    let (l, w, h) = kind.dimensions();
    let c = SemanticClass::Car;
    let mut m = Mesh::new();
    match kind {
        VehicleKind::Car => {
            wheels(&mut m, &[-1.35, 1.35], w, 0.33);
            add_box(&mut m, P2::origin(), l, w, 0.3, 0.95, c, body);
            add_box(&mut m, P2::new(-0.25, 0.0), 2.4, w - 0.1, 0.95, h, c, GLASS);
        }
        VehicleKind::Bus => {
            wheels(&mut m, &[-4.0, 3.8], w, 0.5);
            add_box(&mut m, P2::origin(), l, w, 0.45, 1.3, c, body);
            add_box(&mut m, P2::origin(), l - 0.2, w - 0.04, 1.3, 2.6, c, GLASS);
            add_box(&mut m, P2::origin(), l, w, 2.6, h, c, body);
        }
        VehicleKind::Truck => {
            wheels(&mut m, &[-2.8, -1.6, 2.6], w, 0.5);
            add_box(&mut m, P2::new(-1.0, 0.0), 6.0, w, 0.5, h, c, [0.9, 0.9, 0.88]);
            add_box(&mut m, P2::new(3.0, 0.0), 2.0, w - 0.1, 0.5, 2.0, c, body);
            add_box(&mut m, P2::new(3.1, 0.0), 1.8, w - 0.2, 2.0, 2.9, c, GLASS);
        }
    }
    m.instance = instance;
    m
}
