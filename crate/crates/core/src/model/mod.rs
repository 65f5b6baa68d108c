//! Procedural scene content: meshes, road surfaces, grammar-driven buildings,
//! street furniture and vehicles.

pub mod grammar;
pub mod mesh;
pub mod primitives;
pub mod props;
pub mod roads;
mod semantic;
pub mod vehicles;

pub use mesh::{Aabb, Albedo, Mesh, MeshError, Pose, P3, V3};
pub use semantic::{SemanticClass, CLASS_COUNT};
