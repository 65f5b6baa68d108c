//! Software rasterizer and shading.

mod camera;
mod raster;
mod shade;

pub use camera::{Camera, Intrinsics, Projection};
pub use raster::{bounding_sphere, coverage_count, rasterize, GBuffer, Instance, Sample, BAND_ROWS, NO_NODE};
pub use shade::{apply_weather, shade, surface_radiance, FOG_GRAY, SKY_FOG_DEPTH_M};
