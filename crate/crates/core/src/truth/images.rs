use crate::image::{Raster, RgbImage};
use crate::model::SemanticClass;
use crate::render::GBuffer;

fn dims(g: &GBuffer) -> (u32, u32) {
    (g.camera.intrinsics.width, g.camera.intrinsics.height)
}

/// Class-id plane and its palette rendering. Depends only on geometry.
pub fn semantic_image(g: &GBuffer) -> (Raster<u8>, RgbImage) {
    let (w, h) = dims(g);
    let ids = Raster::from_vec(w, h, g.samples.iter().map(|s| s.class.id()).collect());
    let rgb = ids.map(|id| SemanticClass::from_id(id).expect("valid class id").palette_color());
    (ids, rgb)
}

/// Instance ids for cars, cyclists and pedestrians; 0 elsewhere.
pub fn instance_image(g: &GBuffer) -> Raster<u32> {
    let (w, h) = dims(g);
    Raster::from_vec(
        w,
        h,
        g.samples
            .iter()
            .map(|s| if s.class.is_annotatable() { s.instance } else { 0 })
            .collect(),
    )
}

/// Visualization color for an instance or track id. Multiplying by an odd
/// constant modulo 2^24 is a bijection on 24-bit ids.
pub fn display_color(id: u32) -> [u8; 3] {
    let c = id.wrapping_mul(0x0037_79B1) & 0x00FF_FFFF;
    [(c >> 16) as u8, (c >> 8) as u8, c as u8]
}

/// Normalized depth `d = 1 - n/z`, with sky at exactly 1.
pub fn depth_image(g: &GBuffer) -> Raster<f64> {
    let (w, h) = dims(g);
    let n = g.camera.intrinsics.near;
    Raster::from_vec(
        w,
        h,
        g.samples
            .iter()
            .map(|s| if s.depth.is_infinite() { 1.0 } else { 1.0 - n / s.depth })
            .collect(),
    )
}

/// Metric depth from a normalized value; `+inf` at `d = 1`.
pub fn depth_from_normalized(d: f64, near: f64) -> f64 {
    if d >= 1.0 {
        f64::INFINITY
    } else {
        near / (1.0 - d)
    }
}

/// Luma in `[0, 1]`.
pub fn grayscale(img: &RgbImage) -> Raster<f64> {
    img.map(|[r, g, b]| (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) / 255.0)
}
