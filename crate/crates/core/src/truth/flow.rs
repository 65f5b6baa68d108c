use super::images::grayscale;
use super::TruthError;
use crate::image::{Raster, RgbImage};
use crate::model::Pose;
use crate::render::{Camera, GBuffer, Projection};

/// Default minimum gradient magnitude for a pixel to count as textured.
pub const TEXTURE_THRESHOLD: f64 = 0.02;

/// Image displacement of a surface point since the previous frame, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowVector {
    pub u: f64,
    pub v: f64,
    pub valid: bool,
}

pub type FlowField = Raster<FlowVector>;

/// Geometric flow: each pixel's surface point is carried back through its
/// node's motion and projected by the previous camera. `now` and `prev`
/// hold every node's pose at the two times (`None` if absent). Sky pixels
/// and points that were absent or behind the previous camera are invalid
/// with zero flow.
pub fn flow_field(
    g: &GBuffer,
    now: &[Option<Pose>],
    prev: &[Option<Pose>],
    prev_cam: &Camera,
    dt: f64,
) -> Result<FlowField, TruthError> {
    if !(dt > 0.0) {
        return Err(TruthError::NonPositiveInterval(dt));
    }
    let w = g.width();
    let mut data = Vec::with_capacity(g.samples.len());
    for (k, s) in g.samples.iter().enumerate() {
        if s.is_sky() {
            data.push(FlowVector::default());
            continue;
        }
        let node = s.node as usize;
        let (Some(a), Some(b)) = (now.get(node), prev.get(node)) else {
            return Err(TruthError::MissingNode {
                node: s.node,
                got: now.len().min(prev.len()),
            });
        };
        let (Some(pose_now), Some(pose_prev)) = (a, b) else {
            data.push(FlowVector::default());
            continue;
        };
        let earlier = pose_prev.transform_point(&pose_now.inverse_transform_point(&s.world));
        data.push(match prev_cam.project(&earlier) {
            Projection::Visible { u, v, .. } => FlowVector {
                u: (k % w) as f64 + 0.5 - u,
                v: (k / w) as f64 + 0.5 - v,
                valid: true,
            },
            Projection::BehindCamera => FlowVector::default(),
        });
    }
    Ok(Raster::from_vec(g.camera.intrinsics.width, g.camera.intrinsics.height, data))
}

/// Residual statistics of the brightness-constancy equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub median: f64,
    pub p90: f64,
    /// Pixels that were valid, interior and above the texture threshold.
    pub count: usize,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn check_dims(a: (u32, u32), b: (u32, u32)) -> Result<(), TruthError> {
    if a == b {
        Ok(())
    } else {
        Err(TruthError::SizeMismatch { a, b })
    }
}

/// Evaluates `|dE/dt + grad(E) . w|` on grayscale intensities in `[0, 1]`.
/// The gradient is the central difference averaged over both frames; the
/// time derivative is the forward difference `E_next - E_prev`.
pub fn verify_flow_constraint(
    prev: &RgbImage,
    next: &RgbImage,
    flow: &FlowField,
    texture_threshold: f64,
) -> Result<ResidualStats, TruthError> {
    check_dims((prev.width, prev.height), (next.width, next.height))?;
    check_dims((prev.width, prev.height), (flow.width, flow.height))?;
    let (a, b) = (grayscale(prev), grayscale(next));
    let (w, h) = (prev.width as usize, prev.height as usize);
    let mut residuals = Vec::new();
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let f = flow.at(x, y);
            if !f.valid {
                continue;
            }
            let gx = ((a.at(x + 1, y) - a.at(x - 1, y)) + (b.at(x + 1, y) - b.at(x - 1, y))) / 4.0;
            let gy = ((a.at(x, y + 1) - a.at(x, y - 1)) + (b.at(x, y + 1) - b.at(x, y - 1))) / 4.0;
            if gx.hypot(gy) < texture_threshold {
                continue;
            }
            let et = b.at(x, y) - a.at(x, y);
            residuals.push((et + gx * f.u + gy * f.v).abs());
        }
    }
    residuals.sort_by(f64::total_cmp);
    Ok(ResidualStats {
        median: percentile(&residuals, 0.5),
        p90: percentile(&residuals, 0.9),
        count: residuals.len(),
    })
}

fn bilinear(img: &Raster<f64>, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (img.width as usize, img.height as usize);
    if x < 0.0 || y < 0.0 || x > (w - 1) as f64 || y > (h - 1) as f64 {
        return None;
    }
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    let bottom = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Median absolute grayscale error of reconstructing `next` by sampling
/// `prev` at `p - flow`, over valid pixels whose source lies in the image.
pub fn warp_error(prev: &RgbImage, next: &RgbImage, flow: &FlowField) -> Result<f64, TruthError> {
    check_dims((prev.width, prev.height), (next.width, next.height))?;
    check_dims((prev.width, prev.height), (flow.width, flow.height))?;
    let (a, b) = (grayscale(prev), grayscale(next));
    let w = prev.width as usize;
    let mut errors: Vec<f64> = flow
        .data
        .iter()
        .enumerate()
        .filter(|(_, f)| f.valid)
        .filter_map(|(k, f)| {
            let (x, y) = (k % w, k / w);
            bilinear(&a, x as f64 - f.u, y as f64 - f.v).map(|s| (s - b.at(x, y)).abs())
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    Ok(percentile(&errors, 0.5))
}
