use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{SemanticClass, P3};
use crate::render::{coverage_count, Camera, GBuffer, Instance};

/// Projection round-off allowed when comparing box sizes to the minimums.
const SIZE_TOLERANCE_PX: f64 = 1e-9;

/// Annotation filters. A box is kept iff `width >= min_width`,
/// `height >= min_height` and `occlusion_rate <= max_occlusion`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub min_width: f64,
    pub min_height: f64,
    pub max_occlusion: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_width: 15.0,
            min_height: 10.0,
            max_occlusion: 0.75,
        }
    }
}

/// One 2D box in pixel coordinates; pixel `(i, j)` has its center at
/// `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxAnnotation {
    pub frame: u64,
    pub track_id: u32,
    pub class: SemanticClass,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub occlusion_rate: f64,
    pub truncated: bool,
}

impl BoxAnnotation {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains_pixel(&self, x: usize, y: usize) -> bool {
        let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
        cx >= self.x_min && cx <= self.x_max && cy >= self.y_min && cy <= self.y_max
    }
}

/// Image-plane extent `(x_min, y_min, x_max, y_max)` of an instance's 3D
/// bounding box, before clipping. Uses the corners in front of the near
/// plane plus the points where box edges cross it, so the extent covers
/// every visible surface point. `None` if the box is entirely behind.
pub fn project_box(inst: &Instance, cam: &Camera) -> Option<(f64, f64, f64, f64)> {
    let bounds = inst.mesh.bounds()?;
    let corners: Vec<P3> = bounds
        .corners()
        .iter()
        .map(|c| cam.world_to_camera(&inst.pose.transform_point(c)))
        .collect();
    let near = cam.intrinsics.near;
    let f = cam.intrinsics.focal_px();
    let (cx, cy) = cam.intrinsics.principal_point();
    let mut pts: Vec<(f64, f64)> = corners
        .iter()
        .filter(|c| c.z >= near)
        .map(|c| (cx + f * c.x / c.z, cy + f * c.y / c.z))
        .collect();
    // Crossing points of every corner pair; the non-edge pairs land inside
    // the clipped box and cannot widen the extent.
    for (a, b) in (0..8).flat_map(|a| (a + 1..8).map(move |b| (a, b))) {
        let (p, q) = (corners[a], corners[b]);
        if (p.z < near) != (q.z < near) {
            let t = (near - p.z) / (q.z - p.z);
            let c = p + (q - p) * t;
            pts.push((cx + f * c.x / near, cy + f * c.y / near));
        }
    }
    if pts.is_empty() {
        return None;
    }
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
    }
    Some(b)
}

/// Pixel count per instance id in a G-buffer.
pub fn visible_counts(g: &GBuffer) -> HashMap<u32, usize> {
    let mut m = HashMap::new();
    for s in &g.samples {
        if s.instance > 0 {
            *m.entry(s.instance).or_insert(0) += 1;
        }
    }
    m
}

/// `1 - visible / solo`, where `solo` counts the instance's pixels when it is
/// rendered alone. An instance with no solo pixels has rate 1.
pub fn occlusion_rate(inst: &Instance, visible: usize, cam: &Camera) -> f64 {
    let solo = coverage_count(inst, cam);
    if solo == 0 {
        1.0
    } else {
        1.0 - visible.min(solo) as f64 / solo as f64
    }
}

/// Boxes for every annotatable instance in `scene`, in instance order.
/// Rule 1 projects the 3D box; rule 2 clips it to the image and flags
/// truncation; rule 3 drops boxes under the size thresholds; rule 4 drops
/// boxes occluded beyond the threshold.
pub fn detection_boxes(frame: u64, scene: &[Instance], g: &GBuffer, thresholds: &Thresholds) -> Vec<BoxAnnotation> {
    let cam = &g.camera;
    let (w, h) = (cam.intrinsics.width as f64, cam.intrinsics.height as f64);
    let counts = visible_counts(g);
    let mut candidates: Vec<_> = scene.iter().filter(|i| i.mesh.instance > 0).collect();
    candidates.sort_by_key(|i| i.mesh.instance);
    let mut out = Vec::new();
    for inst in candidates {
        let Some(class) = inst.mesh.classes.iter().copied().find(|c| c.is_annotatable()) else {
            continue;
        };
        let Some((x0, y0, x1, y1)) = project_box(inst, cam) else {
            continue;
        };
        if x1 <= 0.0 || y1 <= 0.0 || x0 >= w || y0 >= h {
            continue;
        }
        let clipped = (x0.max(0.0), y0.max(0.0), x1.min(w), y1.min(h));
        let truncated = clipped != (x0, y0, x1, y1);
        let (x0, y0, x1, y1) = clipped;
        if x1 - x0 < thresholds.min_width - SIZE_TOLERANCE_PX || y1 - y0 < thresholds.min_height - SIZE_TOLERANCE_PX {
            continue;
        }
        let visible = counts.get(&inst.mesh.instance).copied().unwrap_or(0);
        let rate = occlusion_rate(inst, visible, cam);
        if rate > thresholds.max_occlusion {
            continue;
        }
        out.push(BoxAnnotation {
            frame,
            track_id: inst.mesh.instance,
            class,
            x_min: x0,
            y_min: y0,
            x_max: x1,
            y_max: y1,
            occlusion_rate: rate,
            truncated,
        });
    }
    out
}
