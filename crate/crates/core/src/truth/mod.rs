//! Ground truth derived from G-buffers and scene state.

mod boxes;
mod flow;
mod images;
mod tracks;

pub use boxes::{detection_boxes, occlusion_rate, project_box, visible_counts, BoxAnnotation, Thresholds};
pub use flow::{flow_field, verify_flow_constraint, warp_error, FlowField, FlowVector, ResidualStats, TEXTURE_THRESHOLD};
pub use images::{depth_from_normalized, depth_image, display_color, grayscale, instance_image, semantic_image};
pub use tracks::{tracks, TrackSegment};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TruthError {
    #[error("frame interval must be positive, got {0} s")]
    NonPositiveInterval(f64),
    #[error("pose table has {got} entries, the G-buffer references node {node}")]
    MissingNode { node: u32, got: usize },
    #[error("image sizes differ: {a:?} vs {b:?}")]
    SizeMismatch { a: (u32, u32), b: (u32, u32) },
}
