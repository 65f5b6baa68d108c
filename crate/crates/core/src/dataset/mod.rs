//! On-disk dataset layout: per-frame PNG modalities, CSV annotations and a
//! TOML manifest.

mod codec;
mod manifest;
mod pngio;

pub use codec::{decode_depth, decode_flow, encode_depth, encode_flow, FLOW_LIMIT_PX, FLOW_OFFSET, FLOW_SCALE};
pub use manifest::{config_hash, ClassStats, Manifest, Timing, FORMAT_VERSION};
pub use pngio::{read_png, write_png, PngPixel};

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::image::{Raster, RgbImage};
use crate::render::Camera;
use crate::truth::{BoxAnnotation, FlowField};

/// Image subdirectories, one per modality.
pub const IMAGE_DIRS: [&str; 6] = ["rgb", "semantic_id", "semantic_rgb", "instance", "depth", "flow"];
pub const ANNOTATIONS_CSV: &str = "annotations.csv";
pub const CAMERAS_CSV: &str = "cameras.csv";
pub const MANIFEST_TOML: &str = "manifest.toml";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Png { path: PathBuf, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("frame {frame}: modality sizes differ from {width}x{height}")]
    SizeMismatch { frame: u64, width: u32, height: u32 },
    #[error("frame {frame}: instance id {id} does not fit a 16-bit image")]
    InstanceOverflow { frame: u64, id: u32 },
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Every output of one rendered frame.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub frame: u64,
    pub time: f64,
    pub camera: Camera,
    pub rgb: RgbImage,
    pub semantic_id: Raster<u8>,
    pub semantic_rgb: RgbImage,
    pub instance: Raster<u32>,
    /// Normalized depth `1 - near / z`.
    pub depth: Raster<f64>,
    pub flow: FlowField,
    pub boxes: Vec<BoxAnnotation>,
}

impl FrameBundle {
    fn check_sizes(&self) -> Result<(), DatasetError> {
        let dims = (self.rgb.width, self.rgb.height);
        let all = [
            (self.semantic_id.width, self.semantic_id.height),
            (self.semantic_rgb.width, self.semantic_rgb.height),
            (self.instance.width, self.instance.height),
            (self.depth.width, self.depth.height),
            (self.flow.width, self.flow.height),
        ];
        if all.iter().all(|&d| d == dims) {
            Ok(())
        } else {
            Err(DatasetError::SizeMismatch {
                frame: self.frame,
                width: dims.0,
                height: dims.1,
            })
        }
    }
}

pub fn frame_file_name(frame: u64) -> String {
    format!("{frame:06}.png")
}

/// Path of one modality image, e.g. `image_path(root, "depth", 3)`.
pub fn image_path(root: &Path, modality: &str, frame: u64) -> PathBuf {
    root.join(modality).join(frame_file_name(frame))
}

/// Writes the six images of a frame. Returns the number of flow components
/// clamped during encoding. Safe to call concurrently for distinct frames.
pub fn write_frame_bundle(root: &Path, b: &FrameBundle) -> Result<usize, DatasetError> {
    b.check_sizes()?;
    let instance = b
        .instance
        .data
        .iter()
        .map(|&id| u16::try_from(id).map_err(|_| DatasetError::InstanceOverflow { frame: b.frame, id }))
        .collect::<Result<Vec<_>, _>>()?;
    let (flow, overflow) = encode_flow(&b.flow);
    write_png(&image_path(root, "rgb", b.frame), &b.rgb)?;
    write_png(&image_path(root, "semantic_id", b.frame), &b.semantic_id)?;
    write_png(&image_path(root, "semantic_rgb", b.frame), &b.semantic_rgb)?;
    write_png(
        &image_path(root, "instance", b.frame),
        &Raster::from_vec(b.instance.width, b.instance.height, instance),
    )?;
    write_png(&image_path(root, "depth", b.frame), &encode_depth(&b.depth))?;
    write_png(&image_path(root, "flow", b.frame), &flow)?;
    Ok(overflow)
}

/// Creates the directory layout and appends CSV rows frame by frame. Images
/// go through [`write_frame_bundle`]; rows must be appended in frame order.
pub struct DatasetWriter {
    root: PathBuf,
    annotations: csv::Writer<File>,
    cameras: csv::Writer<File>,
}

impl DatasetWriter {
    pub fn create(root: &Path) -> Result<Self, DatasetError> {
        for d in IMAGE_DIRS {
            let p = root.join(d);
            fs::create_dir_all(&p).map_err(|e| DatasetError::io(&p, e))?;
        }
        let open = |name: &str| {
            let p = root.join(name);
            File::create(&p).map(csv::Writer::from_writer).map_err(|e| DatasetError::io(&p, e))
        };
        let mut annotations = open(ANNOTATIONS_CSV)?;
        annotations.write_record([
            "frame",
            "track_id",
            "class_id",
            "x_min",
            "y_min",
            "x_max",
            "y_max",
            "occlusion_rate",
            "truncated",
        ])?;
        let mut cameras = open(CAMERAS_CSV)?;
        cameras.write_record([
            "frame", "time", "x", "y", "z", "yaw_deg", "pitch_deg", "roll_deg", "width", "height", "hfov_deg", "near",
        ])?;
        Ok(Self {
            root: root.to_path_buf(),
            annotations,
            cameras,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Appends the frame's boxes, sorted by track id, and its camera row.
    pub fn append_rows(&mut self, b: &FrameBundle) -> Result<(), DatasetError> {
        let mut boxes = b.boxes.clone();
        boxes.sort_by_key(|x| x.track_id);
        for x in &boxes {
            self.annotations.write_record([
                x.frame.to_string(),
                x.track_id.to_string(),
                x.class.id().to_string(),
                format!("{:.3}", x.x_min),
                format!("{:.3}", x.y_min),
                format!("{:.3}", x.x_max),
                format!("{:.3}", x.y_max),
                format!("{:.4}", x.occlusion_rate),
                u8::from(x.truncated).to_string(),
            ])?;
        }
        let c = &b.camera;
        let (yaw, pitch, roll) = c.yaw_pitch_roll();
        self.cameras.write_record([
            b.frame.to_string(),
            format!("{:.4}", b.time),
            format!("{:.4}", c.position.x),
            format!("{:.4}", c.position.y),
            format!("{:.4}", c.position.z),
            format!("{:.4}", yaw.to_degrees()),
            format!("{:.4}", pitch.to_degrees()),
            format!("{:.4}", roll.to_degrees()),
            c.intrinsics.width.to_string(),
            c.intrinsics.height.to_string(),
            c.intrinsics.hfov_deg.to_string(),
            c.intrinsics.near.to_string(),
        ])?;
        Ok(())
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<(), DatasetError> {
        manifest.write(&self.root.join(MANIFEST_TOML))
    }

    /// Flushes both CSV files.
    pub fn finish(mut self) -> Result<(), DatasetError> {
        let flush = |w: &mut csv::Writer<File>, name: &str| {
            w.flush().map_err(|e| DatasetError::io(&self.root.join(name), e))
        };
        flush(&mut self.annotations, ANNOTATIONS_CSV)?;
        flush(&mut self.cameras, CAMERAS_CSV)
    }
}
