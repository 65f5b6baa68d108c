//! End-to-end generation: map, scene, per-frame rendering and ground truth,
//! encoding and manifest.

use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::dataset::{write_frame_bundle, ClassStats, DatasetError, DatasetWriter, FrameBundle, Manifest, Timing, FORMAT_VERSION};
use crate::dynamics::{environment_at, DynamicsError};
use crate::map::{build_road_network, parse_osm, MapError, RoadNetwork};
use crate::model::grammar::{parse_rules, GrammarError};
use crate::model::{SemanticClass, CLASS_COUNT};
use crate::par;
use crate::render::{apply_weather, rasterize, shade};
use crate::scene::{build_scene, HostSpec, Scene, SceneError, SceneParams};
use crate::truth::{depth_image, detection_boxes, flow_field, instance_image, semantic_image, FlowField, TruthError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("reading {}: {source}", path.display())]
    Read {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("rules: {0}")]
    Rules(#[from] GrammarError),
    #[error("scene: {0}")]
    Scene(#[from] SceneError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("ground truth: {0}")]
    Truth(#[from] TruthError),
    #[error("dataset: {0}")]
    Dataset(#[from] DatasetError),
    #[error("time {t} s lies outside the capture [0, {duration}) s")]
    TimeOutOfRange { t: f64, duration: f64 },
}

/// Loaded map and assembled scene for a scenario.
pub struct World {
    pub network: RoadNetwork,
    pub scene: Scene,
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| PipelineError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn build_world(cfg: &ScenarioConfig) -> Result<World, PipelineError> {
    let map = parse_osm(&read(&cfg.map_path)?)?;
    let network = build_road_network(&map, cfg.doc.map.origin);
    let rules = parse_rules(&read(&cfg.rules_path)?)?;
    let host: Option<HostSpec> = cfg.doc.camera.host.filter(|_| cfg.doc.camera.preset == "onboard");
    let params = SceneParams {
        props: cfg.doc.props.clone(),
        census: cfg.doc.vehicles,
        host,
        rig: cfg.rig,
        seed: cfg.seed(),
    };
    let scene = build_scene(&network, &rules, &params)?;
    Ok(World { network, scene })
}

/// Renders frame `frame` with every modality. Frame 0 has no predecessor,
/// so its flow is entirely invalid.
pub fn render_frame(cfg: &ScenarioConfig, scene: &Scene, frame: u64) -> Result<FrameBundle, PipelineError> {
    let t = cfg.frame_time(frame);
    let cam = scene.camera_at(t)?;
    let instances = scene.snapshot(t);
    let g = rasterize(&instances, &cam);
    let env = environment_at(&cfg.environment, t);
    let rgb = apply_weather(&shade(&g, &env), &g, &env, cfg.seed(), frame);
    let (semantic_id, semantic_rgb) = semantic_image(&g);
    let flow = if frame == 0 {
        FlowField::filled(cam.intrinsics.width, cam.intrinsics.height, Default::default())
    } else {
        let prev_t = cfg.frame_time(frame - 1);
        let prev_cam = scene.camera_at(prev_t)?;
        flow_field(&g, &scene.poses_at(t), &scene.poses_at(prev_t), &prev_cam, t - prev_t)?
    };
    Ok(FrameBundle {
        frame,
        time: t,
        boxes: detection_boxes(frame, &instances, &g, &cfg.doc.annotation),
        instance: instance_image(&g),
        depth: depth_image(&g),
        camera: cam,
        rgb,
        semantic_id,
        semantic_rgb,
        flow,
    })
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
}

#[derive(Default)]
struct Tally {
    pixels: [u64; CLASS_COUNT],
    boxes: [u64; CLASS_COUNT],
    flow_overflow: usize,
}

impl Tally {
    fn add(&mut self, b: &FrameBundle, overflow: usize) {
        for &c in &b.semantic_id.data {
            self.pixels[c as usize] += 1;
        }
        for x in &b.boxes {
            self.boxes[x.class.id() as usize] += 1;
        }
        self.flow_overflow += overflow;
    }
}

/// Frames rendered concurrently per batch; bounds peak memory.
const BATCH_FRAMES: usize = 8;

/// Generates the full dataset into `out`. `threads` caps the worker count;
/// the output does not depend on it. `progress` is called after each batch
/// with the number of frames written so far.
pub fn run_pipeline(
    cfg: &ScenarioConfig,
    out: &Path,
    threads: Option<usize>,
    mut progress: impl FnMut(u64) + Send,
) -> Result<RunSummary, PipelineError> {
    par::with_threads(threads, move || {
        let world = build_world(cfg)?;
        let scene = &world.scene;
        let mut writer = DatasetWriter::create(out)?;
        let mut tally = Tally::default();
        let frames = cfg.capture().frames;
        let start = Instant::now();
        let mut next = 0u64;
        while next < frames {
            let n = (frames - next).min(BATCH_FRAMES as u64) as usize;
            let batch = par::map_range(n, |k| {
                let b = render_frame(cfg, scene, next + k as u64)?;
                let overflow = write_frame_bundle(out, &b)?;
                Ok::<_, PipelineError>((b, overflow))
            });
            for r in batch {
                let (b, overflow) = r?;
                writer.append_rows(&b)?;
                tally.add(&b, overflow);
            }
            next += n as u64;
            progress(next);
        }
        let elapsed = start.elapsed().as_secs_f64();
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            config_hash: cfg.hash(),
            seed: cfg.seed(),
            frame_count: frames,
            rate: cfg.capture().rate,
            resolution: [cfg.capture().width, cfg.capture().height],
            vehicle_count: scene.vehicles.len(),
            static_mesh_count: scene.static_mesh_count(),
            flow_overflow: tally.flow_overflow,
            classes: SemanticClass::ALL
                .iter()
                .map(|&c| ClassStats {
                    id: c.id(),
                    name: c.name().to_string(),
                    color: c.palette_color(),
                    pixels: tally.pixels[c.id() as usize],
                    boxes: tally.boxes[c.id() as usize],
                })
                .collect(),
            timing: Timing {
                elapsed_s: elapsed,
                fps: frames as f64 / elapsed.max(1e-9),
            },
        };
        writer.write_manifest(&manifest)?;
        writer.finish()?;
        Ok(RunSummary { manifest })
    })
}

/// Renders the frame a full run would produce at time `t`, index
/// `floor(t * rate)`, and writes it into `out` with its CSV rows.
pub fn preview_frame(cfg: &ScenarioConfig, t: f64, out: &Path) -> Result<FrameBundle, PipelineError> {
    let duration = cfg.duration();
    if !(t >= 0.0 && t < duration) {
        return Err(PipelineError::TimeOutOfRange { t, duration });
    }
    let frame = ((t * cfg.capture().rate).floor() as u64).min(cfg.capture().frames - 1);
    let world = build_world(cfg)?;
    let b = render_frame(cfg, &world.scene, frame)?;
    let mut writer = DatasetWriter::create(out)?;
    write_frame_bundle(out, &b)?;
    writer.append_rows(&b)?;
    writer.finish()?;
    Ok(b)
}
