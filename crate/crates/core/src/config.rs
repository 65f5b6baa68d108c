//! Scenario documents: one TOML file describing map, rules, traffic, camera,
//! environment, capture and seed. Relative paths resolve against the file's
//! directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::config_hash;
use crate::dynamics::{
    CameraRig, EnvironmentSchedule, OnboardMount, RigMount, SurveillanceMount, VehicleCensus, Weather,
};
use crate::map::GeoOrigin;
use crate::model::props::PropPolicy;
use crate::render::Intrinsics;
use crate::scene::HostSpec;
use crate::truth::Thresholds;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{} violation(s):\n{}", .0.len(), .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub path: PathBuf,
    pub origin: GeoOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesSection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnboardSection {
    pub mount_height: f64,
    pub yaw_offset_deg: f64,
    pub lateral_offset_m: f64,
}

impl Default for OnboardSection {
    fn default() -> Self {
        Self {
            mount_height: 2.0,
            yaw_offset_deg: 0.0,
            lateral_offset_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSection {
    /// `onboard` or `surveillance`.
    pub preset: String,
    #[serde(default = "default_hfov")]
    pub hfov_deg: f64,
    #[serde(default = "default_near")]
    pub near: f64,
    #[serde(default)]
    pub pitch_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onboard: Option<OnboardSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<HostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surveillance: Option<SurveillanceMount>,
}

fn default_hfov() -> f64 {
    Intrinsics::default().hfov_deg
}

fn default_near() -> f64 {
    Intrinsics::default().near
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    /// Kept as text so an unknown name is reported with the other violations.
    pub weather: String,
    pub time_of_day: f64,
    pub hours_per_second: f64,
    pub fog_density: f64,
    pub ambient: f64,
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        let s = EnvironmentSchedule::default();
        Self {
            weather: s.weather.name().to_string(),
            time_of_day: s.time_of_day,
            hours_per_second: s.hours_per_second,
            fog_density: s.fog_density,
            ambient: s.ambient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureSection {
    pub frames: u64,
    /// Frames per second of simulated time.
    pub rate: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CaptureSection {
    fn default() -> Self {
        let i = Intrinsics::default();
        Self {
            frames: 100,
            rate: 10.0,
            width: i.width,
            height: i.height,
        }
    }
}

/// The scenario document as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub map: MapSection,
    pub rules: RulesSection,
    #[serde(default)]
    pub vehicles: VehicleCensus,
    #[serde(default)]
    pub props: PropPolicy,
    pub camera: CameraSection,
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub capture: CaptureSection,
    #[serde(default)]
    pub annotation: Thresholds,
}

/// Single-field replacements applied before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub frames: Option<u64>,
    pub weather: Option<String>,
    pub time_of_day: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, doc: &mut ScenarioDoc) {
        if let Some(s) = self.seed {
            doc.seed = s;
        }
        if let Some(f) = self.frames {
            doc.capture.frames = f;
        }
        if let Some(w) = &self.weather {
            doc.environment.weather = w.clone();
        }
        if let Some(h) = self.time_of_day {
            doc.environment.time_of_day = h;
        }
    }
}

/// A validated scenario with absolute paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// File stem of the scenario, e.g. `onboard`.
    pub name: String,
    pub doc: ScenarioDoc,
    pub map_path: PathBuf,
    pub rules_path: PathBuf,
    pub output: Option<PathBuf>,
    pub environment: EnvironmentSchedule,
    pub rig: CameraRig,
}

impl ScenarioConfig {
    /// SHA-256 of the effective document, overrides included.
    pub fn hash(&self) -> String {
        config_hash(&toml::to_string(&self.doc).expect("scenario serializes"))
    }

    pub fn seed(&self) -> u64 {
        self.doc.seed
    }

    pub fn capture(&self) -> &CaptureSection {
        &self.doc.capture
    }

    /// Simulated seconds covered by the capture.
    pub fn duration(&self) -> f64 {
        self.doc.capture.frames as f64 / self.doc.capture.rate
    }

    pub fn frame_time(&self, frame: u64) -> f64 {
        frame as f64 / self.doc.capture.rate
    }
}

/// Reads, overrides and validates a scenario file.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_config(&text, base, &name, overrides).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        },
        e => e,
    })
}

/// Validates a scenario file as written.
pub fn validate_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    load_config(path, &Overrides::default())
}

/// Parses scenario text whose relative paths are rooted at `base`.
pub fn parse_config(text: &str, base: &Path, name: &str, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let mut doc: ScenarioDoc = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: PathBuf::new(),
        message: e.to_string(),
    })?;
    overrides.apply(&mut doc);
    resolve(doc, base, name)
}

fn resolve(doc: ScenarioDoc, base: &Path, name: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut v = Vec::new();
    let mut bad = |field: &str, message: String| {
        v.push(Violation {
            field: field.to_string(),
            message,
        })
    };
    let map_path = base.join(&doc.map.path);
    let rules_path = base.join(&doc.rules.path);
    if !map_path.is_file() {
        bad("map.path", format!("file {} does not exist", map_path.display()));
    }
    if !rules_path.is_file() {
        bad("rules.path", format!("file {} does not exist", rules_path.display()));
    }
    let o = doc.map.origin;
    if !(-90.0..=90.0).contains(&o.lat) || !(-180.0..=180.0).contains(&o.lon) {
        bad("map.origin", format!("({}, {}) is not a valid latitude/longitude", o.lat, o.lon));
    }

    let c = &doc.capture;
    if c.frames == 0 {
        bad("capture.frames", "must be at least 1".into());
    }
    if !(c.rate > 0.0 && c.rate.is_finite()) {
        bad("capture.rate", format!("must be positive, got {}", c.rate));
    }
    if c.width == 0 || c.height == 0 {
        bad("capture.width/height", format!("resolution {}x{} must be positive", c.width, c.height));
    }

    let e = &doc.environment;
    let weather = match e.weather.parse::<Weather>() {
        Ok(w) => w,
        Err(msg) => {
            bad("environment.weather", msg);
            Weather::Sunny
        }
    };
    if !(0.0..24.0).contains(&e.time_of_day) {
        bad("environment.time_of_day", format!("must lie in [0, 24), got {}", e.time_of_day));
    }
    if !e.hours_per_second.is_finite() {
        bad("environment.hours_per_second", "must be finite".into());
    }
    if !(e.fog_density >= 0.0) {
        bad("environment.fog_density", format!("must be nonnegative, got {}", e.fog_density));
    }
    if !(0.0..=1.0).contains(&e.ambient) {
        bad("environment.ambient", format!("must lie in [0, 1], got {}", e.ambient));
    }

    if !(doc.vehicles.speed >= 0.0) {
        bad("vehicles.speed", format!("must be nonnegative, got {}", doc.vehicles.speed));
    }
    let p = &doc.props;
    if !(p.sidewalk_width >= 0.0) {
        bad("props.sidewalk_width", "must be nonnegative".into());
    }
    for (field, s) in [
        ("props.lamp_spacing", p.lamp_spacing),
        ("props.tree_spacing", p.tree_spacing),
        ("props.fence_spacing", p.fence_spacing),
    ] {
        if !(s > 0.0) {
            bad(field, format!("must be positive, got {s}"));
        }
    }

    let t = &doc.annotation;
    if !(t.min_width >= 0.0) || !(t.min_height >= 0.0) {
        bad("annotation", "minimum box size must be nonnegative".into());
    }
    if !(0.0..=1.0).contains(&t.max_occlusion) {
        bad("annotation.max_occlusion", format!("must lie in [0, 1], got {}", t.max_occlusion));
    }

    let cam = &doc.camera;
    if !(cam.hfov_deg > 0.0 && cam.hfov_deg < 180.0) {
        bad("camera.hfov_deg", format!("must lie in (0, 180), got {}", cam.hfov_deg));
    }
    if !(cam.near > 0.0) {
        bad("camera.near", format!("must be positive, got {}", cam.near));
    }
    let mount = match cam.preset.as_str() {
        "onboard" => {
            if cam.host.is_none() {
                bad("camera.host", "the onboard preset needs a host way and lane".into());
            }
            if let Some(h) = &cam.host {
                if !(h.speed >= 0.0) || !(h.start_offset >= 0.0) {
                    bad("camera.host", "speed and start offset must be nonnegative".into());
                }
            }
            let m = cam.onboard.unwrap_or_default();
            Some(RigMount::Onboard(OnboardMount {
                mount_height: m.mount_height,
                yaw_offset_deg: m.yaw_offset_deg,
                lateral_offset_m: m.lateral_offset_m,
                host: 0,
            }))
        }
        "surveillance" => match cam.surveillance {
            Some(s) => {
                if !(s.lift_min < s.lift_max) {
                    bad("camera.surveillance", "lift_min must be below lift_max".into());
                }
                if s.rotation_rate_deg < 0.0 || s.rotation_range_deg < 0.0 || s.lift_rate < 0.0 {
                    bad("camera.surveillance", "sweep rates and ranges must be nonnegative".into());
                }
                Some(RigMount::Surveillance(s))
            }
            None => {
                bad("camera.surveillance", "the surveillance preset needs a [camera.surveillance] table".into());
                None
            }
        },
        other => {
            bad("camera.preset", format!("unknown preset `{other}`, expected onboard or surveillance"));
            None
        }
    };

    if !v.is_empty() {
        return Err(ConfigError::Invalid(v));
    }
    let rig = CameraRig {
        intrinsics: Intrinsics {
            width: c.width,
            height: c.height,
            hfov_deg: cam.hfov_deg,
            near: cam.near,
        },
        pitch_deg: cam.pitch_deg,
        mount: mount.expect("validated mount"),
    };
    let environment = EnvironmentSchedule {
        weather,
        time_of_day: e.time_of_day,
        hours_per_second: e.hours_per_second,
        fog_density: e.fog_density,
        ambient: e.ambient,
    };
    Ok(ScenarioConfig {
        name: name.to_string(),
        output: doc.output.as_ref().map(|o| base.join(o)),
        map_path,
        rules_path,
        environment,
        rig,
        doc,
    })
}
