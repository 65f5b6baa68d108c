use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::V3;

pub const DEFAULT_FOG_DENSITY: f64 = 0.03;
pub const DEFAULT_AMBIENT: f64 = 0.2;
pub const CLOUDY_SUN_FACTOR: f64 = 0.4;
pub const RAIN_SUN_FACTOR: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weather {
    Sunny,
    Cloudy,
    Rainy,
    Foggy,
}

impl Weather {
    pub const ALL: [Weather; 4] = [Weather::Sunny, Weather::Cloudy, Weather::Rainy, Weather::Foggy];

    pub fn name(self) -> &'static str {
        match self {
            Weather::Sunny => "sunny",
            Weather::Cloudy => "cloudy",
            Weather::Rainy => "rainy",
            Weather::Foggy => "foggy",
        }
    }
}

impl fmt::Display for Weather {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Weather {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Weather::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| format!("unknown weather `{s}`, expected one of sunny, cloudy, rainy, foggy"))
    }
}

/// Weather and clock settings for a run. The clock starts at `time_of_day`
/// and advances `hours_per_second` simulated hours per second of capture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSchedule {
    pub weather: Weather,
    pub time_of_day: f64,
    pub hours_per_second: f64,
    pub fog_density: f64,
    pub ambient: f64,
}

impl Default for EnvironmentSchedule {
    fn default() -> Self {
        Self {
            weather: Weather::Sunny,
            time_of_day: 12.0,
            hours_per_second: 0.0,
            fog_density: DEFAULT_FOG_DENSITY,
            ambient: DEFAULT_AMBIENT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentState {
    /// Unit vector toward the sun.
    pub sun_direction: V3,
    pub sun_intensity: f64,
    pub ambient: f64,
    pub weather: Weather,
    /// Per meter; nonzero only in fog.
    pub fog_density: f64,
    /// Hours in `[0, 24)`.
    pub time_of_day: f64,
}

/// Solar elevation in degrees for clock hour `h`: a sine arc peaking at noon,
/// zero at 6:00 and 18:00 and below the horizon overnight.
pub fn sun_elevation_deg(h: f64) -> f64 {
    90.0 * (std::f64::consts::PI * (h - 6.0) / 12.0).sin()
}

pub fn environment_at(schedule: &EnvironmentSchedule, t: f64) -> EnvironmentState {
    let h = (schedule.time_of_day + schedule.hours_per_second * t).rem_euclid(24.0);
    let elevation = sun_elevation_deg(h).to_radians();
    // The sun rises in the east, crosses south at noon and sets in the west.
    let azimuth = std::f64::consts::PI * (h - 6.0) / 12.0;
    let sun_direction = V3::new(
        elevation.cos() * azimuth.cos(),
        -elevation.cos() * azimuth.sin(),
        elevation.sin(),
    );
    let mut sun_intensity = elevation.sin().max(0.0);
    match schedule.weather {
        Weather::Cloudy => sun_intensity *= CLOUDY_SUN_FACTOR,
        Weather::Rainy => sun_intensity *= RAIN_SUN_FACTOR,
        Weather::Sunny | Weather::Foggy => {}
    }
    EnvironmentState {
        sun_direction,
        sun_intensity,
        ambient: schedule.ambient,
        weather: schedule.weather,
        fog_density: if schedule.weather == Weather::Foggy {
            schedule.fog_density
        } else {
            0.0
        },
        time_of_day: h,
    }
}
