//! Vehicle motion, camera rigs and the lighting and weather schedule. Every
//! function here is a pure function of its inputs and the time `t`.

mod environment;
mod rig;
mod traffic;
mod trajectory;

pub use environment::{
    environment_at, sun_elevation_deg, EnvironmentSchedule, EnvironmentState, Weather, CLOUDY_SUN_FACTOR,
    DEFAULT_AMBIENT, DEFAULT_FOG_DENSITY, RAIN_SUN_FACTOR,
};
pub use rig::{camera_pose, triangular, CameraRig, OnboardMount, RigMount, SurveillanceMount};
pub use traffic::{
    host_trajectory, populate_vehicles, populate_vehicles_avoiding, KindCounts, VehicleCensus, DEFAULT_SPEED_MPS,
    MOVING_SLOT_M, PARKING_SLOT_M, ROUTE_HORIZON_M,
};
pub use trajectory::Trajectory;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("camera host trajectory {host} is not active at t = {t} s")]
    HostInactive { host: usize, t: f64 },
    #[error("camera host trajectory {0} does not exist")]
    UnknownHost(usize),
    #[error("no road segment comes from OSM way {0}")]
    UnknownWay(i64),
    #[error("way {way} has {lanes} lanes, lane {lane} requested")]
    UnknownLane { way: i64, lane: usize, lanes: usize },
    #[error("{requested} {what} vehicles requested but the network has room for {available}")]
    Capacity {
        what: &'static str,
        requested: usize,
        available: usize,
    },
    #[error("invalid camera rig: {0}")]
    InvalidRig(String),
}
