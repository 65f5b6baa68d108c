pub mod config;
pub mod dataset;
pub mod dynamics;
pub mod geom;
pub mod image;
pub mod map;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod scene;
pub mod truth;
