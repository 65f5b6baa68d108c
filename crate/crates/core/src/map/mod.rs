//! OSM ingestion: XML parsing, local projection and road-network extraction.

mod network;
mod osm;
mod project;

pub use network::{
    build_road_network, lane_centerlines, Direction, Footprint, IngestReport, Junction,
    RegionKind, RoadNetwork, RoadSegment, SkipReason,
};
pub use osm::{parse_osm, to_osm_xml, Bounds, MapData, Node, Way};
pub use project::{project_geodetic, unproject, GeoOrigin, EARTH_RADIUS_M};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("malformed OSM XML at line {line}, column {column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },
    #[error("line {line}: <{element}> has missing or invalid attribute `{attribute}`")]
    Attribute {
        line: u32,
        element: String,
        attribute: String,
    },
    #[error("way {way} references missing node {node}")]
    MissingNode { way: i64, node: i64 },
    #[error("way {way} has {refs} node reference(s); at least 2 are required")]
    ShortWay { way: i64, refs: usize },
    #[error("road segment {segment} has a zero-length centerline")]
    DegenerateCenterline { segment: usize },
}
