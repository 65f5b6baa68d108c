use std::collections::BTreeMap;

use super::osm::{MapData, Tags, Way};
use super::project::{project_geodetic, GeoOrigin};
use super::MapError;
use crate::geom::{self, Polyline, P2};

pub const DEFAULT_LANES: u32 = 2;
pub const DEFAULT_LANE_WIDTH_M: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    OneWay,
    TwoWay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub id: usize,
    pub way_id: i64,
    /// Planar centerline in meters, oriented along travel for one-way roads.
    pub centerline: Vec<P2>,
    pub lane_count: u32,
    pub lane_width: f64,
    pub direction: Direction,
    pub name: Option<String>,
    /// Meters per second.
    pub speed_limit: Option<f64>,
    pub start_node: i64,
    pub end_node: i64,
}

impl RoadSegment {
    pub fn width(&self) -> f64 {
        self.lane_count as f64 * self.lane_width
    }

    pub fn polyline(&self) -> Option<Polyline> {
        Polyline::new(self.centerline.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionKind {
    Building,
    Park,
    Water,
    Grass,
    Paved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub way_id: i64,
    /// Simple counterclockwise ring without the closing duplicate.
    pub polygon: Vec<P2>,
    pub kind: RegionKind,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub node_id: i64,
    pub position: P2,
    /// Ids of segments that start or end here, ascending.
    pub segments: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    Unclassified,
    DegenerateGeometry,
    SelfIntersecting,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestReport {
    pub total_ways: usize,
    pub skipped: Vec<(i64, SkipReason)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoadNetwork {
    pub segments: Vec<RoadSegment>,
    pub junctions: Vec<Junction>,
    pub footprints: Vec<Footprint>,
    pub report: IngestReport,
}

impl RoadNetwork {
    pub fn junction_at(&self, node_id: i64) -> Option<&Junction> {
        self.junctions.iter().find(|j| j.node_id == node_id)
    }

    pub fn buildings(&self) -> impl Iterator<Item = &Footprint> {
        self.footprints
            .iter()
            .filter(|f| f.kind == RegionKind::Building)
    }
}

fn leading_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let end = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .unwrap_or(s.len());
    s[..end].parse().ok()
}

fn parse_lanes(way: &Way) -> u32 {
    way.tag("lanes")
        .and_then(leading_number)
        .map(|n| n as u32)
        .filter(|&n| n >= 1)
        .unwrap_or(DEFAULT_LANES)
}

fn parse_speed(v: &str) -> Option<f64> {
    let n = leading_number(v)?;
    if v.contains("mph") {
        Some(n * 0.447_04)
    } else if v.contains("knots") {
        Some(n * 0.514_444)
    } else {
        Some(n / 3.6)
    }
}

/// `Some(reversed)` for one-way roads. The `oneway` tag is authoritative;
/// roundabouts are implicitly one-way.
fn one_way(way: &Way) -> Option<bool> {
    match way.tag("oneway") {
        Some("yes" | "true" | "1") => Some(false),
        Some("-1" | "reverse") => Some(true),
        Some(_) => None,
        None if way.tag("junction") == Some("roundabout") => Some(false),
        None => None,
    }
}

fn region_kind(tags: &Tags) -> Option<RegionKind> {
    let get = |k: &str| tags.get(k).map(String::as_str);
    if get("building").is_some_and(|v| v != "no") {
        return Some(RegionKind::Building);
    }
    match (get("leisure"), get("natural"), get("landuse")) {
        (Some("park" | "garden" | "pitch" | "playground"), _, _) => Some(RegionKind::Park),
        (_, Some("water"), _) | (_, _, Some("reservoir" | "basin")) => Some(RegionKind::Water),
        (_, Some("wood" | "scrub" | "grassland"), _)
        | (_, _, Some("grass" | "meadow" | "forest" | "village_green")) => Some(RegionKind::Grass),
        _ if get("waterway") == Some("riverbank") => Some(RegionKind::Water),
        _ if get("landuse").is_some() || get("amenity").is_some() || get("area") == Some("yes") => {
            Some(RegionKind::Paved)
        }
        _ => None,
    }
}

/// Classifies ways into road segments, region footprints and skipped ways.
///
/// Open ways with a `highway` tag are roads, as are closed highways unless
/// tagged `area=yes`. Closed ways with a building or land-cover tag become
/// footprints. Endpoint nodes shared by two or more roads become junctions.
pub fn build_road_network(map: &MapData, origin: GeoOrigin) -> RoadNetwork {
    let project = |id: &i64| {
        let n = &map.nodes[id];
        project_geodetic(n.lat, n.lon, origin)
    };
    let mut net = RoadNetwork {
        report: IngestReport {
            total_ways: map.ways.len(),
            skipped: Vec::new(),
        },
        ..Default::default()
    };

    for way in &map.ways {
        let closed = way.is_closed();
        let is_area = way.tag("area") == Some("yes");
        if way.tag("highway").is_some() && !(closed && is_area) {
            let mut refs = way.refs.clone();
            let direction = match one_way(way) {
                Some(reversed) => {
                    if reversed {
                        refs.reverse();
                    }
                    Direction::OneWay
                }
                None => Direction::TwoWay,
            };
            let centerline = geom::dedup_consecutive(refs.iter().map(project).collect());
            if centerline.len() < 2 {
                net.report.skipped.push((way.id, SkipReason::DegenerateGeometry));
                continue;
            }
            let lane_count = parse_lanes(way);
            let lane_width = way
                .tag("width")
                .and_then(leading_number)
                .filter(|w| *w > 0.0)
                .map(|w| w / lane_count as f64)
                .unwrap_or(DEFAULT_LANE_WIDTH_M);
            net.segments.push(RoadSegment {
                id: net.segments.len(),
                way_id: way.id,
                centerline,
                lane_count,
                lane_width,
                direction,
                name: way.tag("name").map(str::to_string),
                speed_limit: way.tag("maxspeed").and_then(parse_speed),
                start_node: refs[0],
                end_node: *refs.last().unwrap(),
            });
            continue;
        }

        let kind = if closed { region_kind(&way.tags) } else { None };
        let Some(kind) = kind else {
            net.report.skipped.push((way.id, SkipReason::Unclassified));
            continue;
        };
        let ring: Vec<P2> = way.refs.iter().map(project).collect();
        let mut ring = geom::clean_ring(&ring);
        if ring.len() < 3 || geom::signed_area(&ring).abs() < 1e-6 {
            net.report.skipped.push((way.id, SkipReason::DegenerateGeometry));
            continue;
        }
        if !geom::is_simple(&ring) {
            net.report.skipped.push((way.id, SkipReason::SelfIntersecting));
            continue;
        }
        if geom::signed_area(&ring) < 0.0 {
            ring.reverse();
        }
        net.footprints.push(Footprint {
            way_id: way.id,
            polygon: ring,
            kind,
            tags: way.tags.clone(),
        });
    }

    let mut endpoints: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for seg in &net.segments {
        endpoints.entry(seg.start_node).or_default().push(seg.id);
        if seg.end_node != seg.start_node {
            endpoints.entry(seg.end_node).or_default().push(seg.id);
        }
    }
    net.junctions = endpoints
        .into_iter()
        .filter(|(_, segs)| segs.len() >= 2)
        .map(|(node_id, segments)| Junction {
            node_id,
            position: project(&node_id),
            segments,
        })
        .collect();
    net
}

/// Lane centerlines ordered left to right in the segment's travel direction.
/// Lane `i` sits `(i - (n-1)/2) * lane_width` to the right of the centerline.
pub fn lane_centerlines(seg: &RoadSegment) -> Result<Vec<Polyline>, MapError> {
    let degenerate = || MapError::DegenerateCenterline { segment: seg.id };
    let base = seg.polyline().ok_or_else(degenerate)?;
    let n = seg.lane_count.max(1);
    (0..n)
        .map(|i| {
            let right = (i as f64 - (n as f64 - 1.0) / 2.0) * seg.lane_width;
            Polyline::new(geom::offset_polyline(base.points(), -right)).ok_or_else(degenerate)
        })
        .collect()
}
