use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DynamicsError, Trajectory};
use crate::geom::{Polyline, P2};
use crate::map::{lane_centerlines, Direction, RoadNetwork, RoadSegment};
use crate::model::roads::{trimmed_span, DEFAULT_SIDEWALK_WIDTH_M};
use crate::model::vehicles::VehicleKind;
use crate::rng::{keyed_rng, Domain};

pub const DEFAULT_SPEED_MPS: f64 = 10.0;
/// Curb length reserved per parked vehicle; fits the longest template.
pub const PARKING_SLOT_M: f64 = 14.0;
/// Initial gap between moving vehicles sharing a lane.
pub const MOVING_SLOT_M: f64 = 20.0;
/// Routes are chained across junctions until they are at least this long
/// past the start offset.
pub const ROUTE_HORIZON_M: f64 = 2000.0;
const MAX_ROUTE_HOPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KindCounts {
    pub car: usize,
    pub bus: usize,
    pub truck: usize,
}

impl KindCounts {
    pub fn total(&self) -> usize {
        self.car + self.bus + self.truck
    }

    fn expand(&self) -> Vec<VehicleKind> {
        let mut v = vec![VehicleKind::Bus; self.bus];
        v.extend(std::iter::repeat_n(VehicleKind::Truck, self.truck));
        v.extend(std::iter::repeat_n(VehicleKind::Car, self.car));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleCensus {
    pub parked: KindCounts,
    pub moving: KindCounts,
    /// Speed of moving vehicles, m/s.
    pub speed: f64,
}

impl Default for VehicleCensus {
    fn default() -> Self {
        Self {
            parked: KindCounts::default(),
            moving: KindCounts::default(),
            speed: DEFAULT_SPEED_MPS,
        }
    }
}

impl VehicleCensus {
    pub fn total(&self) -> usize {
        self.parked.total() + self.moving.total()
    }
}

/// A lane with its travel sense relative to the segment centerline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LaneRole {
    index: usize,
    forward: bool,
    curb: bool,
}

fn lane_roles(seg: &RoadSegment) -> Vec<LaneRole> {
    let n = seg.lane_count.max(1) as usize;
    let backward = match seg.direction {
        Direction::OneWay => 0,
        Direction::TwoWay => n / 2,
    };
    let forward = n - backward;
    (0..n)
        .map(|index| {
            let fwd = index >= backward;
            let curb = if fwd {
                forward >= 2 && index == n - 1
            } else {
                backward >= 2 && index == 0
            };
            LaneRole {
                index,
                forward: fwd,
                curb,
            }
        })
        .collect()
}

/// Per-segment lane paths oriented along travel, plus their usable span.
struct LaneTable {
    lanes: Vec<Vec<(LaneRole, Polyline, f64, f64)>>,
}

impl LaneTable {
    fn new(net: &RoadNetwork) -> Self {
        let lanes = net
            .segments
            .iter()
            .map(|seg| {
                let (Ok(lines), Some((a, b))) = (lane_centerlines(seg), trimmed_span(net, seg, DEFAULT_SIDEWALK_WIDTH_M))
                else {
                    return Vec::new();
                };
                let len = seg.polyline().map(|p| p.length()).unwrap_or(0.0);
                lane_roles(seg)
                    .into_iter()
                    .map(|role| {
                        let line = &lines[role.index];
                        if role.forward {
                            (role, line.clone(), a, b)
                        } else {
                            (role, line.reversed(), len - b, len - a)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { lanes }
    }

    /// Extends a route from the end of `(segment, lane)` by hopping through
    /// junctions, choosing each next lane with `rng`.
    fn route(&self, net: &RoadNetwork, segment: usize, lane: usize, min_len: f64, rng: &mut ChaCha8Rng) -> Polyline {
        let (role, line, _, _) = &self.lanes[segment][lane];
        let mut points = line.points().to_vec();
        let mut length = line.length();
        let (mut seg, mut forward) = (segment, role.forward);
        for _ in 0..MAX_ROUTE_HOPS {
            if length >= min_len {
                break;
            }
            let s = &net.segments[seg];
            let node = if forward { s.end_node } else { s.start_node };
            let Some(junction) = net.junction_at(node) else {
                break;
            };
            let mut options = Vec::new();
            for &next in &junction.segments {
                if next == seg && junction.segments.len() > 1 {
                    continue;
                }
                let ns = &net.segments[next];
                for (k, (r, ..)) in self.lanes[next].iter().enumerate() {
                    let departs = (ns.start_node == node && r.forward) || (ns.end_node == node && !r.forward);
                    if departs && !r.curb {
                        options.push((next, k));
                    }
                }
            }
            if options.is_empty() {
                break;
            }
            let (next, k) = options[rng.random_range(0..options.len())];
            let next_line = &self.lanes[next][k].1;
            length += (next_line.points()[0] - *points.last().unwrap()).norm() + next_line.length();
            points.extend_from_slice(next_line.points());
            seg = next;
            forward = self.lanes[next][k].0.forward;
        }
        Polyline::new(points).expect("route keeps its first lane")
    }
}

fn far_from(p: P2, avoid: &[P2], clearance: f64) -> bool {
    avoid.iter().all(|q| (p - q).norm() >= clearance)
}

/// Places the census on the network. Parked vehicles fill curb-lane slots
/// of directions with at least two lanes; moving vehicles start on the other
/// lanes, spaced [`MOVING_SLOT_M`] apart, and follow random routes.
pub fn populate_vehicles(net: &RoadNetwork, census: &VehicleCensus, seed: u64) -> Result<Vec<Trajectory>, DynamicsError> {
    populate_vehicles_avoiding(net, census, seed, &[])
}

/// Like [`populate_vehicles`], skipping slots within one moving-slot length
/// of any point in `avoid` (for example an unrendered camera host).
pub fn populate_vehicles_avoiding(
    net: &RoadNetwork,
    census: &VehicleCensus,
    seed: u64,
    avoid: &[P2],
) -> Result<Vec<Trajectory>, DynamicsError> {
    if census.total() == 0 {
        return Ok(Vec::new());
    }
    let table = LaneTable::new(net);
    let mut parking = Vec::new();
    let mut moving = Vec::new();
    for (si, lanes) in table.lanes.iter().enumerate() {
        for (li, (role, line, a, b)) in lanes.iter().enumerate() {
            let (slot, slots) = if role.curb {
                (PARKING_SLOT_M, &mut parking)
            } else {
                (MOVING_SLOT_M, &mut moving)
            };
            let mut s = a + slot / 2.0;
            while s + slot / 2.0 <= *b {
                if far_from(line.sample(s).0, avoid, MOVING_SLOT_M) {
                    slots.push((si, li, s));
                }
                s += slot;
            }
        }
    }
    if census.parked.total() > parking.len() {
        return Err(DynamicsError::Capacity {
            what: "parked",
            requested: census.parked.total(),
            available: parking.len(),
        });
    }
    if census.moving.total() > moving.len() {
        return Err(DynamicsError::Capacity {
            what: "moving",
            requested: census.moving.total(),
            available: moving.len(),
        });
    }
    let mut rng = keyed_rng(seed, Domain::Parking, 0);
    parking.shuffle(&mut rng);
    let mut out = Vec::with_capacity(census.total());
    for (kind, &(si, li, s)) in census.parked.expand().into_iter().zip(&parking) {
        out.push(Trajectory {
            path: table.lanes[si][li].1.clone(),
            start_offset: s,
            speed: 0.0,
            start_time: 0.0,
            end_time: f64::INFINITY,
            kind,
            paint: rng.random_range(0..64),
            parked: true,
        });
    }
    let mut rng = keyed_rng(seed, Domain::Traffic, 0);
    moving.shuffle(&mut rng);
    for (i, (kind, &(si, li, s))) in census.moving.expand().into_iter().zip(&moving).enumerate() {
        let mut route_rng = keyed_rng(seed, Domain::Traffic, i as u64 + 1);
        out.push(Trajectory {
            path: table.route(net, si, li, s + ROUTE_HORIZON_M, &mut route_rng),
            start_offset: s,
            speed: census.speed,
            start_time: 0.0,
            end_time: f64::INFINITY,
            kind,
            paint: route_rng.random_range(0..64),
            parked: false,
        });
    }
    Ok(out)
}

/// Route for an unrendered camera host starting on lane `lane` (index in
/// left-to-right order) of the first segment built from OSM way `way_id`.
pub fn host_trajectory(
    net: &RoadNetwork,
    way_id: i64,
    lane: usize,
    start_offset: f64,
    speed: f64,
    seed: u64,
) -> Result<Trajectory, DynamicsError> {
    let seg = net
        .segments
        .iter()
        .find(|s| s.way_id == way_id)
        .ok_or(DynamicsError::UnknownWay(way_id))?;
    let table = LaneTable::new(net);
    if lane >= table.lanes[seg.id].len() {
        return Err(DynamicsError::UnknownLane {
            way: way_id,
            lane,
            lanes: table.lanes[seg.id].len(),
        });
    }
    let mut rng = keyed_rng(seed, Domain::Traffic, u64::MAX);
    Ok(Trajectory {
        path: table.route(net, seg.id, lane, start_offset + ROUTE_HORIZON_M, &mut rng),
        start_offset,
        speed,
        start_time: 0.0,
        end_time: f64::INFINITY,
        kind: VehicleKind::Car,
        paint: 0,
        parked: speed == 0.0,
    })
}
