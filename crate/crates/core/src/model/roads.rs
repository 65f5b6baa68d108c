use super::mesh::{Albedo, Mesh, P3};
use super::primitives;
use super::SemanticClass;
use crate::geom::{self, Polyline, P2};
use crate::map::{RoadNetwork, RoadSegment};

pub const DEFAULT_SIDEWALK_WIDTH_M: f64 = 2.0;

const ROAD_ALBEDO: Albedo = [0.22, 0.22, 0.24];
const SIDEWALK_ALBEDO: Albedo = [0.62, 0.6, 0.56];
/// Fraction of a segment's length that junction trimming may consume.
const MAX_TRIM_FRACTION: f64 = 0.8;

/// Distance from a junction's center to where segment ribbons begin.
pub fn junction_radius(net: &RoadNetwork, node_id: i64, sidewalk_width: f64) -> f64 {
    net.junction_at(node_id)
        .map(|j| {
            j.segments
                .iter()
                .map(|&s| net.segments[s].width() / 2.0 + sidewalk_width)
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0)
}

/// The part of a segment's centerline outside its end junctions, as
/// `(start, end)` arc lengths.
pub fn trimmed_span(net: &RoadNetwork, seg: &RoadSegment, sidewalk_width: f64) -> Option<(f64, f64)> {
    let len = seg.polyline()?.length();
    let mut a = junction_radius(net, seg.start_node, sidewalk_width);
    let mut b = junction_radius(net, seg.end_node, sidewalk_width);
    if a + b > MAX_TRIM_FRACTION * len {
        let scale = MAX_TRIM_FRACTION * len / (a + b);
        a *= scale;
        b *= scale;
    }
    Some((a, len - b))
}

/// Ribbon between lateral offsets `lo < hi` (positive = left of travel).
fn ribbon(line: &Polyline, lo: f64, hi: f64, class: SemanticClass, albedo: Albedo) -> Mesh {
    let right = geom::offset_polyline(line.points(), lo);
    let left = geom::offset_polyline(line.points(), hi);
    let mut mesh = Mesh::new();
    let r: Vec<u32> = right.iter().map(|p| mesh.add_vertex(P3::new(p.x, p.y, 0.0))).collect();
    let l: Vec<u32> = left.iter().map(|p| mesh.add_vertex(P3::new(p.x, p.y, 0.0))).collect();
    for i in 0..r.len() - 1 {
        mesh.add_triangle([r[i], r[i + 1], l[i + 1]], class, albedo);
        mesh.add_triangle([r[i], l[i + 1], l[i]], class, albedo);
    }
    mesh
}

/// Road and sidewalk surfaces at z = 0. Each segment yields three meshes in
/// order: the road ribbon (width `lane_count * lane_width`), the left
/// sidewalk and the right sidewalk. Junction fills follow all segments.
pub fn generate_road_mesh_with(net: &RoadNetwork, sidewalk_width: f64) -> Vec<Mesh> {
    let mut out = Vec::with_capacity(net.segments.len() * 3 + net.junctions.len());
    for seg in &net.segments {
        let Some((a, b)) = trimmed_span(net, seg, sidewalk_width) else {
            continue;
        };
        let Some(line) = seg.polyline().and_then(|p| p.slice(a, b)) else {
            continue;
        };
        let half = seg.width() / 2.0;
        out.push(ribbon(&line, -half, half, SemanticClass::Road, ROAD_ALBEDO));
        out.push(ribbon(&line, half, half + sidewalk_width, SemanticClass::Sidewalk, SIDEWALK_ALBEDO));
        out.push(ribbon(&line, -half - sidewalk_width, -half, SemanticClass::Sidewalk, SIDEWALK_ALBEDO));
    }
    for junction in &net.junctions {
        let mut corners = Vec::new();
        for &s in &junction.segments {
            let seg = &net.segments[s];
            let (Some(line), Some((a, b))) = (seg.polyline(), trimmed_span(net, seg, sidewalk_width)) else {
                continue;
            };
            let at = if seg.start_node == junction.node_id { a } else { b };
            let (p, t) = line.sample(at);
            let n = geom::left_normal(t) * (seg.width() / 2.0);
            corners.push(p + n);
            corners.push(p - n);
            if seg.start_node == junction.node_id && seg.end_node == junction.node_id {
                let (q, u) = line.sample(b);
                let m = geom::left_normal(u) * (seg.width() / 2.0);
                corners.push(q + m);
                corners.push(q - m);
            }
        }
        corners.push(junction.position);
        let hull = geom::convex_hull(&corners);
        if hull.len() >= 3 && geom::signed_area(&hull) > 1e-6 {
            let mut mesh = Mesh::new();
            primitives::add_polygon(&mut mesh, &hull, 0.0, SemanticClass::Road, ROAD_ALBEDO);
            out.push(mesh);
        }
    }
    out
}

pub fn generate_road_mesh(net: &RoadNetwork) -> Vec<Mesh> {
    generate_road_mesh_with(net, DEFAULT_SIDEWALK_WIDTH_M)
}

/// Axis-aligned rectangle `(min, max)` enclosing every centerline and
/// footprint plus `margin`.
pub fn network_extent(net: &RoadNetwork, margin: f64) -> (P2, P2) {
    let pts = net
        .segments
        .iter()
        .flat_map(|s| s.centerline.iter())
        .chain(net.footprints.iter().flat_map(|f| f.polygon.iter()));
    let (mut lo, mut hi) = (P2::new(f64::INFINITY, f64::INFINITY), P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if !lo.x.is_finite() {
        return (P2::new(-margin, -margin), P2::new(margin, margin));
    }
    (
        P2::new(lo.x - margin, lo.y - margin),
        P2::new(hi.x + margin, hi.y + margin),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{Direction, Junction};

    fn seg(id: usize, pts: Vec<P2>, lanes: u32, start: i64, end: i64) -> RoadSegment {
        RoadSegment {
            id,
            way_id: id as i64,
            centerline: pts,
            lane_count: lanes,
            lane_width: 3.5,
            direction: Direction::TwoWay,
            name: None,
            speed_limit: None,
            start_node: start,
            end_node: end,
        }
    }

    fn lateral_extent(mesh: &Mesh) -> (f64, f64) {
        let ys = mesh.vertices.iter().map(|v| v.y);
        (ys.clone().fold(f64::MAX, f64::min), ys.fold(f64::MIN, f64::max))
    }

    #[test]
    fn straight_two_lane_ribbon_is_seven_meters() {
        let net = RoadNetwork {
            segments: vec![seg(0, vec![P2::new(0.0, 0.0), P2::new(100.0, 0.0)], 2, 1, 2)],
            ..Default::default()
        };
        let meshes = generate_road_mesh(&net);
        assert_eq!(meshes.len(), 3);
        let (lo, hi) = lateral_extent(&meshes[0]);
        assert!((hi - lo - 7.0).abs() < 1e-12);
        assert!(meshes[0].classes.iter().all(|c| *c == SemanticClass::Road));
        for m in &meshes[1..] {
            assert!(m.classes.iter().all(|c| *c == SemanticClass::Sidewalk));
            let (lo, hi) = lateral_extent(m);
            assert!((hi - lo - 2.0).abs() < 1e-12);
        }
        assert!(meshes.iter().flat_map(|m| &m.vertices).all(|v| v.z == 0.0));
        for m in &meshes {
            for t in 0..m.triangles.len() {
                assert!(m.normal(t).z > 0.99);
            }
        }
    }

    #[test]
    fn empty_network_yields_nothing() {
        assert!(generate_road_mesh(&RoadNetwork::default()).is_empty());
    }

    #[test]
    fn crossing_gets_junction_fill() {
        let net = RoadNetwork {
            segments: vec![
                seg(0, vec![P2::new(-100.0, 0.0), P2::new(0.0, 0.0)], 2, 1, 9),
                seg(1, vec![P2::new(0.0, 0.0), P2::new(0.0, 100.0)], 2, 9, 2),
            ],
            junctions: vec![Junction {
                node_id: 9,
                position: P2::origin(),
                segments: vec![0, 1],
            }],
            ..Default::default()
        };
        let meshes = generate_road_mesh(&net);
        assert_eq!(meshes.len(), 7);
        let fill = meshes.last().unwrap();
        assert!(fill.classes.iter().all(|c| *c == SemanticClass::Road));
        // segment 0's road ribbon stops short of the junction by 3.5 + 2 m
        let max_x = meshes[0].vertices.iter().map(|v| v.x).fold(f64::MIN, f64::max);
        assert!((max_x + 5.5).abs() < 1e-9);
    }
}
