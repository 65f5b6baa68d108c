//! Street furniture placement along sidewalks and at junctions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mesh::{Albedo, Mesh, Pose, P3};
use super::primitives::{add_box, add_cone, add_cylinder, add_quad};
use super::roads::{trimmed_span, DEFAULT_SIDEWALK_WIDTH_M};
use super::SemanticClass;
use crate::geom::{left_normal, Polyline, P2};
use crate::map::RoadNetwork;
use crate::rng::{keyed_rng, Domain};

/// Spacings in meters (`inf` disables a prop type); densities per kilometre
/// of sidewalk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropPolicy {
    pub sidewalk_width: f64,
    pub lamp_spacing: f64,
    pub tree_spacing: f64,
    pub fence_spacing: f64,
    pub traffic_lights: bool,
    pub traffic_signs: bool,
    pub pedestrians_per_km: f64,
    pub cyclists_per_km: f64,
    pub chairs_per_km: f64,
    pub billboards_per_km: f64,
}

impl Default for PropPolicy {
    fn default() -> Self {
        Self {
            sidewalk_width: DEFAULT_SIDEWALK_WIDTH_M,
            lamp_spacing: 15.0,
            tree_spacing: 15.0,
            fence_spacing: f64::INFINITY,
            traffic_lights: true,
            traffic_signs: true,
            pedestrians_per_km: 0.0,
            cyclists_per_km: 0.0,
            chairs_per_km: 0.0,
            billboards_per_km: 0.0,
        }
    }
}

impl PropPolicy {
    pub fn disabled() -> Self {
        Self {
            lamp_spacing: f64::INFINITY,
            tree_spacing: f64::INFINITY,
            fence_spacing: f64::INFINITY,
            traffic_lights: false,
            traffic_signs: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PropKind {
    LampPole,
    Tree,
    Fence,
    TrafficLight,
    TrafficSign,
    Pedestrian,
    Cyclist,
    Chair,
    Billboard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop {
    pub kind: PropKind,
    pub mesh: Mesh,
    pub pose: Pose,
}

pub fn prop_mesh(kind: PropKind) -> Mesh {
    use SemanticClass as C;
    const GRAY: Albedo = [0.45, 0.45, 0.47];
    let o = P2::origin();
    let mut m = Mesh::new();
    match kind {
        PropKind::LampPole => {
            add_cylinder(&mut m, o, 0.09, 0.0, 6.0, C::LampPole, GRAY);
            add_box(&mut m, P2::new(0.5, 0.0), 1.2, 0.3, 6.0, 6.2, C::LampPole, [0.85, 0.85, 0.75]);
        }
        PropKind::Tree => {
            add_cylinder(&mut m, o, 0.15, 0.0, 2.2, C::Tree, [0.36, 0.25, 0.16]);
            add_cone(&mut m, o, 1.6, 1.8, 6.5, C::Tree, [0.16, 0.42, 0.14]);
        }
        PropKind::Fence => {
            add_box(&mut m, o, 3.0, 0.06, 0.0, 1.1, C::Fence, [0.55, 0.5, 0.44]);
        }
        PropKind::TrafficLight => {
            add_cylinder(&mut m, o, 0.1, 0.0, 4.0, C::TrafficLight, GRAY);
            add_box(&mut m, P2::new(0.0, 0.0), 0.35, 0.35, 4.0, 5.0, C::TrafficLight, [0.12, 0.12, 0.1]);
        }
        PropKind::TrafficSign => {
            add_cylinder(&mut m, o, 0.05, 0.0, 2.3, C::TrafficSign, GRAY);
            add_quad(
                &mut m,
                [
                    P3::new(0.0, -0.35, 2.3),
                    P3::new(0.0, 0.35, 2.3),
                    P3::new(0.0, 0.35, 3.0),
                    P3::new(0.0, -0.35, 3.0),
                ],
                C::TrafficSign,
                [0.1, 0.3, 0.75],
            );
        }
        PropKind::Pedestrian => {
            add_box(&mut m, o, 0.3, 0.45, 0.0, 1.45, C::Pedestrian, [0.3, 0.25, 0.45]);
            add_box(&mut m, o, 0.22, 0.22, 1.45, 1.72, C::Pedestrian, [0.85, 0.68, 0.55]);
        }
        PropKind::Cyclist => {
            add_box(&mut m, o, 1.7, 0.12, 0.0, 0.9, C::Cyclist, [0.15, 0.15, 0.15]);
            add_box(&mut m, o, 0.35, 0.45, 0.9, 1.6, C::Cyclist, [0.7, 0.2, 0.15]);
            add_box(&mut m, o, 0.22, 0.22, 1.6, 1.85, C::Cyclist, [0.85, 0.68, 0.55]);
        }
        PropKind::Chair => {
            add_box(&mut m, o, 0.5, 0.5, 0.0, 0.45, C::Chair, [0.5, 0.32, 0.18]);
            add_box(&mut m, P2::new(0.0, 0.22), 0.5, 0.06, 0.45, 0.95, C::Chair, [0.5, 0.32, 0.18]);
        }
        PropKind::Billboard => {
            add_cylinder(&mut m, P2::new(-1.2, 0.0), 0.08, 0.0, 2.5, C::Billboard, GRAY);
            add_cylinder(&mut m, P2::new(1.2, 0.0), 0.08, 0.0, 2.5, C::Billboard, GRAY);
            add_box(&mut m, o, 3.2, 0.15, 2.5, 4.3, C::Billboard, [0.9, 0.75, 0.2]);
        }
    }
    m
}

fn place(kind: PropKind, p: P2, yaw: f64) -> Prop {
    Prop {
        kind,
        mesh: prop_mesh(kind),
        pose: Pose::new(P3::new(p.x, p.y, 0.0), yaw),
    }
}

/// Sidewalk point at arc length `s`, `lateral` meters from the centerline on
/// `side` (+1 left, -1 right), facing along the road.
fn curbside(line: &Polyline, s: f64, side: f64, lateral: f64) -> (P2, f64) {
    let (p, t) = line.sample(s);
    (p + left_normal(t) * (side * lateral), t.y.atan2(t.x))
}

/// Places props along every segment and at junctions. Regular props use
/// `floor(span / spacing)` slots per side; scattered props draw from a
/// stream keyed by `(seed, segment id)`.
pub fn place_props(net: &RoadNetwork, policy: &PropPolicy, seed: u64) -> Vec<Prop> {
    let mut out = Vec::new();
    let sw = policy.sidewalk_width;
    for seg in &net.segments {
        let (Some(line), Some((a, b))) = (seg.polyline(), trimmed_span(net, seg, sw)) else {
            continue;
        };
        let span = b - a;
        let half = seg.width() / 2.0;
        for side in [1.0, -1.0] {
            if policy.lamp_spacing.is_finite() && policy.lamp_spacing > 0.0 {
                let n = (span / policy.lamp_spacing).floor() as usize;
                for k in 0..n {
                    let s = a + (k as f64 + 0.5) * policy.lamp_spacing;
                    let (p, yaw) = curbside(&line, s, side, half + 0.4);
                    out.push(place(PropKind::LampPole, p, yaw + side * std::f64::consts::FRAC_PI_2));
                }
            }
            if policy.tree_spacing.is_finite() && policy.tree_spacing > 0.0 {
                let n = (span / policy.tree_spacing).floor() as usize;
                for k in 0..n {
                    let s = a + (k as f64 + 1.0) * policy.tree_spacing;
                    if s > b - 1.0 {
                        break;
                    }
                    let (p, yaw) = curbside(&line, s, side, half + sw - 0.7);
                    out.push(place(PropKind::Tree, p, yaw));
                }
            }
            if policy.fence_spacing.is_finite() && policy.fence_spacing > 0.0 {
                let n = (span / policy.fence_spacing).floor() as usize;
                for k in 0..n {
                    let s = a + (k as f64 + 0.5) * policy.fence_spacing;
                    let (p, yaw) = curbside(&line, s, side, half + sw - 0.1);
                    out.push(place(PropKind::Fence, p, yaw));
                }
            }
        }

        let mut rng = keyed_rng(seed, Domain::Props, seg.id as u64);
        let km = span / 1000.0;
        let scattered = [
            (PropKind::Pedestrian, policy.pedestrians_per_km),
            (PropKind::Cyclist, policy.cyclists_per_km),
            (PropKind::Chair, policy.chairs_per_km),
            (PropKind::Billboard, policy.billboards_per_km),
        ];
        for (kind, per_km) in scattered {
            if per_km <= 0.0 {
                continue;
            }
            let expected = per_km * km;
            let n = expected.floor() as usize + usize::from(rng.random::<f64>() < expected.fract());
            for _ in 0..n {
                let s = rng.random_range(a..b.max(a + 1e-6));
                let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let lateral = half + rng.random_range(0.5..(sw - 0.4).max(0.6));
                let (p, yaw) = curbside(&line, s, side, lateral);
                let turn = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                let yaw = if kind == PropKind::Billboard { yaw } else { yaw + turn };
                out.push(place(kind, p, yaw));
            }
        }
    }

    for junction in &net.junctions {
        for &s in &junction.segments {
            let seg = &net.segments[s];
            let (Some(line), Some((a, b))) = (seg.polyline(), trimmed_span(net, seg, sw)) else {
                continue;
            };
            let at_start = seg.start_node == junction.node_id;
            let (s_pos, side) = if at_start { (a, -1.0) } else { (b, 1.0) };
            // right-hand corner for traffic approaching the junction on this segment
            let (p, yaw) = curbside(&line, s_pos, side, seg.width() / 2.0 + 0.5);
            if policy.traffic_lights && junction.segments.len() >= 3 {
                out.push(place(PropKind::TrafficLight, p, yaw));
            }
            if policy.traffic_signs {
                let back = if at_start { (a + 3.0).min(b) } else { (b - 3.0).max(a) };
                let (q, yaw) = curbside(&line, back, side, seg.width() / 2.0 + 0.5);
                out.push(place(PropKind::TrafficSign, q, yaw));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{Direction, RoadSegment};

    fn one_segment(len: f64) -> RoadNetwork {
        RoadNetwork {
            segments: vec![RoadSegment {
                id: 0,
                way_id: 1,
                centerline: vec![P2::new(0.0, 0.0), P2::new(len, 0.0)],
                lane_count: 2,
                lane_width: 3.5,
                direction: Direction::TwoWay,
                name: None,
                speed_limit: None,
                start_node: 1,
                end_node: 2,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn lamp_count_follows_spacing() {
        let policy = PropPolicy {
            tree_spacing: f64::INFINITY,
            ..PropPolicy::default()
        };
        let props = place_props(&one_segment(150.0), &policy, 1);
        let left = props.iter().filter(|p| p.kind == PropKind::LampPole && p.pose.position.y > 0.0).count();
        let right = props.iter().filter(|p| p.kind == PropKind::LampPole && p.pose.position.y < 0.0).count();
        assert!(left.abs_diff(10) <= 1 && right.abs_diff(10) <= 1, "{left} {right}");
        for p in &props {
            let y = p.pose.position.y.abs();
            assert!(y > 3.5 && y < 5.5, "lamp on sidewalk");
        }
    }

    #[test]
    fn infinite_spacing_disables() {
        assert!(place_props(&one_segment(150.0), &PropPolicy::disabled(), 1).is_empty());
    }

    #[test]
    fn scatter_is_seeded() {
        let policy = PropPolicy {
            pedestrians_per_km: 40.0,
            cyclists_per_km: 10.0,
            ..PropPolicy::default()
        };
        let net = one_segment(300.0);
        let a = place_props(&net, &policy, 9);
        let b = place_props(&net, &policy, 9);
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|p| p.kind == PropKind::Pedestrian).count(), 12);
        let c = place_props(&net, &policy, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn prop_meshes_are_valid_and_single_class() {
        for kind in [
            PropKind::LampPole,
            PropKind::Tree,
            PropKind::Fence,
            PropKind::TrafficLight,
            PropKind::TrafficSign,
            PropKind::Chair,
            PropKind::Billboard,
        ] {
            let m = prop_mesh(kind);
            m.validate().unwrap();
            assert!(m.classes.windows(2).all(|w| w[0] == w[1]));
        }
    }
}
