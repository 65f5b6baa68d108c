//! Assembles a renderable scene from a road network, building rules and a
//! traffic census, and produces per-frame snapshots.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    camera_pose, host_trajectory, populate_vehicles_avoiding, CameraRig, DynamicsError, Trajectory, VehicleCensus,
};
use crate::geom::P2;
use crate::map::{RegionKind, RoadNetwork};
use crate::model::grammar::{apply_rules, GrammarError, RuleProgram};
use crate::model::primitives::{add_polygon, add_quad};
use crate::model::props::{place_props, PropPolicy};
use crate::model::roads::{generate_road_mesh_with, network_extent};
use crate::model::vehicles::vehicle_mesh;
use crate::model::{Albedo, Mesh, Pose, SemanticClass, P3};
use crate::par;
use crate::render::{bounding_sphere, Camera, Instance};

pub const GROUND_Z: f64 = -0.05;
pub const REGION_Z: f64 = -0.02;
const GROUND_MARGIN_M: f64 = 400.0;
const GROUND_ALBEDO: Albedo = [0.32, 0.36, 0.22];

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("building {way}: {source}")]
    Grammar {
        way: i64,
        #[source]
        source: GrammarError,
    },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Where the onboard camera's unrendered host vehicle drives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostSpec {
    pub way: i64,
    pub lane: usize,
    pub start_offset: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub props: PropPolicy,
    pub census: VehicleCensus,
    pub host: Option<HostSpec>,
    pub rig: CameraRig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    /// Mesh is already in world coordinates.
    Static,
    /// Mesh is in vehicle-local coordinates and follows `vehicles[i]`.
    Vehicle(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneNode {
    pub mesh: Mesh,
    pub sphere: (P3, f64),
    pub motion: Motion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub nodes: Vec<SceneNode>,
    pub vehicles: Vec<Trajectory>,
    /// Unrendered trajectories the camera rig may ride on.
    pub hosts: Vec<Trajectory>,
    pub rig: CameraRig,
}

fn node(mesh: Mesh, motion: Motion) -> SceneNode {
    SceneNode {
        sphere: bounding_sphere(&mesh),
        mesh,
        motion,
    }
}

fn baked(mesh: &Mesh, pose: &Pose) -> Mesh {
    let mut out = mesh.clone();
    for v in &mut out.vertices {
        *v = pose.transform_point(v);
    }
    out
}

fn region_style(kind: &RegionKind) -> Option<(SemanticClass, Albedo)> {
    match kind {
        RegionKind::Building => None,
        RegionKind::Park | RegionKind::Grass => Some((SemanticClass::Vegetation, [0.25, 0.5, 0.2])),
        RegionKind::Water => Some((SemanticClass::Vegetation, [0.2, 0.35, 0.55])),
        RegionKind::Paved => Some((SemanticClass::Sidewalk, [0.6, 0.58, 0.55])),
    }
}

/// Builds the static world and traffic. Node order: ground, regions, roads,
/// buildings, props, vehicles. Instance ids count up from 1 over annotatable
/// props, then vehicles.
pub fn build_scene(net: &RoadNetwork, rules: &RuleProgram, params: &SceneParams) -> Result<Scene, SceneError> {
    params.rig.validate()?;
    let mut nodes = Vec::new();

    let (lo, hi) = network_extent(net, GROUND_MARGIN_M);
    let mut ground = Mesh::new();
    add_quad(
        &mut ground,
        [
            P3::new(lo.x, lo.y, GROUND_Z),
            P3::new(hi.x, lo.y, GROUND_Z),
            P3::new(hi.x, hi.y, GROUND_Z),
            P3::new(lo.x, hi.y, GROUND_Z),
        ],
        SemanticClass::Vegetation,
        GROUND_ALBEDO,
    );
    nodes.push(node(ground, Motion::Static));

    for fp in &net.footprints {
        if let Some((class, albedo)) = region_style(&fp.kind) {
            let mut m = Mesh::new();
            add_polygon(&mut m, &fp.polygon, REGION_Z, class, albedo);
            nodes.push(node(m, Motion::Static));
        }
    }

    for m in generate_road_mesh_with(net, params.props.sidewalk_width) {
        nodes.push(node(m, Motion::Static));
    }

    let buildings: Vec<_> = net.buildings().collect();
    let meshes = par::map(&buildings, |fp| {
        apply_rules(rules, &fp.polygon, fp.way_id as u64, params.seed).map_err(|source| SceneError::Grammar {
            way: fp.way_id,
            source,
        })
    });
    for m in meshes {
        nodes.push(node(m?, Motion::Static));
    }

    let mut next_instance = 1u32;
    for prop in place_props(net, &params.props, params.seed) {
        let mut m = baked(&prop.mesh, &prop.pose);
        if m.classes.iter().any(|c| c.is_annotatable()) {
            m.instance = next_instance;
            next_instance += 1;
        }
        nodes.push(node(m, Motion::Static));
    }

    let hosts = match params.host {
        Some(h) => vec![host_trajectory(net, h.way, h.lane, h.start_offset, h.speed, params.seed)?],
        None => Vec::new(),
    };
    let avoid: Vec<P2> = hosts
        .iter()
        .filter_map(|h| h.pose_at(h.start_time))
        .map(|p| P2::new(p.position.x, p.position.y))
        .collect();
    let vehicles = populate_vehicles_avoiding(net, &params.census, params.seed, &avoid)?;
    for (i, v) in vehicles.iter().enumerate() {
        nodes.push(node(vehicle_mesh(v.kind, v.paint, next_instance), Motion::Vehicle(i)));
        next_instance += 1;
    }

    Ok(Scene {
        nodes,
        vehicles,
        hosts,
        rig: params.rig,
    })
}

impl Scene {
    /// Pose of node `i` at `t`; `None` if it is a vehicle not active then.
    pub fn pose_of(&self, i: usize, t: f64) -> Option<Pose> {
        match self.nodes[i].motion {
            Motion::Static => Some(Pose::IDENTITY),
            Motion::Vehicle(v) => self.vehicles[v].pose_at(t),
        }
    }

    pub fn poses_at(&self, t: f64) -> Vec<Option<Pose>> {
        (0..self.nodes.len()).map(|i| self.pose_of(i, t)).collect()
    }

    /// Every node present at `t`, with its pose.
    pub fn snapshot(&self, t: f64) -> Vec<Instance<'_>> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| {
                self.pose_of(i, t).map(|pose| Instance {
                    node: i as u32,
                    mesh: &n.mesh,
                    pose,
                    sphere: n.sphere,
                })
            })
            .collect()
    }

    pub fn camera_at(&self, t: f64) -> Result<Camera, DynamicsError> {
        camera_pose(&self.rig, t, &self.hosts)
    }

    pub fn static_mesh_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.motion == Motion::Static).count()
    }

    pub fn triangle_count(&self) -> usize {
        self.nodes.iter().map(|n| n.mesh.triangles.len()).sum()
    }
}
