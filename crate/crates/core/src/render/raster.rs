use crate::model::{Albedo, Mesh, Pose, SemanticClass, P3, V3};
use crate::par;

use super::camera::Camera;

/// Rows per raster band. Each band is owned by one worker.
pub const BAND_ROWS: usize = 16;

/// Node index stored for pixels with no geometry.
pub const NO_NODE: u32 = u32::MAX;

/// A mesh placed in the world for one frame. `node` identifies the owning
/// scene node across frames.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    pub node: u32,
    pub mesh: &'a Mesh,
    pub pose: Pose,
    /// Local-space bounding sphere used for culling.
    pub sphere: (P3, f64),
}

impl<'a> Instance<'a> {
    pub fn new(node: u32, mesh: &'a Mesh, pose: Pose) -> Self {
        Self {
            node,
            mesh,
            pose,
            sphere: bounding_sphere(mesh),
        }
    }
}

pub fn bounding_sphere(mesh: &Mesh) -> (P3, f64) {
    match mesh.bounds() {
        Some(b) => {
            let c = nalgebra::center(&b.min, &b.max);
            (c, (b.max - c).norm())
        }
        None => (P3::origin(), 0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub class: SemanticClass,
    /// Instance id, 0 for non-annotatable surfaces and sky.
    pub instance: u32,
    /// Owning scene node, [`NO_NODE`] for sky.
    pub node: u32,
    /// Camera-space depth in meters, `+inf` for sky.
    pub depth: f64,
    pub world: P3,
    pub albedo: Albedo,
    /// Unit surface normal facing the camera; zero for sky.
    pub normal: V3,
}

impl Sample {
    pub const SKY: Sample = Sample {
        class: SemanticClass::Sky,
        instance: 0,
        node: NO_NODE,
        depth: f64::INFINITY,
        world: P3::new(0.0, 0.0, 0.0),
        albedo: [0.0; 3],
        normal: V3::new(0.0, 0.0, 0.0),
    };

    pub fn is_sky(&self) -> bool {
        self.node == NO_NODE
    }
}

/// Per-pixel rasterization result, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    pub camera: Camera,
    pub samples: Vec<Sample>,
}

impl GBuffer {
    pub fn width(&self) -> usize {
        self.camera.intrinsics.width as usize
    }

    pub fn height(&self) -> usize {
        self.camera.intrinsics.height as usize
    }

    pub fn at(&self, x: usize, y: usize) -> &Sample {
        &self.samples[y * self.width() + x]
    }
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    cam: P3,
    world: P3,
    color: Albedo,
}

fn lerp_vertex(a: &Vertex, b: &Vertex, t: f64) -> Vertex {
    let tf = t as f32;
    Vertex {
        cam: a.cam + (b.cam - a.cam) * t,
        world: a.world + (b.world - a.world) * t,
        color: [0, 1, 2].map(|k| a.color[k] + (b.color[k] - a.color[k]) * tf),
    }
}

/// Edge function `a*x + b*y + c`, nonnegative inside.
#[derive(Debug, Clone, Copy)]
struct Edge {
    a: f64,
    b: f64,
    c: f64,
    /// Whether points exactly on the edge belong to this triangle.
    inclusive: bool,
}

impl Edge {
    /// Edge from `p` to `q`. Coefficients are computed from a canonical
    /// vertex order so a shared edge yields exactly negated functions in
    /// its two triangles, leaving no cracks or double hits.
    fn new(p: [f64; 2], q: [f64; 2]) -> Self {
        let flip = (q[0], q[1]) < (p[0], p[1]);
        let (s, t) = if flip { (q, p) } else { (p, q) };
        let (dx, dy) = (t[0] - s[0], t[1] - s[1]);
        let (mut a, mut b, mut c) = (-dy, dx, dy * s[0] - dx * s[1]);
        if flip {
            a = -a;
            b = -b;
            c = -c;
        }
        let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
        Self {
            a,
            b,
            c,
            inclusive: ey > 0.0 || (ey == 0.0 && ex < 0.0),
        }
    }

    #[inline]
    fn covers(&self, e: f64) -> bool {
        e > 0.0 || (e == 0.0 && self.inclusive)
    }
}

#[derive(Debug, Clone)]
struct ScreenTri {
    edges: [Edge; 3],
    inv_area: f64,
    inv_z: [f64; 3],
    world: [P3; 3],
    colors: Option<[Albedo; 3]>,
    albedo: Albedo,
    class: SemanticClass,
    instance: u32,
    node: u32,
    normal: V3,
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

impl ScreenTri {
    /// Barycentric weights at a pixel center, or `None` if outside.
    #[inline]
    fn weights(&self, x: f64, y: f64) -> Option<[f64; 3]> {
        let mut w = [0.0; 3];
        for (k, e) in self.edges.iter().enumerate() {
            let v = e.a * x + e.b * y + e.c;
            if !e.covers(v) {
                return None;
            }
            w[k] = v * self.inv_area;
        }
        Some(w)
    }

    #[inline]
    fn inv_depth(&self, w: &[f64; 3]) -> f64 {
        w[0] * self.inv_z[0] + w[1] * self.inv_z[1] + w[2] * self.inv_z[2]
    }

    /// Column range that can contain covered pixel centers on row `y`.
    fn row_span(&self, y: f64) -> Option<(usize, usize)> {
        let (mut lo, mut hi) = (self.x0 as f64, self.x1 as f64);
        for e in &self.edges {
            let r = e.b * y + e.c;
            if e.a > 0.0 {
                lo = lo.max((-r / e.a - 0.5).floor() - 1.0);
            } else if e.a < 0.0 {
                hi = hi.min((-r / e.a - 0.5).ceil() + 1.0);
            } else if !e.covers(r) {
                return None;
            }
        }
        (lo <= hi).then_some((lo as usize, hi as usize))
    }

    /// Calls `f(x)` for each covered pixel on row `y` with its weights.
    #[inline]
    fn scan_row(&self, y: usize, mut f: impl FnMut(usize, [f64; 3])) {
        let yc = y as f64 + 0.5;
        let Some((lo, hi)) = self.row_span(yc) else {
            return;
        };
        for x in lo..=hi {
            if let Some(w) = self.weights(x as f64 + 0.5, yc) {
                f(x, w);
            }
        }
    }
}

struct Setup {
    world_to_cam: nalgebra::Matrix3<f64>,
    position: P3,
    focal: f64,
    cx: f64,
    cy: f64,
    near: f64,
    width: usize,
    height: usize,
    tan_x: f64,
    tan_y: f64,
}

impl Setup {
    fn new(cam: &Camera) -> Self {
        let i = &cam.intrinsics;
        let focal = i.focal_px();
        let (cx, cy) = i.principal_point();
        Self {
            world_to_cam: *cam.rotation.inverse().matrix(),
            position: cam.position,
            focal,
            cx,
            cy,
            near: i.near,
            width: i.width as usize,
            height: i.height as usize,
            tan_x: cx / focal,
            tan_y: cy / focal,
        }
    }

    #[inline]
    fn to_cam(&self, p: &P3) -> P3 {
        P3::from(self.world_to_cam * (p - self.position))
    }

    fn culled(&self, inst: &Instance) -> bool {
        let (c, r) = inst.sphere;
        let c = self.to_cam(&inst.pose.transform_point(&c));
        if c.z + r < self.near {
            return true;
        }
        let side = |t: f64, x: f64| {
            let n = (1.0 + t * t).sqrt();
            (x.abs() - t * c.z) / n > r
        };
        side(self.tan_x, c.x) || side(self.tan_y, c.y)
    }

    fn triangles(&self, inst: &Instance, out: &mut Vec<ScreenTri>) {
        if inst.mesh.is_empty() || self.culled(inst) {
            return;
        }
        let mesh = inst.mesh;
        let verts: Vec<Vertex> = mesh
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let world = inst.pose.transform_point(v);
                Vertex {
                    cam: self.to_cam(&world),
                    world,
                    color: mesh.vertex_albedo.get(i).copied().unwrap_or([0.0; 3]),
                }
            })
            .collect();
        let smooth = !mesh.vertex_albedo.is_empty();
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let v = tri.map(|i| verts[i as usize]);
            if v.iter().all(|p| p.cam.z < self.near) {
                continue;
            }
            let mut normal = (v[1].world - v[0].world).cross(&(v[2].world - v[0].world)).normalize();
            if normal.dot(&(self.position - v[0].world)) < 0.0 {
                normal = -normal;
            }
            let poly = clip_near(&v, self.near);
            for k in 1..poly.len().saturating_sub(1) {
                self.push(
                    [poly[0], poly[k], poly[k + 1]],
                    smooth,
                    mesh.albedo[t],
                    mesh.classes[t],
                    mesh.instance,
                    inst.node,
                    normal,
                    out,
                );
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &self,
        mut v: [Vertex; 3],
        smooth: bool,
        albedo: Albedo,
        class: SemanticClass,
        instance: u32,
        node: u32,
        normal: V3,
        out: &mut Vec<ScreenTri>,
    ) {
        let mut s = v.map(|p| {
            let z = p.cam.z.max(self.near);
            [self.cx + self.focal * p.cam.x / z, self.cy + self.focal * p.cam.y / z]
        });
        let area = (s[1][0] - s[0][0]) * (s[2][1] - s[0][1]) - (s[1][1] - s[0][1]) * (s[2][0] - s[0][0]);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        if area < 0.0 {
            v.swap(1, 2);
            s.swap(1, 2);
        }
        let (umin, umax) = minmax(s.iter().map(|p| p[0]));
        let (vmin, vmax) = minmax(s.iter().map(|p| p[1]));
        let x0 = (umin - 0.5).ceil().max(0.0);
        let x1 = (umax - 0.5).floor().min(self.width as f64 - 1.0);
        let y0 = (vmin - 0.5).ceil().max(0.0);
        let y1 = (vmax - 0.5).floor().min(self.height as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return;
        }
        out.push(ScreenTri {
            edges: [Edge::new(s[1], s[2]), Edge::new(s[2], s[0]), Edge::new(s[0], s[1])],
            inv_area: 1.0 / area.abs(),
            inv_z: v.map(|p| 1.0 / p.cam.z.max(self.near)),
            world: v.map(|p| p.world),
            colors: smooth.then(|| v.map(|p| p.color)),
            albedo,
            class,
            instance,
            node,
            normal,
            x0: x0 as usize,
            x1: x1 as usize,
            y0: y0 as usize,
            y1: y1 as usize,
        });
    }
}

fn minmax(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

/// Clips a camera-space triangle to `z >= near`, returning 0, 3 or 4 vertices.
fn clip_near(v: &[Vertex; 3], near: f64) -> Vec<Vertex> {
    if v.iter().all(|p| p.cam.z >= near) {
        return v.to_vec();
    }
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let (a, b) = (&v[i], &v[(i + 1) % 3]);
        let (ia, ib) = (a.cam.z >= near, b.cam.z >= near);
        if ia {
            out.push(*a);
        }
        if ia != ib {
            let t = (near - a.cam.z) / (b.cam.z - a.cam.z);
            let mut p = lerp_vertex(a, b, t);
            p.cam.z = near;
            out.push(p);
        }
    }
    out
}

fn setup_all(instances: &[Instance], cam: &Camera) -> Vec<ScreenTri> {
    let setup = Setup::new(cam);
    par::map(instances, |inst| {
        let mut tris = Vec::new();
        setup.triangles(inst, &mut tris);
        tris
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Z-buffered rasterization with pixel-center sampling and perspective-correct
/// attribute interpolation. The nearest surface wins each pixel; on exact
/// depth ties the earlier triangle in submission order is kept.
pub fn rasterize(instances: &[Instance], cam: &Camera) -> GBuffer {
    let tris = setup_all(instances, cam);
    let (w, h) = (cam.intrinsics.width as usize, cam.intrinsics.height as usize);
    let bands = h.div_ceil(BAND_ROWS);
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); bands];
    for (i, t) in tris.iter().enumerate() {
        for bin in &mut bins[t.y0 / BAND_ROWS..=t.y1 / BAND_ROWS] {
            bin.push(i as u32);
        }
    }
    let mut samples = vec![Sample::SKY; w * h];
    par::for_each_chunk_mut(&mut samples, BAND_ROWS * w, |band, out| {
        let row0 = band * BAND_ROWS;
        let rows = out.len() / w;
        let mut inv_depth = vec![0.0f64; out.len()];
        let mut owner = vec![u32::MAX; out.len()];
        for &ti in &bins[band] {
            let t = &tris[ti as usize];
            let (ya, yb) = (t.y0.max(row0), t.y1.min(row0 + rows - 1));
            for y in ya..=yb {
                let base = (y - row0) * w;
                t.scan_row(y, |x, wts| {
                    let iz = t.inv_depth(&wts);
                    let k = base + x;
                    if iz > inv_depth[k] {
                        inv_depth[k] = iz;
                        owner[k] = ti;
                    }
                });
            }
        }
        for (k, s) in out.iter_mut().enumerate() {
            if owner[k] == u32::MAX {
                continue;
            }
            let t = &tris[owner[k] as usize];
            let (x, y) = ((k % w) as f64 + 0.5, (row0 + k / w) as f64 + 0.5);
            // Recompute without the inside test: this pixel passed it already.
            let wts = t.edges.map(|e| (e.a * x + e.b * y + e.c) * t.inv_area);
            let iz = t.inv_depth(&wts);
            let mu = [0, 1, 2].map(|i| wts[i] * t.inv_z[i] / iz);
            let world = P3::from(t.world[0].coords * mu[0] + t.world[1].coords * mu[1] + t.world[2].coords * mu[2]);
            let albedo = match &t.colors {
                Some(c) => [0, 1, 2].map(|ch| (c[0][ch] as f64 * mu[0] + c[1][ch] as f64 * mu[1] + c[2][ch] as f64 * mu[2]) as f32),
                None => t.albedo,
            };
            *s = Sample {
                class: t.class,
                instance: t.instance,
                node: t.node,
                depth: (1.0 / iz).max(cam.intrinsics.near),
                world,
                albedo,
                normal: t.normal,
            };
        }
    });
    GBuffer {
        camera: *cam,
        samples,
    }
}

/// Number of pixel centers covered by `instance` rendered alone.
pub fn coverage_count(instance: &Instance, cam: &Camera) -> usize {
    let tris = setup_all(std::slice::from_ref(instance), cam);
    let w = cam.intrinsics.width as usize;
    let mut hit = vec![false; cam.intrinsics.pixel_count()];
    let mut count = 0;
    for t in &tris {
        for y in t.y0..=t.y1 {
            t.scan_row(y, |x, _| {
                let k = y * w + x;
                if !hit[k] {
                    hit[k] = true;
                    count += 1;
                }
            });
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::camera::Intrinsics;

    fn small() -> Intrinsics {
        Intrinsics {
            width: 64,
            height: 48,
            hfov_deg: 60.0,
            near: 0.5,
        }
    }

    fn facing_east() -> Camera {
        Camera::look(P3::origin(), 0.0, 0.0, 0.0, small())
    }

    /// Quad in the plane x = `dist`, spanning `half` meters either side.
    fn wall(dist: f64, half: f64, class: SemanticClass) -> Mesh {
        let mut m = Mesh::new();
        crate::model::primitives::add_quad(
            &mut m,
            [
                P3::new(dist, half, -half),
                P3::new(dist, -half, -half),
                P3::new(dist, -half, half),
                P3::new(dist, half, half),
            ],
            class,
            [0.5; 3],
        );
        m
    }

    #[test]
    fn empty_scene_is_sky() {
        let g = rasterize(&[], &facing_east());
        assert!(g.samples.iter().all(|s| s.is_sky() && s.depth.is_infinite()));
    }

    #[test]
    fn nearer_quad_wins() {
        let near = wall(5.0, 50.0, SemanticClass::Building);
        let far = wall(9.0, 50.0, SemanticClass::Road);
        for order in [[0, 1], [1, 0]] {
            let meshes = [&near, &far];
            let insts: Vec<_> = order
                .iter()
                .map(|&i| Instance::new(i as u32, meshes[i], Pose::IDENTITY))
                .collect();
            let g = rasterize(&insts, &facing_east());
            for s in &g.samples {
                assert_eq!(s.class, SemanticClass::Building);
                assert!((s.depth - 5.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shared_edges_leave_no_gaps() {
        let m = wall(7.0, 50.0, SemanticClass::Building);
        let g = rasterize(&[Instance::new(0, &m, Pose::IDENTITY)], &facing_east());
        assert!(g.samples.iter().all(|s| !s.is_sky()));
    }

    #[test]
    fn world_position_lies_on_surface() {
        let mut m = Mesh::new();
        crate::model::primitives::add_quad(
            &mut m,
            [
                P3::new(2.0, 20.0, -1.0),
                P3::new(2.0, -20.0, -1.0),
                P3::new(60.0, -20.0, -1.0),
                P3::new(60.0, 20.0, -1.0),
            ],
            SemanticClass::Road,
            [0.5; 3],
        );
        let cam = facing_east();
        let g = rasterize(&[Instance::new(0, &m, Pose::IDENTITY)], &cam);
        let mut hits = 0;
        for (k, s) in g.samples.iter().enumerate() {
            if s.is_sky() {
                continue;
            }
            hits += 1;
            assert!((s.world.z + 1.0).abs() < 1e-9);
            let (x, y) = ((k % 64) as f64 + 0.5, (k / 64) as f64 + 0.5);
            let p = cam.unproject(x, y, s.depth);
            assert!((p - s.world).norm() < 1e-9 * s.depth.max(1.0));
        }
        assert!(hits > 0);
    }

    #[test]
    fn near_clipping_keeps_visible_part() {
        // a floor running from behind the camera to far ahead
        let mut m = Mesh::new();
        crate::model::primitives::add_quad(
            &mut m,
            [
                P3::new(-10.0, 20.0, -1.0),
                P3::new(-10.0, -20.0, -1.0),
                P3::new(80.0, -20.0, -1.0),
                P3::new(80.0, 20.0, -1.0),
            ],
            SemanticClass::Road,
            [0.5; 3],
        );
        let g = rasterize(&[Instance::new(0, &m, Pose::IDENTITY)], &facing_east());
        // whole bottom row sees the floor
        assert!((0..64).all(|x| !g.at(x, 47).is_sky()));
        assert!(g.samples.iter().all(|s| s.is_sky() || s.depth >= 0.5));
    }

    #[test]
    fn vertex_colors_interpolate() {
        let mut m = wall(5.0, 50.0, SemanticClass::Building);
        m.vertex_albedo = vec![[0.0; 3], [1.0; 3], [1.0; 3], [0.0; 3]];
        let g = rasterize(&[Instance::new(0, &m, Pose::IDENTITY)], &facing_east());
        // left image edge (+y world) is darker than the right edge
        assert!(g.at(0, 24).albedo[0] < g.at(63, 24).albedo[0]);
    }

    #[test]
    fn coverage_matches_full_render_when_alone() {
        let mut m = Mesh::new();
        crate::model::primitives::add_box(
            &mut m,
            crate::geom::P2::new(0.0, 0.0),
            1.5,
            2.0,
            0.0,
            1.4,
            SemanticClass::Car,
            [0.5; 3],
        );
        m.instance = 3;
        let pose = Pose::new(P3::new(8.0, 0.5, -1.0), 0.4);
        let inst = Instance::new(0, &m, pose);
        let cam = facing_east();
        let g = rasterize(&[inst], &cam);
        let visible = g.samples.iter().filter(|s| s.instance == 3).count();
        assert!(visible > 0);
        assert_eq!(coverage_count(&inst, &cam), visible);
    }
}
