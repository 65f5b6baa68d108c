//! Planar geometry shared by map ingestion, road meshing and the rule engine.

use nalgebra::{Point2, Vector2};

pub type P2 = Point2<f64>;
pub type V2 = Vector2<f64>;

const EPS: f64 = 1e-9;

/// Left-hand perpendicular of a direction (rotated +90 degrees).
#[inline]
pub fn left_normal(d: V2) -> V2 {
    V2::new(-d.y, d.x)
}

#[inline]
fn cross(a: V2, b: V2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// A polyline with precomputed cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<P2>,
    cumulative: Vec<f64>,
}

impl Polyline {
    /// Builds a polyline, dropping consecutive duplicate points. Returns `None`
    /// if fewer than two distinct points remain.
    pub fn new(points: Vec<P2>) -> Option<Self> {
        let points = dedup_consecutive(points);
        if points.len() < 2 {
            return None;
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += (w[1] - w[0]).norm();
            cumulative.push(acc);
        }
        Some(Self { points, cumulative })
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Point and unit tangent at arc length `s`, clamped to `[0, length]`.
    pub fn sample(&self, s: f64) -> (P2, V2) {
        let s = s.clamp(0.0, self.length());
        let i = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        };
        let a = self.points[i];
        let b = self.points[i + 1];
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let dir = (b - a) / seg;
        (a + dir * (s - self.cumulative[i]), dir)
    }

    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self::new(pts).expect("reversing keeps distinct points")
    }

    /// Sub-polyline between arc lengths `a < b`.
    pub fn slice(&self, a: f64, b: f64) -> Option<Self> {
        let (a, b) = (a.max(0.0), b.min(self.length()));
        if b - a <= EPS {
            return None;
        }
        let mut pts = vec![self.sample(a).0];
        for (p, c) in self.points.iter().zip(&self.cumulative) {
            if *c > a && *c < b {
                pts.push(*p);
            }
        }
        pts.push(self.sample(b).0);
        Self::new(pts)
    }
}

pub fn dedup_consecutive(mut points: Vec<P2>) -> Vec<P2> {
    points.dedup_by(|a, b| (*a - *b).norm() <= EPS);
    points
}

/// Offsets a polyline sideways by `offset` (positive = left of travel).
/// Interior vertices use a miter join, capped at 4x the offset.
pub fn offset_polyline(points: &[P2], offset: f64) -> Vec<P2> {
    let n = points.len();
    if n < 2 || offset == 0.0 {
        return points.to_vec();
    }
    let dirs: Vec<V2> = points
        .windows(2)
        .map(|w| (w[1] - w[0]).try_normalize(EPS).unwrap_or_else(V2::zeros))
        .collect();
    (0..n)
        .map(|i| {
            let d_in = if i == 0 { dirs[0] } else { dirs[i - 1] };
            let d_out = if i == n - 1 { dirs[n - 2] } else { dirs[i] };
            let n_in = left_normal(d_in);
            let n_out = left_normal(d_out);
            let sum = n_in + n_out;
            let miter = match sum.try_normalize(EPS) {
                Some(m) => {
                    let cos_half = m.dot(&n_in).max(0.25);
                    m / cos_half
                }
                None => n_in,
            };
            points[i] + miter * offset
        })
        .collect()
}

/// Shoelace signed area; positive for counterclockwise rings. The ring is
/// implicit (last point connects to the first).
pub fn signed_area(ring: &[P2]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        * 0.5
}

pub fn centroid(ring: &[P2]) -> P2 {
    let a = signed_area(ring);
    if a.abs() <= EPS {
        let s = ring.iter().fold(V2::zeros(), |acc, p| acc + p.coords);
        return P2::from(s / ring.len() as f64);
    }
    let n = ring.len();
    let mut c = V2::zeros();
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        let f = p.x * q.y - q.x * p.y;
        c += (p.coords + q.coords) * f;
    }
    P2::from(c / (6.0 * a))
}

/// Closed-segment intersection test (touching counts).
fn segments_cross(a: P2, b: P2, c: P2, d: P2) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    let on = |p: P2, q: P2, r: P2, o: f64| {
        o.abs() <= EPS
            && r.x >= p.x.min(q.x) - EPS
            && r.x <= p.x.max(q.x) + EPS
            && r.y >= p.y.min(q.y) - EPS
            && r.y <= p.y.max(q.y) + EPS
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

/// True if no two non-adjacent edges of the ring touch.
pub fn is_simple(ring: &[P2]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Removes consecutive duplicates (including wrap-around) and collinear
/// vertices from a ring.
pub fn clean_ring(ring: &[P2]) -> Vec<P2> {
    let mut pts = dedup_consecutive(ring.to_vec());
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= EPS {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let next = pts[(i + 1) % n];
            let cur = pts[i];
            let len = (next - prev).norm().max(EPS);
            if cross(cur - prev, next - prev).abs() / len <= 1e-7 {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

/// Ear-clipping triangulation of a simple counterclockwise ring. Returns
/// index triples into `ring`, all counterclockwise.
pub fn triangulate(ring: &[P2]) -> Vec<[usize; 3]> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n.saturating_sub(2));
    if n < 3 {
        return out;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut guard = 0;
    while idx.len() > 3 && guard < n * n {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (ring[ia], ring[ib], ring[ic]);
            if cross(b - a, c - a) <= EPS {
                continue;
            }
            let contains_other = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && point_in_triangle(ring[j], a, b, c)
            });
            if contains_other {
                continue;
            }
            out.push([ia, ib, ic]);
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (ring[idx[0]], ring[idx[1]], ring[idx[2]]);
        if cross(b - a, c - a) > EPS {
            out.push([idx[0], idx[1], idx[2]]);
        }
    }
    out
}

fn point_in_triangle(p: P2, a: P2, b: P2, c: P2) -> bool {
    let d1 = cross(b - a, p - a);
    let d2 = cross(c - b, p - b);
    let d3 = cross(a - c, p - c);
    d1 >= -EPS && d2 >= -EPS && d3 >= -EPS
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: P2, ring: &[P2]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Keeps the part of `ring` where `dot(p, normal) >= limit`
/// (Sutherland-Hodgman against one half-plane).
pub fn clip_halfplane(ring: &[P2], normal: V2, limit: f64) -> Vec<P2> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let dc = cur.coords.dot(&normal) - limit;
        let dn = next.coords.dot(&normal) - limit;
        if dc >= 0.0 {
            out.push(cur);
        }
        if (dc >= 0.0) != (dn >= 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (next - cur) * t);
        }
    }
    out
}

/// Insets a counterclockwise ring by `d` using mitered edge offsets. Returns
/// `None` when the result collapses or flips orientation.
pub fn inset(ring: &[P2], d: f64) -> Option<Vec<P2>> {
    let n = ring.len();
    if n < 3 {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = ring[(i + n - 1) % n];
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let d0 = (cur - prev).try_normalize(EPS)?;
        let d1 = (next - cur).try_normalize(EPS)?;
        // inward is the left side of a CCW ring
        let p0 = prev + left_normal(d0) * d;
        let p1 = cur + left_normal(d1) * d;
        let denom = cross(d0, d1);
        if denom.abs() <= EPS {
            out.push(cur + left_normal(d1) * d);
        } else {
            let t = cross(p1 - p0, d1) / denom;
            out.push(p0 + d0 * t);
        }
    }
    let original = signed_area(ring);
    let area = signed_area(&out);
    let flipped = (0..n).any(|i| {
        let e0 = ring[(i + 1) % n] - ring[i];
        let e1 = out[(i + 1) % n] - out[i];
        e0.dot(&e1) <= 0.0
    });
    if flipped || area <= EPS || area > original || !is_simple(&out) {
        return None;
    }
    Some(out)
}

/// Andrew's monotone chain; counterclockwise without collinear points.
pub fn convex_hull(points: &[P2]) -> Vec<P2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (*a - *b).norm() <= EPS);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<P2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if cross(b - a, p - a) <= EPS {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
