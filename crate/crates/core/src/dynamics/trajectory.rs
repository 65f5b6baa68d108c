use crate::geom::Polyline;
use crate::model::vehicles::VehicleKind;
use crate::model::{Pose, P3};

/// Constant-speed motion along a lane path. A parked vehicle has speed 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub path: Polyline,
    pub start_offset: f64,
    pub speed: f64,
    pub start_time: f64,
    pub end_time: f64,
    pub kind: VehicleKind,
    pub paint: usize,
    pub parked: bool,
}

impl Trajectory {
    pub fn is_active(&self, t: f64) -> bool {
        t >= self.start_time && t <= self.end_time
    }

    /// Arc length reached at time `t`, clamped to the path end.
    pub fn arc_length_at(&self, t: f64) -> f64 {
        (self.start_offset + self.speed * (t - self.start_time)).min(self.path.length())
    }

    /// Pose at `t`, or `None` while inactive. The vehicle faces along the
    /// path tangent.
    pub fn pose_at(&self, t: f64) -> Option<Pose> {
        if !self.is_active(t) {
            return None;
        }
        let (p, dir) = self.path.sample(self.arc_length_at(t));
        Some(Pose::new(P3::new(p.x, p.y, 0.0), dir.y.atan2(dir.x)))
    }
}
