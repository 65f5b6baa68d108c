use super::boxes::BoxAnnotation;
use super::images::display_color;
use crate::model::SemanticClass;

/// A maximal run of consecutive frames in which a track has a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackSegment {
    pub track_id: u32,
    pub class: SemanticClass,
    pub first_frame: u64,
    pub last_frame: u64,
    pub color: [u8; 3],
}

impl TrackSegment {
    pub fn len(&self) -> u64 {
        self.last_frame - self.first_frame + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Groups boxes by track id and splits each track at frame gaps. Output is
/// sorted by `(track_id, first_frame)`.
pub fn tracks(boxes: &[BoxAnnotation]) -> Vec<TrackSegment> {
    let mut keyed: Vec<(u32, u64, SemanticClass)> = boxes.iter().map(|b| (b.track_id, b.frame, b.class)).collect();
    keyed.sort_by_key(|&(id, frame, _)| (id, frame));
    keyed.dedup_by_key(|&mut (id, frame, _)| (id, frame));
    let mut out: Vec<TrackSegment> = Vec::new();
    for (id, frame, class) in keyed {
        match out.last_mut() {
            Some(seg) if seg.track_id == id && seg.last_frame + 1 == frame => seg.last_frame = frame,
            _ => out.push(TrackSegment {
                track_id: id,
                class,
                first_frame: frame,
                last_frame: frame,
                color: display_color(id),
            }),
        }
    }
    out
}
