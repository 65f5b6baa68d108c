use std::fmt;
use std::str::FromStr;

/// The fixed 15-class label set. Discriminants are the on-disk class ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum SemanticClass {
    Sky = 0,
    Building = 1,
    Car = 2,
    Road = 3,
    Sidewalk = 4,
    Vegetation = 5,
    Fence = 6,
    TrafficSign = 7,
    TrafficLight = 8,
    LampPole = 9,
    Billboard = 10,
    Tree = 11,
    Cyclist = 12,
    Pedestrian = 13,
    Chair = 14,
}

pub const CLASS_COUNT: usize = 15;

impl SemanticClass {
    pub const ALL: [SemanticClass; CLASS_COUNT] = [
        SemanticClass::Sky,
        SemanticClass::Building,
        SemanticClass::Car,
        SemanticClass::Road,
        SemanticClass::Sidewalk,
        SemanticClass::Vegetation,
        SemanticClass::Fence,
        SemanticClass::TrafficSign,
        SemanticClass::TrafficLight,
        SemanticClass::LampPole,
        SemanticClass::Billboard,
        SemanticClass::Tree,
        SemanticClass::Cyclist,
        SemanticClass::Pedestrian,
        SemanticClass::Chair,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::Sky => "sky",
            SemanticClass::Building => "building",
            SemanticClass::Car => "car",
            SemanticClass::Road => "road",
            SemanticClass::Sidewalk => "sidewalk",
            SemanticClass::Vegetation => "vegetation",
            SemanticClass::Fence => "fence",
            SemanticClass::TrafficSign => "traffic_sign",
            SemanticClass::TrafficLight => "traffic_light",
            SemanticClass::LampPole => "lamp_pole",
            SemanticClass::Billboard => "billboard",
            SemanticClass::Tree => "tree",
            SemanticClass::Cyclist => "cyclist",
            SemanticClass::Pedestrian => "pedestrian",
            SemanticClass::Chair => "chair",
        }
    }

    pub fn palette_color(self) -> [u8; 3] {
        PALETTE[self as usize]
    }

    /// Classes that receive instance ids, boxes and tracks.
    pub fn is_annotatable(self) -> bool {
        matches!(
            self,
            SemanticClass::Car | SemanticClass::Cyclist | SemanticClass::Pedestrian
        )
    }
}

const PALETTE: [[u8; 3]; CLASS_COUNT] = [
    [70, 130, 180],
    [70, 70, 70],
    [0, 0, 142],
    [128, 64, 128],
    [244, 35, 232],
    [107, 142, 35],
    [190, 153, 153],
    [220, 220, 0],
    [250, 170, 30],
    [153, 153, 153],
    [0, 160, 160],
    [0, 90, 0],
    [119, 11, 32],
    [220, 20, 60],
    [255, 120, 200],
];

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemanticClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.iter().copied().find(|c| c.name() == s).ok_or(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fifteen_classes_with_distinct_colors() {
        assert_eq!(SemanticClass::ALL.len(), 15);
        let colors: HashSet<_> = SemanticClass::ALL.iter().map(|c| c.palette_color()).collect();
        assert_eq!(colors.len(), 15);
        for (i, c) in SemanticClass::ALL.iter().enumerate() {
            assert_eq!(c.id() as usize, i);
            assert_eq!(c.name().parse::<SemanticClass>(), Ok(*c));
        }
    }
}
