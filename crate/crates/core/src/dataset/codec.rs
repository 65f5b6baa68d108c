use crate::image::Raster;
use crate::truth::{FlowField, FlowVector};

pub const FLOW_SCALE: f64 = 64.0;
pub const FLOW_OFFSET: f64 = 32768.0;
/// Largest flow magnitude representable per component, in pixels.
pub const FLOW_LIMIT_PX: f64 = 512.0;

/// KITTI-style flow image: `(u * 64 + 2^15, v * 64 + 2^15, valid)`.
/// Returns the image and the number of clamped components.
pub fn encode_flow(flow: &FlowField) -> (Raster<[u16; 3]>, usize) {
    let mut overflow = 0;
    let mut enc = |x: f64| {
        let q = (x * FLOW_SCALE + FLOW_OFFSET).round();
        if !(0.0..=65535.0).contains(&q) {
            overflow += 1;
        }
        q.clamp(0.0, 65535.0) as u16
    };
    let data = flow
        .data
        .iter()
        .map(|f| {
            if f.valid {
                [enc(f.u), enc(f.v), 1]
            } else {
                [32768, 32768, 0]
            }
        })
        .collect();
    (Raster::from_vec(flow.width, flow.height, data), overflow)
}

pub fn decode_flow(img: &Raster<[u16; 3]>) -> FlowField {
    img.map(|[u, v, valid]| {
        if valid == 0 {
            FlowVector::default()
        } else {
            FlowVector {
                u: (u as f64 - FLOW_OFFSET) / FLOW_SCALE,
                v: (v as f64 - FLOW_OFFSET) / FLOW_SCALE,
                valid: true,
            }
        }
    })
}

/// `round(d * 65535)` for `d` in `[0, 1]`.
pub fn encode_depth(depth: &Raster<f64>) -> Raster<u16> {
    depth.map(|d| (d.clamp(0.0, 1.0) * 65535.0).round() as u16)
}

pub fn decode_depth(img: &Raster<u16>) -> Raster<f64> {
    img.map(|v| v as f64 / 65535.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(u: f64, v: f64, valid: bool) -> FlowField {
        FlowField::filled(1, 1, FlowVector { u, v, valid })
    }

    #[test]
    fn flow_reference_values() {
        assert_eq!(encode_flow(&one(0.0, 0.0, true)).0.data[0], [32768, 32768, 1]);
        assert_eq!(encode_flow(&one(1.0, -1.0, true)).0.data[0], [32832, 32704, 1]);
        assert_eq!(encode_flow(&one(5.0, 5.0, false)).0.data[0], [32768, 32768, 0]);
        let (img, overflow) = encode_flow(&one(600.0, 0.0, true));
        assert_eq!((img.data[0][0], overflow), (65535, 1));
    }

    #[test]
    fn depth_reference_values() {
        let d = Raster::from_vec(3, 1, vec![0.0, 1.0, 0.5]);
        assert_eq!(encode_depth(&d).data, vec![0, 65535, 32768]);
    }

    proptest! {
        #[test]
        fn flow_round_trip(u in -511.0f64..511.0, v in -511.0f64..511.0) {
            let (img, overflow) = encode_flow(&one(u, v, true));
            prop_assert_eq!(overflow, 0);
            let back = decode_flow(&img).data[0];
            prop_assert!((back.u - u).abs() <= 1.0 / 128.0 + 1e-12);
            prop_assert!((back.v - v).abs() <= 1.0 / 128.0 + 1e-12);
            prop_assert_eq!(encode_flow(&decode_flow(&img)).0, img);
        }

        #[test]
        fn depth_round_trip(d in 0.0f64..=1.0) {
            let img = encode_depth(&Raster::from_vec(1, 1, vec![d]));
            let back = decode_depth(&img);
            prop_assert!((back.data[0] - d).abs() <= 1.0 / 131070.0 + 1e-15);
            prop_assert_eq!(encode_depth(&back), img);
        }
    }
}
