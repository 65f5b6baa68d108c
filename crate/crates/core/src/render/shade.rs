use rand::Rng;

use super::raster::GBuffer;
use crate::dynamics::{EnvironmentState, Weather};
use crate::image::RgbImage;
use crate::rng::{keyed_rng, Domain};

/// Fog color in `[0, 1]`.
pub const FOG_GRAY: [f64; 3] = [0.72, 0.72, 0.74];
/// Depth assigned to sky pixels when blending fog.
pub const SKY_FOG_DEPTH_M: f64 = 500.0;

const SKY_HORIZON: [f64; 3] = [0.78, 0.85, 0.93];
const SKY_ZENITH: [f64; 3] = [0.3, 0.5, 0.85];
const RAIN_COLOR: [f64; 3] = [0.8, 0.8, 0.85];
const RAIN_ALPHA: f64 = 0.35;
/// Pixels per rain streak.
const RAIN_SPARSITY: usize = 400;

#[inline]
fn quantize(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Lambertian shading, pre-quantization, for one surface sample.
pub fn surface_radiance(albedo: [f32; 3], normal: &crate::model::V3, env: &EnvironmentState) -> [f64; 3] {
    let lambert = normal.dot(&env.sun_direction).max(0.0);
    let light = env.ambient + env.sun_intensity * lambert;
    albedo.map(|a| a as f64 * light)
}

/// Shades a G-buffer. Surfaces get `albedo * (ambient + sun * max(0, n.s))`;
/// sky pixels get a horizon-to-zenith gradient scaled by
/// `ambient + (1 - ambient) * sun`.
pub fn shade(g: &GBuffer, env: &EnvironmentState) -> RgbImage {
    let (w, h) = (g.width(), g.height());
    let cam = &g.camera;
    let sky_scale = env.ambient + (1.0 - env.ambient) * env.sun_intensity;
    let data = g
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if s.is_sky() {
                let ray = cam.ray((k % w) as f64 + 0.5, (k / w) as f64 + 0.5);
                let e = ray.z.clamp(0.0, 1.0);
                [0, 1, 2].map(|c| quantize((SKY_HORIZON[c] + (SKY_ZENITH[c] - SKY_HORIZON[c]) * e) * sky_scale))
            } else {
                surface_radiance(s.albedo, &s.normal, env).map(quantize)
            }
        })
        .collect();
    RgbImage::from_vec(w as u32, h as u32, data)
}

/// Adds fog and rain. Fog mixes each pixel toward [`FOG_GRAY`] by
/// `1 - exp(-density * z)`; rain overlays streaks drawn from a stream keyed
/// by `(seed, frame)`. Other weather passes through unchanged.
pub fn apply_weather(img: &RgbImage, g: &GBuffer, env: &EnvironmentState, seed: u64, frame: u64) -> RgbImage {
    let mut out = img.clone();
    if env.fog_density > 0.0 {
        for (px, s) in out.data.iter_mut().zip(&g.samples) {
            let z = if s.is_sky() { SKY_FOG_DEPTH_M } else { s.depth };
            let f = 1.0 - (-env.fog_density * z).exp();
            *px = [0, 1, 2].map(|c| quantize(px[c] as f64 / 255.0 * (1.0 - f) + FOG_GRAY[c] * f));
        }
    }
    if env.weather == Weather::Rainy {
        let (w, h) = (out.width as i64, out.height as i64);
        let mut rng = keyed_rng(seed, Domain::Rain, frame);
        let count = (w * h) as usize / RAIN_SPARSITY;
        for _ in 0..count {
            let x0 = rng.random_range(0.0..w as f64);
            let y0 = rng.random_range(-10.0..h as f64);
            let len = rng.random_range(6..18);
            for i in 0..len {
                let x = (x0 + 0.25 * i as f64) as i64;
                let y = y0 as i64 + i;
                if x < 0 || y < 0 || x >= w || y >= h {
                    continue;
                }
                let px = &mut out.data[(y * w + x) as usize];
                *px = [0, 1, 2].map(|c| quantize(px[c] as f64 / 255.0 * (1.0 - RAIN_ALPHA) + RAIN_COLOR[c] * RAIN_ALPHA));
            }
        }
    }
    out
}
