use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use png::{BitDepth, ColorType, Compression};

use super::DatasetError;
use crate::image::Raster;

/// Pixel types that map onto a PNG color type and bit depth.
pub trait PngPixel: Copy {
    const COLOR: ColorType;
    const DEPTH: BitDepth;
    fn write_bytes(&self, out: &mut Vec<u8>);
    fn read_bytes(bytes: &[u8]) -> Self;
}

impl PngPixel for u8 {
    const COLOR: ColorType = ColorType::Grayscale;
    const DEPTH: BitDepth = BitDepth::Eight;
    fn write_bytes(&self, out: &mut Vec<u8>) {
        out.push(*self);
    }
    fn read_bytes(b: &[u8]) -> Self {
        b[0]
    }
}

impl PngPixel for u16 {
    const COLOR: ColorType = ColorType::Grayscale;
    const DEPTH: BitDepth = BitDepth::Sixteen;
    fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_be_bytes());
    }
    fn read_bytes(b: &[u8]) -> Self {
        u16::from_be_bytes([b[0], b[1]])
    }
}

impl PngPixel for [u8; 3] {
    const COLOR: ColorType = ColorType::Rgb;
    const DEPTH: BitDepth = BitDepth::Eight;
    fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(self);
    }
    fn read_bytes(b: &[u8]) -> Self {
        [b[0], b[1], b[2]]
    }
}

impl PngPixel for [u16; 3] {
    const COLOR: ColorType = ColorType::Rgb;
    const DEPTH: BitDepth = BitDepth::Sixteen;
    fn write_bytes(&self, out: &mut Vec<u8>) {
        for c in self {
            out.extend_from_slice(&c.to_be_bytes());
        }
    }
    fn read_bytes(b: &[u8]) -> Self {
        [0, 1, 2].map(|k| u16::from_be_bytes([b[2 * k], b[2 * k + 1]]))
    }
}

fn bytes_per_pixel<P: PngPixel>() -> usize {
    let channels = if P::COLOR == ColorType::Rgb { 3 } else { 1 };
    let depth = if P::DEPTH == BitDepth::Sixteen { 2 } else { 1 };
    channels * depth
}

fn png_err(path: &Path, e: impl std::fmt::Display) -> DatasetError {
    DatasetError::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_png<P: PngPixel>(path: &Path, img: &Raster<P>) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width, img.height);
    enc.set_color(P::COLOR);
    enc.set_depth(P::DEPTH);
    enc.set_compression(Compression::Fast);
    let mut bytes = Vec::with_capacity(img.data.len() * bytes_per_pixel::<P>());
    for p in &img.data {
        p.write_bytes(&mut bytes);
    }
    let mut w = enc.write_header().map_err(|e| png_err(path, e))?;
    w.write_image_data(&bytes).map_err(|e| png_err(path, e))?;
    w.finish().map_err(|e| png_err(path, e))
}

/// Reads a PNG whose color type and depth match `P` exactly.
pub fn read_png<P: PngPixel>(path: &Path) -> Result<Raster<P>, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let mut reader = png::Decoder::new(BufReader::new(file))
        .read_info()
        .map_err(|e| png_err(path, e))?;
    let (color, depth) = reader.output_color_type();
    if color != P::COLOR || depth != P::DEPTH {
        return Err(png_err(path, format!("unexpected format {color:?}/{depth:?}")));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| png_err(path, e))?;
    let bpp = bytes_per_pixel::<P>();
    let mut data = Vec::with_capacity(info.width as usize * info.height as usize);
    for row in buf.chunks(info.line_size).take(info.height as usize) {
        data.extend(row[..info.width as usize * bpp].chunks(bpp).map(P::read_bytes));
    }
    Ok(Raster::from_vec(info.width, info.height, data))
}
