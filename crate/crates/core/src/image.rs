//! Minimal owned raster used for every image modality.

/// Row-major image with one `T` per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster<T> {
    pub width: u32,
    pub height: u32,
    pub data: Vec<T>,
}

pub type RgbImage = Raster<[u8; 3]>;

impl<T: Copy> Raster<T> {
    pub fn filled(width: u32, height: u32, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    /// Panics if `data` does not hold exactly `width * height` pixels.
    pub fn from_vec(width: u32, height: u32, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width as usize * height as usize, "raster size");
        Self { width, height, data }
    }

    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width as usize + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: T) {
        let w = self.width as usize;
        self.data[y * w + x] = v;
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}
