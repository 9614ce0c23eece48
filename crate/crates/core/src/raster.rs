//! Grayscale rasters with values in `[0, 1]`, PGM/PNG input and output, and conversion to
//! and from PCR images.

use std::path::Path;
use std::sync::Arc;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::grid::{Grid, Rect};
use crate::pcr::PcrImage;

/// Row-major pixels, row 0 at the top. `pitch` is the side of a (square) pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    pitch: f64,
    pixels: Vec<f64>,
}

/// Sample depth used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        Raster::with_pitch(width, height, 1.0, pixels)
    }

    pub fn with_pitch(width: usize, height: usize, pitch: f64, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("raster dimensions must be positive".into()));
        }
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::InvalidParameter(format!("pitch must be positive, got {pitch}")));
        }
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                what: "pixels",
                expected: width * height,
                actual: pixels.len(),
            });
        }
        if let Some(v) = pixels.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("pixel value {v} is not finite")));
        }
        Ok(Raster {
            width,
            height,
            pitch,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Raster::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn min(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Reads PGM (P2/P5, 8 or 16 bit) or PNG; samples are mapped linearly onto `[0, 1]`.
    pub fn read(path: &Path) -> Result<Raster> {
        let img = image::open(path)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let pixels: Vec<f64> = match img {
            DynamicImage::ImageLuma8(b) => b.into_raw().iter().map(|&v| v as f64 / 255.0).collect(),
            DynamicImage::ImageLuma16(b) => {
                b.into_raw().iter().map(|&v| v as f64 / 65535.0).collect()
            }
            other => other
                .to_luma16()
                .into_raw()
                .iter()
                .map(|&v| v as f64 / 65535.0)
                .collect(),
        };
        Raster::new(w, h, pixels.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    /// Writes by extension: `.pgm` as binary 8-bit PGM, `.png` as 16-bit PNG.
    pub fn write(&self, path: &Path) -> Result<()> {
        match extension(path).as_deref() {
            Some("pgm") => self.write_pgm(path, BitDepth::Eight, false),
            Some("png") => self.write_png(path, BitDepth::Sixteen),
            _ => Err(Error::Format(format!("unknown image extension for {}", path.display()))),
        }
    }

    fn quantize8(&self) -> Vec<u8> {
        self.pixels.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
    }

    fn quantize16(&self) -> Vec<u16> {
        self.pixels.iter().map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16).collect()
    }

    pub fn write_png(&self, path: &Path, depth: BitDepth) -> Result<()> {
        let (w, h) = (self.width as u32, self.height as u32);
        match depth {
            BitDepth::Eight => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, self.quantize8())
                .expect("buffer size matches")
                .save(path)?,
            BitDepth::Sixteen => ImageBuffer::<Luma<u16>, _>::from_raw(w, h, self.quantize16())
                .expect("buffer size matches")
                .save(path)?,
        }
        Ok(())
    }

    /// PGM in binary (P5) or plain (P2) encoding.
    pub fn write_pgm(&self, path: &Path, depth: BitDepth, plain: bool) -> Result<()> {
        let maxval = match depth {
            BitDepth::Eight => 255u32,
            BitDepth::Sixteen => 65535,
        };
        let samples: Vec<u32> = self
            .pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * maxval as f64).round() as u32)
            .collect();
        let magic = if plain { "P2" } else { "P5" };
        let mut out = format!("{magic}\n{} {}\n{maxval}\n", self.width, self.height).into_bytes();
        if plain {
            for row in samples.chunks(self.width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        } else if maxval == 255 {
            out.extend(samples.iter().map(|&v| v as u8));
        } else {
            out.extend(samples.iter().flat_map(|&v| (v as u16).to_be_bytes()));
        }
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Pixels as cells of a uniform grid whose lower-left corner is `origin`.
    pub fn to_pcr(&self, origin: (f64, f64)) -> Result<PcrImage> {
        let h = self.pitch;
        let xs = (0..=self.width).map(|i| origin.0 + i as f64 * h).collect();
        let ys = (0..=self.height).map(|j| origin.1 + j as f64 * h).collect();
        let grid = Arc::new(Grid::new(xs, ys)?);
        let mut values = Vec::with_capacity(self.pixels.len());
        for iy in 0..self.height {
            let row = self.height - 1 - iy;
            values.extend_from_slice(&self.pixels[row * self.width..(row + 1) * self.width]);
        }
        PcrImage::new(grid, values)
    }

    /// Samples `f` at pixel centres with `nx` by `ny` square pixels covering its domain.
    pub fn rasterize(f: &PcrImage, nx: usize, ny: usize) -> Result<Raster> {
        let d: Rect = f.grid().domain();
        let h = d.width() / nx as f64;
        if ((d.height() / ny as f64) - h).abs() > 1e-12 * h {
            return Err(Error::UnsupportedGrid(format!(
                "{nx} x {ny} pixels are not square on a {} x {} domain",
                d.width(),
                d.height()
            )));
        }
        let mut pixels = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            let y = d.y1 - (row as f64 + 0.5) * h;
            for col in 0..nx {
                let x = d.x0 + (col as f64 + 0.5) * h;
                pixels.push(f.value_at(x, y).expect("pixel centre inside the domain"));
            }
        }
        Raster::with_pitch(nx, ny, h, pixels)
    }

    /// Inverse of [`Raster::to_pcr`] for uniform square grids.
    pub fn from_pcr(f: &PcrImage) -> Result<Raster> {
        let g = f.grid();
        let h = g
            .uniform_pitch()
            .ok_or_else(|| Error::UnsupportedGrid("grid is not uniform and square".into()))?;
        let (nx, ny) = (g.nx(), g.ny());
        let mut pixels = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            let iy = ny - 1 - row;
            pixels.extend_from_slice(&f.values()[iy * nx..(iy + 1) * nx]);
        }
        Raster::with_pitch(nx, ny, h, pixels)
    }
}

pub(crate) fn extension(path: &Path) -> Option<String> {
    path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcr_round_trip() {
        let r = Raster::with_pitch(3, 2, 0.5, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let f = r.to_pcr((0.0, 0.0)).unwrap();
        // Top-left pixel sits in the upper row of cells.
        assert_eq!(f.value_at(0.1, 0.9), Some(0.0));
        assert_eq!(f.value_at(1.4, 0.1), Some(0.5));
        assert_eq!(Raster::from_pcr(&f).unwrap(), r);
        assert_eq!(Raster::rasterize(&f, 3, 2).unwrap(), r);
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let r = Raster::new(4, 3, (0..12).map(|i| i as f64 / 11.0).collect()).unwrap();
        for (name, tol) in [("a.png", 1.0 / 65535.0), ("b.pgm", 1.0 / 255.0)] {
            let p = dir.path().join(name);
            r.write(&p).unwrap();
            let back = Raster::read(&p).unwrap();
            assert!(r.pixels().iter().zip(back.pixels()).all(|(a, b)| (a - b).abs() <= tol));
        }
        let p = dir.path().join("c.pgm");
        r.write_pgm(&p, BitDepth::Sixteen, true).unwrap();
        assert!(std::fs::read(&p).unwrap().starts_with(b"P2"));
        let back = Raster::read(&p).unwrap();
        assert!(r.pixels().iter().zip(back.pixels()).all(|(a, b)| (a - b).abs() <= 1.0 / 65535.0));
        assert!(r.write(&dir.path().join("x.bmp")).is_err());
    }
}
