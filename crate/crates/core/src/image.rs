//! Grayscale image containers and binary PGM (P5) export.

use std::path::Path;

use crate::error::{Error, Result};

/// Row-major grayscale image with pixels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::input(format!("image dimensions {height}×{width}")));
        }
        if pixels.len() != height * width {
            return Err(Error::input(format!(
                "{} pixels for a {height}×{width} image",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::input(format!("pixel value {v} outside [0, 1]")));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    pub fn view(&self) -> ImageView<'_> {
        ImageView {
            height: self.height,
            width: self.width,
            pixels: &self.pixels,
        }
    }
}

/// Borrowed image plane without a range constraint. Raw model predictions are
/// viewed this way before they are clamped for display.
#[derive(Debug, Clone, Copy)]
pub struct ImageView<'a> {
    pub height: usize,
    pub width: usize,
    pub pixels: &'a [f64],
}

impl<'a> ImageView<'a> {
    pub fn new(height: usize, width: usize, pixels: &'a [f64]) -> Result<Self> {
        if pixels.len() != height * width || pixels.is_empty() {
            return Err(Error::input(format!(
                "{} pixels for a {height}×{width} image",
                pixels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Pixel lookup with coordinates clamped to the border.
    pub(crate) fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.pixels[r * self.width + c]
    }
}

/// `round(clamp(v, 0, 1) · 255)`, ties away from zero.
pub fn quantize(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0).round() as u8
}

/// Binary PGM: `P5\n<width> <height>\n255\n` followed by row-major bytes.
pub fn encode_pgm(img: ImageView<'_>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.pixels.iter().map(|&v| quantize(v)));
    out
}

pub fn write_pgm(path: &Path, img: ImageView<'_>) -> Result<()> {
    std::fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

/// Parses a binary PGM with maxval 255 as written by [`encode_pgm`].
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(pos, "truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(Error::format(0, "expected a P5 PGM with maxval 255"));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::format(0, format!("bad PGM dimension {s:?}")))
    };
    let (width, height) = (parse(&fields[1])?, parse(&fields[2])?);
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != width * height {
        return Err(Error::format(
            pos,
            format!(
                "expected {} pixel bytes, found {}",
                width * height,
                data.len()
            ),
        ));
    }
    GrayImage::new(
        height,
        width,
        data.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
}
