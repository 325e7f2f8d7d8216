//! Owned raster buffers and PNG/JPEG codecs.
//!
//! Both buffer types store pixels row-major with the origin at the top-left
//! corner. Dimensions are always at least 1x1.

use std::io::Cursor;

use image::{ImageEncoder, ImageReader};

use crate::error::{Error, Result};

/// 8-bit RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RgbImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RgbImage {
    /// Creates an image filled with `fill`.
    ///
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let data = fill.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, data }
    }

    /// Wraps interleaved RGB samples.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height * 3 {
            return Err(Error::Dimensions { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut img = Self::new(width, height, [0; 3]);
        for y in 0..height {
            for x in 0..width {
                img.put(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, px: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }

    /// Pixels in row-major order.
    pub fn pixels(&self) -> impl ExactSizeIterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    /// Copies a sub-rectangle. The rectangle must lie inside the image.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> RgbImage {
        assert!(x + width <= self.width && y + height <= self.height, "crop out of bounds");
        RgbImage::from_fn(width, height, |cx, cy| self.get(x + cx, y + cy))
    }
}

/// Single-channel 8-bit map: probability images, masks and binary images.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for GrayMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayMap")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayMap {
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        assert!(width > 0 && height > 0, "map dimensions must be positive");
        Self { width, height, data: vec![fill; width * height] }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Dimensions { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut map = Self::new(width, height, 0);
        for y in 0..height {
            for x in 0..width {
                map.data[y * width + x] = f(x, y);
            }
        }
        map
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn as_raw_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }
}

/// Decodes a PNG or JPEG stream into 8-bit RGB. Alpha is dropped and
/// grayscale is promoted.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage> {
    if bytes.is_empty() {
        return Err(Error::Decode("empty input (0 bytes)".into()));
    }
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode(e.to_string()))?;
    if reader.format().is_none() {
        return Err(Error::Decode("unrecognized image format signature at offset 0".into()));
    }
    let dynamic = reader.decode().map_err(|e| Error::Decode(e.to_string()))?;
    let rgb = dynamic.to_rgb8();
    let (w, h) = rgb.dimensions();
    RgbImage::from_raw(w as usize, h as usize, rgb.into_raw())
}

/// Encodes as a non-interlaced 8-bit RGB PNG.
pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    encode(image.as_raw(), image.width(), image.height(), image::ExtendedColorType::Rgb8)
}

/// Encodes as a non-interlaced 8-bit grayscale PNG.
pub fn encode_gray_png(map: &GrayMap) -> Result<Vec<u8>> {
    encode(map.as_raw(), map.width(), map.height(), image::ExtendedColorType::L8)
}

fn encode(data: &[u8], width: usize, height: usize, color: image::ExtendedColorType) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(data, width as u32, height as u32, color)
        .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out)
}

pub fn read_image(path: impl AsRef<std::path::Path>) -> Result<RgbImage> {
    decode_image(&std::fs::read(path)?)
}

pub fn write_png(path: impl AsRef<std::path::Path>, image: &RgbImage) -> Result<()> {
    std::fs::write(path, encode_png(image)?)?;
    Ok(())
}
