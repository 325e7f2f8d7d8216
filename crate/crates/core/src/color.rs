//! RGB to HSV conversion.
//!
//! The default [`HsvMode::Paper`] conversion is deliberately not the
//! textbook transform: it offsets the green and blue sectors by 180 and 240
//! and divides the chroma difference by the 0..255 saturation rather than by
//! `V - min`. [`HsvMode::Standard`] is the usual hexcone hue rescaled to
//! 0..=255.
//!
//! Conventions shared by both modes:
//! * `V == 0` or `S == 0` gives `H = 0`.
//! * negative hue wraps by adding 360.
//! * hue is rounded to the nearest integer and clamped to 0..=255.

use serde::{Deserialize, Serialize};

use crate::raster::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HsvMode {
    #[default]
    Paper,
    Standard,
}

impl std::str::FromStr for HsvMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "standard" => Ok(Self::Standard),
            other => Err(format!("expected `paper` or `standard`, got `{other}`")),
        }
    }
}

impl std::fmt::Display for HsvMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Standard => "standard",
        })
    }
}

/// Planar HSV image. All three planes hold one byte per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsvImage {
    width: usize,
    height: usize,
    h: Vec<u8>,
    s: Vec<u8>,
    v: Vec<u8>,
}

impl HsvImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn h_plane(&self) -> &[u8] {
        &self.h
    }

    pub fn s_plane(&self) -> &[u8] {
        &self.s
    }

    pub fn v_plane(&self) -> &[u8] {
        &self.v
    }

    #[inline]
    pub fn hue(&self, x: usize, y: usize) -> u8 {
        self.h[y * self.width + x]
    }

    /// Builds an image straight from a hue plane (S and V set to 255).
    /// Handy for synthetic histogram fixtures.
    pub fn from_hue(width: usize, height: usize, hue: Vec<u8>) -> Self {
        assert!(width > 0 && height > 0 && hue.len() == width * height);
        let n = hue.len();
        Self { width, height, h: hue, s: vec![255; n], v: vec![255; n] }
    }
}

pub fn rgb_to_hsv(image: &RgbImage, mode: HsvMode) -> HsvImage {
    let n = image.width() * image.height();
    let (mut h, mut s, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for [r, g, b] in image.pixels() {
        let px = hsv_pixel(r, g, b, mode);
        h.push(px[0]);
        s.push(px[1]);
        v.push(px[2]);
    }
    HsvImage { width: image.width(), height: image.height(), h, s, v }
}

/// Converts one pixel to `[H, S, V]`.
pub fn hsv_pixel(r: u8, g: u8, b: u8, mode: HsvMode) -> [u8; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    if max == 0 {
        return [0, 0, 0];
    }
    let (rf, gf, bf) = (f64::from(r), f64::from(g), f64::from(b));
    let (vf, chroma) = (f64::from(max), f64::from(max - min));
    let sat = chroma * 255.0 / vf;
    if max == min {
        return [0, 0, max];
    }
    let hue = match mode {
        HsvMode::Paper => {
            if max == r {
                (gf - bf) * 60.0 / sat
            } else if max == g {
                180.0 + (bf - rf) * 60.0 / sat
            } else {
                240.0 + (rf - gf) * 60.0 / sat
            }
        }
        HsvMode::Standard => {
            let deg = if max == r {
                60.0 * (gf - bf) / chroma
            } else if max == g {
                120.0 + 60.0 * (bf - rf) / chroma
            } else {
                240.0 + 60.0 * (rf - gf) / chroma
            };
            deg * 256.0 / 360.0
        }
    };
    let hue = if hue < 0.0 {
        hue + match mode {
            HsvMode::Paper => 360.0,
            HsvMode::Standard => 256.0,
        }
    } else {
        hue
    };
    let hue = match mode {
        HsvMode::Paper => hue.round().clamp(0.0, 255.0) as u8,
        // The rescaled hue circle is exactly 256 wide.
        HsvMode::Standard => (hue.round() as u32 % 256) as u8,
    };
    [hue, sat.round() as u8, max]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Line-by-line transcription of the printed conversion, kept free of
    /// the shortcuts taken above.
    fn transcribed(r: u8, g: u8, b: u8) -> [u8; 3] {
        let (r, g, b) = (r as f64, g as f64, b as f64);
        let v = r.max(g).max(b);
        let mn = r.min(g).min(b);
        let s = if v != 0.0 { (v - mn) * 255.0 / v } else { 0.0 };
        let mut h = if s == 0.0 {
            0.0
        } else if v == r {
            (g - b) * 60.0 / s
        } else if v == g {
            180.0 + (b - r) * 60.0 / s
        } else {
            240.0 + (r - g) * 60.0 / s
        };
        if h < 0.0 {
            h += 360.0;
        }
        let h = h.round();
        let h = if h > 255.0 { 255.0 } else { h };
        [h as u8, s.round() as u8, v as u8]
    }

    #[test]
    fn primaries() {
        assert_eq!(hsv_pixel(0, 0, 0, HsvMode::Paper), [0, 0, 0]);
        assert_eq!(hsv_pixel(255, 0, 0, HsvMode::Paper), [0, 255, 255]);
        assert_eq!(hsv_pixel(0, 255, 0, HsvMode::Paper), [180, 255, 255]);
        assert_eq!(hsv_pixel(0, 0, 255, HsvMode::Paper), [240, 255, 255]);
    }

    #[test]
    fn standard_primaries() {
        assert_eq!(hsv_pixel(255, 0, 0, HsvMode::Standard), [0, 255, 255]);
        // 120 deg and 240 deg on a 256-step circle.
        assert_eq!(hsv_pixel(0, 255, 0, HsvMode::Standard)[0], 85);
        assert_eq!(hsv_pixel(0, 0, 255, HsvMode::Standard)[0], 171);
        // 300 deg (magenta) wraps to 213.
        assert_eq!(hsv_pixel(255, 0, 255, HsvMode::Standard)[0], 213);
    }

    #[test]
    fn grays_are_achromatic() {
        for level in [0u8, 1, 77, 128, 255] {
            let [h, s, v] = hsv_pixel(level, level, level, HsvMode::Paper);
            assert_eq!((h, s, v), (0, 0, level));
        }
    }

    #[test]
    fn negative_hue_wraps() {
        // V = R with B > G is the negative branch; wrapped and clamped to the top bin.
        let [h, _, _] = hsv_pixel(200, 10, 100, HsvMode::Paper);
        assert_eq!(h, 255);
        // Slightly negative: -1.x + 360 still clamps.
        assert_eq!(hsv_pixel(200, 100, 101, HsvMode::Paper)[0], 255);
    }

    #[test]
    fn matches_transcription_on_random_pixels() {
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..10_000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let (r, g, b) = ((state >> 16) as u8, (state >> 32) as u8, (state >> 48) as u8);
            assert_eq!(hsv_pixel(r, g, b, HsvMode::Paper), transcribed(r, g, b), "pixel ({r},{g},{b})");
        }
    }

    #[test]
    fn exhaustive_invariants() {
        for r in (0..=255u8).step_by(3) {
            for g in (0..=255u8).step_by(5) {
                for b in (0..=255u8).step_by(7) {
                    for mode in [HsvMode::Paper, HsvMode::Standard] {
                        let [h, s, v] = hsv_pixel(r, g, b, mode);
                        assert_eq!(v, r.max(g).max(b));
                        if v == 0 {
                            assert_eq!((h, s), (0, 0));
                        }
                        if s == 0 {
                            assert_eq!(h, 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn image_conversion_is_pixel_local() {
        let img = RgbImage::from_fn(7, 5, |x, y| [(x * 30) as u8, (y * 50) as u8, ((x + y) * 11) as u8]);
        let hsv = rgb_to_hsv(&img, HsvMode::Paper);
        let flipped = RgbImage::from_fn(7, 5, |x, y| img.get(6 - x, 4 - y));
        let hsv_flipped = rgb_to_hsv(&flipped, HsvMode::Paper);
        for y in 0..5 {
            for x in 0..7 {
                assert_eq!(hsv.hue(x, y), hsv_flipped.hue(6 - x, 4 - y));
                let [r, g, b] = img.get(x, y);
                assert_eq!(hsv.v_plane()[y * 7 + x], r.max(g).max(b));
            }
        }
    }
}
