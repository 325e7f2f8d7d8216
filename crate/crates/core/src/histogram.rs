//! Hue histograms and the mean-centred correlation used to compare them.

use crate::color::HsvImage;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 256;

/// Maps an 8-bit hue onto one of `n_bins` equal-width bins.
#[inline]
pub fn hue_bin(hue: u8, n_bins: usize) -> usize {
    usize::from(hue) * n_bins / 256
}

/// Axis-aligned region in pixel coordinates. May extend past the image;
/// it is clamped before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: isize,
    pub y: isize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn new(x: isize, y: isize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    pub fn full(image: &HsvImage) -> Self {
        Self::new(0, 0, image.width(), image.height())
    }

    /// Intersection with a `width` x `height` image as `(x0, y0, x1, y1)`,
    /// half-open. `None` when empty.
    fn clamp(&self, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
        let clip = |start: isize, len: usize, limit: usize| {
            let lo = start.max(0) as usize;
            let hi = (start + len as isize).clamp(0, limit as isize) as usize;
            (lo.min(limit), hi)
        };
        let (x0, x1) = clip(self.x, self.width, width);
        let (y0, y1) = clip(self.y, self.height, height);
        (x1 > x0 && y1 > y0).then_some((x0, y0, x1, y1))
    }
}

/// A hue distribution: non-negative bins summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHistogram {
    bins: Vec<f64>,
}

impl NormalizedHistogram {
    /// Normalizes raw counts. Fails when every count is zero.
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if total == 0 {
            return Err(Error::EmptyRegion);
        }
        let total = total as f64;
        Ok(Self { bins: counts.iter().map(|&c| f64::from(c) / total).collect() })
    }

    /// Wraps bins as given. The caller guarantees they form a distribution;
    /// the correlation itself does not require it.
    pub fn from_bins(bins: Vec<f64>) -> Self {
        assert!(!bins.is_empty(), "histogram needs at least one bin");
        Self { bins }
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn sum(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Hue histogram of `region` (clamped to the image), normalized by the
/// clamped area.
pub fn h_histogram(image: &HsvImage, region: Region, n_bins: usize) -> Result<NormalizedHistogram> {
    if n_bins == 0 || n_bins > 256 {
        return Err(Error::BinCount(n_bins));
    }
    let (x0, y0, x1, y1) = region.clamp(image.width(), image.height()).ok_or(Error::EmptyRegion)?;
    let mut counts = vec![0u32; n_bins];
    let plane = image.h_plane();
    for y in y0..y1 {
        for &h in &plane[y * image.width() + x0..y * image.width() + x1] {
            counts[hue_bin(h, n_bins)] += 1;
        }
    }
    NormalizedHistogram::from_counts(&counts)
}

/// Correlation of two histograms after subtracting each one's bin mean.
///
/// Returns a value in `[-1, 1]`, or 0 when either histogram is flat (all
/// bins equal), since a flat histogram carries no evidence either way.
pub fn correlation_similarity(h1: &NormalizedHistogram, h2: &NormalizedHistogram) -> Result<f64> {
    if h1.n_bins() != h2.n_bins() {
        return Err(Error::BinMismatch { left: h1.n_bins(), right: h2.n_bins() });
    }
    let n = h1.n_bins() as f64;
    let mean1 = h1.sum() / n;
    let mean2 = h2.sum() / n;
    let (mut dot, mut sq1, mut sq2) = (0.0, 0.0, 0.0);
    for (&a, &b) in h1.bins.iter().zip(&h2.bins) {
        let (a, b) = (a - mean1, b - mean2);
        dot += a * b;
        sq1 += a * a;
        sq2 += b * b;
    }
    if sq1 == 0.0 || sq2 == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (sq1 * sq2).sqrt()).clamp(-1.0, 1.0))
}
