//! Sliding-window histogram back-projection.
//!
//! Every pixel is scored by the correlation between the hue histogram of the
//! template-sized window centred on it and the template's own histogram.
//! Borders are replicate-padded, so the map always has the image's size.
//!
//! The fast scan keeps one running histogram per row and updates it a column
//! at a time. Alongside the counts it maintains `sum(c_i^2)` (exactly, as an
//! integer) and `sum(c_i * t'_i)` where `t'` is the mean-centred template, which
//! is all the correlation needs. Each pixel therefore costs `O(window height)`
//! instead of `O(window area + bins)`.

use rayon::prelude::*;

use crate::color::HsvImage;
use crate::error::{Error, Result};
use crate::histogram::{correlation_similarity, h_histogram, hue_bin, NormalizedHistogram, Region};
use crate::raster::GrayMap;

/// A reference hue histogram together with the window it was measured on.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    histogram: NormalizedHistogram,
    window_width: usize,
    window_height: usize,
}

impl Template {
    pub fn new(histogram: NormalizedHistogram, window_width: usize, window_height: usize) -> Result<Self> {
        if window_width % 2 == 0 || window_height % 2 == 0 {
            return Err(Error::EvenWindow(window_width, window_height));
        }
        Ok(Self { histogram, window_width, window_height })
    }

    /// Histogram of a whole template image. An even side is trimmed by one
    /// row or column (the last) so the window can be centred on a pixel.
    pub fn from_image(hsv: &HsvImage, n_bins: usize) -> Result<Self> {
        let odd = |n: usize| if n % 2 == 0 { n - 1 } else { n };
        let (w, h) = (odd(hsv.width()), odd(hsv.height()));
        if w == 0 || h == 0 {
            return Err(Error::EmptyRegion);
        }
        let histogram = h_histogram(hsv, Region::new(0, 0, w, h), n_bins)?;
        Self::new(histogram, w, h)
    }

    pub fn histogram(&self) -> &NormalizedHistogram {
        &self.histogram
    }

    pub fn window(&self) -> (usize, usize) {
        (self.window_width, self.window_height)
    }
}

/// One or more templates sharing a bin count.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        let first = templates.first().ok_or(Error::NoTemplates)?;
        let n = first.histogram.n_bins();
        if let Some(t) = templates.iter().find(|t| t.histogram.n_bins() != n) {
            return Err(Error::BinMismatch { left: n, right: t.histogram.n_bins() });
        }
        Ok(Self { templates })
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn n_bins(&self) -> usize {
        self.templates[0].histogram.n_bins()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Template> {
        self.templates.iter()
    }
}

/// Per-pixel similarity values, unquantized.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::Dimensions { width, height, len: values.len() });
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Quantized view of a single map, for debugging dumps.
    pub fn to_gray(&self) -> GrayMap {
        let data = self.values.iter().map(|&v| quantize(v)).collect();
        GrayMap::from_raw(self.width, self.height, data).expect("dimensions checked on construction")
    }
}

/// Maps a similarity to 0..=255: clamp to `[0, 1]`, scale, round half up.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

fn check_window(image: &HsvImage, template: &Template, stride: usize) -> Result<()> {
    assert!(stride >= 1, "stride must be at least 1");
    let (w, h) = template.window();
    if w > image.width() || h > image.height() {
        return Err(Error::WindowTooLarge {
            window_width: w,
            window_height: h,
            width: image.width(),
            height: image.height(),
        });
    }
    if template.histogram.n_bins() > 256 {
        return Err(Error::BinCount(template.histogram.n_bins()));
    }
    Ok(())
}

/// Sampled positions along one axis for a given stride.
fn sample_positions(len: usize, stride: usize) -> Vec<usize> {
    (0..len).step_by(stride).collect()
}

/// Index of the nearest sampled position; ties go to the lower one.
#[inline]
fn nearest_sample(pos: usize, stride: usize, n_samples: usize) -> usize {
    ((pos + (stride - 1) / 2) / stride).min(n_samples - 1)
}

/// Expands rows computed on a `stride` grid to a full-size map.
fn assemble(width: usize, height: usize, stride: usize, rows: Vec<Vec<f64>>) -> ProbabilityMap {
    if stride == 1 {
        return ProbabilityMap { width, height, values: rows.concat() };
    }
    let mut values = Vec::with_capacity(width * height);
    let n_cols = rows[0].len();
    for y in 0..height {
        let row = &rows[nearest_sample(y, stride, rows.len())];
        values.extend((0..width).map(|x| row[nearest_sample(x, stride, n_cols)]));
    }
    ProbabilityMap { width, height, values }
}

/// Incremental sliding-window scan. `stride > 1` evaluates every
/// `stride`-th row and column and fills the rest from the nearest sample.
pub fn backproject_single(image: &HsvImage, template: &Template, stride: usize) -> Result<ProbabilityMap> {
    check_window(image, template, stride)?;
    let scanner = Scanner::new(image, template);
    let xs = sample_positions(image.width(), stride);
    let rows: Vec<Vec<f64>> = sample_positions(image.height(), stride)
        .into_par_iter()
        .map(|y| scanner.scan_row(y, &xs))
        .collect();
    Ok(assemble(image.width(), image.height(), stride, rows))
}

/// Reference scan: builds every window histogram from scratch and scores it
/// with [`correlation_similarity`]. Same output contract as
/// [`backproject_single`], at `O(window area + bins)` per pixel.
pub fn backproject_naive(image: &HsvImage, template: &Template, stride: usize) -> Result<ProbabilityMap> {
    check_window(image, template, stride)?;
    let (w, h) = template.window();
    let (rx, ry) = ((w / 2) as isize, (h / 2) as isize);
    let n_bins = template.histogram.n_bins();
    let (iw, ih) = (image.width() as isize, image.height() as isize);
    let xs = sample_positions(image.width(), stride);
    let rows = sample_positions(image.height(), stride)
        .into_par_iter()
        .map(|y| {
            xs.iter()
                .map(|&x| {
                    let mut counts = vec![0u32; n_bins];
                    for dy in 0..h as isize {
                        let sy = (y as isize + dy - ry).clamp(0, ih - 1) as usize;
                        for dx in 0..w as isize {
                            let sx = (x as isize + dx - rx).clamp(0, iw - 1) as usize;
                            counts[hue_bin(image.hue(sx, sy), n_bins)] += 1;
                        }
                    }
                    let window = NormalizedHistogram::from_counts(&counts)?;
                    correlation_similarity(&window, &template.histogram)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(image.width(), image.height(), stride, rows))
}

/// Scans the image once per template.
pub fn backproject_all(image: &HsvImage, templates: &TemplateSet, stride: usize) -> Result<Vec<ProbabilityMap>> {
    templates.iter().map(|t| backproject_single(image, t, stride)).collect()
}

struct Scanner {
    /// Bin index of every pixel in the replicate-padded image.
    padded: Vec<u16>,
    padded_width: usize,
    window_width: usize,
    window_height: usize,
    n_bins: usize,
    centered: Vec<f64>,
    template_var: f64,
}

struct RunningHistogram<'a> {
    counts: Vec<u32>,
    sum_sq: u64,
    dot: f64,
    centered: &'a [f64],
}

impl RunningHistogram<'_> {
    #[inline]
    fn add(&mut self, bin: usize) {
        let c = &mut self.counts[bin];
        self.sum_sq += 2 * u64::from(*c) + 1;
        *c += 1;
        self.dot += self.centered[bin];
    }

    #[inline]
    fn remove(&mut self, bin: usize) {
        let c = &mut self.counts[bin];
        *c -= 1;
        self.sum_sq -= 2 * u64::from(*c) + 1;
        self.dot -= self.centered[bin];
    }

    fn clear(&mut self) {
        self.counts.fill(0);
        self.sum_sq = 0;
        self.dot = 0.0;
    }
}

impl Scanner {
    fn new(image: &HsvImage, template: &Template) -> Self {
        let (w, h) = template.window();
        let (rx, ry) = (w / 2, h / 2);
        let n_bins = template.histogram.n_bins();
        let padded_width = image.width() + w - 1;
        let padded_height = image.height() + h - 1;
        let mut padded = Vec::with_capacity(padded_width * padded_height);
        for py in 0..padded_height {
            let sy = py.saturating_sub(ry).min(image.height() - 1);
            for px in 0..padded_width {
                let sx = px.saturating_sub(rx).min(image.width() - 1);
                padded.push(hue_bin(image.hue(sx, sy), n_bins) as u16);
            }
        }
        let bins = template.histogram.bins();
        let mean = template.histogram.sum() / n_bins as f64;
        let centered: Vec<f64> = bins.iter().map(|&b| b - mean).collect();
        let template_var = centered.iter().map(|c| c * c).sum();
        Self { padded, padded_width, window_width: w, window_height: h, n_bins, centered, template_var }
    }

    #[inline]
    fn add_column(&self, hist: &mut RunningHistogram<'_>, top: usize, col: usize) {
        for r in top..top + self.window_height {
            hist.add(usize::from(self.padded[r * self.padded_width + col]));
        }
    }

    #[inline]
    fn remove_column(&self, hist: &mut RunningHistogram<'_>, top: usize, col: usize) {
        for r in top..top + self.window_height {
            hist.remove(usize::from(self.padded[r * self.padded_width + col]));
        }
    }

    fn scan_row(&self, y: usize, xs: &[usize]) -> Vec<f64> {
        let mut hist = RunningHistogram {
            counts: vec![0; self.n_bins],
            sum_sq: 0,
            dot: 0.0,
            centered: &self.centered,
        };
        let mut out = Vec::with_capacity(xs.len());
        let mut prev: Option<usize> = None;
        for &x in xs {
            match prev {
                Some(px) if x - px < self.window_width => {
                    for c in px..x {
                        self.remove_column(&mut hist, y, c);
                    }
                    for c in px + self.window_width..x + self.window_width {
                        self.add_column(&mut hist, y, c);
                    }
                }
                _ => {
                    hist.clear();
                    for c in x..x + self.window_width {
                        self.add_column(&mut hist, y, c);
                    }
                }
            }
            out.push(self.correlation(hist.sum_sq, hist.dot));
            prev = Some(x);
        }
        out
    }

    /// Correlation of a window with counts `c` against the template, given
    /// `sum(c_i^2)` and `sum(c_i * t'_i)`. With `h_i = c_i / A`:
    /// `sum((h_i - 1/N)^2) = (N * sum(c_i^2) - A^2) / (N * A^2)` and the
    /// centred cross term is `sum(c_i * t'_i) / A`.
    #[inline]
    fn correlation(&self, sum_sq: u64, dot: f64) -> f64 {
        let area = (self.window_width * self.window_height) as u128;
        let n = self.n_bins as u128;
        let var_num = n * u128::from(sum_sq) - area * area;
        if var_num == 0 || self.template_var == 0.0 {
            return 0.0;
        }
        let area = area as f64;
        let window_var = var_num as f64 / (n as f64 * area * area);
        ((dot / area) / (window_var * self.template_var).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Combines per-template maps into one 8-bit probability image.
///
/// The per-pixel sum over templates is divided by the template count when
/// `normalize` is set, then clamped to `[0, 1]` and quantized with
/// [`quantize`].
pub fn fuse_templates(maps: &[ProbabilityMap], normalize: bool) -> Result<GrayMap> {
    let first = maps.first().ok_or(Error::NoTemplates)?;
    let (w, h) = (first.width, first.height);
    if let Some(m) = maps.iter().find(|m| m.width != w || m.height != h) {
        return Err(Error::MapSizeMismatch(w, h, m.width, m.height));
    }
    let scale = if normalize { 1.0 / maps.len() as f64 } else { 1.0 };
    let data = (0..w * h)
        .map(|i| quantize(maps.iter().map(|m| m.values[i]).sum::<f64>() * scale))
        .collect();
    GrayMap::from_raw(w, h, data)
}

/// Grayscale erosion by a 3x3 square, repeated `iterations` times, with
/// replicate borders.
pub fn erode(map: &GrayMap, iterations: usize) -> GrayMap {
    let (w, h) = (map.width(), map.height());
    let mut cur = map.clone();
    let mut tmp = vec![0u8; w * h];
    for _ in 0..iterations {
        let src = cur.as_raw();
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            for x in 0..w {
                let lo = x.saturating_sub(1);
                let hi = (x + 1).min(w - 1);
                tmp[y * w + x] = row[lo].min(row[x]).min(row[hi]);
            }
        }
        let dst = cur.as_raw_mut();
        for y in 0..h {
            let up = y.saturating_sub(1);
            let down = (y + 1).min(h - 1);
            for x in 0..w {
                dst[y * w + x] = tmp[up * w + x].min(tmp[y * w + x]).min(tmp[down * w + x]);
            }
        }
    }
    cur
}
