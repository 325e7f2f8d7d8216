//! Seeded synthetic field scenes with moth silhouettes and ground truth.
//!
//! The background is a green, blotchy crop texture. Each moth is the
//! reference wing triangle, rotated and scaled, filled with a noisy
//! yellow-brown texture, with a darker elliptical body inside it. Clutter
//! adds moth-coloured ellipses that carry no truth entry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GroundTruth, TruthRegion};
use crate::backproject::{Template, TemplateSet};
use crate::color::rgb_to_hsv;
use crate::contour::{Contour, ContourKind, Point};
use crate::geometry::{convex_gap, point_in_polygon, transform, Vertex};
use crate::moments::HuSignature;
use crate::pipeline::{reference_signature, segment_image, PipelineConfig};
use crate::raster::RgbImage;

/// The wing outline every moth and the reference image share, in a unit
/// frame centred on its centroid, longest side 1.
pub fn wing_shape() -> [Vertex; 3] {
    // Scalene on purpose: a mirror-symmetric outline zeroes the skew
    // invariant, whose log then flips sign on rasterization noise.
    let raw = [(0.0, 0.0), (1.0, 0.0), (0.25, 0.8)];
    let (cx, cy) = ((0.0 + 1.0 + 0.25) / 3.0, 0.8 / 3.0);
    let longest = (0..3)
        .map(|i| {
            let (a, b): (Vertex, Vertex) = (raw[i], raw[(i + 1) % 3]);
            (a.0 - b.0).hypot(a.1 - b.1)
        })
        .fold(0.0, f64::max);
    raw.map(|(x, y)| ((x - cx) / longest, (y - cy) / longest))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    pub insects: usize,
    /// Number of moth-coloured distractor blobs.
    pub clutter: usize,
    /// Range of the wing's longest side, pixels.
    pub min_size: f64,
    pub max_size: f64,
}

impl SceneParams {
    pub fn new(width: usize, height: usize, insects: usize, clutter: usize) -> Self {
        Self { width, height, insects, clutter, min_size: 150.0, max_size: 195.0 }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A noisy moth-coloured pixel: red dominant, green above blue, so the hue
/// sits in the yellow-brown band.
fn moth_pixel(rng: &mut impl Rng, shade: f64) -> [u8; 3] {
    let v = rng.gen_range(0.85..1.0) * shade;
    let r = 185.0 * v;
    let g = r * rng.gen_range(0.62..0.76);
    let b = r * rng.gen_range(0.22..0.32);
    [r as u8, g as u8, b as u8]
}

fn body_pixel(rng: &mut impl Rng) -> [u8; 3] {
    moth_pixel(rng, 0.85)
}

/// Green crop texture: blotchy low-frequency shading plus per-pixel noise.
fn background(width: usize, height: usize, rng: &mut ChaCha8Rng) -> RgbImage {
    let blobs: Vec<(f64, f64, f64, f64)> = (0..12)
        .map(|_| {
            (
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(25.0..90.0),
                rng.gen_range(-0.25..0.25),
            )
        })
        .collect();
    let mut img = RgbImage::new(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            let shade: f64 = blobs
                .iter()
                .map(|&(bx, by, r, amp)| amp * (-((x as f64 - bx).powi(2) + (y as f64 - by).powi(2)) / (r * r)).exp())
                .sum();
            let g = (165.0 * (1.0 + shade) * rng.gen_range(0.88..1.0)).clamp(70.0, 235.0);
            let r = g * rng.gen_range(0.25..0.55);
            let b = g * rng.gen_range(0.15..0.45);
            img.put(x, y, [r as u8, g as u8, b as u8]);
        }
    }
    img
}

/// Tries random positions for `shape` (centred on the origin) until it
/// sits inside the frame and keeps `gap` pixels clear of every placed
/// outline. Returns the translated outline.
fn place(
    rng: &mut ChaCha8Rng,
    placed: &[Vec<Vertex>],
    shape: &[Vertex],
    gap: f64,
    width: usize,
    height: usize,
) -> Option<Vec<Vertex>> {
    let margin = 4.0;
    let (x0, y0, x1, y1) = shape.iter().fold((f64::MAX, f64::MAX, f64::MIN, f64::MIN), |(a, b, c, d), &(x, y)| {
        (a.min(x), b.min(y), c.max(x), d.max(y))
    });
    let (lo_x, hi_x) = (margin - x0, width as f64 - margin - x1);
    let (lo_y, hi_y) = (margin - y0, height as f64 - margin - y1);
    if lo_x >= hi_x || lo_y >= hi_y {
        return None;
    }
    for _ in 0..500 {
        let (cx, cy) = (rng.gen_range(lo_x..hi_x), rng.gen_range(lo_y..hi_y));
        let moved: Vec<Vertex> = shape.iter().map(|&(x, y)| (x + cx, y + cy)).collect();
        if placed.iter().all(|p| convex_gap(p, &moved) >= gap) {
            return Some(moved);
        }
    }
    None
}

/// Ellipse outline as a 24-gon, slightly outside the true curve.
fn ellipse_outline(a: f64, b: f64, angle: f64) -> Vec<Vertex> {
    let (s, c) = angle.sin_cos();
    let grow = 1.0 / (std::f64::consts::PI / 24.0).cos();
    (0..24)
        .map(|k| {
            let t = f64::from(k) * std::f64::consts::TAU / 24.0;
            let (u, v) = (a * grow * t.cos(), b * grow * t.sin());
            (c * u - s * v, s * u + c * v)
        })
        .collect()
}

/// Minimum clearance between objects, wider than any template window.
pub const OBJECT_GAP: f64 = 40.0;

/// Renders one scene. Deterministic per `(seed, index)`; moths that cannot
/// be placed without overlap are skipped, so the truth lists what was drawn.
pub fn generate_scene(seed: u64, index: u64, params: &SceneParams, name: &str) -> (RgbImage, GroundTruth) {
    assert!(params.width >= 64 && params.height >= 64, "scenes need at least 64x64 pixels");
    let mut rng = rng_for(seed, index);
    let mut img = background(params.width, params.height, &mut rng);
    let mut placed: Vec<Vec<Vertex>> = Vec::new();
    let mut regions = Vec::new();
    let wing = wing_shape();

    for id in 0..params.insects {
        let size = rng.gen_range(params.min_size..=params.max_size);
        let angle = rng.gen_range(0.0..360.0);
        let shape = transform(&wing, (0.0, 0.0), angle, size);
        let Some(poly) = place(&mut rng, &placed, &shape, OBJECT_GAP, params.width, params.height) else { continue };
        let centre = (poly[0].0 - shape[0].0, poly[0].1 - shape[0].1);
        draw_moth(&mut img, &poly, size, centre, &mut rng);
        placed.push(poly.clone());
        regions.push(TruthRegion { id: id as u32, polygon: poly.iter().map(|&(x, y)| [x, y]).collect() });
    }

    for _ in 0..params.clutter {
        let (a, b) = (rng.gen_range(10.0..32.0), rng.gen_range(6.0..20.0));
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let shape = ellipse_outline(a, b, angle);
        let Some(outline) = place(&mut rng, &placed, &shape, OBJECT_GAP, params.width, params.height) else { continue };
        let centre = (outline[0].0 - shape[0].0, outline[0].1 - shape[0].1);
        fill_ellipse(&mut img, centre, a, b, angle, |r| moth_pixel(r, 1.0), &mut rng);
        placed.push(outline);
    }

    let truth = GroundTruth { image: name.to_string(), width: params.width, height: params.height, regions };
    (img, truth)
}

fn draw_moth(img: &mut RgbImage, poly: &[Vertex], size: f64, centre: Vertex, rng: &mut ChaCha8Rng) {
    let (x0, y0, x1, y1) = bounds(poly, img.width(), img.height());
    for y in y0..=y1 {
        for x in x0..=x1 {
            if point_in_polygon((x as f64, y as f64), poly) {
                img.put(x, y, moth_pixel(rng, 1.0));
            }
        }
    }
    // Body: slender ellipse from the centroid towards the first wing tip,
    // kept well inside the outline.
    let tip = poly[0];
    let axis = (tip.1 - centre.1).atan2(tip.0 - centre.0);
    let body_centre = (centre.0 + 0.2 * (tip.0 - centre.0), centre.1 + 0.2 * (tip.1 - centre.1));
    fill_ellipse(img, body_centre, 0.16 * size, 0.05 * size, axis, body_pixel, rng);
}

fn bounds(poly: &[Vertex], width: usize, height: usize) -> (usize, usize, usize, usize) {
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&Vertex) -> f64| poly.iter().map(pick).fold(init, f);
    let x0 = fold(f64::min, f64::INFINITY, |v| v.0).floor().max(0.0) as usize;
    let y0 = fold(f64::min, f64::INFINITY, |v| v.1).floor().max(0.0) as usize;
    let x1 = (fold(f64::max, f64::NEG_INFINITY, |v| v.0).ceil() as usize).min(width - 1);
    let y1 = (fold(f64::max, f64::NEG_INFINITY, |v| v.1).ceil() as usize).min(height - 1);
    (x0, y0, x1, y1)
}

fn fill_ellipse(
    img: &mut RgbImage,
    centre: Vertex,
    a: f64,
    b: f64,
    angle: f64,
    colour: impl Fn(&mut ChaCha8Rng) -> [u8; 3],
    rng: &mut ChaCha8Rng,
) {
    let (s, c) = angle.sin_cos();
    let box_poly = [(centre.0 - a, centre.1 - a), (centre.0 + a, centre.1 + a)];
    let (x0, y0, x1, y1) = bounds(&box_poly, img.width(), img.height());
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 - centre.0, y as f64 - centre.1);
            let (u, v) = (c * dx + s * dy, -s * dx + c * dy);
            if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                img.put(x, y, colour(rng));
            }
        }
    }
}

/// Three square moth-texture patches (15, 17 and 19 pixels) to use as
/// back-projection templates.
pub fn synthetic_templates(seed: u64) -> Vec<RgbImage> {
    [15usize, 17, 19]
        .iter()
        .enumerate()
        .map(|(i, &side)| {
            let mut rng = rng_for(seed, u64::MAX - i as u64);
            RgbImage::from_fn(side, side, |_, _| moth_pixel(&mut rng, 1.0))
        })
        .collect()
}

/// Templates and reference signatures for scenes made with `seed`, built
/// the way the command-line tool loads them from files.
pub fn synthetic_setup(seed: u64, cfg: &PipelineConfig) -> crate::Result<(TemplateSet, Vec<HuSignature>)> {
    let templates = synthetic_templates(seed)
        .iter()
        .map(|t| Template::from_image(&rgb_to_hsv(t, cfg.hsv_mode), cfg.n_bins))
        .collect::<crate::Result<Vec<_>>>()?;
    let templates = TemplateSet::new(templates)?;
    let references = reference_images(seed, REFERENCE_COUNT, &templates, cfg)?
        .iter()
        .map(|img| reference_signature(img).map_err(|reason| crate::Error::Reference { path: "<synthetic>".into(), reason }))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok((templates, references))
}

/// How many reference pictures the synthetic setup uses.
pub const REFERENCE_COUNT: usize = 4;

/// Reference contour pictures: sample moths spread over the default size
/// range at assorted angles, each on a plain crop background, segmented by
/// the detector's own stages with `templates` and drawn black on white. The
/// outlines therefore carry the corner rounding that the sliding window
/// imposes on every detection.
pub fn reference_images(seed: u64, count: usize, templates: &TemplateSet, cfg: &PipelineConfig) -> crate::Result<Vec<RgbImage>> {
    let defaults = SceneParams::new(64, 64, 0, 0);
    (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.5 };
            let size = defaults.min_size + t * (defaults.max_size - defaults.min_size);
            reference_image(seed, i as u64, size, templates, cfg)
        })
        .collect()
}

fn reference_image(seed: u64, index: u64, size: f64, templates: &TemplateSet, cfg: &PipelineConfig) -> crate::Result<RgbImage> {
    let side = (size * 1.6) as usize;
    let mut rng = rng_for(seed, u64::MAX - 16 - index);
    let mut img = background(side, side, &mut rng);
    let centre = (side as f64 / 2.0 + 0.37, side as f64 / 2.0 + 0.21);
    let angle = rng.gen_range(0.0..360.0);
    let poly: Vec<Vertex> = transform(&wing_shape(), (0.0, 0.0), angle, size).iter().map(|&(x, y)| (x + centre.0, y + centre.1)).collect();
    draw_moth(&mut img, &poly, size, centre, &mut rng);
    let (maps, _) = segment_image(&img, templates, cfg)?;
    // Keep only the component under the moth's centroid.
    let moth = Contour::from_points(vec![Point::new(centre.0 as i32, centre.1 as i32)], ContourKind::Outer);
    let mut out = RgbImage::new(side, side, [255, 255, 255]);
    for (x, y) in crate::moments::region_pixels(&maps.binary, &moth)? {
        out.put(x, y, [0, 0, 0]);
    }
    Ok(out)
}
