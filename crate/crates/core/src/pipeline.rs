//! End-to-end detection: HSV, back-projection, fusion and erosion,
//! constrained Otsu, contour filtering, Hu matching and triangle fitting.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backproject::{backproject_all, erode, fuse_templates, Template, TemplateSet};
use crate::color::{rgb_to_hsv, HsvMode};
use crate::contour::{approx_triangle, filter_contours, find_contours, refine_triangle, ContourKind, Triangle};
use crate::error::{Error, Result};
use crate::histogram::DEFAULT_BINS;
use crate::moments::{hu_signature, region_moments, shape_similarity, HuSignature};
use crate::raster::{read_image, GrayMap, RgbImage};
use crate::segment::{binarize, constrained_otsu_with, otsu, GrayHistogram, OtsuLower, ThresholdResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n_bins: usize,
    pub hsv_mode: HsvMode,
    pub stride: usize,
    pub erosion_iterations: usize,
    pub normalize_fusion: bool,
    pub otsu_lower: OtsuLower,
    /// Binarization never uses a threshold below this level.
    pub threshold_floor: u8,
    /// Minimum contour area as a fraction of the frame area.
    pub min_area_frac: f64,
    pub min_perimeter: f64,
    pub epsilon_frac: f64,
    pub match_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_bins: DEFAULT_BINS,
            hsv_mode: HsvMode::Paper,
            stride: 1,
            erosion_iterations: 3,
            normalize_fusion: true,
            otsu_lower: OtsuLower::Argmax,
            threshold_floor: 0,
            min_area_frac: 0.0005,
            min_perimeter: 0.0,
            epsilon_frac: 0.02,
            match_threshold: 0.7,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::Config { key: key.into(), reason: reason.into() });
        if self.n_bins == 0 || self.n_bins > 256 {
            return bad("n_bins", "must be in 1..=256");
        }
        if self.stride == 0 {
            return bad("stride", "must be at least 1");
        }
        if !(0.0..1.0).contains(&self.min_area_frac) {
            return bad("min_area_frac", "must be in [0, 1)");
        }
        if !(self.min_perimeter >= 0.0) {
            return bad("min_perimeter", "must be non-negative");
        }
        if !(self.epsilon_frac > 0.0 && self.epsilon_frac < 1.0) {
            return bad("epsilon_frac", "must be in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.match_threshold) {
            return bad("match_threshold", "must be in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub triangle: Triangle,
    pub similarity: f64,
    pub contour_area: f64,
    pub template_id: usize,
}

/// One JSON-lines output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    /// Input file stem.
    pub frame: String,
    pub vertices: [[i32; 2]; 3],
    pub similarity: f64,
    pub area: f64,
    pub template_id: usize,
    /// Whole-frame detection time.
    pub elapsed_ms: f64,
}

impl DetectionRecord {
    pub fn new(frame: &str, detection: &Detection, elapsed_ms: f64) -> Self {
        Self {
            frame: frame.to_string(),
            vertices: detection.triangle.vertices.map(|p| [p.x, p.y]),
            similarity: detection.similarity,
            area: detection.contour_area,
            template_id: detection.template_id,
            elapsed_ms,
        }
    }
}

/// Wall-clock milliseconds per stage. The stages are timed back to back, so
/// they add up to `total_ms`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub hsv_ms: f64,
    pub backproject_ms: f64,
    pub fuse_ms: f64,
    pub erode_ms: f64,
    pub threshold_ms: f64,
    pub contours_ms: f64,
    pub matching_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    pub fn stage_sum(&self) -> f64 {
        self.hsv_ms + self.backproject_ms + self.fuse_ms + self.erode_ms + self.threshold_ms + self.contours_ms + self.matching_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub detections: Vec<Detection>,
    /// Best detection similarity, 0 when nothing was detected.
    pub frame_similarity: f64,
    pub threshold: ThresholdResult,
    pub timings: StageTimings,
}

/// Intermediate images of one run, for inspection.
#[derive(Debug, Clone)]
pub struct StageMaps {
    pub fused: GrayMap,
    pub eroded: GrayMap,
    pub binary: GrayMap,
}

#[derive(Debug, Clone)]
pub struct Detector {
    templates: TemplateSet,
    references: Vec<HuSignature>,
    config: PipelineConfig,
}

impl Detector {
    pub fn new(templates: TemplateSet, references: Vec<HuSignature>, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        if references.is_empty() {
            return Err(Error::NoReferences);
        }
        if templates.n_bins() != config.n_bins {
            return Err(Error::BinMismatch { left: templates.n_bins(), right: config.n_bins });
        }
        Ok(Self { templates, references, config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn references(&self) -> &[HuSignature] {
        &self.references
    }

    pub fn detect(&self, image: &RgbImage) -> Result<FrameResult> {
        self.run(image).map(|(result, _)| result)
    }

    pub fn detect_with_maps(&self, image: &RgbImage) -> Result<(FrameResult, StageMaps)> {
        self.run(image)
    }

    fn run(&self, image: &RgbImage) -> Result<(FrameResult, StageMaps)> {
        let cfg = &self.config;
        let mut clock = Clock::start();

        let hsv = rgb_to_hsv(image, cfg.hsv_mode);
        let hsv_ms = clock.lap();
        let maps = backproject_all(&hsv, &self.templates, cfg.stride)?;
        let backproject_ms = clock.lap();
        let fused = fuse_templates(&maps, cfg.normalize_fusion)?;
        let fuse_ms = clock.lap();
        let eroded = erode(&fused, cfg.erosion_iterations);
        let erode_ms = clock.lap();

        let threshold = constrained_otsu_with(&GrayHistogram::from_map(&eroded), cfg.otsu_lower);
        let binary = binarize(&eroded, threshold.g_optimal.max(cfg.threshold_floor));
        let threshold_ms = clock.lap();

        let min_area = cfg.min_area_frac * (image.width() * image.height()) as f64;
        let contours = filter_contours(&find_contours(&binary)?, min_area, cfg.min_perimeter);
        let contours_ms = clock.lap();

        let mut detections = Vec::new();
        for contour in &contours {
            let sig = hu_signature(&region_moments(&binary, contour)?);
            let (template_id, similarity) = self
                .references
                .iter()
                .map(|r| shape_similarity(&sig, r))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, s)| if s > best.1 { (i, s) } else { best });
            if similarity <= cfg.match_threshold {
                continue;
            }
            if let Ok(triangle) = approx_triangle(contour, cfg.epsilon_frac) {
                let triangle = refine_triangle(contour, &triangle);
                detections.push(Detection { triangle, similarity, contour_area: contour.area, template_id });
            }
        }
        let matching_ms = clock.lap();

        let frame_similarity = detections.iter().map(|d| d.similarity).fold(0.0, f64::max);
        let timings = StageTimings {
            hsv_ms,
            backproject_ms,
            fuse_ms,
            erode_ms,
            threshold_ms,
            contours_ms,
            matching_ms,
            total_ms: clock.total(),
        };
        let result = FrameResult { detections, frame_similarity, threshold, timings };
        Ok((result, StageMaps { fused, eroded, binary }))
    }
}

/// Probability, eroded and binary maps for `image`, without contour work.
pub fn segment_image(image: &RgbImage, templates: &TemplateSet, cfg: &PipelineConfig) -> Result<(StageMaps, ThresholdResult)> {
    let hsv = rgb_to_hsv(image, cfg.hsv_mode);
    let fused = fuse_templates(&backproject_all(&hsv, templates, cfg.stride)?, cfg.normalize_fusion)?;
    let eroded = erode(&fused, cfg.erosion_iterations);
    let threshold = constrained_otsu_with(&GrayHistogram::from_map(&eroded), cfg.otsu_lower);
    let binary = binarize(&eroded, threshold.g_optimal.max(cfg.threshold_floor));
    Ok((StageMaps { fused, eroded, binary }, threshold))
}

struct Clock {
    origin: Instant,
    last: Instant,
}

impl Clock {
    fn start() -> Self {
        let now = Instant::now();
        Self { origin: now, last: now }
    }

    fn lap(&mut self) -> f64 {
        let now = Instant::now();
        let ms = (now - self.last).as_secs_f64() * 1e3;
        self.last = now;
        ms
    }

    fn total(&self) -> f64 {
        (self.last - self.origin).as_secs_f64() * 1e3
    }
}

/// Rec. 601 luma, integer.
fn luma([r, g, b]: [u8; 3]) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b)) / 1000) as u8
}

/// Shape signature of the single object in a reference image.
///
/// The image is split by Otsu on luma; the class that does not contain the
/// top-left pixel is foreground. Exactly one outer contour must remain.
pub fn reference_signature(image: &RgbImage) -> std::result::Result<HuSignature, String> {
    let gray = GrayMap::from_fn(image.width(), image.height(), |x, y| luma(image.get(x, y)));
    let hist = GrayHistogram::from_map(&gray);
    if hist.p_min() == hist.p_max() {
        return Err("image is a single flat level".into());
    }
    let t = otsu(&hist);
    let corner_high = gray.get(0, 0) > t;
    let binary = GrayMap::from_fn(gray.width(), gray.height(), |x, y| if (gray.get(x, y) > t) != corner_high { 255 } else { 0 });
    let contours = find_contours(&binary).map_err(|e| e.to_string())?;
    let outer: Vec<_> = contours.iter().filter(|c| c.kind == ContourKind::Outer).collect();
    match outer.as_slice() {
        [one] => region_moments(&binary, one).map(|m| hu_signature(&m)).map_err(|e| e.to_string()),
        [] => Err("no outer contour".into()),
        many => Err(format!("{} outer contours, expected exactly one", many.len())),
    }
}

/// Loads template histograms and reference shape signatures from disk.
pub fn load_templates(
    template_paths: &[PathBuf],
    reference_paths: &[PathBuf],
    n_bins: usize,
    mode: HsvMode,
) -> Result<(TemplateSet, Vec<HuSignature>)> {
    if template_paths.is_empty() {
        return Err(Error::NoTemplates);
    }
    let mut templates = Vec::with_capacity(template_paths.len());
    for path in template_paths {
        let load_err = |reason: String| Error::TemplateLoad { path: path.clone(), reason };
        let rgb = read_image(path).map_err(|e| load_err(e.to_string()))?;
        let template = Template::from_image(&rgb_to_hsv(&rgb, mode), n_bins).map_err(|e| load_err(e.to_string()))?;
        templates.push(template);
    }
    let mut references = Vec::with_capacity(reference_paths.len());
    for path in reference_paths {
        let ref_err = |reason: String| Error::Reference { path: path.clone(), reason };
        let image = read_image(path).map_err(|e| ref_err(e.to_string()))?;
        references.push(reference_signature(&image).map_err(ref_err)?);
    }
    if references.is_empty() {
        return Err(Error::NoReferences);
    }
    Ok((TemplateSet::new(templates)?, references))
}
