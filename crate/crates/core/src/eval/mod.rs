//! Ground truth, detection-to-truth matching and the recognition and
//! false-alarm rates.

pub mod scene;

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_iou, point_in_polygon, Vertex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRegion {
    pub id: u32,
    /// Convex polygon, at least three vertices, pixel coordinates.
    pub polygon: Vec<[f64; 2]>,
}

impl TruthRegion {
    pub fn vertices(&self) -> Vec<Vertex> {
        self.polygon.iter().map(|&[x, y]| (x, y)).collect()
    }
}

/// Annotation document for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub regions: Vec<TruthRegion>,
}

/// What the matcher needs to know about one detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mark {
    pub triangle: [Vertex; 3],
    pub similarity: f64,
}

impl Mark {
    pub fn centroid(&self) -> Vertex {
        let [a, b, c] = self.triangle;
        ((a.0 + b.0 + c.0) / 3.0, (a.1 + b.1 + c.1) / 3.0)
    }
}

impl From<&crate::pipeline::Detection> for Mark {
    fn from(d: &crate::pipeline::Detection) -> Self {
        let v = d.triangle.vertices.map(|p| (f64::from(p.x), f64::from(p.y)));
        Self { triangle: v, similarity: d.similarity }
    }
}

impl From<&crate::pipeline::DetectionRecord> for Mark {
    fn from(r: &crate::pipeline::DetectionRecord) -> Self {
        Self { triangle: r.vertices.map(|[x, y]| (f64::from(x), f64::from(y))), similarity: r.similarity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MatchCriterion {
    /// The triangle centroid lies inside the truth polygon.
    Centroid,
    /// Triangle and polygon overlap with at least this IoU.
    Iou { min_iou: f64 },
}

impl Default for MatchCriterion {
    fn default() -> Self {
        Self::Centroid
    }
}

/// `(mark index, region id)` pairs; every other mark is unmatched.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    pub pairs: Vec<(usize, u32)>,
}

/// Greedy one-to-one matching, strongest similarity first. Equal
/// similarities keep input order, and each mark takes the first free
/// region (by position in `truth`) that qualifies, or under IoU the free
/// region with the largest overlap.
pub fn match_detections(truth: &GroundTruth, marks: &[Mark], criterion: MatchCriterion) -> Assignment {
    let mut order: Vec<usize> = (0..marks.len()).collect();
    order.sort_by(|&a, &b| marks[b].similarity.total_cmp(&marks[a].similarity));
    let polygons: Vec<Vec<Vertex>> = truth.regions.iter().map(TruthRegion::vertices).collect();
    let mut taken = vec![false; truth.regions.len()];
    let mut pairs = Vec::new();
    for i in order {
        let mark = &marks[i];
        let choice = match criterion {
            MatchCriterion::Centroid => {
                let c = mark.centroid();
                (0..polygons.len()).find(|&r| !taken[r] && point_in_polygon(c, &polygons[r]))
            }
            MatchCriterion::Iou { min_iou } => (0..polygons.len())
                .filter(|&r| !taken[r])
                .map(|r| (r, convex_iou(&mark.triangle, &polygons[r])))
                .filter(|&(_, iou)| iou >= min_iou)
                .fold(None, |best: Option<(usize, f64)>, cur| match best {
                    Some(b) if b.1 >= cur.1 => Some(b),
                    _ => Some(cur),
                })
                .map(|(r, _)| r),
        };
        if let Some(r) = choice {
            taken[r] = true;
            pairs.push((i, truth.regions[r].id));
        }
    }
    pairs.sort_unstable();
    Assignment { pairs }
}

/// `matched / n`, or `None` for an image without insects.
pub fn recognition_rate(matched: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| matched as f64 / n as f64)
}

/// `(x - matched) / x`, 0 when nothing was marked.
pub fn false_alarm_rate(matched: usize, x: usize) -> f64 {
    if x == 0 {
        0.0
    } else {
        (x - matched) as f64 / x as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageCounts {
    pub frame: String,
    pub n: usize,
    pub x: usize,
    pub matched: usize,
    pub elapsed_ms: Option<f64>,
}

/// Pooled metrics. `beta` is 0 when no image holds any insect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub beta: f64,
    pub delta: f64,
    pub n: usize,
    pub x: usize,
    pub matched: usize,
    pub mean_elapsed_ms: Option<f64>,
    pub per_image: Vec<ImageCounts>,
}

/// One image's inputs to [`evaluate`].
#[derive(Debug, Clone)]
pub struct ImageEval<'a> {
    pub frame: String,
    pub truth: &'a GroundTruth,
    pub marks: Vec<Mark>,
    pub elapsed_ms: Option<f64>,
}

pub fn image_counts(item: &ImageEval<'_>, criterion: MatchCriterion) -> ImageCounts {
    let a = match_detections(item.truth, &item.marks, criterion);
    ImageCounts {
        frame: item.frame.clone(),
        n: item.truth.regions.len(),
        x: item.marks.len(),
        matched: a.pairs.len(),
        elapsed_ms: item.elapsed_ms,
    }
}

pub fn evaluate(items: &[ImageEval<'_>], criterion: MatchCriterion) -> MetricsReport {
    report_from_counts(items.iter().map(|i| image_counts(i, criterion)).collect())
}

pub fn report_from_counts(per_image: Vec<ImageCounts>) -> MetricsReport {
    let n = per_image.iter().map(|c| c.n).sum();
    let x = per_image.iter().map(|c| c.x).sum();
    let matched = per_image.iter().map(|c| c.matched).sum();
    let times: Vec<f64> = per_image.iter().filter_map(|c| c.elapsed_ms).collect();
    let mean_elapsed_ms = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
    MetricsReport {
        beta: recognition_rate(matched, n).unwrap_or(0.0),
        delta: false_alarm_rate(matched, x),
        n,
        x,
        matched,
        mean_elapsed_ms,
        per_image,
    }
}

/// Plain-text summary: accuracy %, false alarm %, mean seconds per frame.
pub fn format_table(report: &MetricsReport) -> String {
    let secs = report.mean_elapsed_ms.map_or_else(|| "-".to_string(), |ms| format!("{:.3}", ms / 1e3));
    format!(
        "{:<14}{:>16}{:>16}{:>18}\n{:<14}{:>16.1}{:>16.1}{:>18}\n",
        "method",
        "accuracy (%)",
        "false alarm (%)",
        "mean time (s)",
        "proposed",
        report.beta * 100.0,
        report.delta * 100.0,
        secs
    )
}
