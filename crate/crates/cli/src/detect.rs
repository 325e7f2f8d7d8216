//! `detect`: batch detection with JSON-lines output and a run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use pestvision_core::annotate::annotate;
use pestvision_core::config::Settings;
use pestvision_core::pipeline::{load_templates, DetectionRecord, Detector, FrameResult};
use pestvision_core::raster::{read_image, write_png};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exit::{self, fail, Outcome, WithCode};
use crate::files;
use crate::DetectArgs;

pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANNOTATED_DIR: &str = "annotated";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub settings: Settings,
    /// The settings in configuration-file form.
    pub config_text: String,
    pub templates: Vec<PathBuf>,
    pub references: Vec<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub annotate: bool,
    pub frames: Vec<FrameEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame: String,
    pub file: PathBuf,
    /// Absent when the file could not be read or processed.
    pub result: Option<FrameSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub detections: Vec<DetectionRecord>,
    pub frame_similarity: f64,
    pub elapsed_ms: f64,
}

/// Defaults, then the file, then `--set` pairs, then `--stride`.
pub fn resolve_settings(args: &DetectArgs) -> anyhow::Result<Settings> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read configuration {}", args.config.display()))?;
    let mut settings = Settings::parse(&text).with_context(|| format!("in {}", args.config.display()))?;
    for pair in &args.overrides {
        let (key, value) = pair.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {pair:?}"))?;
        settings.set(key.trim(), value.trim())?;
    }
    if let Some(stride) = args.stride {
        settings.set("stride", &stride.to_string())?;
    }
    settings.validate()?;
    Ok(settings)
}

fn process(detector: &Detector, path: &Path, annotated_dir: Option<&Path>) -> anyhow::Result<FrameSummary> {
    let image = read_image(path).with_context(|| format!("cannot read {}", path.display()))?;
    let FrameResult { detections, frame_similarity, timings, .. } = detector.detect(&image)?;
    if let Some(dir) = annotated_dir {
        let out = dir.join(format!("{}.png", files::stem(path)));
        write_png(&out, &annotate(&image, &detections)).with_context(|| format!("cannot write {}", out.display()))?;
    }
    let frame = files::stem(path);
    // Sub-microsecond frames would report zero; the manifest promises > 0.
    let elapsed_ms = timings.total_ms.max(f64::MIN_POSITIVE);
    Ok(FrameSummary {
        detections: detections.iter().map(|d| DetectionRecord::new(&frame, d, elapsed_ms)).collect(),
        frame_similarity,
        elapsed_ms,
    })
}

pub fn run(args: &DetectArgs) -> Outcome {
    let settings = resolve_settings(args).code(exit::USAGE)?;
    if !args.templates.is_dir() {
        return Err(fail(exit::NO_INPUT, format!("template directory {} not found", args.templates.display())));
    }
    let templates = files::list_images(&args.templates).code(exit::NO_INPUT)?;
    if templates.is_empty() {
        return Err(fail(exit::NO_INPUT, format!("no template images in {}", args.templates.display())));
    }
    if let Some(missing) = args.references.iter().find(|p| !p.is_file()) {
        return Err(fail(exit::NO_INPUT, format!("reference {} not found", missing.display())));
    }
    let cfg = &settings.pipeline;
    let (set, signatures) = load_templates(&templates, &args.references, cfg.n_bins, cfg.hsv_mode).code(exit::DATA)?;
    let detector = Detector::new(set, signatures, cfg.clone()).code(exit::DATA)?;

    let inputs = files::list_images(&args.input).code(exit::NO_INPUT)?;
    if inputs.is_empty() {
        log::warn!("no images in {}", args.input.display());
    }
    files::create_dir(&args.out).code(exit::CANT_CREATE)?;
    let annotated_dir = args.annotate.then(|| args.out.join(ANNOTATED_DIR));
    if let Some(dir) = &annotated_dir {
        files::create_dir(dir).code(exit::CANT_CREATE)?;
    }

    let detections_path = args.out.join(DETECTIONS_FILE);
    let mut sink = std::io::BufWriter::new(
        std::fs::File::create(&detections_path)
            .with_context(|| format!("cannot create {}", detections_path.display()))
            .code(exit::CANT_CREATE)?,
    );

    // Frames run in parallel; results are collected and written in input order.
    let results: Vec<anyhow::Result<FrameSummary>> =
        inputs.par_iter().map(|p| process(&detector, p, annotated_dir.as_deref())).collect();

    let mut frames = Vec::with_capacity(inputs.len());
    let mut failures = 0;
    for (path, result) in inputs.iter().zip(results) {
        let frame = files::stem(path);
        match result {
            Ok(summary) => {
                for record in &summary.detections {
                    serde_json::to_writer(&mut sink, record).code(exit::SOFTWARE)?;
                    sink.write_all(b"\n").code(exit::CANT_CREATE)?;
                }
                log::info!("{frame}: {} detections, {:.1} ms", summary.detections.len(), summary.elapsed_ms);
                frames.push(FrameEntry { frame, file: path.clone(), result: Some(summary), error: None });
            }
            Err(e) => {
                failures += 1;
                log::warn!("{e:#}");
                frames.push(FrameEntry { frame, file: path.clone(), result: None, error: Some(format!("{e:#}")) });
            }
        }
    }
    sink.flush().code(exit::CANT_CREATE)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_text: settings.to_text(),
        settings,
        templates,
        references: args.references.clone(),
        inputs,
        annotate: args.annotate,
        frames,
    };
    let manifest_path = args.out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).code(exit::SOFTWARE)?;
    std::fs::write(&manifest_path, json)
        .with_context(|| format!("cannot write {}", manifest_path.display()))
        .code(exit::CANT_CREATE)?;

    if failures > 0 {
        log::warn!("{failures} of {} inputs could not be processed", manifest.inputs.len());
        Ok(exit::PARTIAL)
    } else {
        Ok(exit::OK)
    }
}
