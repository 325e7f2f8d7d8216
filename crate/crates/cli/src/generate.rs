//! `generate`: seeded synthetic scenes plus the templates and reference
//! contours that go with them.

use std::path::PathBuf;

use anyhow::Context;
use pestvision_core::backproject::{Template, TemplateSet};
use pestvision_core::color::rgb_to_hsv;
use pestvision_core::eval::scene::{generate_scene, reference_images, synthetic_templates, SceneParams, REFERENCE_COUNT};
use pestvision_core::pipeline::PipelineConfig;
use pestvision_core::raster::{encode_png, RgbImage};

use crate::exit::{self, fail, Outcome, WithCode};
use crate::GenerateArgs;

pub const TEMPLATE_DIR: &str = "templates";
pub const REFERENCE_DIR: &str = "references";

pub fn run(args: &GenerateArgs) -> Outcome {
    if args.count == 0 {
        log::info!("count is 0, nothing to write");
        return Ok(exit::OK);
    }
    if args.max_insects == 0 {
        return Err(fail(exit::USAGE, "--max-insects must be at least 1"));
    }
    let (width, height) = args.size;
    let cfg = PipelineConfig::default();

    let mut outputs: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let raw_templates = synthetic_templates(args.seed);
    for (i, t) in raw_templates.iter().enumerate() {
        outputs.push((args.out.join(TEMPLATE_DIR).join(format!("template_{i}.png")), encode_png(t).code(exit::SOFTWARE)?));
    }
    let set = TemplateSet::new(
        raw_templates
            .iter()
            .map(|t| Template::from_image(&rgb_to_hsv(t, cfg.hsv_mode), cfg.n_bins))
            .collect::<Result<_, _>>()
            .code(exit::SOFTWARE)?,
    )
    .code(exit::SOFTWARE)?;
    let references: Vec<RgbImage> = reference_images(args.seed, REFERENCE_COUNT, &set, &cfg).code(exit::SOFTWARE)?;
    for (i, r) in references.iter().enumerate() {
        outputs.push((args.out.join(REFERENCE_DIR).join(format!("reference_{i}.png")), encode_png(r).code(exit::SOFTWARE)?));
    }
    for i in 0..args.count {
        let name = format!("scene_{i:03}");
        let params = SceneParams::new(width, height, 1 + i % args.max_insects, args.clutter);
        let (img, truth) = generate_scene(args.seed, i as u64, &params, &format!("{name}.png"));
        outputs.push((args.out.join(format!("{name}.png")), encode_png(&img).code(exit::SOFTWARE)?));
        let json = serde_json::to_vec_pretty(&truth).code(exit::SOFTWARE)?;
        outputs.push((args.out.join(format!("{name}.json")), json));
    }

    if !args.force {
        let existing: Vec<&PathBuf> = outputs.iter().map(|(p, _)| p).filter(|p| p.exists()).collect();
        if let Some(first) = existing.first() {
            return Err(fail(
                exit::CANT_CREATE,
                format!("{} output files already exist (first: {}); pass --force to overwrite", existing.len(), first.display()),
            ));
        }
    }
    for (path, bytes) in &outputs {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory {}", parent.display()))
                .code(exit::CANT_CREATE)?;
        }
        std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())).code(exit::CANT_CREATE)?;
    }
    log::info!("wrote {} scenes to {}", args.count, args.out.display());
    Ok(exit::OK)
}
