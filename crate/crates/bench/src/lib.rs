//! Shared inputs for the benchmarks.

use pestvision_core::backproject::{Template, TemplateSet};
use pestvision_core::color::{rgb_to_hsv, HsvImage};
use pestvision_core::eval::scene::{generate_scene, synthetic_setup, SceneParams};
use pestvision_core::moments::HuSignature;
use pestvision_core::pipeline::PipelineConfig;
use pestvision_core::raster::RgbImage;

pub const SEED: u64 = 2024;

pub struct Fixture {
    pub config: PipelineConfig,
    pub templates: TemplateSet,
    pub references: Vec<HuSignature>,
    pub frame: RgbImage,
    pub hsv: HsvImage,
}

impl Fixture {
    /// A `width` x `height` scene with two insects and some clutter.
    pub fn scene(width: usize, height: usize) -> Fixture {
        let config = PipelineConfig::default();
        let (templates, references) = synthetic_setup(SEED, &config).expect("synthetic setup");
        let (frame, _) = generate_scene(SEED, 0, &SceneParams::new(width, height, 2, 3), "bench.png");
        let hsv = rgb_to_hsv(&frame, config.hsv_mode);
        Fixture { config, templates, references, frame, hsv }
    }

    pub fn first_template(&self) -> &Template {
        self.templates.iter().next().expect("at least one template")
    }
}
