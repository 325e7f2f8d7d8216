//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a trailing comment. Unknown keys and repeated keys are errors.
//! Values start from the built-in defaults, then the file, then any
//! explicit overrides (see [`Settings::set`]).

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

/// Every recognised key with a one-line description.
pub const KEYS: [(&str, &str); 15] = [
    ("n_bins", "hue histogram bins, 1..=256"),
    ("hsv_mode", "paper | standard"),
    ("stride", "back-projection scan stride, >= 1"),
    ("erosion_iterations", "3x3 erosions applied to the fused map"),
    ("normalize_fusion", "true | false: rescale the fused map to 0..255"),
    ("otsu_lower", "argmax | midpoint: lower end of the constrained search"),
    ("threshold_floor", "binarization threshold never goes below this level"),
    ("min_area_frac", "minimum contour area as a fraction of the frame"),
    ("min_perimeter", "minimum contour perimeter, pixels"),
    ("epsilon_frac", "simplification tolerance as a fraction of the perimeter"),
    ("match_threshold", "similarity a contour must exceed to be reported"),
    ("slow_band_low", "similarity where the slow band starts"),
    ("stop_threshold", "similarity above which the arms stop"),
    ("alarm_consecutive", "stopped frames in a row that raise the alarm"),
    ("base_speed", "full arm speed, m/s"),
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub controller: ControllerConfig,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| Error::Config { key: key.into(), reason: format!("cannot parse {value:?}: {e}") })
}

impl Settings {
    /// Sets one key from its text form. Does not validate the result.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (p, c) = (&mut self.pipeline, &mut self.controller);
        match key {
            "n_bins" => p.n_bins = parse_value(key, value)?,
            "hsv_mode" => p.hsv_mode = parse_value(key, value)?,
            "stride" => p.stride = parse_value(key, value)?,
            "erosion_iterations" => p.erosion_iterations = parse_value(key, value)?,
            "normalize_fusion" => p.normalize_fusion = parse_value(key, value)?,
            "otsu_lower" => p.otsu_lower = parse_value(key, value)?,
            "threshold_floor" => p.threshold_floor = parse_value(key, value)?,
            "min_area_frac" => p.min_area_frac = parse_value(key, value)?,
            "min_perimeter" => p.min_perimeter = parse_value(key, value)?,
            "epsilon_frac" => p.epsilon_frac = parse_value(key, value)?,
            "match_threshold" => p.match_threshold = parse_value(key, value)?,
            "slow_band_low" => c.slow_band_low = parse_value(key, value)?,
            "stop_threshold" => c.stop_threshold = parse_value(key, value)?,
            "alarm_consecutive" => c.alarm_consecutive = parse_value(key, value)?,
            "base_speed" => c.base_speed = parse_value(key, value)?,
            _ => return Err(Error::Config { key: key.into(), reason: "unknown key".into() }),
        }
        Ok(())
    }

    /// Defaults overridden by the entries in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config { key: format!("line {}", n + 1), reason: "expected key = value".into() });
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config { key: key.into(), reason: format!("repeated on line {}", n + 1) });
            }
            out.set(key, value.trim())?;
        }
        out.validate()?;
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { key: path.display().to_string(), reason: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        self.controller.validate()
    }

    /// Text that [`Settings::parse`] reads back to `self`.
    pub fn to_text(&self) -> String {
        let (p, c) = (&self.pipeline, &self.controller);
        let hsv = serde_json::to_value(p.hsv_mode).expect("enum serializes");
        let lower = serde_json::to_value(p.otsu_lower).expect("enum serializes");
        let values = [
            p.n_bins.to_string(),
            hsv.as_str().unwrap_or_default().to_string(),
            p.stride.to_string(),
            p.erosion_iterations.to_string(),
            p.normalize_fusion.to_string(),
            lower.as_str().unwrap_or_default().to_string(),
            p.threshold_floor.to_string(),
            p.min_area_frac.to_string(),
            p.min_perimeter.to_string(),
            p.epsilon_frac.to_string(),
            p.match_threshold.to_string(),
            c.slow_band_low.to_string(),
            c.stop_threshold.to_string(),
            c.alarm_consecutive.to_string(),
            c.base_speed.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|((key, doc), value)| format!("# {doc}\n{key} = {value}\n"))
            .collect()
    }
}
