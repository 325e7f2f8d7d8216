//! `simulate`: controller transcript for a similarity stream.

use std::path::Path;

use anyhow::{bail, Context};
use pestvision_core::config::Settings;
use pestvision_core::controller::simulate;

use crate::detect::RunManifest;
use crate::exit::{self, fail, Outcome, WithCode};
use crate::SimulateArgs;

/// Similarities from a `detect` manifest (one per processed frame, in input
/// order) or from CSV: either a `similarity` column under a header row or a
/// single headerless column.
pub fn read_stream(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: RunManifest = serde_json::from_str(&text).context("not a detect manifest")?;
        return Ok(manifest.frames.iter().filter_map(|f| f.result.as_ref().map(|r| r.frame_similarity)).collect());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = reader.records();
    let mut out = Vec::new();
    let Some(first) = rows.next().transpose()? else { return Ok(out) };
    let column = match first.iter().position(|f| f == "similarity") {
        Some(i) => i,
        None if first.len() == 1 => {
            out.push(parse_similarity(&first[0], 1)?);
            0
        }
        None => bail!("expected a `similarity` header or a single column"),
    };
    for (n, row) in rows.enumerate() {
        let row = row?;
        let field = row.get(column).with_context(|| format!("row {} has no column {}", n + 2, column + 1))?;
        out.push(parse_similarity(field, n + 2)?);
    }
    Ok(out)
}

fn parse_similarity(field: &str, row: usize) -> anyhow::Result<f64> {
    let v: f64 = field.parse().with_context(|| format!("row {row}: {field:?} is not a number"))?;
    if !(0.0..=1.0).contains(&v) {
        bail!("row {row}: similarity {v} outside [0, 1]");
    }
    Ok(v)
}

pub fn run(args: &SimulateArgs) -> Outcome {
    if !args.stream.is_file() {
        return Err(fail(exit::NO_INPUT, format!("stream {} not found", args.stream.display())));
    }
    let settings = match &args.config {
        Some(path) => Settings::load(path).code(exit::USAGE)?,
        None => Settings::default(),
    };
    let stream = read_stream(&args.stream).code(exit::DATA)?;
    let rows = simulate(settings.controller, &stream).code(exit::DATA)?;

    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(path) => Box::new(
            std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display())).code(exit::CANT_CREATE)?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in &rows {
        writer.serialize(row).code(exit::CANT_CREATE)?;
    }
    writer.flush().code(exit::CANT_CREATE)?;

    let alarms: Vec<u64> = rows.iter().filter(|r| r.alarm).map(|r| r.frame).collect();
    if alarms.is_empty() {
        Ok(exit::OK)
    } else {
        log::warn!("alarm at frames {alarms:?}");
        Ok(exit::ALARM)
    }
}
