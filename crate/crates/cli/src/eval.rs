//! `eval`: pooled recognition and false-alarm rates against annotations.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use anyhow::Context;
use pestvision_core::eval::{evaluate, format_table, GroundTruth, ImageEval, Mark, MatchCriterion};
use pestvision_core::pipeline::DetectionRecord;

use crate::exit::{self, fail, Outcome, WithCode};
use crate::files;
use crate::EvalArgs;

pub fn read_records(path: &Path) -> anyhow::Result<Vec<DetectionRecord>> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), n + 1))?);
    }
    Ok(out)
}

/// Annotation documents keyed by file stem.
pub fn read_truth(dir: &Path) -> anyhow::Result<BTreeMap<String, GroundTruth>> {
    let is_json = |p: &Path| p.extension().is_some_and(|e| e == "json");
    let mut out = BTreeMap::new();
    for path in files::list(dir, is_json)? {
        let text = std::fs::read_to_string(&path)?;
        let truth: GroundTruth = serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
        out.insert(files::stem(&path), truth);
    }
    Ok(out)
}

pub fn run(args: &EvalArgs) -> Outcome {
    if !args.detections.is_file() {
        return Err(fail(exit::NO_INPUT, format!("detections file {} not found", args.detections.display())));
    }
    if !args.truth.is_dir() {
        return Err(fail(exit::NO_INPUT, format!("truth directory {} not found", args.truth.display())));
    }
    let criterion = match args.iou {
        Some(min_iou) if (0.0..=1.0).contains(&min_iou) => MatchCriterion::Iou { min_iou },
        Some(v) => return Err(fail(exit::USAGE, format!("--iou must be in [0, 1], got {v}"))),
        None => MatchCriterion::Centroid,
    };
    let records = read_records(&args.detections).code(exit::DATA)?;
    let truths = read_truth(&args.truth).code(exit::DATA)?;

    let unknown: BTreeSet<&str> =
        records.iter().map(|r| r.frame.as_str()).filter(|f| !truths.contains_key(*f)).collect();
    if !unknown.is_empty() {
        for frame in &unknown {
            eprintln!("no annotation for frame {frame}");
        }
        return Err(fail(exit::DATA, format!("{} detection frames have no annotation", unknown.len())));
    }

    let items: Vec<ImageEval> = truths
        .iter()
        .map(|(frame, truth)| {
            let mine: Vec<&DetectionRecord> = records.iter().filter(|r| &r.frame == frame).collect();
            ImageEval {
                frame: frame.clone(),
                truth,
                marks: mine.iter().map(|r| Mark::from(*r)).collect(),
                elapsed_ms: mine.first().map(|r| r.elapsed_ms),
            }
        })
        .collect();
    let report = evaluate(&items, criterion);
    let json = serde_json::to_string_pretty(&report).code(exit::SOFTWARE)?;
    if let Some(path) = &args.report {
        std::fs::write(path, &json).with_context(|| format!("cannot write {}", path.display())).code(exit::CANT_CREATE)?;
    }
    if args.json {
        println!("{json}");
    } else {
        print!("{}", format_table(&report));
    }
    Ok(exit::OK)
}
