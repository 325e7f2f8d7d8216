use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pestvision_core::config::Settings;
use serde_json::{json, Value};
use tempfile::TempDir;

fn pestvision(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pestvision")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, seed: u64, count: usize, extra: &[&str]) -> Output {
    let (seed, count) = (seed.to_string(), count.to_string());
    let mut args = vec!["generate", "--seed", &seed, "--count", &count, "--out", s(dir)];
    args.extend_from_slice(extra);
    pestvision(&args)
}

fn files_under(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn references(gen: &Path) -> Vec<String> {
    let mut refs: Vec<PathBuf> =
        std::fs::read_dir(gen.join("references")).unwrap().map(|e| e.unwrap().path()).collect();
    refs.sort();
    refs.iter().flat_map(|p| ["--reference".to_string(), p.display().to_string()]).collect()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("detector.conf");
    std::fs::write(&path, text).unwrap();
    path
}

fn detect(config: &Path, gen: &Path, input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<String> = ["detect", "--config", s(config), "--templates", s(&gen.join("templates"))]
        .iter()
        .map(|a| a.to_string())
        .collect();
    args.extend(references(gen));
    args.extend(["--input", s(input), "--out", s(out)].iter().map(|a| a.to_string()));
    args.extend(extra.iter().map(|a| a.to_string()));
    Command::new(env!("CARGO_BIN_EXE_pestvision")).args(&args).output().expect("binary runs")
}

fn jsonl(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

// ---------------------------------------------------------------- generate

#[test]
fn generate_is_deterministic_and_refuses_to_overwrite() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&generate(&a, 7, 3, &[])), 0);
    assert_eq!(code(&generate(&b, 7, 3, &[])), 0);
    let files = files_under(&a);
    assert_eq!(files, files_under(&b));
    let scenes = files.iter().filter(|(p, _)| p.parent() == Some(Path::new(""))).count();
    assert_eq!(scenes, 6, "three image/annotation pairs");

    let again = generate(&a, 7, 3, &[]);
    assert_eq!(code(&again), 73);
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    assert_eq!(code(&generate(&a, 8, 3, &["--force"])), 0);
    assert_ne!(files_under(&a), files);
}

#[test]
fn generate_zero_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("none");
    assert_eq!(code(&generate(&out, 7, 0, &[])), 0);
    assert!(!out.exists());
}

#[test]
fn generate_rejects_bad_size() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&generate(tmp.path(), 7, 1, &["--size", "10x10"])), 64);
    assert_eq!(code(&generate(tmp.path(), 7, 1, &["--size", "wide"])), 64);
}

// ---------------------------------------------------------------- detect

#[test]
fn detect_writes_records_annotations_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&generate(&gen, 7, 1, &["--max-insects", "1"])), 0);
    let config = write_config(tmp.path(), &Settings::default().to_text());
    let out = tmp.path().join("out");
    let run = detect(&config, &gen, &gen, &out, &["--annotate"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    let records = jsonl(&out.join("detections.jsonl"));
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["frame"], "scene_000");
    assert!(records[0]["similarity"].as_f64().unwrap() > 0.7);
    assert!(out.join("annotated/scene_000.png").is_file());

    let m = manifest(&out);
    let frames = m["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 1);
    assert!(frames[0]["result"]["elapsed_ms"].as_f64().unwrap() > 0.0);
    assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn detect_on_empty_input_succeeds() {
    let tmp = TempDir::new().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&generate(&gen, 7, 1, &[])), 0);
    let config = write_config(tmp.path(), "");
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = tmp.path().join("out");
    let run = detect(&config, &gen, &empty, &out, &[]);
    assert_eq!(code(&run), 0);
    assert!(String::from_utf8_lossy(&run.stderr).contains("no images"));
    assert!(run.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(out.join("detections.jsonl")).unwrap(), "");
    assert!(manifest(&out)["frames"].as_array().unwrap().is_empty());
}

#[test]
fn detect_continues_past_a_corrupt_frame() {
    let tmp = TempDir::new().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&generate(&gen, 7, 9, &["--size", "480x360", "--max-insects", "1"])), 0);
    std::fs::write(gen.join("scene_004b.png"), b"not a png").unwrap();
    let config = write_config(tmp.path(), "stride = 2\n");
    let out = tmp.path().join("out");
    assert_eq!(code(&detect(&config, &gen, &gen, &out, &[])), 2);

    let m = manifest(&out);
    let frames = m["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 10);
    let failed: Vec<&Value> = frames.iter().filter(|f| f["result"].is_null()).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["frame"], "scene_004b");
    assert!(failed[0]["error"].is_string());
    // Records follow input order.
    let order: Vec<String> = jsonl(&out.join("detections.jsonl")).iter().map(|r| r["frame"].as_str().unwrap().to_string()).collect();
    let mut sorted = order.clone();
    sorted.sort();
    assert_eq!(order, sorted);
    assert_eq!(order.len(), 9);
}

#[test]
fn detect_usage_and_input_errors() {
    let tmp = TempDir::new().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&generate(&gen, 7, 1, &[])), 0);
    let out = tmp.path().join("out");
    assert_eq!(code(&detect(&tmp.path().join("missing.conf"), &gen, &gen, &out, &[])), 64);

    let config = write_config(tmp.path(), "");
    assert_eq!(code(&detect(&config, &gen, &gen, &out, &["--set", "no_such_key=1"])), 64);
    assert_eq!(code(&detect(&config, &gen, &gen, &out, &["--set", "stride"])), 64);
    let bad = write_config(tmp.path(), "stride = many\n");
    assert_eq!(code(&detect(&bad, &gen, &gen, &out, &[])), 64);

    let config = write_config(tmp.path(), "");
    let no_templates = tmp.path().join("no_templates");
    std::fs::create_dir(&no_templates).unwrap();
    std::fs::create_dir(no_templates.join("templates")).unwrap();
    std::fs::create_dir(no_templates.join("references")).unwrap();
    std::fs::copy(gen.join("references/reference_0.png"), no_templates.join("references/reference_0.png")).unwrap();
    assert_eq!(code(&detect(&config, &no_templates, &gen, &out, &[])), 66);
    std::fs::remove_dir(no_templates.join("templates")).unwrap();
    assert_eq!(code(&detect(&config, &no_templates, &gen, &out, &[])), 66);
}

#[test]
fn config_precedence_per_key() {
    let tmp = TempDir::new().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&generate(&gen, 7, 1, &[])), 0);
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let config = write_config(tmp.path(), "stride = 3\nmatch_threshold = 0.8\nerosion_iterations = 1\n");
    let out = tmp.path().join("out");
    let run = detect(&config, &gen, &empty, &out, &["--stride", "2", "--set", "match_threshold=0.75", "--set", "stride=4"]);
    assert_eq!(code(&run), 0);

    let settings: Settings = serde_json::from_value(manifest(&out)["settings"].clone()).unwrap();
    let default = Settings::default();
    // Flag over --set over file.
    assert_eq!(settings.pipeline.stride, 2);
    // --set over file.
    assert_eq!(settings.pipeline.match_threshold, 0.75);
    // File over default.
    assert_eq!(settings.pipeline.erosion_iterations, 1);
    assert_ne!(default.pipeline.erosion_iterations, 1);
    // Untouched keys keep their defaults.
    assert_eq!(settings.pipeline.n_bins, default.pipeline.n_bins);
    assert_eq!(settings.controller, default.controller);
}

#[test]
fn a_run_is_reproducible_from_its_manifest() {
    let tmp = TempDir::new().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&generate(&gen, 11, 2, &[])), 0);
    let config = write_config(tmp.path(), "erosion_iterations = 2\n");
    let first = tmp.path().join("first");
    assert_eq!(code(&detect(&config, &gen, &gen, &first, &["--stride", "2"])), 0);

    // Rebuild the invocation from the manifest only.
    let m = manifest(&first);
    let replay_dir = tmp.path().join("replay");
    std::fs::create_dir(&replay_dir).unwrap();
    let replay_config = replay_dir.join("replay.conf");
    std::fs::write(&replay_config, m["config_text"].as_str().unwrap()).unwrap();
    let templates = Path::new(m["templates"][0].as_str().unwrap()).parent().unwrap().to_path_buf();
    let input = Path::new(m["inputs"][0].as_str().unwrap()).parent().unwrap().to_path_buf();
    let mut args: Vec<String> = vec!["detect".into(), "--config".into(), s(&replay_config).into()];
    args.extend(["--templates".into(), s(&templates).into()]);
    for r in m["references"].as_array().unwrap() {
        args.extend(["--reference".into(), r.as_str().unwrap().into()]);
    }
    let second = tmp.path().join("second");
    args.extend(["--input".into(), s(&input).into(), "--out".into(), s(&second).into()]);
    let status = Command::new(env!("CARGO_BIN_EXE_pestvision")).args(&args).status().unwrap();
    assert_eq!(status.code(), Some(0));

    let strip = |mut v: Vec<Value>| {
        v.iter_mut().for_each(|r| r.as_object_mut().unwrap().remove("elapsed_ms").map(drop).unwrap_or(()));
        v
    };
    let (a, b) = (strip(jsonl(&first.join("detections.jsonl"))), strip(jsonl(&second.join("detections.jsonl"))));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(manifest(&second)["settings"], m["settings"]);
}

// ---------------------------------------------------------------- eval

fn truth_doc(image: &str, squares: &[(f64, f64)]) -> Value {
    let regions: Vec<Value> = squares
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| json!({"id": i, "polygon": [[x, y], [x + 40.0, y], [x + 40.0, y + 40.0], [x, y + 40.0]]}))
        .collect();
    json!({"image": format!("{image}.png"), "width": 200, "height": 200, "regions": regions})
}

/// A small triangle whose centroid is `(cx, cy)`.
fn record(frame: &str, cx: i32, cy: i32, similarity: f64) -> String {
    json!({
        "frame": frame,
        "vertices": [[cx - 3, cy - 3], [cx + 3, cy - 3], [cx, cy + 6]],
        "similarity": similarity,
        "area": 27.0,
        "template_id": 0,
        "elapsed_ms": 5.0,
    })
    .to_string()
}

fn eval_fixture(dir: &Path, truths: &[(&str, Value)], records: &[String]) -> (PathBuf, PathBuf) {
    let truth_dir = dir.join("truth");
    std::fs::create_dir_all(&truth_dir).unwrap();
    for (stem, doc) in truths {
        std::fs::write(truth_dir.join(format!("{stem}.json")), doc.to_string()).unwrap();
    }
    let detections = dir.join("detections.jsonl");
    std::fs::write(&detections, records.join("\n")).unwrap();
    (detections, truth_dir)
}

fn eval_json(detections: &Path, truth: &Path) -> (i32, Value) {
    let out = pestvision(&["eval", "--detections", s(detections), "--truth", s(truth), "--json"]);
    let value = if out.stdout.is_empty() { Value::Null } else { serde_json::from_slice(&out.stdout).unwrap() };
    (code(&out), value)
}

#[test]
fn eval_counts_a_hand_built_fixture() {
    let tmp = TempDir::new().unwrap();
    // Four insects over two frames; five marks, three of them on insects.
    let truths = [("a", truth_doc("a", &[(0.0, 0.0), (100.0, 0.0)])), ("b", truth_doc("b", &[(0.0, 100.0), (100.0, 100.0)]))];
    let records = [
        record("a", 20, 20, 0.9),
        record("a", 120, 20, 0.8),
        record("a", 70, 170, 0.8),
        record("b", 20, 120, 0.85),
        record("b", 180, 30, 0.75),
    ];
    let (detections, truth) = eval_fixture(tmp.path(), &truths, &records);
    let (status, report) = eval_json(&detections, &truth);
    assert_eq!(status, 0);
    assert_eq!(report["beta"].as_f64().unwrap(), 0.75);
    assert!((report["delta"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!((report["n"].as_u64(), report["x"].as_u64(), report["matched"].as_u64()), (Some(4), Some(5), Some(3)));

    let report_path = tmp.path().join("report.json");
    let table = pestvision(&["eval", "--detections", s(&detections), "--truth", s(&truth), "--report", s(&report_path)]);
    assert_eq!(code(&table), 0);
    assert!(String::from_utf8_lossy(&table.stdout).contains("75.0"));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(written, report);
}

#[test]
fn eval_perfect_and_empty_sets() {
    let tmp = TempDir::new().unwrap();
    let truths = [("a", truth_doc("a", &[(0.0, 0.0), (100.0, 0.0)]))];
    let (detections, truth) = eval_fixture(tmp.path(), &truths, &[record("a", 20, 20, 0.9), record("a", 120, 20, 0.9)]);
    let (status, report) = eval_json(&detections, &truth);
    assert_eq!(status, 0);
    assert_eq!((report["beta"].as_f64(), report["delta"].as_f64()), (Some(1.0), Some(0.0)));

    std::fs::write(&detections, "").unwrap();
    let (status, report) = eval_json(&detections, &truth);
    assert_eq!(status, 0);
    assert_eq!(report["beta"].as_f64(), Some(0.0));
}

#[test]
fn eval_rejects_unannotated_frames() {
    let tmp = TempDir::new().unwrap();
    let truths = [("a", truth_doc("a", &[(0.0, 0.0)]))];
    let (detections, truth) = eval_fixture(tmp.path(), &truths, &[record("a", 20, 20, 0.9), record("zz", 20, 20, 0.9)]);
    let out = pestvision(&["eval", "--detections", s(&detections), "--truth", s(&truth)]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
    assert_eq!(code(&pestvision(&["eval", "--detections", "/nonexistent.jsonl", "--truth", s(&truth)])), 66);
    assert_eq!(code(&pestvision(&["eval", "--detections", s(&detections), "--truth", s(&truth), "--iou", "2"])), 64);
}

// ---------------------------------------------------------------- simulate

fn transcript(stream: &str) -> (i32, Vec<csv::StringRecord>) {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("stream.csv");
    std::fs::write(&path, stream).unwrap();
    let out = pestvision(&["simulate", "--stream", s(&path)]);
    let rows = csv::Reader::from_reader(out.stdout.as_slice()).records().map(|r| r.unwrap()).collect();
    (code(&out), rows)
}

#[test]
fn simulate_alarm_after_five_high_frames() {
    let (status, rows) = transcript("0.95\n0.95\n0.95\n0.95\n0.95\n");
    assert_eq!(status, 3);
    let alarms: Vec<&str> = rows.iter().filter(|r| &r[7] == "true").map(|r| &r[0]).collect();
    assert_eq!(alarms, ["5"]);
}

#[test]
fn simulate_speed_rules() {
    let (status, rows) = transcript(&"0\n".repeat(6));
    assert_eq!(status, 0);
    for r in &rows {
        for v in 3..7 {
            assert_eq!(r[v].parse::<f64>().unwrap(), 0.56);
        }
    }
    let (status, rows) = transcript("similarity\n0.8\n0.8\n0.8\n");
    assert_eq!(status, 0);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(&r[2], "slow");
        assert!((r[3].parse::<f64>().unwrap() - 0.112).abs() < 1e-12);
    }
}

#[test]
fn simulate_rejects_bad_streams() {
    assert_eq!(transcript("0.5\nhigh\n").0, 65);
    assert_eq!(transcript("1.5\n").0, 65);
    assert_eq!(code(&pestvision(&["simulate", "--stream", "/nonexistent.csv"])), 66);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(code(&pestvision(&["frobnicate"])), 64);
    assert_eq!(code(&pestvision(&["--help"])), 0);
}
