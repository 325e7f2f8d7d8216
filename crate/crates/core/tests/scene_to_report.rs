use pestvision_core::annotate::{annotate, EDGE_COLOUR};
use pestvision_core::config::Settings;
use pestvision_core::eval::scene::{generate_scene, synthetic_setup, SceneParams};
use pestvision_core::eval::{evaluate, GroundTruth, ImageEval, Mark, MatchCriterion};
use pestvision_core::pipeline::{DetectionRecord, Detector};

#[test]
fn generated_scenes_round_trip_through_records() {
    let settings = Settings::parse("stride = 2\n").unwrap();
    let (templates, references) = synthetic_setup(3, &settings.pipeline).unwrap();
    let detector = Detector::new(templates, references, settings.pipeline.clone()).unwrap();

    let mut truths: Vec<GroundTruth> = Vec::new();
    let mut records: Vec<DetectionRecord> = Vec::new();
    for i in 0..4 {
        let (img, truth) = generate_scene(3, i, &SceneParams::new(480, 360, 1, 2), &format!("f{i}.png"));
        let out = detector.detect(&img).unwrap();
        let annotated = annotate(&img, &out.detections);
        assert_eq!(annotated.pixels().any(|p| p == EDGE_COLOUR), !out.detections.is_empty());
        for d in &out.detections {
            let line = serde_json::to_string(&DetectionRecord::new(&format!("f{i}"), d, out.timings.total_ms)).unwrap();
            records.push(serde_json::from_str(&line).unwrap());
        }
        let json = serde_json::to_string(&truth).unwrap();
        truths.push(serde_json::from_str(&json).unwrap());
    }

    let items: Vec<ImageEval> = truths
        .iter()
        .enumerate()
        .map(|(i, truth)| ImageEval {
            frame: format!("f{i}"),
            truth,
            marks: records.iter().filter(|r| r.frame == format!("f{i}")).map(Mark::from).collect(),
            elapsed_ms: None,
        })
        .collect();
    let by_centroid = evaluate(&items, MatchCriterion::Centroid);
    assert_eq!(by_centroid.n, 4);
    assert_eq!((by_centroid.beta, by_centroid.delta), (1.0, 0.0), "{by_centroid:?}");
    // The fitted triangles also overlap their truth well.
    let by_iou = evaluate(&items, MatchCriterion::Iou { min_iou: 0.7 });
    assert_eq!(by_iou.matched, 4);
}
