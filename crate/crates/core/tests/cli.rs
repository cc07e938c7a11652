use std::path::Path;
use std::process::{Command, Output};

use objprop::evaluator::{export_dataset, preset};
use objprop::scan_io::PcdEncoding;

fn objprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_objprop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_inputs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&objprop(&["run", s(&empty), "--output", s(&out)])), 2);
    assert_eq!(code(&objprop(&["run", s(&tmp.path().join("nope")), "--output", s(&out)])), 2);

    // Scans present but no trajectory.
    std::fs::write(empty.join("1000000000.pcd"), b"").unwrap();
    assert_eq!(code(&objprop(&["run", s(&empty), "--output", s(&out)])), 2);

    let cfg = tmp.path().join("absent.cfg");
    assert_eq!(code(&objprop(&["synth", "planar", "--config", s(&cfg), "--output", s(&out)])), 2);
    assert_eq!(code(&objprop(&["synth", s(&tmp.path().join("absent.json")), "--output", s(&out)])), 2);
}

#[test]
fn invalid_inputs_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "segmenter.no_such_key = 1\n").unwrap();
    assert_eq!(code(&objprop(&["synth", "planar", "--config", s(&cfg), "--output", s(&out)])), 3);
    std::fs::write(&cfg, "segmenter.volume_min_m3 = 5.0\n").unwrap();
    assert_eq!(code(&objprop(&["synth", "planar", "--config", s(&cfg), "--output", s(&out)])), 3);

    let scene = tmp.path().join("bad.json");
    std::fs::write(&scene, "{\"tunnel\": 1}").unwrap();
    assert_eq!(code(&objprop(&["synth", s(&scene), "--output", s(&out)])), 3);

    let mut overlapping = preset("planar").unwrap();
    overlapping.objects[1].position_m = overlapping.objects[0].position_m;
    std::fs::write(&scene, overlapping.to_json()).unwrap();
    assert_eq!(code(&objprop(&["synth", s(&scene), "--output", s(&out)])), 3);

    assert_eq!(code(&objprop(&["synth", "planar", "--ablation", "bogus", "--output", s(&out)])), 3);
    assert_eq!(code(&objprop(&["synth", "no-such-preset", "--output", s(&out)])), 2);
}

#[test]
fn run_writes_outputs_and_reflects_ablation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    let n = export_dataset(&preset("planar").unwrap(), 0, &data, PcdEncoding::Ascii).unwrap();
    assert_eq!(n, 20);
    let o = objprop(&["run", s(&data), "--output", s(&out), "--ablation", "no-intensity-check", "--debug-images"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["ablation"], "no-intensity-check");
    let stages = &summary["stages"];
    assert_eq!(stages["intensity_check"], false);
    assert_eq!(stages["cluster_filters"], true);
    assert_eq!(stages["ground_removal"], true);
    let counts = &summary["counts"];
    assert_eq!(counts["scans"], 20);
    assert_eq!(counts["queries"], 3);
    assert!(counts["points"].as_u64().unwrap() > 0);
    assert!(summary["config"].as_str().unwrap().contains("stages.intensity_check = false"));

    let jsonl = std::fs::read_to_string(out.join("proposals.jsonl")).unwrap();
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["centroid_world"].is_array() && v["zoom"].is_u64());
    }

    let debug = out.join("debug");
    for suffix in ["_range.png", "_intensity.png", "_labels.png", ".imgdump"] {
        assert!(debug.join(format!("00000{suffix}")).is_file(), "missing {suffix}");
    }

    let viz = tmp.path().join("viz");
    let o = objprop(&["viz", s(&debug.join("00001.imgdump")), "--output", s(&viz)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let png = std::fs::read(viz.join("00001_labels.png")).unwrap();
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    assert_eq!(png, std::fs::read(debug.join("00001_labels.png")).unwrap());
}

#[test]
fn synth_reports_precision_and_eval_rescores() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = objprop(&["synth", "planar", "--output", s(&out), "--arms", "full,depth-only", "--horizon", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("precision"));
    let report = read_json(&out.join("report.json"));
    assert!(report.get("precision").is_some());
    let arms = report["ablation"].as_array().unwrap();
    assert_eq!(arms.len(), 2);
    assert_eq!(arms[0]["arm"], "full");
    assert_eq!(arms[1]["arm"], "depth-only");
    assert_eq!(arms[1]["queries"], 3);

    let again = tmp.path().join("again");
    let o = objprop(&["eval", "planar", s(&out.join("proposals.jsonl")), "--output", s(&again)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rescored = read_json(&again.join("report.json"));
    assert_eq!(rescored["counts"], report["counts"]);
    assert_eq!(rescored["objects"], report["objects"]);

    let bad = tmp.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": 1}\n").unwrap();
    assert_eq!(code(&objprop(&["eval", "planar", s(&bad), "--output", s(&again)])), 3);
}

#[test]
fn stage_flags_compose_into_arms() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let run = |extra: &[&str]| {
        let mut args = vec!["synth", "planar", "--output", s(&out)];
        args.extend_from_slice(extra);
        assert_eq!(code(&objprop(&args)), 0);
        read_json(&out.join("summary.json"))
    };
    let summary = run(&["--no-intensity-check", "--no-cluster-filters"]);
    assert_eq!(summary["ablation"], "depth-only");
    assert_eq!(summary["stages"]["intensity_check"], false);
    assert_eq!(summary["stages"]["cluster_filters"], false);
    let summary = run(&["--no-ground-removal"]);
    assert_eq!(summary["ablation"], "no-ground-removal");
    let summary = run(&["--ablation", "no-ground-removal", "--no-intensity-check"]);
    assert_eq!(summary["ablation"], "custom");
    assert_eq!(summary["stages"]["ground_removal"], false);
    assert_eq!(run(&[])["ablation"], "full");
}

#[test]
fn synth_scene_file_matches_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("planar.json");
    std::fs::write(&scene, preset("planar").unwrap().to_json()).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&objprop(&["synth", s(&scene), "--output", s(&a)])), 0);
    assert_eq!(code(&objprop(&["synth", "planar", "--output", s(&b)])), 0);
    assert_eq!(
        std::fs::read(a.join("proposals.jsonl")).unwrap(),
        std::fs::read(b.join("proposals.jsonl")).unwrap()
    );
}
