use objprop::evaluator::{
    arms_from_names, auto_verdict, detection_ranges, evaluate, intersect, precision, preset, render_scan,
    render_scan_labeled, run_ablation, simulate, BeamModel, HitKind, IntensityProfile, LinearTraverse, PoseSpec,
    Primitive, Renderer, SceneError, SceneObject, ScoredProposal, Shape, SyntheticScene, TrajectorySpec, Tunnel,
    Verdict,
};
use objprop::geometry::{Pose, Vec3};
use objprop::scan_io::ProposalRecord;
use objprop::PipelineConfig;

fn empty_tunnel() -> SyntheticScene {
    SyntheticScene {
        name: "empty".into(),
        tunnel: Tunnel {
            radius_m: 3.0,
            length_m: 30.0,
            axis_z_m: 1.0,
            floor_z_m: 0.0,
            wall_roughness_m: 0.0,
            wall_intensity: IntensityProfile::constant(15.0),
            floor_intensity: IntensityProfile::constant(12.0),
        },
        objects: Vec::new(),
        protrusions: Vec::new(),
        beam: BeamModel {
            range_noise_m: 0.0,
            intensity_noise: 0.0,
            ..BeamModel::default()
        },
        trajectory: TrajectorySpec::Poses(vec![PoseSpec {
            t: 0.0,
            xyz: [5.0, 0.5, 0.6],
            rpy_deg: [0.0, 0.0, 0.0],
        }]),
    }
}

fn object(name: &str, shape: Shape, xy: [f64; 2], artifact: bool) -> SceneObject {
    SceneObject {
        name: name.into(),
        shape,
        position_m: [xy[0], xy[1], 0.0],
        yaw_deg: 0.0,
        intensity: IntensityProfile::constant(120.0),
        is_artifact: artifact,
    }
}

/// Far root of the ray against `y² + (z − 1)² = 9`, or the floor `z = 0`.
fn analytic_range(o: &Vec3, d: &Vec3) -> f64 {
    let oz = o.z - 1.0;
    let a = d.y * d.y + d.z * d.z;
    let b = o.y * d.y + oz * d.z;
    let c = o.y * o.y + oz * oz - 9.0;
    let wall = (-b + (b * b - a * c).sqrt()) / a;
    let floor = if d.z < 0.0 { -o.z / d.z } else { f64::INFINITY };
    wall.min(floor)
}

#[test]
fn noise_free_ranges_match_closed_form() {
    let scene = empty_tunnel();
    let r = Renderer::new(&scene);
    let o = Vec3::new(5.0, 0.5, 0.6);
    for k in 0..200 {
        let az = k as f64 * 0.0314;
        let el = -0.4 + 0.004 * k as f64;
        let d = Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
        let want = analytic_range(&o, &d);
        if want.is_finite() && (o + d * want).x.clamp(0.0, 30.0) == (o + d * want).x {
            let hit = r.cast(&o, &d).expect("ray inside tunnel hits a surface");
            assert!((hit.range - want).abs() < 1e-9, "dir {d:?}: {} vs {want}", hit.range);
        }
    }
    let pose = scene.poses()[0];
    let (scan, kinds) = render_scan_labeled(&scene, &pose, 0);
    assert!(!scan.points.is_empty());
    for (p, k) in scan.points.iter().zip(&kinds) {
        assert!(matches!(k, HitKind::Wall | HitKind::Floor));
        let local = p.position();
        let range = local.norm();
        let want = analytic_range(&o, &(local / range));
        // Points are stored as f32.
        assert!((range - want).abs() < 1e-4, "{range} vs {want}");
        assert_eq!(p.intensity, if *k == HitKind::Wall { 15.0 } else { 12.0 });
    }
}

#[test]
fn ray_along_open_axis_returns_nothing() {
    let scene = empty_tunnel();
    let r = Renderer::new(&scene);
    for origin in [Vec3::new(5.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 1.0)] {
        assert!(r.cast(&origin, &Vec3::x()).is_none());
        assert!(r.cast(&origin, &-Vec3::x()).is_none());
    }
}

#[test]
fn rendering_is_deterministic_per_seed() {
    let scene = preset("cave").unwrap();
    let pose = scene.poses()[7];
    let a = render_scan(&scene, &pose, 3);
    let b = render_scan(&scene, &pose, 3);
    let c = render_scan(&scene, &pose, 4);
    assert_eq!(a.points, b.points);
    assert_ne!(a.points, c.points);
}

#[test]
fn primitive_intersections() {
    let cube = Primitive::Box {
        center: Vec3::new(5.0, 0.0, 0.0),
        half: Vec3::repeat(0.5),
        yaw: 0.0,
    };
    let o = Vec3::zeros();
    assert!((intersect(&cube, &o, &Vec3::x()).unwrap() - 4.5).abs() < 1e-12);
    assert!(intersect(&cube, &o, &Vec3::y()).is_none());
    let turned = Primitive::Box {
        center: Vec3::new(5.0, 0.0, 0.0),
        half: Vec3::repeat(0.5),
        yaw: std::f64::consts::FRAC_PI_4,
    };
    let corner = 5.0 - 0.5 * std::f64::consts::SQRT_2;
    assert!((intersect(&turned, &o, &Vec3::x()).unwrap() - corner).abs() < 1e-12);
    let can = Primitive::Cylinder {
        base: Vec3::new(4.0, 0.0, -1.0),
        radius: 0.5,
        height: 2.0,
    };
    assert!((intersect(&can, &o, &Vec3::x()).unwrap() - 3.5).abs() < 1e-12);
    let above = Vec3::new(4.0, 0.0, 5.0);
    assert!((intersect(&can, &above, &-Vec3::z()).unwrap() - 4.0).abs() < 1e-12);
    assert!(intersect(&can, &Vec3::new(0.0, 0.0, 2.0), &Vec3::x()).is_none());
}

#[test]
fn verdicts_by_distance_to_object_boxes() {
    let mut scene = empty_tunnel();
    scene.objects = vec![
        object("pack", Shape::Box { size_m: [0.4, 0.4, 0.6] }, [10.0, 1.0], true),
        object("crate", Shape::Box { size_m: [1.0, 0.8, 0.9] }, [14.0, -1.0], false),
    ];
    assert_eq!(auto_verdict(&Vec3::new(10.0, 1.0, 0.3), &scene), (Verdict::Artifact, Some(0)));
    assert_eq!(auto_verdict(&Vec3::new(10.0, 1.6, 0.3), &scene), (Verdict::Artifact, Some(0)));
    assert_eq!(auto_verdict(&Vec3::new(14.0, -1.0, 0.45), &scene), (Verdict::NonArtifact, Some(1)));
    assert_eq!(auto_verdict(&Vec3::new(12.0, 0.0, 0.3), &scene), (Verdict::FalsePositive, None));
    // Nearest box wins when two are within the radius.
    scene.objects[1].position_m = [10.9, 1.0, 0.0];
    assert_eq!(auto_verdict(&Vec3::new(10.45, 1.0, 0.3), &scene).1, Some(1));
}

#[test]
fn precision_is_true_over_total() {
    use Verdict::*;
    assert_eq!(precision(&[]), None);
    assert_eq!(precision(&[Artifact, NonArtifact, FalsePositive, FalsePositive]), Some(0.5));
    assert_eq!(precision(&[FalsePositive]), Some(0.0));
    assert_eq!(precision(&[NonArtifact]), Some(1.0));
}

fn scored(query: u64, object: Option<usize>, range: f64) -> ScoredProposal {
    ScoredProposal {
        id: query,
        query_index: query,
        t: query as f64,
        verdict: if object.is_some() { Verdict::Artifact } else { Verdict::FalsePositive },
        object,
        range_m: range,
    }
}

#[test]
fn detection_range_is_first_matching_proposal() {
    let mut scene = empty_tunnel();
    scene.objects = vec![
        object("a", Shape::Box { size_m: [0.4, 0.4, 0.6] }, [10.0, 1.0], true),
        object("b", Shape::Box { size_m: [0.4, 0.4, 0.6] }, [20.0, 1.0], true),
        object("c", Shape::Box { size_m: [0.4, 0.4, 0.6] }, [25.0, 1.0], true),
    ];
    // Interleaved proposals for a and b; c never proposed.
    let log = [
        scored(1, Some(0), 9.0),
        scored(2, Some(1), 15.0),
        scored(3, None, 4.0),
        scored(4, Some(0), 5.0),
        scored(5, Some(1), 8.0),
    ];
    let d = detection_ranges(&log, &scene);
    assert_eq!(d[0].first_range_m, Some(9.0));
    assert_eq!(d[0].first_query, Some(1));
    assert_eq!(d[0].proposals, 2);
    assert_eq!(d[1].first_range_m, Some(15.0));
    assert_eq!(d[1].first_query, Some(2));
    assert!(d[2].missed());
}

#[test]
fn evaluate_scores_a_record_log() {
    let mut scene = empty_tunnel();
    scene.objects = vec![object("pack", Shape::Box { size_m: [0.4, 0.4, 0.6] }, [10.0, 1.0], true)];
    let rec = |id: u64, c: [f64; 3]| ProposalRecord {
        id,
        query_index: id,
        t: id as f64 * 0.5,
        centroid_world: c,
        centroid_sensor: [0.0; 3],
        pan_deg: 0.0,
        tilt_deg: 0.0,
        zoom: 1,
        range_m: 6.0 - id as f64,
        points: 100,
        volume_m3: 0.1,
        mean_intensity: 100.0,
    };
    let report = evaluate(&[rec(0, [10.0, 1.0, 0.3]), rec(1, [3.0, 0.0, 0.3])], &scene, Some(9));
    assert_eq!(report.precision, Some(0.5));
    assert_eq!((report.counts.artifact, report.counts.false_positive), (1, 1));
    assert_eq!(report.artifacts_found(), (1, 1));
    assert_eq!(report.objects[0].first_range_m, Some(6.0));
    assert!(report.table().contains("precision: 0.500"));
}

#[test]
fn scene_json_round_trip() {
    for name in ["cave", "urban", "clutter", "planar", "golden"] {
        let s = preset(name).unwrap();
        let back = SyntheticScene::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s, "{name}");
    }
}

#[test]
fn invalid_scenes_are_rejected() {
    let parse = |s: &SyntheticScene| SyntheticScene::from_json(&s.to_json());

    let mut huge = empty_tunnel();
    huge.objects = vec![object("big", Shape::Box { size_m: [1.5, 1.0, 1.0] }, [10.0, 0.0], true)];
    assert!(matches!(parse(&huge), Err(SceneError::Invalid(m)) if m.contains("volume")));
    // The same box is fine as clutter.
    huge.objects[0].is_artifact = false;
    assert!(parse(&huge).is_ok());

    let mut overlap = empty_tunnel();
    overlap.objects = vec![
        object("a", Shape::Box { size_m: [0.4, 0.4, 0.6] }, [10.0, 0.0], true),
        object("b", Shape::Cylinder { radius_m: 0.3, height_m: 0.5 }, [10.3, 0.0], false),
    ];
    assert!(matches!(parse(&overlap), Err(SceneError::Invalid(m)) if m.contains("overlap")));

    let mut backwards = empty_tunnel();
    backwards.trajectory = TrajectorySpec::Poses(vec![
        PoseSpec { t: 1.0, xyz: [2.0, 0.0, 0.6], rpy_deg: [0.0; 3] },
        PoseSpec { t: 0.5, xyz: [3.0, 0.0, 0.6], rpy_deg: [0.0; 3] },
    ]);
    assert!(matches!(parse(&backwards), Err(SceneError::Invalid(_))));

    let mut dark = empty_tunnel();
    dark.tunnel.wall_intensity = IntensityProfile::constant(300.0);
    assert!(matches!(parse(&dark), Err(SceneError::Invalid(_))));

    assert!(matches!(SyntheticScene::from_json("{\"tunnel\": 3}"), Err(SceneError::Parse(_))));
}

#[test]
fn single_arm_ablation_on_clean_scene_has_no_false_positives() {
    let mut scene = empty_tunnel();
    scene.objects = vec![SceneObject {
        yaw_deg: 30.0,
        ..object("pack", Shape::Box { size_m: [0.4, 0.5, 0.6] }, [9.0, 1.2], true)
    }];
    scene.trajectory = TrajectorySpec::Linear(LinearTraverse {
        start_m: [2.0, 0.0, 0.6],
        end_m: [5.0, 0.0, 0.6],
        scans: 30,
        scan_rate_hz: 10.0,
        start_time_s: 0.0,
        pitch_amplitude_deg: 4.0,
        roll_amplitude_deg: 0.0,
        sway_period_s: 1.3,
    });
    let arms = arms_from_names(&["full"]).unwrap();
    let reports = run_ablation(&scene, &PipelineConfig::default(), &arms, &[0], 100).unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r.arm, "full");
    assert_eq!(r.false_positives, vec![0]);
    assert!(r.proposals[0] >= 1, "the backpack should be proposed");
    assert_eq!(r.queries, 5);

    let run = simulate(&scene, &PipelineConfig::default(), 0).unwrap();
    assert_eq!(run.queries, 5);
    assert_eq!(run.proposals.len(), r.proposals[0]);

    assert!(arms_from_names(&["full", "bogus"]).is_err());
}

#[test]
fn seeds_change_noise_not_outcome() {
    let scene = preset("cave").unwrap();
    let cfg = PipelineConfig::default();
    let mut found = Vec::new();
    let mut precisions = Vec::new();
    for seed in 0..3 {
        let run = simulate(&scene, &cfg, seed).unwrap();
        let recs: Vec<ProposalRecord> = run.proposals.iter().map(ProposalRecord::from).collect();
        let report = evaluate(&recs, &scene, Some(seed));
        found.push(report.artifacts_found());
        precisions.push(report.precision.unwrap());
    }
    assert!(found.windows(2).all(|w| w[0] == w[1]), "{found:?}");
    let (lo, hi) = precisions.iter().fold((1.0f64, 0.0f64), |(l, h), p| (l.min(*p), h.max(*p)));
    assert!(hi - lo <= 0.2, "{precisions:?}");
}

#[test]
fn poses_follow_linear_traverse() {
    let scene = preset("cave").unwrap();
    let poses = scene.poses();
    assert_eq!(poses.len(), 200);
    assert!((poses[1].timestamp - poses[0].timestamp - 0.1).abs() < 1e-12);
    assert!((poses[0].translation.x - 1.0).abs() < 1e-12);
    assert!((poses[199].translation.x - 26.0).abs() < 1e-12);
    let p = Pose::identity(0.0);
    assert_eq!(p.translation, Vec3::zeros());
}
