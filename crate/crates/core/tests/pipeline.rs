use objprop::evaluator::{preset, render_scan};
use objprop::pipeline::QueryClock;
use objprop::{Pipeline, PipelineConfig};

#[test]
fn clock_fires_once_per_period_and_skips_missed_slots() {
    let mut c = QueryClock::new(2.0);
    let fired: Vec<f64> = (0..31).map(|k| k as f64 * 0.1).filter(|t| c.due(*t)).collect();
    assert_eq!(fired.len(), 6);
    assert!((fired[0] - 0.5).abs() < 1e-9);
    let mut c = QueryClock::new(2.0);
    assert!(!c.due(10.0));
    assert!(c.due(13.2));
    assert!(!c.due(13.4));
    assert!(c.due(13.5));
}

#[test]
fn pipeline_queries_at_configured_rate_in_data_time() {
    let scene = preset("cave").unwrap();
    let mut p = Pipeline::new(PipelineConfig::default());
    let mut times = Vec::new();
    let mut last_admitted = None;
    for pose in scene.poses().into_iter().take(31) {
        let out = p.offer_scan(render_scan(&scene, &pose, 0)).unwrap();
        if out.admitted {
            last_admitted = Some(pose.timestamp);
        }
        if let Some(q) = out.query {
            assert_eq!(q.query_index as usize, times.len());
            assert_eq!(Some(q.timestamp), last_admitted);
            assert!(q.timings.total() > 0.0);
            assert!(q.segmentation.clusters.len() <= q.segmentation.raw_cluster_count);
            times.push(pose.timestamp);
        }
    }
    assert_eq!(times.len(), 6);
    assert_eq!(p.queries_run(), 6);
    for w in times.windows(2) {
        assert!((w[1] - w[0] - 0.5).abs() < 1e-9);
    }
}
