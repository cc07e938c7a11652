//! Closed-loop runs of the pipeline over rendered scenes.

use std::path::Path;

use super::render::Renderer;
use super::scene::SyntheticScene;
use super::score::{auto_verdict, precision, ArmReport, Verdict};
use crate::accumulator::Accumulator;
use crate::config::{PipelineConfig, StageFlags};
use crate::pipeline::{
    build_images, propose_clusters, segment_without_ground, Pipeline, PipelineError, QueryClock, QueryOutput, StageTimings,
};
use crate::proposer::{Proposal, Proposer};
use crate::scan_io::{write_pcd, write_trajectory, PcdEncoding};
use crate::segmenter::remove_ground;

#[derive(Debug, Clone, Default)]
pub struct SimulationRun {
    pub proposals: Vec<Proposal>,
    pub scans: usize,
    pub admitted: usize,
    pub queries: usize,
    /// Summed over queries.
    pub timings: StageTimings,
    /// Slowest single query, seconds.
    pub max_query_s: f64,
}

/// Renders every trajectory pose, feeds the pipeline, and collects all
/// proposals. `on_query` sees each query's full output.
pub fn simulate_with(
    scene: &SyntheticScene,
    config: &PipelineConfig,
    seed: u64,
    mut on_query: impl FnMut(&QueryOutput),
) -> Result<SimulationRun, PipelineError> {
    let renderer = Renderer::new(scene);
    let mut pipeline = Pipeline::new(config.clone());
    let mut run = SimulationRun::default();
    for pose in scene.poses() {
        let (scan, _) = renderer.render_labeled(&pose, seed);
        let out = pipeline.offer_scan(scan)?;
        run.scans += 1;
        run.admitted += out.admitted as usize;
        if let Some(q) = out.query {
            run.queries += 1;
            run.timings.add(&q.timings);
            run.max_query_s = run.max_query_s.max(q.timings.total());
            on_query(&q);
            run.proposals.extend(q.proposals);
        }
    }
    Ok(run)
}

pub fn simulate(scene: &SyntheticScene, config: &PipelineConfig, seed: u64) -> Result<SimulationRun, PipelineError> {
    simulate_with(scene, config, seed, |_| {})
}

/// Replays the scene once per seed for up to `horizon` queries, running
/// every arm on the same accumulated clouds. Each arm keeps its own
/// observation map.
pub fn run_ablation(
    scene: &SyntheticScene,
    config: &PipelineConfig,
    arms: &[(String, StageFlags)],
    seeds: &[u64],
    horizon: usize,
) -> Result<Vec<ArmReport>, PipelineError> {
    let mut reports: Vec<ArmReport> = arms
        .iter()
        .map(|(name, flags)| ArmReport {
            arm: name.clone(),
            flags: *flags,
            seeds: seeds.to_vec(),
            queries: 0,
            false_positives: Vec::new(),
            proposals: Vec::new(),
            mean_false_positives: 0.0,
            mean_precision: None,
        })
        .collect();
    let mut precisions: Vec<Vec<f64>> = vec![Vec::new(); arms.len()];
    let renderer = Renderer::new(scene);
    let poses = scene.poses();
    let any_ground = arms.iter().any(|(_, f)| f.ground_removal);
    for &seed in seeds {
        let mut acc = Accumulator::new(config.accumulator);
        let mut clock = QueryClock::new(config.accumulator.query_rate_hz);
        let mut proposers: Vec<Proposer> = arms.iter().map(|_| Proposer::new(config.proposer.clone())).collect();
        let mut verdicts: Vec<Vec<Verdict>> = vec![Vec::new(); arms.len()];
        let mut queries = 0;
        for pose in &poses {
            if queries == horizon {
                break;
            }
            let (scan, _) = renderer.render_labeled(pose, seed);
            acc.offer_scan(scan)?;
            if !clock.due(pose.timestamp) {
                continue;
            }
            let cloud = acc.query_accumulated()?;
            let mut timings = StageTimings::default();
            let images = build_images(&cloud.points, &config.projector, &mut timings);
            let ground = any_ground.then(|| remove_ground(&images, config.segmenter.ground_angle_deg));
            for (a, (_, flags)) in arms.iter().enumerate() {
                let seg = match (&ground, flags.ground_removal) {
                    (Some(g), true) => {
                        segment_without_ground(g.image.clone(), g.ground.clone(), g.removed, config, *flags, &mut timings)
                    }
                    _ => {
                        let n = images.geometry.len();
                        segment_without_ground(images.clone(), vec![false; n], 0, config, *flags, &mut timings)
                    }
                };
                let props = propose_clusters(
                    &mut proposers[a],
                    &seg.clusters,
                    &cloud.reference_pose,
                    queries as u64,
                    flags.cluster_merging,
                );
                verdicts[a].extend(props.iter().map(|p| auto_verdict(&p.centroid_world, scene).0));
            }
            queries += 1;
        }
        for (a, v) in verdicts.iter().enumerate() {
            let r = &mut reports[a];
            r.queries = r.queries.max(queries);
            r.false_positives.push(v.iter().filter(|v| !v.is_true()).count());
            r.proposals.push(v.len());
            if let Some(p) = precision(v) {
                precisions[a].push(p);
            }
        }
    }
    for (r, p) in reports.iter_mut().zip(&precisions) {
        let n = r.false_positives.len().max(1) as f64;
        r.mean_false_positives = r.false_positives.iter().sum::<usize>() as f64 / n;
        r.mean_precision = (!p.is_empty()).then(|| p.iter().sum::<f64>() / p.len() as f64);
    }
    Ok(reports)
}

/// Resolves arm names to flags.
pub fn arms_from_names<S: AsRef<str>>(names: &[S]) -> Result<Vec<(String, StageFlags)>, String> {
    names
        .iter()
        .map(|n| {
            let n = n.as_ref();
            StageFlags::for_arm(n)
                .map(|f| (n.to_string(), f))
                .ok_or_else(|| format!("unknown ablation arm '{n}' (known: {})", StageFlags::ARMS.join(", ")))
        })
        .collect()
}

/// Writes the rendered scene as a dataset directory: one
/// `<timestamp_ns>.pcd` per pose plus `trajectory.txt`. Returns the number
/// of scans written.
pub fn export_dataset(
    scene: &SyntheticScene,
    seed: u64,
    dir: &Path,
    encoding: PcdEncoding,
) -> std::io::Result<usize> {
    std::fs::create_dir_all(dir)?;
    let renderer = Renderer::new(scene);
    let poses = scene.poses();
    for pose in &poses {
        let (scan, _) = renderer.render_labeled(pose, seed);
        let ns = (pose.timestamp * 1e9).round() as u64;
        std::fs::write(dir.join(format!("{ns}.pcd")), write_pcd(&scan.points, encoding))?;
    }
    std::fs::write(dir.join("trajectory.txt"), write_trajectory(&poses))?;
    Ok(poses.len())
}
