//! Command-line front end: `run`, `synth`, `eval` and `viz`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, PipelineConfig, StageFlags};
use crate::evaluator::{self, EvaluationReport, SceneError, SyntheticScene};
use crate::geometry::Pose;
use crate::pipeline::{Pipeline, QueryOutput, StageTimings};
use crate::projector::{read_image_dump, tone_map_range, write_image_dump, write_png_gray, write_png_labels, ImageSet};
use crate::proposer::Proposal;
use crate::scan_io::{
    align_scan_pose, list_scan_files, parse_pcd, parse_trajectory, read_proposals_jsonl, write_proposals_jsonl,
    LidarScan, PcdEncoding,
};

#[derive(Debug, Parser)]
#[command(name = "objprop", version, about = "LiDAR object proposals for a pan-tilt-zoom camera")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a dataset directory of `<timestamp_ns>.pcd` files and `trajectory.txt`.
    Run {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Render a synthetic scene (JSON file or preset name), run the pipeline and score it.
    Synth {
        scene: String,
        #[command(flatten)]
        common: Common,
        /// Run an ablation over these comma-separated arms instead of a single pass.
        #[arg(long, value_delimiter = ',')]
        arms: Vec<String>,
        /// Number of consecutive seeds the ablation averages over.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Queries per ablation replay.
        #[arg(long, default_value_t = 100)]
        horizon: usize,
        /// Write the rendered scans as a dataset directory instead of running.
        #[arg(long)]
        export_dataset: Option<PathBuf>,
    },
    /// Re-score an existing proposals.jsonl against a scene.
    Eval {
        scene: String,
        proposals: PathBuf,
        #[arg(long, default_value = "out")]
        output: PathBuf,
    },
    /// Write PNGs from a saved image dump.
    Viz {
        dump: PathBuf,
        #[arg(long, default_value = "out")]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub output: PathBuf,
    /// Write range, intensity and label PNGs plus an image dump per query.
    #[arg(long)]
    pub debug_images: bool,
    /// Named stage-flag preset, e.g. `no-intensity-check`.
    #[arg(long)]
    pub ablation: Option<String>,
    /// Disable the intensity terms of the clustering predicate.
    #[arg(long)]
    pub no_intensity_check: bool,
    /// Disable the volume, point-count and normal-spread filters.
    #[arg(long)]
    pub no_cluster_filters: bool,
    #[arg(long)]
    pub no_ground_removal: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn missing(m: impl Into<String>) -> Self {
        Self { code: 2, message: m.into() }
    }

    pub fn invalid(m: impl Into<String>) -> Self {
        Self { code: 3, message: m.into() }
    }

    pub fn other(m: impl Into<String>) -> Self {
        Self { code: 1, message: m.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::other(e.to_string())
    }
}

impl From<crate::projector::DumpError> for CliError {
    fn from(e: crate::projector::DumpError) -> Self {
        CliError::other(e.to_string())
    }
}

impl From<crate::pipeline::PipelineError> for CliError {
    fn from(e: crate::pipeline::PipelineError) -> Self {
        CliError::other(e.to_string())
    }
}

pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("objprop: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { input, common } => run_dataset(&input, &common),
        Command::Synth {
            scene,
            common,
            arms,
            seeds,
            horizon,
            export_dataset,
        } => {
            let scene = load_scene(&scene)?;
            if let Some(dir) = export_dataset {
                let n = evaluator::export_dataset(&scene, common.seed, &dir, PcdEncoding::Binary)?;
                println!("wrote {n} scans to {}", dir.display());
                return Ok(());
            }
            run_synthetic(&scene, &common, &arms, seeds, horizon)
        }
        Command::Eval {
            scene,
            proposals,
            output,
        } => {
            let scene = load_scene(&scene)?;
            let file = File::open(&proposals)
                .map_err(|e| CliError::missing(format!("{}: {e}", proposals.display())))?;
            let records = read_proposals_jsonl(BufReader::new(file))
                .map_err(|e| CliError::invalid(format!("{}: {e}", proposals.display())))?;
            let report = evaluator::evaluate(&records, &scene, None);
            write_report(&output, &report)
        }
        Command::Viz { dump, output } => {
            let file = File::open(&dump).map_err(|e| CliError::missing(format!("{}: {e}", dump.display())))?;
            let (img, labels) = read_image_dump(&mut BufReader::new(file))?;
            std::fs::create_dir_all(&output)?;
            let stem = dump.file_stem().and_then(|s| s.to_str()).unwrap_or("image");
            write_debug_pngs(&output, stem, &img, labels.as_deref())?;
            Ok(())
        }
    }
}

/// Loads the config file (if any) and applies flag overrides.
pub fn resolve_config(common: &Common) -> Result<(PipelineConfig, String), CliError> {
    let mut cfg = match &common.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| match e {
            ConfigError::Io { .. } => CliError::missing(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        })?,
        None => PipelineConfig::default(),
    };
    if let Some(name) = &common.ablation {
        cfg.stages = StageFlags::for_arm(name).ok_or_else(|| {
            CliError::invalid(format!("unknown ablation arm '{name}' (known: {})", StageFlags::ARMS.join(", ")))
        })?;
    }
    cfg.stages.intensity_check &= !common.no_intensity_check;
    cfg.stages.cluster_filters &= !common.no_cluster_filters;
    cfg.stages.ground_removal &= !common.no_ground_removal;
    let arm = StageFlags::ARMS
        .iter()
        .find(|a| StageFlags::for_arm(a) == Some(cfg.stages))
        .map_or("custom", |a| a)
        .to_string();
    if common.debug_images {
        cfg.output.debug_images = true;
    }
    cfg.validate().map_err(|e| CliError::invalid(e.to_string()))?;
    Ok((cfg, arm))
}

fn load_scene(arg: &str) -> Result<SyntheticScene, CliError> {
    if let Some(s) = evaluator::preset(arg) {
        return Ok(s);
    }
    SyntheticScene::load(Path::new(arg)).map_err(|e| match e {
        SceneError::Io(e) => CliError::missing(format!("{arg}: {e}")),
        other => CliError::invalid(format!("{arg}: {other}")),
    })
}

#[derive(Debug, Default, Serialize)]
struct RunSummary {
    scans: usize,
    admitted: usize,
    queries: usize,
    proposals: usize,
    points: usize,
    nan_dropped: usize,
    intensity_clamped: usize,
    extrapolated_poses: usize,
    skipped_scans: usize,
    timings_s: StageTimings,
    mean_query_s: f64,
    max_query_s: f64,
}

impl RunSummary {
    fn record(&mut self, q: &QueryOutput) {
        self.queries += 1;
        self.proposals += q.proposals.len();
        self.timings_s.add(&q.timings);
        self.max_query_s = self.max_query_s.max(q.timings.total());
    }

    fn finish(&mut self) {
        if self.queries > 0 {
            self.mean_query_s = self.timings_s.total() / self.queries as f64;
        }
    }
}

struct Outputs {
    dir: PathBuf,
    debug: bool,
    proposals: Vec<Proposal>,
}

impl Outputs {
    fn new(dir: &Path, debug: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        if debug {
            std::fs::create_dir_all(dir.join("debug"))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            debug,
            proposals: Vec::new(),
        })
    }

    fn on_query(&mut self, q: &QueryOutput) -> Result<(), CliError> {
        if self.debug {
            let dir = self.dir.join("debug");
            let stem = format!("{:05}", q.query_index);
            let seg = &q.segmentation;
            write_debug_pngs(&dir, &stem, &seg.image, Some(&seg.labels.labels))?;
            let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.imgdump")))?);
            write_image_dump(&mut w, &seg.image, Some(&seg.labels.labels))?;
            w.flush()?;
        }
        self.proposals.extend(q.proposals.iter().cloned());
        Ok(())
    }

    fn finish(&self, summary: serde_json::Value) -> Result<(), CliError> {
        let mut w = BufWriter::new(File::create(self.dir.join("proposals.jsonl"))?);
        write_proposals_jsonl(&mut w, &self.proposals)?;
        w.flush()?;
        write_json(&self.dir.join("summary.json"), &summary)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::other(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn summary_json(s: &RunSummary, cfg: &PipelineConfig, arm: &str) -> serde_json::Value {
    json!({
        "ablation": arm,
        "stages": cfg.stages,
        "counts": s,
        "config": cfg.to_dotted(),
    })
}

pub fn run_dataset(input: &Path, common: &Common) -> Result<(), CliError> {
    let (cfg, arm) = resolve_config(common)?;
    if !input.is_dir() {
        return Err(CliError::missing(format!("{}: not a directory", input.display())));
    }
    let files = list_scan_files(input)?;
    if files.is_empty() {
        return Err(CliError::missing(format!("{}: no <timestamp_ns>.pcd files", input.display())));
    }
    let traj_path = input.join("trajectory.txt");
    let traj_bytes =
        std::fs::read(&traj_path).map_err(|e| CliError::missing(format!("{}: {e}", traj_path.display())))?;
    let trajectory: Vec<Pose> =
        parse_trajectory(&traj_bytes).map_err(|e| CliError::invalid(format!("{}: {e}", traj_path.display())))?;

    let mut out = Outputs::new(&common.output, cfg.output.debug_images)?;
    let mut pipeline = Pipeline::new(cfg.clone());
    let mut summary = RunSummary::default();
    for f in &files {
        let t = f.timestamp();
        let aligned = match align_scan_pose(t, &trajectory) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("objprop: skipping {}: {e}", f.path.display());
                summary.skipped_scans += 1;
                continue;
            }
        };
        let bytes = std::fs::read(&f.path)?;
        let cloud = parse_pcd(&bytes).map_err(|e| CliError::other(format!("{}: {e}", f.path.display())))?;
        summary.scans += 1;
        summary.points += cloud.points.len();
        summary.nan_dropped += cloud.nan_dropped;
        summary.intensity_clamped += cloud.intensity_clamped;
        summary.extrapolated_poses += aligned.extrapolated as usize;
        let outcome = pipeline.offer_scan(LidarScan::new(cloud.points, t, aligned.pose))?;
        summary.admitted += outcome.admitted as usize;
        if let Some(q) = outcome.query {
            summary.record(&q);
            out.on_query(&q)?;
        }
    }
    summary.finish();
    out.finish(summary_json(&summary, &cfg, &arm))?;
    println!(
        "{} scans, {} queries, {} proposals -> {}",
        summary.scans,
        summary.queries,
        summary.proposals,
        common.output.display()
    );
    Ok(())
}

fn run_synthetic(
    scene: &SyntheticScene,
    common: &Common,
    arms: &[String],
    seeds: u64,
    horizon: usize,
) -> Result<(), CliError> {
    let (cfg, arm) = resolve_config(common)?;
    scene
        .validate(cfg.segmenter.volume_bounds())
        .map_err(|e| CliError::invalid(e.to_string()))?;
    let mut out = Outputs::new(&common.output, cfg.output.debug_images)?;
    let mut summary = RunSummary::default();
    let mut failure = None;
    let run = evaluator::simulate_with(scene, &cfg, common.seed, |q| {
        summary.record(q);
        if failure.is_none() {
            failure = out.on_query(q).err();
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    summary.scans = run.scans;
    summary.admitted = run.admitted;
    summary.finish();
    out.finish(summary_json(&summary, &cfg, &arm))?;

    let records: Vec<_> = run.proposals.iter().map(Into::into).collect();
    let mut report = evaluator::evaluate(&records, scene, Some(common.seed));
    if !arms.is_empty() {
        let arms = evaluator::arms_from_names(arms).map_err(CliError::invalid)?;
        let seed_list: Vec<u64> = (0..seeds.max(1)).map(|k| common.seed + k).collect();
        report.ablation = evaluator::run_ablation(scene, &cfg, &arms, &seed_list, horizon)?;
    }
    write_report(&common.output, &report)
}

fn write_report(dir: &Path, report: &EvaluationReport) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("report.json"), report)?;
    print!("{}", report.table());
    Ok(())
}

/// `<stem>_range.png`, `<stem>_intensity.png` and, with labels,
/// `<stem>_labels.png`.
pub fn write_debug_pngs(dir: &Path, stem: &str, img: &ImageSet, labels: Option<&[u32]>) -> Result<(), CliError> {
    let g = img.geometry;
    let range = (0..g.len()).map(|i| if img.is_valid(i) { tone_map_range(img.range[i]) } else { 0 });
    write_png_gray(&dir.join(format!("{stem}_range.png")), g, range)?;
    let intensity = img.intensity.iter().map(|v| v.round().clamp(0.0, 255.0) as u8);
    write_png_gray(&dir.join(format!("{stem}_intensity.png")), g, intensity)?;
    if let Some(l) = labels {
        write_png_labels(&dir.join(format!("{stem}_labels.png")), g, l)?;
    }
    Ok(())
}
