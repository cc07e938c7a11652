//! Synthetic scenes, a ray-cast LiDAR renderer, and proposal scoring:
//! precision, per-object detection range, and the false-positive ablation.

mod presets;
mod render;
mod scene;
mod score;
mod sim;

pub use presets::{cave, clutter, golden, planar, preset, urban, PRESETS};
pub use render::{intersect, render_scan, render_scan_labeled, Hit, HitKind, Renderer};
pub use scene::{
    BeamModel, IntensityProfile, LinearTraverse, PoseSpec, Primitive, SceneError, SceneObject, Shape,
    SyntheticScene, TrajectorySpec, Tunnel,
};
pub use score::{
    auto_verdict, detection_ranges, evaluate, precision, ArmReport, EvaluationReport, ObjectDetection,
    ScoredProposal, Verdict, VerdictCounts, MATCH_RADIUS_M,
};
pub use sim::{arms_from_names, export_dataset, run_ablation, simulate, simulate_with, SimulationRun};
