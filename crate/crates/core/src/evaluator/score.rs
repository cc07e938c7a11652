//! Proposal verdicts, precision and per-object detection range.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::scene::SyntheticScene;
use crate::geometry::Vec3;
use crate::scan_io::ProposalRecord;

/// Distance from an object's bounding box within which a proposal counts
/// as detecting it.
pub const MATCH_RADIUS_M: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Artifact,
    NonArtifact,
    FalsePositive,
}

impl Verdict {
    pub fn is_true(self) -> bool {
        self != Verdict::FalsePositive
    }
}

/// Verdict for a world-frame proposal centroid, with the matched object
/// (the one whose box is nearest).
pub fn auto_verdict(centroid_world: &Vec3, scene: &SyntheticScene) -> (Verdict, Option<usize>) {
    let nearest = scene
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| (i, o.aabb().distance_to(centroid_world)))
        .filter(|(_, d)| *d <= MATCH_RADIUS_M)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match nearest {
        Some((i, _)) if scene.objects[i].is_artifact => (Verdict::Artifact, Some(i)),
        Some((i, _)) => (Verdict::NonArtifact, Some(i)),
        None => (Verdict::FalsePositive, None),
    }
}

/// True proposals over all proposals; `None` when there are none.
pub fn precision(verdicts: &[Verdict]) -> Option<f64> {
    if verdicts.is_empty() {
        return None;
    }
    let hits = verdicts.iter().filter(|v| v.is_true()).count();
    Some(hits as f64 / verdicts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredProposal {
    pub id: u64,
    pub query_index: u64,
    pub t: f64,
    pub verdict: Verdict,
    pub object: Option<usize>,
    pub range_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDetection {
    pub object: usize,
    pub name: String,
    pub is_artifact: bool,
    /// Sensor range of the first matching proposal; `None` if missed.
    pub first_range_m: Option<f64>,
    pub first_query: Option<u64>,
    pub proposals: usize,
}

impl ObjectDetection {
    pub fn missed(&self) -> bool {
        self.first_range_m.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub artifact: usize,
    pub non_artifact: usize,
    pub false_positive: usize,
    pub total: usize,
}

impl VerdictCounts {
    pub fn tally<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Self {
        let mut c = Self::default();
        for v in verdicts {
            match v {
                Verdict::Artifact => c.artifact += 1,
                Verdict::NonArtifact => c.non_artifact += 1,
                Verdict::FalsePositive => c.false_positive += 1,
            }
            c.total += 1;
        }
        c
    }
}

/// Per-arm false-positive counts from an ablation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub arm: String,
    pub flags: crate::config::StageFlags,
    pub seeds: Vec<u64>,
    pub queries: usize,
    pub false_positives: Vec<usize>,
    pub proposals: Vec<usize>,
    pub mean_false_positives: f64,
    pub mean_precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scene: String,
    pub seed: Option<u64>,
    pub precision: Option<f64>,
    pub counts: VerdictCounts,
    pub proposals: Vec<ScoredProposal>,
    pub objects: Vec<ObjectDetection>,
    #[serde(default)]
    pub ablation: Vec<ArmReport>,
}

/// Per-object first-detection range, replaying proposals in log order.
pub fn detection_ranges(scored: &[ScoredProposal], scene: &SyntheticScene) -> Vec<ObjectDetection> {
    let mut out: Vec<ObjectDetection> = scene
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| ObjectDetection {
            object: i,
            name: o.name.clone(),
            is_artifact: o.is_artifact,
            first_range_m: None,
            first_query: None,
            proposals: 0,
        })
        .collect();
    for p in scored {
        if let Some(i) = p.object {
            let d = &mut out[i];
            if d.first_range_m.is_none() {
                d.first_range_m = Some(p.range_m);
                d.first_query = Some(p.query_index);
            }
            d.proposals += 1;
        }
    }
    out
}

/// Scores a proposal log against the scene's ground truth.
pub fn evaluate(records: &[ProposalRecord], scene: &SyntheticScene, seed: Option<u64>) -> EvaluationReport {
    let proposals: Vec<ScoredProposal> = records
        .iter()
        .map(|r| {
            let (verdict, object) = auto_verdict(&Vec3::from(r.centroid_world), scene);
            ScoredProposal {
                id: r.id,
                query_index: r.query_index,
                t: r.t,
                verdict,
                object,
                range_m: r.range_m,
            }
        })
        .collect();
    let verdicts: Vec<Verdict> = proposals.iter().map(|p| p.verdict).collect();
    EvaluationReport {
        scene: scene.name.clone(),
        seed,
        precision: precision(&verdicts),
        counts: VerdictCounts::tally(&verdicts),
        objects: detection_ranges(&proposals, scene),
        proposals,
        ablation: Vec::new(),
    }
}

impl EvaluationReport {
    pub fn artifacts_found(&self) -> (usize, usize) {
        let arts = self.objects.iter().filter(|o| o.is_artifact);
        let total = arts.clone().count();
        (arts.filter(|o| !o.missed()).count(), total)
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let c = &self.counts;
        let _ = writeln!(s, "scene: {}", self.scene);
        let _ = writeln!(
            s,
            "proposals: {} (artifact {}, non-artifact {}, false-positive {})",
            c.total, c.artifact, c.non_artifact, c.false_positive
        );
        match self.precision {
            Some(p) => _ = writeln!(s, "precision: {:.3}", p),
            None => _ = writeln!(s, "precision: n/a"),
        }
        let _ = writeln!(s, "{:<20} {:<9} {:>10} {:>6}", "object", "kind", "range_m", "props");
        for o in &self.objects {
            let kind = if o.is_artifact { "artifact" } else { "clutter" };
            let range = o.first_range_m.map_or("missed".to_string(), |r| format!("{r:.2}"));
            let _ = writeln!(s, "{:<20} {:<9} {:>10} {:>6}", o.name, kind, range, o.proposals);
        }
        if !self.ablation.is_empty() {
            let _ = writeln!(s, "{:<20} {:>8} {:>10}", "arm", "mean_fp", "precision");
            for a in &self.ablation {
                let p = a.mean_precision.map_or("n/a".to_string(), |p| format!("{p:.3}"));
                let _ = writeln!(s, "{:<20} {:>8.1} {:>10}", a.arm, a.mean_false_positives, p);
            }
        }
        s
    }
}
