//! `proposals.jsonl`: one JSON object per proposal, fixed key set.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::proposer::Proposal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProposalRecord {
    pub id: u64,
    pub query_index: u64,
    pub t: f64,
    pub centroid_world: [f64; 3],
    pub centroid_sensor: [f64; 3],
    pub pan_deg: f64,
    pub tilt_deg: f64,
    pub zoom: u32,
    pub range_m: f64,
    pub points: usize,
    pub volume_m3: f64,
    pub mean_intensity: f64,
}

impl From<&Proposal> for ProposalRecord {
    fn from(p: &Proposal) -> Self {
        Self {
            id: p.id,
            query_index: p.query_index,
            t: p.timestamp,
            centroid_world: p.centroid_world.into(),
            centroid_sensor: p.centroid_sensor.into(),
            pan_deg: p.pan_deg,
            tilt_deg: p.tilt_deg,
            zoom: p.zoom,
            range_m: p.range_m,
            points: p.point_count,
            volume_m3: p.volume_m3,
            mean_intensity: p.mean_intensity,
        }
    }
}

pub fn write_proposals_jsonl<'a>(
    w: &mut impl Write,
    proposals: impl IntoIterator<Item = &'a Proposal>,
) -> std::io::Result<()> {
    for p in proposals {
        serde_json::to_writer(&mut *w, &ProposalRecord::from(p))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_proposals_jsonl(r: impl BufRead) -> Result<Vec<ProposalRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}
