//! Run artifacts: JSONL and CSV record streams plus the run manifest.
//!
//! Output is deterministic byte for byte: maps are ordered, records are
//! emitted in window/sample/step order, and floats print in Rust's shortest
//! round-trip form. Re-running with an identical manifest reproduces
//! identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::dataset::{AgentId, CountCheck, TrajectoryWindow};
use crate::error::Result;
use crate::forces::ForceSample;
use crate::grouping::GroupAssignment;
use crate::metrics::MetricsReport;
use crate::sim::PredictionSet;

/// One force sample of one agent at one window step. `t` counts frames
/// relative to the prediction origin: the observed span is t in [-H, 0],
/// the future span t in [1, T].
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ForceRecord {
    pub scene: String,
    pub window_id: u64,
    pub agent_id: AgentId,
    pub t: i64,
    pub f_dr: [f64; 2],
    pub f_re: [f64; 2],
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub goal: [f64; 2],
}

/// Flatten per-window force sequences into export records.
pub fn build_force_records(
    windows: &[TrajectoryWindow],
    sequences: &[Vec<ForceSample>],
) -> Vec<ForceRecord> {
    let mut records = Vec::new();
    for (window, samples) in windows.iter().zip(sequences) {
        let history = window.observed.len() as i64 - 1;
        for (i, sample) in samples.iter().enumerate() {
            let state = window.ego_state(i);
            records.push(ForceRecord {
                scene: window.scene.clone(),
                window_id: window.id,
                agent_id: window.ego_id,
                t: i as i64 - history,
                f_dr: sample.driving.to_array(),
                f_re: sample.repulsive.to_array(),
                pos: state.position.to_array(),
                vel: state.velocity.to_array(),
                goal: window.goal.to_array(),
            });
        }
    }
    records
}

pub fn force_records_csv(records: &[ForceRecord]) -> String {
    let mut out =
        String::from("scene,window_id,agent_id,t,f_dr_x,f_dr_y,f_re_x,f_re_y,pos_x,pos_y,vel_x,vel_y,goal_x,goal_y\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scene,
            r.window_id,
            r.agent_id,
            r.t,
            r.f_dr[0],
            r.f_dr[1],
            r.f_re[0],
            r.f_re[1],
            r.pos[0],
            r.pos[1],
            r.vel[0],
            r.vel[1],
            r.goal[0],
            r.goal[1]
        );
    }
    out
}

/// One predicted position: sample `k`, future step `t` in [1, T].
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimRecord {
    pub scene: String,
    pub window_id: u64,
    pub k: usize,
    pub t: usize,
    pub x: f64,
    pub y: f64,
}

pub fn build_sim_records(window: &TrajectoryWindow, pred: &PredictionSet) -> Vec<SimRecord> {
    let mut records = Vec::new();
    for (k, sample) in pred.samples.iter().enumerate() {
        for (i, p) in sample.iter().enumerate() {
            records.push(SimRecord {
                scene: window.scene.clone(),
                window_id: window.id,
                k,
                t: i + 1,
                x: p.x,
                y: p.y,
            });
        }
    }
    records
}

pub fn sim_records_csv(records: &[SimRecord]) -> String {
    let mut out = String::from("scene,window_id,k,t,x,y\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.scene, r.window_id, r.k, r.t, r.x, r.y);
    }
    out
}

/// Group-detection outcome rows for one window: every pair that ever
/// co-clustered, with its frame count and verdict.
pub fn groups_csv_rows(
    out: &mut String,
    scene: &str,
    window_id: u64,
    assignment: &GroupAssignment,
) {
    for ((a, b), n) in assignment.co_counts() {
        let _ = writeln!(
            out,
            "{scene},{window_id},{a},{b},{n},{}",
            assignment.contains(a, b)
        );
    }
}

pub const GROUPS_CSV_HEADER: &str = "scene,window_id,agent_a,agent_b,co_cluster_frames,grouped\n";

pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("subset,ade_k,fde_k,nc,num_windows,k,gamma\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.subset, r.ade_k, r.fde_k, r.nc, r.num_windows, r.k, r.gamma
        );
    }
    out
}

pub fn counts_csv(checks: &[CountCheck]) -> String {
    let mut out = String::from("subset,count,expected,deviation_pct\n");
    for c in checks {
        let expected = c.expected.map_or(String::new(), |e| e.to_string());
        let deviation = c.deviation_pct.map_or(String::new(), |d| d.to_string());
        let _ = writeln!(out, "{},{},{},{}", c.subset, c.count, expected, deviation);
    }
    out
}

/// Everything needed to reproduce a run: resolved settings, seed, inputs.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub subcommand: String,
    pub seed: u64,
    /// Every resolved setting, stringified, in sorted key order.
    pub settings: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        RunManifest {
            tool: format!("pedforce {}", env!("CARGO_PKG_VERSION")),
            subcommand: subcommand.to_string(),
            seed,
            settings: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.settings.insert(key.to_string(), value.to_string());
    }
}

/// Serialize records as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
