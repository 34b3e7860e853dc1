//! Trajectory dataset ingestion and windowing.
//!
//! Input files hold one record per line: a frame id, an agent id, and a 2-D
//! position in meters. Column order and separator are configurable because
//! published exports of the common benchmark recordings disagree on both.
//! Parsed scenes are immutable; velocities are derived once at ingestion by
//! finite differences between an agent's consecutive appearances.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Agent identifier as it appears in the source file.
pub type AgentId = i64;

/// One agent's kinematic state at a single frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    /// Position in meters.
    pub position: Vec2,
    /// Velocity in m/s, from finite differences over the frame interval.
    pub velocity: Vec2,
}

/// All agent states observed at one frame, sorted by agent id.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Raw frame id from the source file; strictly increasing within a scene.
    pub index: i64,
    pub states: Vec<AgentState>,
}

impl Frame {
    pub fn state_of(&self, id: AgentId) -> Option<&AgentState> {
        self.states
            .binary_search_by_key(&id, |s| s.id)
            .ok()
            .map(|i| &self.states[i])
    }
}

/// An immutable recording: ordered frames plus the wall-clock interval
/// between consecutive listed frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    /// Seconds between consecutive listed frames.
    pub dt: f64,
    pub frames: Vec<Frame>,
}

/// Column layout and separator of a trajectory text file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatConfig {
    pub columns: ColumnOrder,
    pub separator: Separator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separator {
    /// Any run of spaces and/or tabs.
    Whitespace,
    Comma,
}

/// Positions of the four fields within a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnOrder {
    pub frame: usize,
    pub id: usize,
    pub x: usize,
    pub y: usize,
}

impl Default for FormatConfig {
    fn default() -> Self {
        FormatConfig {
            columns: ColumnOrder { frame: 0, id: 1, x: 2, y: 3 },
            separator: Separator::Whitespace,
        }
    }
}

impl ColumnOrder {
    /// Parse a spec like `frame,id,x,y` (all four names, any order).
    pub fn parse(spec: &str) -> Result<Self> {
        let names: Vec<&str> = spec.split(',').map(str::trim).collect();
        if names.len() != 4 {
            return Err(Error::config("format", format!("expected 4 column names, got {}", names.len())));
        }
        let pos = |want: &str| -> Result<usize> {
            names
                .iter()
                .position(|n| n.eq_ignore_ascii_case(want))
                .ok_or_else(|| Error::config("format", format!("missing column `{want}` in `{spec}`")))
        };
        Ok(ColumnOrder { frame: pos("frame")?, id: pos("id")?, x: pos("x")?, y: pos("y")? })
    }
}

/// One agent's 20-frame track: 8 observed states, 12 future states, the goal
/// (the position at the final frame), and every other agent present at each
/// of the 20 frames.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryWindow {
    pub scene: String,
    /// Stable id, assigned in (agent id, start frame) order.
    pub id: u64,
    pub ego_id: AgentId,
    /// Offset of the first window frame within `Scene::frames`.
    pub start: usize,
    /// H+1 observed states of the ego.
    pub observed: Vec<AgentState>,
    /// T future states of the ego.
    pub future: Vec<AgentState>,
    /// Position of the ego at the last window frame.
    pub goal: Vec2,
    /// For each of the H+1+T frames, the states of all other agents present.
    pub neighbors: Vec<Vec<AgentState>>,
    /// Seconds per frame, copied from the scene.
    pub dt: f64,
}

impl TrajectoryWindow {
    pub fn horizon(&self) -> usize {
        self.future.len()
    }

    /// Ego state at window frame `t` in `0..observed.len()+future.len()`.
    pub fn ego_state(&self, t: usize) -> &AgentState {
        if t < self.observed.len() {
            &self.observed[t]
        } else {
            &self.future[t - self.observed.len()]
        }
    }

    /// Ground-truth future positions of the ego.
    pub fn truth(&self) -> Vec<Vec2> {
        self.future.iter().map(|s| s.position).collect()
    }

    /// Reassemble the full frame at window step `t`: the ego plus its
    /// neighbors, sorted by agent id. The frame index is the offset within
    /// the scene, not the raw id from the source file.
    pub fn frame_at(&self, t: usize) -> Frame {
        let ego = *self.ego_state(t);
        let mut states = self.neighbors[t].clone();
        // ego is never among its own neighbors
        if let Err(i) = states.binary_search_by_key(&ego.id, |s| s.id) {
            states.insert(i, ego);
        }
        Frame { index: (self.start + t) as i64, states }
    }

    /// Mean speed over the observed states.
    pub fn mean_observed_speed(&self) -> f64 {
        let sum: f64 = self.observed.iter().map(|s| s.velocity.norm()).sum();
        sum / self.observed.len() as f64
    }

    /// Mean velocity vector over the observed states.
    pub fn mean_observed_velocity(&self) -> Vec2 {
        let mut sum = Vec2::default();
        for s in &self.observed {
            sum += s.velocity;
        }
        sum / self.observed.len() as f64
    }
}

fn parse_number(field: &str, line: usize, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{field}`"),
    })
}

fn parse_integral(field: &str, line: usize, what: &str) -> Result<i64> {
    let v = parse_number(field, line, what)?;
    let r = v.round();
    if (v - r).abs() > 1e-6 || !r.is_finite() {
        return Err(Error::Parse { line, msg: format!("{what} `{field}` is not an integer") });
    }
    Ok(r as i64)
}

/// Parse a trajectory file into a [`Scene`].
///
/// Records are grouped by frame id and sorted; velocities are derived per
/// agent as the position difference between consecutive appearances divided
/// by the elapsed time (listed-frame gaps times `dt`). The velocity at an
/// agent's first appearance copies the one at its second; agents seen only
/// once get zero velocity.
// Negated comparison so a NaN dt is rejected too.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn parse_scene(source: &str, format: &FormatConfig, name: &str, dt: f64) -> Result<Scene> {
    if !(dt > 0.0) {
        return Err(Error::config("dt", format!("must be > 0, got {dt}")));
    }
    // (frame, id) -> position, with duplicate detection
    let mut by_frame: BTreeMap<i64, BTreeMap<AgentId, Vec2>> = BTreeMap::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = match format.separator {
            Separator::Whitespace => trimmed.split_whitespace().collect(),
            Separator::Comma => trimmed.split(',').map(str::trim).collect(),
        };
        if fields.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 4 columns, got {}", fields.len()),
            });
        }
        let cols = &format.columns;
        let frame = parse_integral(fields[cols.frame], line, "frame id")?;
        let id = parse_integral(fields[cols.id], line, "agent id")?;
        let x = parse_number(fields[cols.x], line, "x coordinate")?;
        let y = parse_number(fields[cols.y], line, "y coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Parse { line, msg: "non-finite coordinate".into() });
        }
        let prior = by_frame.entry(frame).or_default().insert(id, Vec2::new(x, y));
        if prior.is_some() {
            return Err(Error::integrity(format!(
                "duplicate record for frame {frame}, agent {id} (line {line})"
            )));
        }
    }

    // Listed-frame offsets for velocity time gaps.
    let offsets: BTreeMap<i64, usize> =
        by_frame.keys().enumerate().map(|(i, &f)| (f, i)).collect();

    // Last appearance per agent: (listed offset, position).
    let mut last_seen: BTreeMap<AgentId, (usize, Vec2)> = BTreeMap::new();
    // Per agent, indices of (frame offset within `frames`, state index) to fix
    // up the first-frame velocity copy-back.
    let mut appearances: BTreeMap<AgentId, Vec<(usize, usize)>> = BTreeMap::new();

    let mut frames: Vec<Frame> = Vec::with_capacity(by_frame.len());
    for (frame_pos, (&frame_id, agents)) in by_frame.iter().enumerate() {
        let offset = offsets[&frame_id];
        let mut states = Vec::with_capacity(agents.len());
        for (&id, &position) in agents {
            let velocity = match last_seen.get(&id) {
                Some(&(prev_offset, prev_pos)) => {
                    let steps = (offset - prev_offset) as f64;
                    (position - prev_pos) / (steps * dt)
                }
                None => Vec2::default(),
            };
            last_seen.insert(id, (offset, position));
            appearances.entry(id).or_default().push((frame_pos, states.len()));
            states.push(AgentState { id, position, velocity });
        }
        frames.push(Frame { index: frame_id, states });
    }

    // Copy-back: the first appearance takes the second appearance's velocity.
    for idxs in appearances.values() {
        if idxs.len() >= 2 {
            let (f1, s1) = idxs[1];
            let v = frames[f1].states[s1].velocity;
            let (f0, s0) = idxs[0];
            frames[f0].states[s0].velocity = v;
        }
    }

    Ok(Scene { name: name.to_string(), dt, frames })
}

/// Serialize a scene back to the line format it was parsed from.
///
/// Floats print in shortest round-trip form, so parse → serialize → parse is
/// lossless.
pub fn scene_to_text(scene: &Scene, format: &FormatConfig) -> String {
    let sep = match format.separator {
        Separator::Whitespace => ' ',
        Separator::Comma => ',',
    };
    let cols = &format.columns;
    let mut out = String::new();
    for frame in &scene.frames {
        for s in &frame.states {
            let mut fields = [String::new(), String::new(), String::new(), String::new()];
            fields[cols.frame] = frame.index.to_string();
            fields[cols.id] = s.id.to_string();
            fields[cols.x] = s.position.x.to_string();
            fields[cols.y] = s.position.y.to_string();
            let _ = writeln!(out, "{}", fields.join(&sep.to_string()));
        }
    }
    out
}

/// Slice a scene into per-agent windows of `history + 1` observed and
/// `horizon` future frames.
///
/// A window exists for every (agent, start offset) where the agent appears in
/// all `history + 1 + horizon` consecutive listed frames. Start offsets
/// advance by `stride`. Window ids are assigned in (agent, start) order.
pub fn window_scene(scene: &Scene, history: usize, horizon: usize, stride: usize) -> Vec<TrajectoryWindow> {
    let span = history + 1 + horizon;
    let stride = stride.max(1);
    let mut windows = Vec::new();
    if scene.frames.len() < span {
        return windows;
    }

    let mut agent_ids: Vec<AgentId> = Vec::new();
    for frame in &scene.frames {
        for s in &frame.states {
            if let Err(i) = agent_ids.binary_search(&s.id) {
                agent_ids.insert(i, s.id);
            }
        }
    }

    let mut next_id = 0u64;
    for &ego in &agent_ids {
        let mut start = 0usize;
        while start + span <= scene.frames.len() {
            let frames = &scene.frames[start..start + span];
            if frames.iter().all(|f| f.state_of(ego).is_some()) {
                let observed: Vec<AgentState> =
                    frames[..history + 1].iter().map(|f| *f.state_of(ego).unwrap()).collect();
                let future: Vec<AgentState> =
                    frames[history + 1..].iter().map(|f| *f.state_of(ego).unwrap()).collect();
                let neighbors: Vec<Vec<AgentState>> = frames
                    .iter()
                    .map(|f| f.states.iter().filter(|s| s.id != ego).copied().collect())
                    .collect();
                let goal = future[horizon - 1].position;
                windows.push(TrajectoryWindow {
                    scene: scene.name.clone(),
                    id: next_id,
                    ego_id: ego,
                    start,
                    observed,
                    future,
                    goal,
                    neighbors,
                    dt: scene.dt,
                });
                next_id += 1;
            }
            start += stride;
        }
    }
    windows
}

/// Published valid-trajectory counts for the five benchmark subsets.
pub const REFERENCE_COUNTS: [(&str, usize); 5] =
    [("eth", 364), ("hotel", 1197), ("univ", 24334), ("zara1", 2356), ("zara2", 5910)];

#[derive(Debug, Clone, Serialize)]
pub struct CountCheck {
    pub subset: String,
    pub count: usize,
    pub expected: Option<usize>,
    /// Signed percentage deviation from the expected count, when one is
    /// known. Negative means fewer windows than the reference.
    pub deviation_pct: Option<f64>,
}

/// Compare per-scene window counts against the published reference counts.
///
/// Purely informational: the reference protocol's stride and deduplication
/// rules are not public, so deviations are reported, never enforced.
pub fn validate_counts(scenes: &[Scene], history: usize, horizon: usize, stride: usize) -> Vec<CountCheck> {
    scenes
        .iter()
        .map(|scene| {
            let count = window_scene(scene, history, horizon, stride).len();
            let expected = REFERENCE_COUNTS
                .iter()
                .find(|(name, _)| scene.name.eq_ignore_ascii_case(name))
                .map(|&(_, n)| n);
            let deviation_pct = expected.map(|e| {
                if e == 0 {
                    0.0
                } else {
                    (count as f64 - e as f64) / e as f64 * 100.0
                }
            });
            CountCheck { subset: scene.name.clone(), count, expected, deviation_pct }
        })
        .collect()
}
