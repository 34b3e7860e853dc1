//! Social-force terms: a goal-seeking driving force and an anticipatory
//! elliptical repulsion between pedestrians, attenuated outside the walker's
//! field of view.
//!
//! The repulsive interaction derives from a scalar potential of the ellipse
//! semi-minor axis b: both walkers sit on an ellipse whose foci are the
//! neighbor's current and anticipated positions, so b shrinks as the neighbor
//! closes in, not merely as it gets near. The force is the exact negative
//! gradient of that potential with respect to the relative position.
//!
//! All functions here are pure; degenerate geometry (overlapping agents,
//! collapsed ellipses) falls back to a bounded radial push so the integrator
//! downstream never sees an infinite force.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{AgentId, AgentState, TrajectoryWindow};
use crate::error::{Error, Result};
use crate::grouping::GroupAssignment;
use crate::vec2::Vec2;

/// Below this length in meters a vector is treated as zero: directions are
/// undefined, agents count as at their goal, neighbors as stationary.
pub const ZERO_EPS: f64 = 1e-9;

/// All constants of the force model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceParams {
    /// Relaxation time of the driving force, seconds.
    pub tau: f64,
    /// Fallback desired speed in m/s when an agent's observed mean speed is
    /// too low to be a useful estimate.
    pub v0_default: f64,
    /// Amplitude of the repulsive potential, m²/s².
    pub v0_amplitude: f64,
    /// Decay length of the repulsive potential, meters.
    pub sigma_v: f64,
    /// Full width of the effective angle of sight, degrees.
    pub two_epsilon_deg: f64,
    /// Attenuation factor for forces outside the sight field, in (0, 1].
    pub c: f64,
    /// Anticipation stride of a neighbor's motion, seconds (one frame).
    pub dt: f64,
    /// Speed clamp multiplier relative to the desired speed (simulator use).
    pub v_max_factor: f64,
    /// Test the sight field against the direction toward the force source
    /// (-f) instead of the force direction itself. See [`fov_weight`].
    pub fov_on_source: bool,
}

impl Default for ForceParams {
    fn default() -> Self {
        ForceParams {
            tau: 0.5,
            v0_default: 1.34,
            v0_amplitude: 2.1,
            sigma_v: 0.3,
            two_epsilon_deg: 200.0,
            c: 0.5,
            dt: 0.4,
            v_max_factor: 1.3,
            fov_on_source: false,
        }
    }
}

impl ForceParams {
    // Negated comparisons so NaN fails validation too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::config("tau", "must be > 0"));
        }
        if !(self.v0_default > 0.0) {
            return Err(Error::config("v0", "must be > 0"));
        }
        if !(self.v0_amplitude >= 0.0) {
            return Err(Error::config("V0", "must be >= 0"));
        }
        if !(self.sigma_v > 0.0) {
            return Err(Error::config("sigma-v", "must be > 0"));
        }
        if !(self.two_epsilon_deg > 0.0 && self.two_epsilon_deg <= 360.0) {
            return Err(Error::config("two-eps-deg", "must be in (0, 360]"));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::config("c", "must be in (0, 1]"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config("dt", "must be > 0"));
        }
        if !(self.v_max_factor > 0.0) {
            return Err(Error::config("v-max-factor", "must be > 0"));
        }
        Ok(())
    }

    /// Desired speed for an agent: its mean observed speed, or `v0_default`
    /// when the observation is too slow (< 0.1 m/s) to carry a heading.
    pub fn effective_v0(&self, mean_observed_speed: f64) -> f64 {
        if mean_observed_speed < 0.1 {
            self.v0_default
        } else {
            mean_observed_speed
        }
    }
}

/// The two force components acting on one agent at one timestep, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceSample {
    pub driving: Vec2,
    pub repulsive: Vec2,
}

/// What the driving force steers toward: a point and the preferred speed of
/// approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingGoal {
    pub position: Vec2,
    pub speed: f64,
}

/// Counters for geometric fallbacks taken during force evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ForceDiagnostics {
    /// Agent pairs found at (numerically) the same position.
    pub coincident_pairs: u64,
    /// Pairs whose interaction ellipse collapsed (b or a focus distance
    /// below [`ZERO_EPS`]), served by the capped radial fallback.
    pub collapsed_ellipses: u64,
}

impl ForceDiagnostics {
    pub fn merge(&mut self, other: ForceDiagnostics) {
        self.coincident_pairs += other.coincident_pairs;
        self.collapsed_ellipses += other.collapsed_ellipses;
    }
}

/// Unit vector from `position` toward `goal`, or `Vec2::ZERO` when the agent
/// is within [`ZERO_EPS`] of its goal. The zero sentinel switches off every
/// downstream force for that agent at that timestep.
pub fn desired_direction(position: Vec2, goal: Vec2) -> Vec2 {
    (goal - position).try_normalize(ZERO_EPS).unwrap_or(Vec2::ZERO)
}

/// Relaxation of the current velocity toward `v0` along `desired_dir`:
/// (v0·e − v)/τ. Zero when the direction is the zero sentinel.
pub fn driving_force(velocity: Vec2, desired_dir: Vec2, v0: f64, tau: f64) -> Vec2 {
    if desired_dir == Vec2::ZERO {
        return Vec2::ZERO;
    }
    (desired_dir * v0 - velocity) / tau
}

/// Semi-minor axis b of the interaction ellipse, in meters.
///
/// 2b = sqrt((‖r‖ + ‖r − s·e‖)² − s²) with s = speed_b·dt, where r points
/// from the neighbor to the subject and e is the neighbor's heading. A
/// stationary neighbor (s < [`ZERO_EPS`], or no heading) degenerates to a
/// circle: b = ‖r‖, returned exactly. The radicand is non-negative by the
/// triangle inequality; floating-point noise below zero clamps to b = 0.
pub fn semi_minor_axis(r_ab: Vec2, speed_b: f64, dir_b: Vec2, dt: f64) -> f64 {
    let dist = r_ab.norm();
    let s = speed_b * dt;
    if s.abs() < ZERO_EPS || dir_b == Vec2::ZERO {
        return dist;
    }
    let sum = dist + (r_ab - dir_b * s).norm();
    let radicand = sum * sum - s * s;
    if radicand <= 0.0 {
        0.0
    } else {
        0.5 * radicand.sqrt()
    }
}

/// Repulsive potential V(b) = V0·exp(−b/σ_V), m²/s².
pub fn repulsive_potential(b: f64, v0_amplitude: f64, sigma_v: f64) -> f64 {
    v0_amplitude * (-b / sigma_v).exp()
}

/// Repulsive force exerted on `a` by `b`: the negative gradient of
/// V(b(r)) with respect to r = position_a − position_b.
///
/// Via the chain rule, f = (V0/σ_V)·exp(−b/σ_V)·∇b with
/// ∇b = (‖r‖ + ‖r − s·e‖)/(4b) · (r̂ + (r − s·e)/‖r − s·e‖). A stationary
/// neighbor reduces to the circular case f = (V0/σ_V)·exp(−‖r‖/σ_V)·r̂, which
/// makes the pair force exactly antisymmetric. A collapsed ellipse (b or a
/// focus distance under [`ZERO_EPS`]) falls back to the radial direction at
/// the cap magnitude V0/σ_V; coincident agents get the cap along +x.
pub fn repulsive_force_pair(a: &AgentState, b: &AgentState, params: &ForceParams) -> Vec2 {
    repulsive_force_pair_diag(a, b, params).0
}

/// As [`repulsive_force_pair`], also reporting which fallback (if any) fired.
pub fn repulsive_force_pair_diag(
    a: &AgentState,
    b: &AgentState,
    params: &ForceParams,
) -> (Vec2, ForceDiagnostics) {
    let mut diag = ForceDiagnostics::default();
    let magnitude =
        |b_val: f64| params.v0_amplitude / params.sigma_v * (-b_val / params.sigma_v).exp();

    let r = a.position - b.position;
    let dist = r.norm();
    if dist <= ZERO_EPS {
        diag.coincident_pairs = 1;
        return (Vec2::new(magnitude(0.0), 0.0), diag);
    }
    let r_hat = r / dist;

    let speed_b = b.velocity.norm();
    if speed_b * params.dt < ZERO_EPS {
        // circular potential: b == dist and ∇b == r̂
        return (r_hat * magnitude(dist), diag);
    }
    let dir_b = b.velocity / speed_b;
    let s = speed_b * params.dt;
    let shifted = r - dir_b * s;
    let shifted_norm = shifted.norm();
    let b_axis = semi_minor_axis(r, speed_b, dir_b, params.dt);
    if b_axis < ZERO_EPS || shifted_norm < ZERO_EPS {
        diag.collapsed_ellipses = 1;
        return (r_hat * magnitude(0.0), diag);
    }
    let grad_b = (r_hat + shifted / shifted_norm) * ((dist + shifted_norm) / (4.0 * b_axis));
    (grad_b * magnitude(b_axis), diag)
}

/// Sight-field weight for a pairwise force `f` on an agent heading along the
/// unit vector `heading`: 1 when the tested direction lies within the
/// half-angle ε of the heading (e·f ≥ ‖f‖·cos ε), else `c`.
///
/// By default the force direction itself is tested. Since repulsion points
/// away from its source, that reads as: forces pushing roughly forward keep
/// full weight. `fov_on_source` instead tests the direction toward the
/// source (−f), so that neighbors seen ahead exert full-weight forces. A zero
/// heading (agent at goal) or zero force weighs 1.
pub fn fov_weight(heading: Vec2, f: Vec2, params: &ForceParams) -> f64 {
    if heading == Vec2::ZERO {
        return 1.0;
    }
    let tested = if params.fov_on_source { -f } else { f };
    let half_angle = (params.two_epsilon_deg / 2.0).to_radians();
    if heading.dot(tested) >= f.norm() * half_angle.cos() {
        1.0
    } else {
        params.c
    }
}

/// Driving and summed weighted repulsive force for every agent in a frame.
///
/// `mask(a, b) == true` eliminates the repulsion between a same-group pair.
/// Every agent in `states` must have a goal entry; an agent within
/// [`ZERO_EPS`] of its goal gets the all-zero sample.
pub fn total_forces<M>(
    states: &[AgentState],
    goals: &BTreeMap<AgentId, DrivingGoal>,
    mask: &M,
    params: &ForceParams,
) -> Result<BTreeMap<AgentId, ForceSample>>
where
    M: Fn(AgentId, AgentId) -> bool + ?Sized,
{
    Ok(total_forces_diag(states, goals, mask, params)?.0)
}

/// As [`total_forces`], also aggregating fallback diagnostics.
pub fn total_forces_diag<M>(
    states: &[AgentState],
    goals: &BTreeMap<AgentId, DrivingGoal>,
    mask: &M,
    params: &ForceParams,
) -> Result<(BTreeMap<AgentId, ForceSample>, ForceDiagnostics)>
where
    M: Fn(AgentId, AgentId) -> bool + ?Sized,
{
    let mut out = BTreeMap::new();
    let mut diag = ForceDiagnostics::default();
    for ego in states {
        let goal = goals.get(&ego.id).ok_or_else(|| {
            Error::contract(format!("agent {} has no goal entry", ego.id))
        })?;
        let (sample, d) = sample_for(ego, states, goal, mask, params);
        diag.merge(d);
        out.insert(ego.id, sample);
    }
    Ok((out, diag))
}

/// Force sample for a single agent against a slice of co-present agents.
/// `others` may include `ego` itself; it is skipped by id.
pub fn sample_for<M>(
    ego: &AgentState,
    others: &[AgentState],
    goal: &DrivingGoal,
    mask: &M,
    params: &ForceParams,
) -> (ForceSample, ForceDiagnostics)
where
    M: Fn(AgentId, AgentId) -> bool + ?Sized,
{
    let mut diag = ForceDiagnostics::default();
    let dir = desired_direction(ego.position, goal.position);
    if dir == Vec2::ZERO {
        return (ForceSample::default(), diag);
    }
    let driving = driving_force(ego.velocity, dir, goal.speed, params.tau);
    let mut repulsive = Vec2::ZERO;
    for other in others {
        if other.id == ego.id || mask(ego.id, other.id) {
            continue;
        }
        let (f, d) = repulsive_force_pair_diag(ego, other, params);
        diag.merge(d);
        repulsive += f * fov_weight(dir, f, params);
    }
    (ForceSample { driving, repulsive }, diag)
}

/// Per-window force sequences over all observed and future steps.
///
/// `assignments` pairs up with `windows` (one group assignment per window,
/// detected over its observed frames). Future steps use the recorded
/// ground-truth states of the ego and its neighbors; the goal is the
/// window's final position, the desired speed the mean observed speed.
/// Returns one `ForceSample` per window step, aligned with window frames.
pub fn force_sequences(
    windows: &[TrajectoryWindow],
    assignments: &[GroupAssignment],
    params: &ForceParams,
) -> Result<Vec<Vec<ForceSample>>> {
    if windows.len() != assignments.len() {
        return Err(Error::contract(format!(
            "{} windows but {} group assignments",
            windows.len(),
            assignments.len()
        )));
    }
    let mut sequences = Vec::with_capacity(windows.len());
    for (window, assignment) in windows.iter().zip(assignments) {
        let v0 = params.effective_v0(window.mean_observed_speed());
        let goal = DrivingGoal { position: window.goal, speed: v0 };
        let mask = |a: AgentId, b: AgentId| assignment.contains(a, b);
        let steps = window.observed.len() + window.future.len();
        let mut samples = Vec::with_capacity(steps);
        for t in 0..steps {
            let ego = window.ego_state(t);
            // Neighbor goals are irrelevant here: a neighbor's goal only
            // shapes the forces acting on the neighbor itself, never the
            // force it exerts on the ego.
            let (sample, _) = sample_for(ego, &window.neighbors[t], &goal, &mask, params);
            samples.push(sample);
        }
        sequences.push(samples);
    }
    Ok(sequences)
}
