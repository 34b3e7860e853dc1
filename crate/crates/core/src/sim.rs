//! Goal-conditioned forward simulation.
//!
//! From the last observed state, each agent is integrated under the social
//! forces toward a goal, K times with independently perturbed goals, giving a
//! stochastic prediction set. Integration is semi-implicit Euler at the frame
//! interval, with optional substepping for stiff close-contact geometry.
//!
//! Reproducibility contract: every sample draws from its own stream keyed by
//! (run seed, window id, sample index), so results are independent of
//! evaluation order and safe to parallelize.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use std::collections::BTreeMap;

use crate::dataset::{AgentId, AgentState, TrajectoryWindow};
use crate::error::{Error, Result};
use crate::forces::{sample_for, DrivingGoal, ForceParams, ZERO_EPS};
use crate::grouping::GroupAssignment;
use crate::metrics;
use crate::vec2::Vec2;

/// Where the rollout goal comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalMode {
    /// Ground-truth final position of the window.
    Oracle,
    /// Last observed position plus mean observed velocity times the horizon.
    Extrapolate,
}

/// Goal supplier plus the per-sample perturbation scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalSource {
    pub mode: GoalMode,
    /// Std-dev in meters of the Gaussian goal offset drawn per sample.
    pub noise_std: f64,
}

impl Default for GoalSource {
    fn default() -> Self {
        GoalSource { mode: GoalMode::Oracle, noise_std: 0.5 }
    }
}

/// How the ego's neighbors evolve during the rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborMode {
    /// Neighbors follow their recorded ground-truth future frames.
    Replay,
    /// Neighbors stand still at their last observed states.
    Frozen,
    /// Neighbors are simulated alongside the ego, each steering toward its
    /// own inferred goal.
    Joint,
}

/// K sampled future trajectories for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub ego_id: AgentId,
    /// `samples[k][t]` is the predicted position at future step t.
    pub samples: Vec<Vec<Vec2>>,
    /// The (possibly perturbed) goal each sample steered toward.
    pub goals_used: Vec<Vec2>,
    pub seed: u64,
}

/// Knobs of a rollout beyond the force constants.
#[derive(Debug, Clone, Copy, Default)]
pub struct RolloutOptions<'a> {
    pub noise_std: f64,
    pub neighbor_mode: Option<NeighborMode>,
    /// Integration substeps per frame; 0 and 1 both mean plain frame steps.
    pub substeps: usize,
    /// Same-group pairs whose mutual repulsion is masked.
    pub assignment: Option<&'a GroupAssignment>,
}

/// Rollout goal for a window.
pub fn estimate_goal(window: &TrajectoryWindow, mode: GoalMode) -> Vec2 {
    match mode {
        GoalMode::Oracle => window.goal,
        GoalMode::Extrapolate => {
            let last = window.observed.last().expect("window has observed states");
            let horizon_s = window.horizon() as f64 * window.dt;
            last.position + window.mean_observed_velocity() * horizon_s
        }
    }
}

/// One semi-implicit Euler step of `dt` seconds for every agent in
/// `simulated`. `background` agents exert forces but are not integrated.
/// An agent within [`ZERO_EPS`] of its goal is frozen in place.
pub fn step<M>(
    simulated: &[AgentState],
    background: &[AgentState],
    goals: &BTreeMap<AgentId, DrivingGoal>,
    mask: &M,
    params: &ForceParams,
    dt: f64,
    step_index: usize,
) -> Result<Vec<AgentState>>
where
    M: Fn(AgentId, AgentId) -> bool + ?Sized,
{
    let mut all = Vec::with_capacity(simulated.len() + background.len());
    all.extend_from_slice(simulated);
    all.extend_from_slice(background);

    let mut next = Vec::with_capacity(simulated.len());
    for agent in simulated {
        let goal = goals.get(&agent.id).ok_or_else(|| {
            Error::contract(format!("agent {} has no goal entry", agent.id))
        })?;
        if (goal.position - agent.position).norm() < ZERO_EPS {
            next.push(*agent);
            continue;
        }
        let (sample, _) = sample_for(agent, &all, goal, mask, params);
        let force = sample.driving + sample.repulsive;
        if !force.is_finite() {
            return Err(Error::Simulation {
                agent: agent.id,
                step: step_index,
                msg: format!("non-finite force {force:?}"),
            });
        }
        let velocity = (agent.velocity + force * dt).clamp_norm(params.v_max_factor * goal.speed);
        let position = agent.position + velocity * dt;
        if !velocity.is_finite() || !position.is_finite() {
            return Err(Error::Simulation {
                agent: agent.id,
                step: step_index,
                msg: "non-finite state after integration".into(),
            });
        }
        next.push(AgentState { id: agent.id, position, velocity });
    }
    Ok(next)
}

fn sample_rng(seed: u64, window_id: u64, k: usize) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&window_id.to_le_bytes());
    bytes[16..24].copy_from_slice(&(k as u64).to_le_bytes());
    bytes[24..32].copy_from_slice(b"pedforce");
    ChaCha8Rng::from_seed(bytes)
}

/// Last window step at which `id` appears among the neighbors, if any.
fn last_neighbor_state(window: &TrajectoryWindow, id: AgentId) -> Option<AgentState> {
    window
        .neighbors
        .iter()
        .rev()
        .find_map(|frame| frame.iter().find(|s| s.id == id).copied())
}

/// K forward simulations of the window's ego from its last observed state.
///
/// Sample 0 always steers toward `goal` itself; samples 1..K toward
/// `goal` plus a Gaussian offset (std `options.noise_std` per axis). Each
/// sample's trajectory holds the ego position after every of the T frame
/// steps. Joint mode simulates the agents co-present at the last observed
/// frame as well, each toward its last position recorded in the window.
pub fn rollout(
    window: &TrajectoryWindow,
    goal: Vec2,
    k: usize,
    seed: u64,
    params: &ForceParams,
    options: &RolloutOptions,
) -> Result<PredictionSet> {
    if k == 0 {
        return Err(Error::config("K", "must be >= 1"));
    }
    let horizon = window.horizon();
    let last_observed = window.observed.len() - 1;
    let substeps = options.substeps.max(1);
    let sub_dt = window.dt / substeps as f64;
    let neighbor_mode = options.neighbor_mode.unwrap_or(NeighborMode::Replay);
    let v0_ego = params.effective_v0(window.mean_observed_speed());

    let mask = |a: AgentId, b: AgentId| {
        options.assignment.is_some_and(|assignment| assignment.contains(a, b))
    };

    let noise = Normal::new(0.0, options.noise_std)
        .map_err(|e| Error::config("noise-std", e.to_string()))?;

    let mut samples = Vec::with_capacity(k);
    let mut goals_used = Vec::with_capacity(k);
    for sample_idx in 0..k {
        let mut rng = sample_rng(seed, window.id, sample_idx);
        let goal_k = if sample_idx == 0 {
            goal
        } else {
            goal + Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng))
        };

        let mut simulated = vec![*window.ego_state(last_observed)];
        let mut goals = BTreeMap::new();
        goals.insert(window.ego_id, DrivingGoal { position: goal_k, speed: v0_ego });
        if neighbor_mode == NeighborMode::Joint {
            for state in &window.neighbors[last_observed] {
                simulated.push(*state);
                let target = last_neighbor_state(window, state.id)
                    .expect("neighbor present at the frame it was read from");
                goals.insert(
                    state.id,
                    DrivingGoal {
                        position: target.position,
                        speed: params.effective_v0(state.velocity.norm()),
                    },
                );
            }
        }

        let mut trajectory = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let background: &[AgentState] = match neighbor_mode {
                NeighborMode::Replay => &window.neighbors[last_observed + t],
                NeighborMode::Frozen => &window.neighbors[last_observed],
                NeighborMode::Joint => &[],
            };
            for _ in 0..substeps {
                simulated = step(&simulated, background, &goals, &mask, params, sub_dt, t)?;
            }
            trajectory.push(simulated[0].position);
        }
        samples.push(trajectory);
        goals_used.push(goal_k);
    }

    Ok(PredictionSet { ego_id: window.ego_id, samples, goals_used, seed })
}

/// Index, ADE, and FDE of the sample closest to the truth by ADE. Ties go to
/// the lowest index.
pub fn best_of_k(pred: &PredictionSet, truth: &[Vec2]) -> Result<(usize, f64, f64)> {
    if pred.samples.is_empty() {
        return Err(Error::contract("prediction set has no samples"));
    }
    let mut best_idx = 0;
    let mut best_ade = f64::INFINITY;
    for (idx, sample) in pred.samples.iter().enumerate() {
        let ade = metrics::ade(sample, truth)?;
        if ade < best_ade {
            best_ade = ade;
            best_idx = idx;
        }
    }
    let fde = metrics::fde(&pred.samples[best_idx], truth)?;
    Ok((best_idx, best_ade, fde))
}
