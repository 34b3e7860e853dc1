//! Trajectory predictors evaluated by the metrics harness.

use crate::dataset::TrajectoryWindow;
use crate::error::Result;
use crate::forces::ForceParams;
use crate::grouping::detect_groups;
use crate::sim::{estimate_goal, rollout, GoalSource, NeighborMode, PredictionSet, RolloutOptions};

/// Anything that turns a window into K sampled futures.
pub trait Predictor {
    fn name(&self) -> &'static str;
    fn predict(&self, window: &TrajectoryWindow) -> Result<PredictionSet>;
}

/// Returns the ground-truth future as its single sample. Lower-bounds every
/// metric and pins down what the evaluation harness should report for a
/// perfect predictor.
pub struct GroundTruthPredictor;

impl Predictor for GroundTruthPredictor {
    fn name(&self) -> &'static str {
        "ground-truth"
    }

    fn predict(&self, window: &TrajectoryWindow) -> Result<PredictionSet> {
        Ok(PredictionSet {
            ego_id: window.ego_id,
            samples: vec![window.truth()],
            goals_used: vec![window.goal],
            seed: 0,
        })
    }
}

/// Continues the last observed velocity in a straight line. The standard
/// physics-free baseline; all K samples are identical.
pub struct ConstantVelocityPredictor {
    pub k: usize,
}

impl Predictor for ConstantVelocityPredictor {
    fn name(&self) -> &'static str {
        "const-velocity"
    }

    fn predict(&self, window: &TrajectoryWindow) -> Result<PredictionSet> {
        let last = window.observed.last().expect("window has observed states");
        let sample: Vec<_> = (1..=window.horizon())
            .map(|t| last.position + last.velocity * (t as f64 * window.dt))
            .collect();
        let goal = *sample.last().expect("horizon is nonzero");
        Ok(PredictionSet {
            ego_id: window.ego_id,
            samples: vec![sample; self.k.max(1)],
            goals_used: vec![goal; self.k.max(1)],
            seed: 0,
        })
    }
}

/// Grouping knobs for the social-force predictor.
#[derive(Debug, Clone, Copy)]
pub struct GroupingParams {
    pub eps: f64,
    pub min_pts: usize,
    pub sigma: usize,
}

impl Default for GroupingParams {
    fn default() -> Self {
        GroupingParams { eps: 1.0, min_pts: 2, sigma: 4 }
    }
}

/// Full social-force rollout predictor: estimates a goal, optionally detects
/// groups over the observed frames, and integrates K noisy-goal samples.
pub struct SocialForcePredictor {
    pub params: ForceParams,
    pub goal: GoalSource,
    pub k: usize,
    pub seed: u64,
    pub neighbor_mode: NeighborMode,
    pub substeps: usize,
    /// `None` disables group masking entirely.
    pub grouping: Option<GroupingParams>,
}

impl Default for SocialForcePredictor {
    fn default() -> Self {
        SocialForcePredictor {
            params: ForceParams::default(),
            goal: GoalSource::default(),
            k: 20,
            seed: 0,
            neighbor_mode: NeighborMode::Replay,
            substeps: 1,
            grouping: Some(GroupingParams::default()),
        }
    }
}

impl Predictor for SocialForcePredictor {
    fn name(&self) -> &'static str {
        "social-force"
    }

    fn predict(&self, window: &TrajectoryWindow) -> Result<PredictionSet> {
        let goal = estimate_goal(window, self.goal.mode);
        let assignment = self.grouping.map(|g| {
            let frames: Vec<_> = (0..window.observed.len()).map(|t| window.frame_at(t)).collect();
            detect_groups(&frames, g.eps, g.min_pts, g.sigma)
        });
        let options = RolloutOptions {
            noise_std: self.goal.noise_std,
            neighbor_mode: Some(self.neighbor_mode),
            substeps: self.substeps,
            assignment: assignment.as_ref(),
        };
        rollout(window, goal, self.k, self.seed, &self.params, &options)
    }
}
