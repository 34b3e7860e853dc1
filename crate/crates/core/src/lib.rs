//! Social-force toolkit for pedestrian trajectory prediction.
//!
//! The pipeline, end to end:
//!
//! 1. [`dataset`] ingests plain-text trajectory recordings into immutable
//!    [`Scene`]s and slices them into 8-observed / 12-future
//!    [`TrajectoryWindow`]s.
//! 2. [`forces`] computes each agent's driving force toward a goal and the
//!    anticipatory elliptical repulsion from its neighbors, weighted by a
//!    field-of-view factor.
//! 3. [`grouping`] clusters each observed frame with DBSCAN and marks pairs
//!    that stay co-clustered as groups, whose mutual repulsion is masked.
//! 4. [`sim`] integrates the forces forward from the last observation toward
//!    a (possibly perturbed) goal, K samples per window.
//! 5. [`metrics`] scores predictions with best-of-K ADE/FDE and counts
//!    near-collisions among the selected trajectories.
//! 6. [`export`] writes force sequences, rollouts, and reports as JSONL/CSV
//!    with a reproducibility manifest.
//!
//! Determinism is a contract throughout: same inputs, parameters, and seed
//! give bit-identical outputs, independent of evaluation order.

pub mod dataset;
pub mod error;
pub mod export;
pub mod forces;
pub mod grouping;
pub mod metrics;
pub mod predictors;
pub mod sim;
pub mod synthetic;
pub mod vec2;

pub use dataset::{
    parse_scene, scene_to_text, validate_counts, window_scene, AgentId, AgentState, ColumnOrder,
    CountCheck, Frame, FormatConfig, Scene, Separator, TrajectoryWindow,
};
pub use error::{Error, Result};
pub use forces::{
    desired_direction, driving_force, force_sequences, fov_weight, repulsive_force_pair,
    repulsive_potential, semi_minor_axis, total_forces, DrivingGoal, ForceParams, ForceSample,
};
pub use grouping::{dbscan_frame, detect_groups, group_mask, ClusterLabel, GroupAssignment};
pub use metrics::{ade, collision_count, evaluate, fde, EvalOptions, MetricsReport};
pub use predictors::{
    ConstantVelocityPredictor, GroundTruthPredictor, GroupingParams, Predictor,
    SocialForcePredictor,
};
pub use sim::{
    best_of_k, estimate_goal, rollout, step, GoalMode, GoalSource, NeighborMode, PredictionSet,
    RolloutOptions,
};
pub use vec2::Vec2;
