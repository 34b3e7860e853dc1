//! Deterministic synthetic scenes.
//!
//! These serve three jobs: focused physics scenarios for the integration
//! suites (head-on corridor, side-by-side dyad, turning corridor), a straight
//! reference walk, and five small named stand-in subsets for runs without the
//! public recordings on disk.
//!
//! Everything is rendered to the text record format and re-parsed, so the
//! builders exercise the same ingestion path as real data and inherit its
//! velocity conventions.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{parse_scene, AgentId, FormatConfig, Scene};
use crate::vec2::Vec2;

/// One agent's positions at consecutive frames starting at `start`.
pub struct Track {
    pub id: AgentId,
    pub start: i64,
    pub positions: Vec<Vec2>,
}

/// Render tracks to the line format and parse them back into a scene.
pub fn scene_from_tracks(name: &str, dt: f64, tracks: &[Track]) -> Scene {
    let mut text = String::new();
    for track in tracks {
        for (k, p) in track.positions.iter().enumerate() {
            let _ = writeln!(text, "{} {} {} {}", track.start + k as i64, track.id, p.x, p.y);
        }
    }
    parse_scene(&text, &FormatConfig::default(), name, dt).expect("synthetic tracks are well-formed")
}

/// Jittered parameters of one head-on corridor run.
///
/// The two walkers close at a combined 2 m/s, so their ground-truth tracks
/// cross exactly at frame 10, inside the prediction span, at a lateral gap
/// equal to `offset` (below the collision radius).
#[derive(Debug, Clone, Copy)]
pub struct HeadOnVariant {
    /// Lateral offset of the second walker's lane, meters.
    pub offset: f64,
    pub speed_a: f64,
    pub speed_b: f64,
}

impl HeadOnVariant {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
        let speed_a = rng.random_range(0.9..1.1);
        let magnitude = rng.random_range(0.02..0.08);
        let offset = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        HeadOnVariant { offset, speed_a, speed_b: 2.0 - speed_a }
    }
}

/// Two walkers 8 m apart marching into each other for 20 frames.
pub fn head_on_scene(name: &str, v: &HeadOnVariant) -> Scene {
    let dt = 0.4;
    let a: Vec<Vec2> = (0..20).map(|k| Vec2::new(-4.0 + v.speed_a * dt * k as f64, 0.0)).collect();
    let b: Vec<Vec2> =
        (0..20).map(|k| Vec2::new(4.0 - v.speed_b * dt * k as f64, v.offset)).collect();
    scene_from_tracks(
        name,
        dt,
        &[Track { id: 1, start: 0, positions: a }, Track { id: 2, start: 0, positions: b }],
    )
}

/// Two walkers side by side, `separation` meters apart, walking +x at 1 m/s
/// for 20 frames. Close enough to cluster as a dyad at the default radius.
pub fn side_by_side_scene(name: &str, separation: f64) -> Scene {
    let dt = 0.4;
    let half = separation / 2.0;
    let a: Vec<Vec2> = (0..20).map(|k| Vec2::new(dt * k as f64, -half)).collect();
    let b: Vec<Vec2> = (0..20).map(|k| Vec2::new(dt * k as f64, half)).collect();
    scene_from_tracks(
        name,
        dt,
        &[Track { id: 1, start: 0, positions: a }, Track { id: 2, start: 0, positions: b }],
    )
}

/// Jittered parameters of one turning-corridor run.
#[derive(Debug, Clone, Copy)]
pub struct CorridorVariant {
    pub speed: f64,
    /// Frame at which the walker turns; always inside the future span.
    pub corner: usize,
    /// Turn toward +y instead of -y.
    pub turn_up: bool,
}

impl CorridorVariant {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(2));
        CorridorVariant {
            speed: rng.random_range(0.9..1.1),
            corner: rng.random_range(10..=12),
            turn_up: rng.random_bool(0.5),
        }
    }
}

/// An L-shaped walk: straight +x through the observed span, turning 90° at
/// `corner` and walking out the cross corridor to frame 19.
pub fn l_corridor_scene(name: &str, v: &CorridorVariant) -> Scene {
    let dt = 0.4;
    let step = v.speed * dt;
    let sign = if v.turn_up { 1.0 } else { -1.0 };
    let positions: Vec<Vec2> = (0..20)
        .map(|k| {
            if k < v.corner {
                Vec2::new(step * k as f64, 0.0)
            } else {
                Vec2::new(step * (v.corner - 1) as f64, sign * step * (k - v.corner + 1) as f64)
            }
        })
        .collect();
    scene_from_tracks(name, dt, &[Track { id: 1, start: 0, positions }])
}

/// A single walker at constant velocity for 20 frames.
pub fn straight_scene(name: &str, speed: f64) -> Scene {
    let dt = 0.4;
    let positions: Vec<Vec2> = (0..20).map(|k| Vec2::new(speed * dt * k as f64, 0.0)).collect();
    scene_from_tracks(name, dt, &[Track { id: 1, start: 0, positions }])
}

/// Names of the five public benchmark subsets, in report order.
pub const SUBSET_NAMES: [&str; 5] = ["eth", "hotel", "univ", "zara1", "zara2"];

/// Small bundled stand-ins for the five public subsets: a handful of walkers
/// crossing a square with mild heading wobble. Deterministic per name.
pub fn fixture_subsets() -> Vec<Scene> {
    SUBSET_NAMES.iter().map(|name| fixture_scene(name)).collect()
}

fn fixture_scene(name: &str) -> Scene {
    let mut hash = 0xcbf29ce484222325u64;
    for b in name.bytes() {
        hash = (hash ^ b as u64).wrapping_mul(0x100000001b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hash);
    let dt = 0.4;
    let mut tracks = Vec::new();
    for id in 0..9 {
        let start = rng.random_range(0..3) * 2;
        let frames = rng.random_range(22..30usize);
        let entry = Vec2::new(rng.random_range(-8.0..-4.0), rng.random_range(-4.0..4.0));
        let speed = rng.random_range(0.8..1.5);
        let mut heading = rng.random_range(-0.5..0.5f64);
        let mut pos = entry;
        let mut positions = Vec::with_capacity(frames);
        for _ in 0..frames {
            positions.push(pos);
            heading += rng.random_range(-0.08..0.08);
            pos += Vec2::new(heading.cos(), heading.sin()) * (speed * dt);
        }
        tracks.push(Track { id, start, positions });
    }
    scene_from_tracks(name, dt, &tracks)
}
