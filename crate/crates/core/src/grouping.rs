//! Group detection: per-frame density clustering plus a persistence rule.
//!
//! Two pedestrians count as a group when they land in the same density
//! cluster in strictly more than `sigma` of the observed frames. Grouped
//! pairs then have their mutual repulsion masked out, since people walking
//! together do not avoid each other.
//!
//! Clustering is plain DBSCAN over positions with Euclidean distance. Runs
//! are deterministic: points are visited in ascending agent id and region
//! queries return ids in ascending order, so labels never depend on hash
//! order or thread timing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::dataset::{AgentId, Frame};
use crate::vec2::Vec2;

/// Cluster membership of one agent in one frame. `label` is `None` for
/// noise points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterLabel {
    pub frame_index: i64,
    pub agent_id: AgentId,
    pub label: Option<usize>,
}

/// Same-group pairs for one window, with the co-clustering frame counts that
/// produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    /// Frame-count threshold the pairs exceeded (strictly).
    pub sigma: usize,
    pairs: BTreeSet<(AgentId, AgentId)>,
    /// Frames each pair co-clustered in, for every pair that co-clustered at
    /// least once. Keys are (low id, high id).
    co_counts: BTreeMap<(AgentId, AgentId), usize>,
}

impl GroupAssignment {
    pub fn empty(sigma: usize) -> Self {
        GroupAssignment { sigma, pairs: BTreeSet::new(), co_counts: BTreeMap::new() }
    }

    /// True when the unordered pair is judged same-group.
    pub fn contains(&self, a: AgentId, b: AgentId) -> bool {
        self.pairs.contains(&ordered(a, b))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Co-clustering counts, including pairs below the threshold.
    pub fn co_counts(&self) -> impl Iterator<Item = ((AgentId, AgentId), usize)> + '_ {
        self.co_counts.iter().map(|(&p, &n)| (p, n))
    }
}

fn ordered(a: AgentId, b: AgentId) -> (AgentId, AgentId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Cell-hash index over positions; cell side equals the query radius, so a
/// radius query only touches the 3x3 block around the probe cell.
struct CellIndex {
    eps_sq: f64,
    inv_eps: f64,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
}

impl CellIndex {
    fn build(points: &[Vec2], eps: f64) -> Self {
        let inv_eps = 1.0 / eps;
        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell_of(p, inv_eps)).or_default().push(i);
        }
        CellIndex { eps_sq: eps * eps, inv_eps, cells }
    }

    fn cell_of(p: &Vec2, inv_eps: f64) -> (i64, i64) {
        ((p.x * inv_eps).floor() as i64, (p.y * inv_eps).floor() as i64)
    }

    /// Indices within eps of `points[i]`, ascending, self included.
    fn region(&self, points: &[Vec2], i: usize) -> Vec<usize> {
        let (cx, cy) = Self::cell_of(&points[i], self.inv_eps);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(members) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &j in members {
                        if (points[j] - points[i]).norm_sq() <= self.eps_sq {
                            out.push(j);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// DBSCAN over one frame's positions. Distances compare as `<= eps`; a
/// point's neighborhood includes itself, so it is core when it has at least
/// `min_pts - 1` genuine neighbors. Requires eps > 0 and min_pts >= 1.
pub fn dbscan_frame(frame: &Frame, eps: f64, min_pts: usize) -> Vec<ClusterLabel> {
    debug_assert!(eps > 0.0 && min_pts >= 1);
    let points: Vec<Vec2> = frame.states.iter().map(|s| s.position).collect();
    let index = CellIndex::build(&points, eps);

    const UNVISITED: usize = usize::MAX;
    const NOISE: usize = usize::MAX - 1;
    let mut labels = vec![UNVISITED; points.len()];
    let mut next_cluster = 0usize;

    for i in 0..points.len() {
        if labels[i] != UNVISITED {
            continue;
        }
        let neighborhood = index.region(&points, i);
        if neighborhood.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = cluster;
        let mut seeds: VecDeque<usize> = neighborhood.into_iter().filter(|&j| j != i).collect();
        while let Some(j) = seeds.pop_front() {
            if labels[j] == NOISE {
                // border point: density-reachable but not core
                labels[j] = cluster;
                continue;
            }
            if labels[j] != UNVISITED {
                continue;
            }
            labels[j] = cluster;
            let reach = index.region(&points, j);
            if reach.len() >= min_pts {
                seeds.extend(reach.into_iter().filter(|&k| labels[k] == UNVISITED || labels[k] == NOISE));
            }
        }
    }

    frame
        .states
        .iter()
        .zip(&labels)
        .map(|(s, &l)| ClusterLabel {
            frame_index: frame.index,
            agent_id: s.id,
            label: if l == NOISE { None } else { Some(l) },
        })
        .collect()
}

/// Count per-pair co-clustering over the observed frames and keep the pairs
/// exceeding `sigma` strictly.
pub fn detect_groups(observed_frames: &[Frame], eps: f64, min_pts: usize, sigma: usize) -> GroupAssignment {
    let mut co_counts: BTreeMap<(AgentId, AgentId), usize> = BTreeMap::new();
    for frame in observed_frames {
        let mut clusters: BTreeMap<usize, Vec<AgentId>> = BTreeMap::new();
        for label in dbscan_frame(frame, eps, min_pts) {
            if let Some(c) = label.label {
                clusters.entry(c).or_default().push(label.agent_id);
            }
        }
        for members in clusters.values() {
            // members ascend because labels come out in agent-id order
            for (k, &a) in members.iter().enumerate() {
                for &b in &members[k + 1..] {
                    *co_counts.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
    }
    let pairs = co_counts.iter().filter(|&(_, &n)| n > sigma).map(|(&p, _)| p).collect();
    GroupAssignment { sigma, pairs, co_counts }
}

/// Pair predicate view of an assignment: true means "mask this pair's
/// repulsion". Symmetric by construction.
pub fn group_mask(assignment: &GroupAssignment) -> impl Fn(AgentId, AgentId) -> bool + '_ {
    |a, b| assignment.contains(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AgentState;
    use proptest::prelude::*;

    fn frame(index: i64, positions: &[(AgentId, f64, f64)]) -> Frame {
        let mut states: Vec<AgentState> = positions
            .iter()
            .map(|&(id, x, y)| AgentState { id, position: Vec2::new(x, y), velocity: Vec2::ZERO })
            .collect();
        states.sort_by_key(|s| s.id);
        Frame { index, states }
    }

    #[test]
    fn lone_agent_is_noise() {
        let labels = dbscan_frame(&frame(0, &[(1, 0.0, 0.0)]), 1.0, 2);
        assert_eq!(labels[0].label, None);
    }

    #[test]
    fn density_chain_forms_one_cluster() {
        let f = frame(0, &[(1, 0.0, 0.0), (2, 0.5, 0.0), (3, 1.0, 0.0)]);
        let labels = dbscan_frame(&f, 0.6, 2);
        assert!(labels.iter().all(|l| l.label == Some(0)), "{labels:?}");
    }

    #[test]
    fn distant_agents_are_noise() {
        let f = frame(0, &[(1, 0.0, 0.0), (2, 10.0, 0.0)]);
        let labels = dbscan_frame(&f, 1.0, 2);
        assert!(labels.iter().all(|l| l.label.is_none()));
    }

    #[test]
    fn boundary_distance_counts_as_neighbor() {
        // exactly eps apart: <= comparison keeps them together
        let f = frame(0, &[(1, 0.0, 0.0), (2, 1.0, 0.0)]);
        let labels = dbscan_frame(&f, 1.0, 2);
        assert_eq!(labels[0].label, labels[1].label);
        assert!(labels[0].label.is_some());
    }

    #[test]
    fn separate_clusters_get_distinct_labels() {
        let f = frame(0, &[(1, 0.0, 0.0), (2, 0.4, 0.0), (3, 8.0, 0.0), (4, 8.4, 0.0)]);
        let labels = dbscan_frame(&f, 1.0, 2);
        assert_eq!(labels[0].label, labels[1].label);
        assert_eq!(labels[2].label, labels[3].label);
        assert_ne!(labels[0].label, labels[2].label);
    }

    /// Frames where agents 1 and 2 sit together in the first `close` of 8
    /// frames and far apart in the rest.
    fn dyad_frames(close: usize) -> Vec<Frame> {
        (0..8)
            .map(|k| {
                if k < close {
                    frame(k as i64, &[(1, 0.0, 0.0), (2, 0.5, 0.0)])
                } else {
                    frame(k as i64, &[(1, 0.0, 0.0), (2, 50.0, 0.0)])
                }
            })
            .collect()
    }

    #[test]
    fn four_of_eight_is_not_grouped() {
        let assignment = detect_groups(&dyad_frames(4), 1.0, 2, 4);
        assert!(!assignment.contains(1, 2));
        // the near-miss still shows up in the counts
        assert_eq!(assignment.co_counts().next(), Some(((1, 2), 4)));
    }

    #[test]
    fn five_of_eight_is_grouped() {
        let assignment = detect_groups(&dyad_frames(5), 1.0, 2, 4);
        assert!(assignment.contains(1, 2));
        assert!(assignment.contains(2, 1), "mask must be symmetric");
    }

    #[test]
    fn never_colocated_is_not_grouped() {
        let assignment = detect_groups(&dyad_frames(0), 1.0, 2, 4);
        assert!(assignment.is_empty());
        assert_eq!(assignment.co_counts().count(), 0);
    }

    #[test]
    fn grouping_is_not_transitive() {
        // 1-2 together early, 2-3 together late, 1-3 only in the overlap
        let mut frames = Vec::new();
        for k in 0..3 {
            frames.push(frame(k, &[(1, 0.0, 0.0), (2, 0.5, 0.0), (3, 20.0, 0.0)]));
        }
        for k in 3..5 {
            frames.push(frame(k, &[(1, 0.0, 0.0), (2, 0.5, 0.0), (3, 1.0, 0.0)]));
        }
        for k in 5..8 {
            frames.push(frame(k, &[(1, 0.0, 0.0), (2, 10.0, 0.0), (3, 10.5, 0.0)]));
        }
        let assignment = detect_groups(&frames, 0.6, 2, 4);
        assert!(assignment.contains(1, 2));
        assert!(assignment.contains(2, 3));
        assert!(!assignment.contains(1, 3));
    }

    #[test]
    fn mask_answers_match_assignment() {
        let assignment = detect_groups(&dyad_frames(8), 1.0, 2, 4);
        let mask = group_mask(&assignment);
        assert!(mask(1, 2) && mask(2, 1));
        assert!(!mask(1, 99));
    }

    proptest! {
        // raising sigma never adds pairs
        #[test]
        fn grouping_monotone_in_sigma(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let frames: Vec<Frame> = (0..8)
                .map(|k| {
                    let pts: Vec<(AgentId, f64, f64)> = (0..12)
                        .map(|id| (id, rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)))
                        .collect();
                    frame(k, &pts)
                })
                .collect();
            let mut previous: Option<BTreeSet<(AgentId, AgentId)>> = None;
            for sigma in 0..=8 {
                let pairs: BTreeSet<_> = detect_groups(&frames, 1.0, 2, sigma).pairs().collect();
                if let Some(prev) = &previous {
                    prop_assert!(pairs.is_subset(prev));
                }
                previous = Some(pairs);
            }
        }

        // every cluster owns at least one core point, and core points pull
        // their whole neighborhood into their own cluster
        #[test]
        fn clusters_are_density_valid(seed in 0u64..300) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let n = rng.random_range(1..60usize);
            let pts: Vec<(AgentId, f64, f64)> = (0..n)
                .map(|id| (id as AgentId, rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)))
                .collect();
            let f = frame(0, &pts);
            let eps = 1.0;
            let min_pts = 3;
            let labels = dbscan_frame(&f, eps, min_pts);
            let positions: Vec<Vec2> = f.states.iter().map(|s| s.position).collect();
            let is_core = |i: usize| {
                positions.iter().filter(|p| (**p - positions[i]).norm() <= eps).count() >= min_pts
            };
            let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, l) in labels.iter().enumerate() {
                if let Some(c) = l.label {
                    clusters.entry(c).or_default().push(i);
                } else {
                    // noise points must not be core
                    prop_assert!(!is_core(i));
                }
            }
            for members in clusters.values() {
                prop_assert!(members.iter().any(|&i| is_core(i)));
            }
            // a core point's neighbors all landed in some cluster (its own,
            // or an earlier one that claimed the border point first)
            for i in 0..positions.len() {
                if is_core(i) {
                    for j in 0..positions.len() {
                        if (positions[j] - positions[i]).norm() <= eps {
                            prop_assert!(labels[j].label.is_some());
                        }
                    }
                }
            }
        }
    }
}
