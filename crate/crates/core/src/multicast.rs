//! k-hop multicast: give stations transmission ranges so that every receiver
//! is reachable from the source in at most `k` hops, minimising `Σ r(p)^α`.
//!
//! The instance is normalised so the farthest receiver sits at distance one
//! from the source, snapped onto a square grid of width
//! `Δ = ε_int / (√2·k·c)`, solved exactly on the occupied grid vertices and
//! lifted back by adding `√2·Δ` to every sender range.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    approx_eq, check_alpha, snap_nearest, GridSpec, Point, PointSet, COVER_SLACK,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MulticastInstance {
    pub stations: PointSet,
    pub source: usize,
    /// Sorted, deduplicated receiver indices.
    pub receivers: Vec<usize>,
    pub hops: usize,
    pub alpha: f64,
    pub epsilon: f64,
}

impl MulticastInstance {
    pub fn new(
        stations: PointSet,
        source: usize,
        receivers: &[usize],
        hops: usize,
        alpha: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let n = stations.len();
        if source >= n {
            return Err(Error::IndexOutOfRange {
                index: source,
                len: n,
            });
        }
        let mut receivers = receivers.to_vec();
        receivers.sort_unstable();
        receivers.dedup();
        if receivers.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one receiver required".into(),
            ));
        }
        if let Some(&bad) = receivers.iter().find(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        if hops == 0 {
            return Err(Error::InvalidParameter(
                "hop bound k must be at least 1".into(),
            ));
        }
        check_alpha(alpha)?;
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            stations,
            source,
            receivers,
            hops,
            alpha,
            epsilon,
        })
    }

    /// Per-transformation error `ε/(4α)`, so that two liftings compose to
    /// `(1+ε_int)^{2α} ≤ 1+ε`.
    pub fn epsilon_internal(&self) -> f64 {
        self.epsilon / (4.0 * self.alpha)
    }

    /// Upper bound `k·c` on the number of useful senders.
    pub fn max_senders(&self) -> usize {
        self.hops * self.receivers.len()
    }
}

/// Transmission range per point and the resulting energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeAssignment {
    pub ranges: Vec<f64>,
    pub cost: f64,
}

impl RangeAssignment {
    pub fn zeros(n: usize) -> Self {
        Self {
            ranges: vec![0.0; n],
            cost: 0.0,
        }
    }

    pub fn from_ranges(ranges: Vec<f64>, alpha: f64) -> Self {
        let cost = ranges.iter().map(|r| r.powf(alpha)).sum();
        Self { ranges, cost }
    }

    pub fn senders(&self) -> Vec<usize> {
        (0..self.ranges.len())
            .filter(|&i| self.ranges[i] > 0.0)
            .collect()
    }

    pub fn is_cost_consistent(&self, alpha: f64) -> bool {
        approx_eq(
            self.cost,
            Self::from_ranges(self.ranges.clone(), alpha).cost,
        )
    }
}

fn has_edge(points: &[Point], ranges: &[f64], p: usize, q: usize) -> bool {
    ranges[p] >= points[p].distance(&points[q]) - COVER_SLACK
}

/// Breadth-first hop depths from `source` (depth 0) up to `max_hops`, with
/// the BFS parent of every reached point.
pub fn hop_tree(
    points: &[Point],
    ranges: &[f64],
    source: usize,
    max_hops: usize,
) -> Vec<Option<(usize, Option<usize>)>> {
    let n = points.len();
    let mut seen = vec![None; n];
    seen[source] = Some((0, None));
    let mut queue = VecDeque::from([source]);
    while let Some(p) = queue.pop_front() {
        let depth = seen[p].unwrap().0;
        if depth == max_hops {
            continue;
        }
        for (q, slot) in seen.iter_mut().enumerate() {
            if slot.is_none() && has_edge(points, ranges, p, q) {
                *slot = Some((depth + 1, Some(p)));
                queue.push_back(q);
            }
        }
    }
    seen
}

/// True iff every receiver is reached from `source` within `max_hops` edges
/// of the communication graph `p → q ⇔ r(p) ≥ |pq|`.
pub fn reaches_all(
    points: &[Point],
    ranges: &[f64],
    source: usize,
    receivers: &[usize],
    max_hops: usize,
) -> bool {
    let tree = hop_tree(points, ranges, source, max_hops);
    receivers.iter().all(|&r| tree[r].is_some())
}

pub fn check_valid(ranges: &RangeAssignment, inst: &MulticastInstance) -> bool {
    ranges.ranges.len() == inst.stations.len()
        && reaches_all(
            inst.stations.points(),
            &ranges.ranges,
            inst.source,
            &inst.receivers,
            inst.hops,
        )
}

/// Edges `(parent, child)` of the BFS tree restricted to the paths from the
/// source to the receivers, ordered by child index. `None` if invalid.
pub fn witness_tree(
    ranges: &RangeAssignment,
    inst: &MulticastInstance,
) -> Option<Vec<(usize, usize)>> {
    let tree = hop_tree(
        inst.stations.points(),
        &ranges.ranges,
        inst.source,
        inst.hops,
    );
    let mut keep = vec![false; tree.len()];
    for &r in &inst.receivers {
        let mut cur = r;
        tree[cur]?;
        while let Some((_, Some(parent))) = tree[cur] {
            if keep[cur] {
                break;
            }
            keep[cur] = true;
            cur = parent;
        }
    }
    Some(
        (0..tree.len())
            .filter(|&q| keep[q])
            .map(|q| (tree[q].unwrap().1.unwrap(), q))
            .collect(),
    )
}

/// Representative grid vertices of a normalised multicast instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastCoreset {
    /// Occupied grid vertices, in normalised coordinates (source at origin).
    pub reps: PointSet,
    pub source_rep: usize,
    /// Sorted grid vertices holding at least one receiver.
    pub receiver_reps: Vec<usize>,
    pub grid: GridSpec,
    /// Distance from the source to its farthest receiver (1 when every
    /// receiver coincides with the source).
    pub scale: f64,
    /// Original index → representative; `None` for stations too far away to
    /// ever be worth reaching.
    pub assignment: Vec<Option<usize>>,
    pub source_original: usize,
    pub hops: usize,
    /// Number of receivers `c` of the original instance.
    pub receiver_count: usize,
    pub alpha: f64,
    pub epsilon_internal: f64,
}

impl MulticastCoreset {
    pub fn delta(&self) -> f64 {
        self.grid.cell_width()
    }

    /// Original station standing in for each representative: the source for
    /// its own vertex, otherwise the lowest original index snapped there.
    pub fn anchors(&self) -> Vec<usize> {
        let mut anchor = vec![usize::MAX; self.reps.len()];
        for (orig, rep) in self.assignment.iter().enumerate() {
            if let Some(rep) = *rep {
                anchor[rep] = anchor[rep].min(orig);
            }
        }
        anchor[self.source_rep] = self.source_original;
        anchor
    }

    pub fn max_senders(&self) -> usize {
        (self.hops * self.receiver_count).min(self.reps.len())
    }

    /// True iff `ranges` (on the representatives) is a valid multicast.
    pub fn is_valid(&self, ranges: &[f64]) -> bool {
        reaches_all(
            self.reps.points(),
            ranges,
            self.source_rep,
            &self.receiver_reps,
            self.hops,
        )
    }
}

pub fn build_multicast_coreset(inst: &MulticastInstance) -> Result<MulticastCoreset> {
    inst.stations.require_dim(2)?;
    let s = inst.stations.points()[inst.source].clone();
    let scale = inst
        .receivers
        .iter()
        .map(|&r| s.distance(&inst.stations.points()[r]))
        .fold(0.0, f64::max);
    let eps = inst.epsilon_internal();
    let c = inst.receivers.len();
    let delta = eps / (2f64.sqrt() * (inst.hops * c) as f64);
    let grid = GridSpec::new(delta, Point::xy(0.0, 0.0))?;
    let norm = if scale > 0.0 { scale } else { 1.0 };
    // A station at normalised distance d needs at least d^α / k^(α-1) energy
    // to be reached in k hops, more than the broadcast cost 1 once
    // d > k^(1-1/α).
    let reach = (inst.hops as f64).powf(1.0 - 1.0 / inst.alpha) * (1.0 + 1e-9);

    let mut kept = Vec::new();
    let mut kept_index = vec![None; inst.stations.len()];
    for (i, p) in inst.stations.iter().enumerate() {
        let q = Point::xy(
            (p.coords()[0] - s.coords()[0]) / norm,
            (p.coords()[1] - s.coords()[1]) / norm,
        );
        let inside = if scale > 0.0 {
            q.distance(&Point::xy(0.0, 0.0)) <= reach
        } else {
            *p == s
        };
        if i == inst.source || inside {
            kept_index[i] = Some(kept.len());
            kept.push(if i == inst.source {
                Point::xy(0.0, 0.0)
            } else {
                q
            });
        }
    }
    let snapped = snap_nearest(&PointSet::new(kept)?, &grid)?;
    let assignment: Vec<Option<usize>> = kept_index
        .iter()
        .map(|k| k.map(|k| snapped.assignment[k]))
        .collect();
    let source_rep = assignment[inst.source].expect("source is always kept");
    let mut receiver_reps: Vec<usize> = inst
        .receivers
        .iter()
        .map(|&r| assignment[r].expect("receivers lie within unit distance"))
        .collect();
    receiver_reps.sort_unstable();
    receiver_reps.dedup();

    Ok(MulticastCoreset {
        reps: snapped.reps,
        source_rep,
        receiver_reps,
        grid,
        scale: norm,
        assignment,
        source_original: inst.source,
        hops: inst.hops,
        alpha: inst.alpha,
        epsilon_internal: eps,
        receiver_count: c,
    })
}

/// Work done by [`solve_multicast`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MulticastStats {
    /// Candidate ranges summed over all potential senders.
    pub candidate_ranges: usize,
    /// Rungs of the geometric ladder (zero in exact-range mode).
    pub ladder_rungs: usize,
    pub nodes: u64,
}

/// `{d_min·(1+ε)^j} ∩ [d_min, d_max]`, always ending in `d_max`.
pub fn range_ladder(d_min: f64, d_max: f64, epsilon: f64) -> Vec<f64> {
    let mut rungs = Vec::new();
    let mut r = d_min;
    while r < d_max && !approx_eq(r, d_max) {
        rungs.push(r);
        r *= 1.0 + epsilon;
    }
    rungs.push(d_max);
    rungs
}

fn distance_matrix(points: &[Point]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| p.distance(q)).collect())
        .collect()
}

/// Positive distances from each point to the others, sorted and deduplicated.
fn exact_candidates(dist: &[Vec<f64>]) -> Vec<Vec<f64>> {
    dist.iter()
        .map(|row| {
            let mut c: Vec<f64> = row.iter().copied().filter(|&d| d > 0.0).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect()
}

struct Found {
    cost: f64,
    ranges: Vec<f64>,
}

struct RangeSearch<'a> {
    dist: &'a [Vec<f64>],
    source: usize,
    receivers: &'a [usize],
    hops: usize,
    max_senders: usize,
    candidates: Vec<Vec<(f64, f64)>>,
    upper: f64,
}

struct SearchState {
    ranges: Vec<f64>,
    best: Option<Found>,
    nodes: u64,
    depth: Vec<usize>,
    queue: Vec<usize>,
}

impl RangeSearch<'_> {
    fn valid(&self, st: &mut SearchState) -> bool {
        let n = self.dist.len();
        st.depth.clear();
        st.depth.resize(n, usize::MAX);
        st.queue.clear();
        st.depth[self.source] = 0;
        st.queue.push(self.source);
        let mut head = 0;
        while head < st.queue.len() {
            let p = st.queue[head];
            head += 1;
            let d = st.depth[p];
            if d == self.hops {
                continue;
            }
            for q in 0..n {
                if st.depth[q] == usize::MAX && st.ranges[p] >= self.dist[p][q] - COVER_SLACK {
                    st.depth[q] = d + 1;
                    st.queue.push(q);
                }
            }
        }
        self.receivers.iter().all(|&r| st.depth[r] != usize::MAX)
    }

    fn bound(&self, st: &SearchState) -> f64 {
        st.best
            .as_ref()
            .map_or(self.upper, |b| b.cost.min(self.upper))
            * (1.0 + 1e-12)
    }

    fn extend(&self, st: &mut SearchState, start: usize, cost: f64, senders: usize) {
        st.nodes += 1;
        if self.valid(st) {
            if st.best.as_ref().is_none_or(|b| cost < b.cost) {
                st.best = Some(Found {
                    cost,
                    ranges: st.ranges.clone(),
                });
            }
            return;
        }
        if senders == self.max_senders {
            return;
        }
        for i in start..self.dist.len() {
            if i == self.source {
                continue;
            }
            for &(r, pw) in &self.candidates[i] {
                let next = cost + pw;
                if next > self.bound(st) {
                    break;
                }
                st.ranges[i] = r;
                self.extend(st, i + 1, next, senders + 1);
            }
            st.ranges[i] = 0.0;
        }
    }

    /// Minimum over (source range, further senders in ascending index,
    /// ranges ascending); the first optimum in that order wins.
    fn run(&self) -> (Option<Found>, u64) {
        let n = self.dist.len();
        let fresh = || SearchState {
            ranges: vec![0.0; n],
            best: None,
            nodes: 0,
            depth: Vec::with_capacity(n),
            queue: Vec::with_capacity(n),
        };
        let mut st = fresh();
        if self.valid(&mut st) {
            return (
                Some(Found {
                    cost: 0.0,
                    ranges: st.ranges,
                }),
                1,
            );
        }
        let results: Vec<(Option<Found>, u64)> = self.candidates[self.source]
            .par_iter()
            .map(|&(r, pw)| {
                let mut st = fresh();
                if pw <= self.upper * (1.0 + 1e-12) {
                    st.ranges[self.source] = r;
                    self.extend(&mut st, 0, pw, 1);
                }
                (st.best, st.nodes)
            })
            .collect();
        let nodes = 1 + results.iter().map(|r| r.1).sum::<u64>();
        let best = results
            .into_iter()
            .fold(None, |acc: Option<Found>, (f, _)| match (acc, f) {
                (Some(a), Some(b)) => Some(if b.cost < a.cost { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            });
        (best, nodes)
    }
}

/// Largest representative set [`solve_multicast`] accepts; its distance and
/// candidate tables grow quadratically.
pub const MAX_REPRESENTATIVES: usize = 4096;

/// Exact minimum-energy multicast on the representatives: at most
/// `min(k·c, |S|)` senders including the source, each sender's range taken
/// from its distances to the other representatives (`ladder = false`) or
/// those distances rounded up to the geometric ladder with ratio `1+ε_int`.
pub fn solve_multicast(
    cs: &MulticastCoreset,
    ladder: bool,
) -> Result<(RangeAssignment, MulticastStats)> {
    let pts = cs.reps.points();
    if pts.len() > MAX_REPRESENTATIVES {
        return Err(Error::BudgetExceeded {
            problem: "multicast search",
            size: pts.len(),
            cap: MAX_REPRESENTATIVES,
        });
    }
    let dist = distance_matrix(pts);
    let mut candidates = exact_candidates(&dist);
    let mut ladder_rungs = 0;
    if ladder {
        let d_min = candidates
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let d_max = candidates.iter().flatten().copied().fold(0.0, f64::max);
        if d_max > 0.0 {
            let rungs = range_ladder(d_min, d_max, cs.epsilon_internal);
            ladder_rungs = rungs.len();
            for c in &mut candidates {
                for r in c.iter_mut() {
                    let j = rungs.partition_point(|&x| x < *r && !approx_eq(x, *r));
                    *r = rungs[j.min(rungs.len() - 1)];
                }
                c.dedup();
            }
        }
    }
    // Direct broadcast with the smallest candidate range reaching every
    // receiver rep is always valid.
    let farthest = cs
        .receiver_reps
        .iter()
        .map(|&r| dist[cs.source_rep][r])
        .fold(0.0, f64::max);
    let upper = candidates[cs.source_rep]
        .iter()
        .copied()
        .find(|&r| r >= farthest - COVER_SLACK)
        .unwrap_or(0.0)
        .powf(cs.alpha);
    let search = RangeSearch {
        dist: &dist,
        source: cs.source_rep,
        receivers: &cs.receiver_reps,
        hops: cs.hops,
        max_senders: cs.max_senders(),
        candidates: candidates
            .iter()
            .map(|c| c.iter().map(|&r| (r, r.powf(cs.alpha))).collect())
            .collect(),
        upper,
    };
    let (found, nodes) = search.run();
    let found = found.expect("broadcasting from the source to the farthest receiver is valid");
    let stats = MulticastStats {
        candidate_ranges: candidates.iter().map(Vec::len).sum(),
        ladder_rungs,
        nodes,
    };
    Ok((RangeAssignment::from_ranges(found.ranges, cs.alpha), stats))
}

/// Maps a range assignment on the representatives to the original
/// stations: each sender vertex hands `(r'(g) + √2·Δ)·scale` to its anchor
/// station, every other station gets range zero.
pub fn lift_ranges(ranges: &RangeAssignment, cs: &MulticastCoreset) -> RangeAssignment {
    let anchors = cs.anchors();
    let slack = 2f64.sqrt() * cs.delta();
    let mut lifted = vec![0.0; cs.assignment.len()];
    for (g, &r) in ranges.ranges.iter().enumerate() {
        if r > 0.0 {
            lifted[anchors[g]] = (r + slack) * cs.scale;
        }
    }
    RangeAssignment::from_ranges(lifted, cs.alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MulticastOutcome {
    /// Assignment on the original stations.
    pub ranges: RangeAssignment,
    pub tree_edges: Vec<(usize, usize)>,
    /// Optimal cost on the coreset, in original units.
    pub coreset_cost: f64,
    pub coreset_size: usize,
    pub delta: f64,
    pub scale: f64,
    pub ladder: bool,
    pub stats: MulticastStats,
}

/// Coreset construction, exact solve on the grid vertices, lift.
pub fn approximate_multicast(inst: &MulticastInstance, ladder: bool) -> Result<MulticastOutcome> {
    let cs = build_multicast_coreset(inst)?;
    let (on_coreset, stats) = solve_multicast(&cs, ladder)?;
    let ranges = lift_ranges(&on_coreset, &cs);
    let tree_edges = witness_tree(&ranges, inst)
        .ok_or_else(|| Error::InvalidParameter("lifted assignment failed validation".into()))?;
    Ok(MulticastOutcome {
        coreset_cost: on_coreset.cost * cs.scale.powf(inst.alpha),
        ranges,
        tree_edges,
        coreset_size: cs.reps.len(),
        delta: cs.delta(),
        scale: cs.scale,
        ladder,
        stats,
    })
}
