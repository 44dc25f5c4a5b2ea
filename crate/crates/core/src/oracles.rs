//! Exponential-time exact solvers used as ground truth at desk scale.
//!
//! Every oracle checks its budget before enumerating and refuses instead of
//! returning an approximation.

use std::time::{Duration, Instant};

use itertools::Itertools;
use serde::Serialize;

use crate::cover_search::CoverProblem;
use crate::disk_cover::{discrete_candidates, nondiscrete_candidates, DiskCover};
use crate::energy_tsp::{tour_cost, Tour};
use crate::error::{Error, Result};
use crate::geometry::{check_alpha, PointSet, COVER_SLACK};
use crate::multicast::{MulticastInstance, RangeAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleBudget {
    pub max_points: usize,
    pub time_limit: Option<Duration>,
}

impl OracleBudget {
    pub const COVER_POINTS: usize = 12;
    pub const MULTICAST_POINTS: usize = 12;
    pub const TSP_POINTS: usize = 9;
    /// Largest `k·c` the multicast oracle will enumerate.
    pub const MULTICAST_SENDERS: usize = 4;

    pub fn cover() -> Self {
        Self::points(Self::COVER_POINTS)
    }

    pub fn multicast() -> Self {
        Self::points(Self::MULTICAST_POINTS)
    }

    pub fn tsp() -> Self {
        Self::points(Self::TSP_POINTS)
    }

    pub fn points(max_points: usize) -> Self {
        Self {
            max_points,
            time_limit: None,
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    fn admit(&self, problem: &'static str, size: usize) -> Result<Option<Instant>> {
        if size > self.max_points {
            return Err(Error::BudgetExceeded {
                problem,
                size,
                cap: self.max_points,
            });
        }
        Ok(self.time_limit.map(|t| Instant::now() + t))
    }

    fn timed_out(&self, deadline: Option<Instant>) -> Result<()> {
        match (deadline, self.time_limit) {
            (Some(d), Some(limit)) if Instant::now() > d => Err(Error::TimeLimit(limit)),
            _ => Ok(()),
        }
    }
}

/// True optimum of the k-disk cover with at most `c` outliers on the raw
/// point set, by the same exact search the coreset solvers use.
pub fn exact_disk_cover(
    ps: &PointSet,
    k: usize,
    c: usize,
    alpha: f64,
    discrete: bool,
    budget: &OracleBudget,
) -> Result<DiskCover> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !discrete && c > 0 {
        return Err(Error::Unsupported(
            "outliers are only supported for the discrete variant".into(),
        ));
    }
    let deadline = budget.admit("disk cover", ps.len())?;
    let (balls, centers) = if discrete {
        let (b, c) = discrete_candidates(ps);
        (b, c.into_iter().map(Some).collect::<Vec<_>>())
    } else {
        let b = nondiscrete_candidates(ps)?;
        let c = vec![None; b.len()];
        (b, c)
    };
    let problem = CoverProblem::new(
        ps.points(),
        vec![1; ps.len()],
        balls,
        alpha,
        k.min(ps.len()),
        c,
    )
    .with_deadline(deadline);
    let result = problem.solve();
    if result.timed_out {
        return Err(Error::TimeLimit(budget.time_limit.unwrap_or_default()));
    }
    let sol = result.solution.expect("some cover always exists");
    Ok(DiskCover {
        balls: sol
            .chosen
            .iter()
            .map(|&i| problem.candidates()[i].clone())
            .collect(),
        cost: sol.cost,
        uncovered: sol.uncovered,
        center_indices: sol.chosen.iter().map(|&i| centers[i]).collect(),
    })
}

struct MulticastEnumeration<'a> {
    dist: Vec<Vec<f64>>,
    inst: &'a MulticastInstance,
    best: Option<(f64, Vec<f64>)>,
    deadline: Option<Instant>,
    budget: &'a OracleBudget,
    visited: u64,
}

impl MulticastEnumeration<'_> {
    fn reaches(&self, ranges: &[f64]) -> bool {
        let n = self.dist.len();
        let mut depth = vec![usize::MAX; n];
        depth[self.inst.source] = 0;
        let mut frontier = vec![self.inst.source];
        for hop in 1..=self.inst.hops {
            let mut next = Vec::new();
            for &p in &frontier {
                for (q, d) in depth.iter_mut().enumerate() {
                    if *d == usize::MAX && ranges[p] >= self.dist[p][q] - COVER_SLACK {
                        *d = hop;
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        self.inst.receivers.iter().all(|&r| depth[r] != usize::MAX)
    }

    /// Tries every range for `senders[pos..]`, ascending, stopping once the
    /// partial cost reaches the best known.
    fn assign(
        &mut self,
        senders: &[usize],
        pos: usize,
        ranges: &mut Vec<f64>,
        cost: f64,
    ) -> Result<()> {
        self.visited += 1;
        if self.visited.is_multiple_of(4096) {
            self.budget.timed_out(self.deadline)?;
        }
        if pos == senders.len() {
            if self.best.as_ref().is_none_or(|b| cost < b.0) && self.reaches(ranges) {
                self.best = Some((cost, ranges.clone()));
            }
            return Ok(());
        }
        let p = senders[pos];
        let mut options: Vec<f64> = self.dist[p].iter().copied().filter(|&d| d > 0.0).collect();
        options.sort_by(f64::total_cmp);
        options.dedup();
        for r in options {
            let next = cost + r.powf(self.inst.alpha);
            if self.best.as_ref().is_some_and(|b| next >= b.0) {
                break;
            }
            ranges[p] = r;
            self.assign(senders, pos + 1, ranges, next)?;
        }
        ranges[p] = 0.0;
        Ok(())
    }
}

/// True optimum of the k-hop multicast on the original stations: every
/// sender set of size at most `k·c` containing the source, every sender
/// range drawn from its distances to the other stations.
pub fn exact_multicast(inst: &MulticastInstance, budget: &OracleBudget) -> Result<RangeAssignment> {
    let deadline = budget.admit("multicast", inst.stations.len())?;
    let max_senders = inst.max_senders();
    if max_senders > OracleBudget::MULTICAST_SENDERS {
        return Err(Error::BudgetExceeded {
            problem: "multicast senders (k*c)",
            size: max_senders,
            cap: OracleBudget::MULTICAST_SENDERS,
        });
    }
    let n = inst.stations.len();
    let pts = inst.stations.points();
    let mut search = MulticastEnumeration {
        dist: pts
            .iter()
            .map(|p| pts.iter().map(|q| p.distance(q)).collect())
            .collect(),
        inst,
        best: None,
        deadline,
        budget,
        visited: 0,
    };
    let mut ranges = vec![0.0; n];
    if search.reaches(&ranges) {
        return Ok(RangeAssignment::zeros(n));
    }
    let others: Vec<usize> = (0..n).filter(|&i| i != inst.source).collect();
    for extra in 0..max_senders.min(n) {
        for subset in others.iter().copied().combinations(extra) {
            let mut senders = vec![inst.source];
            senders.extend(subset);
            senders.sort_unstable();
            search.assign(&senders, 0, &mut ranges, 0.0)?;
        }
    }
    let (_, ranges) = search
        .best
        .expect("direct broadcast from the source is valid");
    Ok(RangeAssignment::from_ranges(ranges, inst.alpha))
}

/// Optimal tour by enumerating the `(n−1)!/2` tours that start at 0 and
/// whose second element is smaller than the last.
pub fn exact_tsp(ps: &PointSet, alpha: f64, budget: &OracleBudget) -> Result<Tour> {
    check_alpha(alpha)?;
    let deadline = budget.admit("tsp", ps.len())?;
    let n = ps.len();
    if n <= 3 {
        let order: Vec<usize> = (0..n).collect();
        let cost = tour_cost(&order, ps, alpha)?;
        return Ok(Tour { order, cost });
    }
    let mut best: Option<Tour> = None;
    for (count, rest) in (1..n).permutations(n - 1).enumerate() {
        if count % 1024 == 0 {
            budget.timed_out(deadline)?;
        }
        if rest[0] > rest[n - 2] {
            continue;
        }
        let mut order = Vec::with_capacity(n);
        order.push(0);
        order.extend(rest);
        let cost = tour_cost(&order, ps, alpha)?;
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(Tour { order, cost });
        }
    }
    Ok(best.expect("n > 3 has at least one tour"))
}
