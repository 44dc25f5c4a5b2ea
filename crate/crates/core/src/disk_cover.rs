//! k-disk cover: choose at most `k` balls covering the stations (all but at
//! most `c` outliers) while minimising `Σ rᵢ^α`.
//!
//! The pipeline estimates the optimum with a farthest-point k-center
//! traversal, sizes a grid from that estimate, snaps the input to grid
//! corners, solves the small representative set exactly and grows the radii
//! so the solution covers the original stations again.

use serde::Serialize;

use crate::cover_search::{CoverProblem, CoverSolution};
use crate::error::{Error, Result};
use crate::geometry::{
    approx_eq, check_alpha, circumball, diametral_ball, snap_corner, Ball, GridSpec, Point,
    PointSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverConfig {
    pub k: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub outliers: usize,
    /// Restrict centers to input points.
    pub discrete: bool,
}

impl CoverConfig {
    pub fn new(k: usize, alpha: f64, epsilon: f64) -> Self {
        Self {
            k,
            alpha,
            epsilon,
            outliers: 0,
            discrete: true,
        }
    }

    pub fn with_outliers(mut self, c: usize) -> Self {
        self.outliers = c;
        self
    }

    pub fn non_discrete(mut self) -> Self {
        self.discrete = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        check_alpha(self.alpha)?;
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidEpsilon(self.epsilon));
        }
        if !self.discrete && self.outliers > 0 {
            return Err(Error::Unsupported(
                "outliers are only supported for the discrete variant".into(),
            ));
        }
        Ok(())
    }

    /// `k + c`: outliers are treated as extra radius-zero balls when sizing the grid.
    pub fn k_effective(&self) -> usize {
        self.k + self.outliers
    }
}

/// Representatives produced by grid snapping, plus what is needed to lift
/// a solution back to the original stations.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset {
    /// The stations the coreset was built from.
    pub original: PointSet,
    pub reps: PointSet,
    /// Original index → representative index.
    pub assignment: Vec<usize>,
    /// Number of original stations per representative.
    pub multiplicity: Vec<usize>,
    /// `None` when the instance is coverable at zero cost and the input is
    /// its own coreset.
    pub grid: Option<GridSpec>,
    pub opt_estimate: f64,
    pub k_effective: usize,
    pub discrete: bool,
}

impl Coreset {
    pub fn delta(&self) -> f64 {
        self.grid.as_ref().map_or(0.0, GridSpec::cell_width)
    }

    /// Radius growth applied when lifting: `√d·δ`, doubled for discrete
    /// solutions whose centers also move.
    pub fn lift_slack(&self) -> f64 {
        let d = self.reps.dim() as f64;
        let per_direction = d.sqrt() * self.delta();
        if self.discrete {
            2.0 * per_direction
        } else {
            per_direction
        }
    }

    /// Lowest original index snapped to each representative.
    fn anchors(&self) -> Vec<usize> {
        let mut anchor = vec![usize::MAX; self.reps.len()];
        for (orig, &rep) in self.assignment.iter().enumerate() {
            anchor[rep] = anchor[rep].min(orig);
        }
        anchor
    }
}

/// A set of at most `k` balls with their total α-power cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskCover {
    pub balls: Vec<Ball>,
    pub cost: f64,
    /// Indices of points the cover is allowed to miss.
    pub uncovered: Vec<usize>,
    /// For each ball, the index of the point its center coincides with
    /// (always set by the discrete solvers).
    #[serde(skip)]
    pub center_indices: Vec<Option<usize>>,
}

impl DiskCover {
    pub fn recomputed_cost(&self, alpha: f64) -> f64 {
        self.balls.iter().map(|b| b.cost(alpha)).sum()
    }

    /// Cost is recompute-stable and every point outside `uncovered` lies in some ball.
    pub fn is_feasible(&self, ps: &PointSet, alpha: f64, max_uncovered: usize) -> bool {
        if !approx_eq(self.cost, self.recomputed_cost(alpha)) {
            return false;
        }
        if self.uncovered.len() > max_uncovered {
            return false;
        }
        ps.iter()
            .enumerate()
            .all(|(i, p)| self.uncovered.contains(&i) || self.balls.iter().any(|b| b.contains(p)))
    }
}

/// Work done by a solver call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub candidates: usize,
    pub nodes: u64,
}

/// Radius of the farthest-point (Gonzalez) traversal with `k` centers,
/// starting from point 0. Within a factor two of the optimal k-center radius.
pub fn farthest_point_radius(ps: &PointSet, k: usize) -> f64 {
    let pts = ps.points();
    let mut nearest: Vec<f64> = pts.iter().map(|p| p.distance(&pts[0])).collect();
    for _ in 1..k.min(pts.len()) {
        let (far, _) =
            nearest.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
            );
        for (i, p) in pts.iter().enumerate() {
            nearest[i] = nearest[i].min(p.distance(&pts[far]));
        }
    }
    nearest.into_iter().fold(0.0, f64::max)
}

/// Lower bound `(r_g/2)^α` on the k-disk cover optimum.
pub fn estimate_opt(ps: &PointSet, k: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok((0.5 * farthest_point_radius(ps, k)).powf(alpha))
}

/// `c_α = (ε/k) / ((ε/k + 1)^{1/α} − 1)`: the smallest constant for which
/// `(r + ε·OPT^{1/α}/(k·c_α))^α ≤ r^α + (ε/k)·OPT` whenever `r^α ≤ OPT`.
pub fn c_alpha(epsilon: f64, k: usize, alpha: f64) -> f64 {
    let t = epsilon / k as f64;
    t / ((t + 1.0).powf(1.0 / alpha) - 1.0)
}

/// Grid cell width for a given OPT estimate.
///
/// The lifted solution pays the radius growth twice (moving an optimum onto
/// the representatives, then lifting the coreset optimum back), so the error
/// budget per direction is `ε/3`; discrete solutions grow by `2√d·δ` per
/// direction instead of `√d·δ`.
pub fn grid_width(cfg: &CoverConfig, dim: usize, opt_estimate: f64) -> f64 {
    let k = cfg.k_effective();
    let eps = cfg.epsilon / 3.0;
    let growth = eps * opt_estimate.powf(1.0 / cfg.alpha) / (k as f64 * c_alpha(eps, k, cfg.alpha));
    let per_direction = if cfg.discrete { 2.0 } else { 1.0 };
    growth / ((dim as f64).sqrt() * per_direction)
}

pub fn build_coreset(ps: &PointSet, cfg: &CoverConfig) -> Result<Coreset> {
    cfg.validate()?;
    let k_effective = cfg.k_effective();
    let opt_estimate = estimate_opt(ps, k_effective, cfg.alpha)?;
    if opt_estimate <= 0.0 {
        // At most k_eff distinct locations: keep one representative each.
        let mut reps: Vec<Point> = Vec::new();
        let assignment = ps
            .iter()
            .map(|p| match reps.iter().position(|r| r == p) {
                Some(i) => i,
                None => {
                    reps.push(p.clone());
                    reps.len() - 1
                }
            })
            .collect::<Vec<_>>();
        let mut multiplicity = vec![0; reps.len()];
        for &r in &assignment {
            multiplicity[r] += 1;
        }
        return Ok(Coreset {
            original: ps.clone(),
            reps: PointSet::new(reps)?,
            assignment,
            multiplicity,
            grid: None,
            opt_estimate,
            k_effective,
            discrete: cfg.discrete,
        });
    }
    let grid = GridSpec::anchored_at_min(ps, grid_width(cfg, ps.dim(), opt_estimate))?;
    let snapped = snap_corner(ps, &grid)?;
    let multiplicity = snapped.multiplicities();
    Ok(Coreset {
        original: ps.clone(),
        reps: snapped.reps,
        assignment: snapped.assignment,
        multiplicity,
        grid: Some(grid),
        opt_estimate,
        k_effective,
        discrete: cfg.discrete,
    })
}

/// Discrete candidates: every point as center with every distance to a
/// point (including zero) as radius, ordered by center index then radius.
/// Largest candidate-by-point membership matrix (in bits) the exact cover
/// search will build, about 256 MiB.
pub const MAX_MEMBERSHIP_BITS: u128 = 1 << 31;

fn candidate_count(m: u128, discrete: bool) -> u128 {
    if discrete {
        m * m
    } else {
        m + m * m.saturating_sub(1) / 2 + m * m.saturating_sub(1) * m.saturating_sub(2) / 6
    }
}

/// Refuses point sets whose candidate list would exceed
/// [`MAX_MEMBERSHIP_BITS`], instead of exhausting memory.
fn admit_candidates(m: usize, discrete: bool) -> Result<()> {
    let fits = |m: usize| candidate_count(m as u128, discrete) * m as u128 <= MAX_MEMBERSHIP_BITS;
    if fits(m) {
        return Ok(());
    }
    let cap = (1..m).take_while(|&x| fits(x)).last().unwrap_or(0);
    Err(Error::BudgetExceeded {
        problem: if discrete {
            "discrete cover search"
        } else {
            "non-discrete cover search"
        },
        size: m,
        cap,
    })
}

pub(crate) fn discrete_candidates(reps: &PointSet) -> (Vec<Ball>, Vec<usize>) {
    let mut balls = Vec::new();
    let mut centers = Vec::new();
    for (i, c) in reps.iter().enumerate() {
        let mut radii: Vec<f64> = reps.iter().map(|q| c.distance(q)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for r in radii {
            balls.push(Ball::new(c.clone(), r));
            centers.push(i);
        }
    }
    (balls, centers)
}

/// Non-discrete candidates: radius-zero balls, diametral balls of pairs and
/// circumballs of non-collinear triples, merged when equal up to `1e-9` and
/// ordered by radius then center.
pub(crate) fn nondiscrete_candidates(reps: &PointSet) -> Result<Vec<Ball>> {
    reps.require_dim(2)?;
    let pts = reps.points();
    let n = pts.len();
    let mut balls: Vec<Ball> = pts.iter().map(|p| Ball::new(p.clone(), 0.0)).collect();
    for i in 0..n {
        for j in i + 1..n {
            balls.push(diametral_ball(&pts[i], &pts[j]));
            for l in j + 1..n {
                if let Some(b) = circumball(&pts[i], &pts[j], &pts[l])? {
                    balls.push(b);
                }
            }
        }
    }
    let quantum = 1e-9;
    let key = |b: &Ball| -> (i64, i64, i64) {
        let c = b.center.coords();
        (
            (b.radius / quantum).round() as i64,
            (c[0] / quantum).round() as i64,
            (c[1] / quantum).round() as i64,
        )
    };
    balls.sort_by(|a, b| key(a).cmp(&key(b)).then(a.radius.total_cmp(&b.radius)));
    balls.dedup_by(|later, kept| key(later) == key(kept));
    Ok(balls)
}

fn cover_from(
    sol: CoverSolution,
    candidates: &[Ball],
    center_of: impl Fn(usize) -> Option<usize>,
) -> DiskCover {
    DiskCover {
        balls: sol.chosen.iter().map(|&c| candidates[c].clone()).collect(),
        cost: sol.cost,
        uncovered: sol.uncovered,
        center_indices: sol.chosen.iter().map(|&c| center_of(c)).collect(),
    }
}

fn run_discrete(
    reps: &PointSet,
    weights: Vec<usize>,
    k: usize,
    c: usize,
    alpha: f64,
) -> Result<(DiskCover, SolveStats)> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    admit_candidates(reps.len(), true)?;
    let (balls, centers) = discrete_candidates(reps);
    let problem = CoverProblem::new(reps.points(), weights, balls, alpha, k.min(reps.len()), c);
    let result = problem.solve();
    let stats = SolveStats {
        candidates: problem.candidates().len(),
        nodes: result.nodes,
    };
    let sol = result
        .solution
        .expect("a radius-diameter ball around any point always covers everything");
    Ok((
        cover_from(sol, problem.candidates(), |i| Some(centers[i])),
        stats,
    ))
}

/// Exact optimum with centers restricted to `reps`.
pub fn solve_discrete(reps: &PointSet, k: usize, alpha: f64) -> Result<DiskCover> {
    run_discrete(reps, vec![1; reps.len()], k, 0, alpha).map(|r| r.0)
}

/// Exact optimum with arbitrary planar centers.
pub fn solve_nondiscrete(reps: &PointSet, k: usize, alpha: f64) -> Result<DiskCover> {
    solve_nondiscrete_stats(reps, k, alpha).map(|r| r.0)
}

pub(crate) fn solve_nondiscrete_stats(
    reps: &PointSet,
    k: usize,
    alpha: f64,
) -> Result<(DiskCover, SolveStats)> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    reps.require_dim(2)?;
    admit_candidates(reps.len(), false)?;
    let balls = nondiscrete_candidates(reps)?;
    let problem = CoverProblem::new(reps.points(), vec![1; reps.len()], balls, alpha, k, 0);
    let result = problem.solve();
    let stats = SolveStats {
        candidates: problem.candidates().len(),
        nodes: result.nodes,
    };
    let sol = result
        .solution
        .expect("diametral ball of the farthest pair");
    let cover = cover_from(sol, problem.candidates(), |i| {
        let b = &problem.candidates()[i];
        (b.radius == 0.0)
            .then(|| reps.iter().position(|p| *p == b.center))
            .flatten()
    });
    Ok((cover, stats))
}

/// Exact discrete optimum leaving at most `c` points uncovered.
pub fn solve_with_outliers(reps: &PointSet, k: usize, c: usize, alpha: f64) -> Result<DiskCover> {
    run_discrete(reps, vec![1; reps.len()], k, c, alpha).map(|r| r.0)
}

/// As [`solve_with_outliers`], but each point counts `weights[i]` times
/// against the outlier budget.
pub fn solve_weighted_outliers(
    reps: &PointSet,
    weights: &[usize],
    k: usize,
    c: usize,
    alpha: f64,
) -> Result<DiskCover> {
    if weights.len() != reps.len() {
        return Err(Error::InvalidParameter(
            "one weight per point required".into(),
        ));
    }
    run_discrete(reps, weights.to_vec(), k, c, alpha).map(|r| r.0)
}

/// Solves the coreset instance with the variant selected by `cfg`.
pub fn solve_coreset(coreset: &Coreset, cfg: &CoverConfig) -> Result<(DiskCover, SolveStats)> {
    cfg.validate()?;
    if cfg.discrete {
        run_discrete(
            &coreset.reps,
            coreset.multiplicity.clone(),
            cfg.k,
            cfg.outliers,
            cfg.alpha,
        )
    } else {
        solve_nondiscrete_stats(&coreset.reps, cfg.k, cfg.alpha)
    }
}

/// Turns a cover of the representatives into a cover of the original
/// stations by growing every radius by [`Coreset::lift_slack`]. Discrete
/// centers move to the lowest-index original station of their cell.
/// Stations of sacrificed representatives stay uncovered unless a grown
/// ball reaches them anyway.
pub fn lift_cover(cover: &DiskCover, coreset: &Coreset, alpha: f64) -> DiskCover {
    let slack = coreset.lift_slack();
    let anchors = coreset.anchors();
    let original = coreset.original.points();
    let mut balls = Vec::with_capacity(cover.balls.len());
    let mut center_indices = Vec::with_capacity(cover.balls.len());
    for (ball, center) in cover.balls.iter().zip(&cover.center_indices) {
        match (coreset.discrete, center) {
            (true, Some(rep)) => {
                let orig = anchors[*rep];
                balls.push(Ball::new(original[orig].clone(), ball.radius + slack));
                center_indices.push(Some(orig));
            }
            _ => {
                balls.push(Ball::new(ball.center.clone(), ball.radius + slack));
                center_indices.push(None);
            }
        }
    }
    let cost = balls.iter().map(|b| b.cost(alpha)).sum();
    let uncovered = coreset
        .assignment
        .iter()
        .enumerate()
        .filter(|(orig, rep)| {
            cover.uncovered.contains(rep) && !balls.iter().any(|b| b.contains(&original[*orig]))
        })
        .map(|(orig, _)| orig)
        .collect();
    DiskCover {
        balls,
        cost,
        uncovered,
        center_indices,
    }
}

/// Everything the cover pipeline reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverOutcome {
    pub cover: DiskCover,
    pub coreset_size: usize,
    pub grid_delta: f64,
    pub opt_estimate: f64,
    pub stats: SolveStats,
}

/// Coreset construction, exact solve on the representatives, lift.
pub fn approximate_cover(ps: &PointSet, cfg: &CoverConfig) -> Result<CoverOutcome> {
    let coreset = build_coreset(ps, cfg)?;
    let (cover, stats) = solve_coreset(&coreset, cfg)?;
    let lifted = lift_cover(&cover, &coreset, cfg.alpha);
    Ok(CoverOutcome {
        cover: lifted,
        coreset_size: coreset.reps.len(),
        grid_delta: coreset.delta(),
        opt_estimate: coreset.opt_estimate,
        stats,
    })
}
