//! Exact minimum-cost ball cover over a finite candidate list.
//!
//! Branches on the lowest-index uncovered point: either one of the candidates
//! covering it joins the solution, or the point is sacrificed as an outlier.
//! Results are reduced by `(cost, uncovered weight, sorted candidate indices)`
//! so the answer does not depend on how top-level branches are scheduled.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::time::Instant;

use rayon::prelude::*;

use crate::geometry::{Ball, Point};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if !n.is_multiple_of(64) {
            *words.last_mut().unwrap() = (1u64 << (n % 64)) - 1;
        }
        Bitset(words)
    }

    fn empty(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn difference(&self, other: &Bitset) -> Bitset {
        Bitset(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
}

/// A cover instance over fixed candidates.
pub(crate) struct CoverProblem<'a> {
    points: &'a [Point],
    weights: Vec<usize>,
    candidates: Vec<Ball>,
    masks: Vec<Bitset>,
    covering: Vec<Vec<usize>>,
    costs: Vec<f64>,
    max_balls: usize,
    outlier_budget: usize,
    deadline: Option<Instant>,
    timed_out: AtomicBool,
}

#[derive(Clone, Debug)]
pub(crate) struct CoverSolution {
    /// Sorted candidate indices.
    pub chosen: Vec<usize>,
    /// Points left uncovered by the chosen balls.
    pub uncovered: Vec<usize>,
    pub cost: f64,
    uncovered_weight: usize,
}

impl CoverSolution {
    fn rank(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.uncovered_weight.cmp(&other.uncovered_weight))
            .then_with(|| self.chosen.cmp(&other.chosen))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SearchResult {
    pub solution: Option<CoverSolution>,
    pub nodes: u64,
    /// The deadline passed before the search finished; `solution` is not
    /// guaranteed optimal.
    pub timed_out: bool,
}

fn better(a: Option<CoverSolution>, b: Option<CoverSolution>) -> Option<CoverSolution> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.rank(&x) == Ordering::Less { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Branch<'p, 'a> {
    problem: &'p CoverProblem<'a>,
    best: Option<CoverSolution>,
    nodes: u64,
}

impl<'a> CoverProblem<'a> {
    pub fn new(
        points: &'a [Point],
        weights: Vec<usize>,
        candidates: Vec<Ball>,
        alpha: f64,
        max_balls: usize,
        outlier_budget: usize,
    ) -> Self {
        assert_eq!(points.len(), weights.len());
        let n = points.len();
        let mut covering = vec![Vec::new(); n];
        let masks = candidates
            .iter()
            .enumerate()
            .map(|(ci, ball)| {
                let mut mask = Bitset::empty(n);
                for (pi, p) in points.iter().enumerate() {
                    if ball.contains(p) {
                        mask.insert(pi);
                        covering[pi].push(ci);
                    }
                }
                mask
            })
            .collect();
        let costs = candidates.iter().map(|b| b.cost(alpha)).collect();
        Self {
            points,
            weights,
            candidates,
            masks,
            covering,
            costs,
            max_balls,
            outlier_budget,
            deadline: None,
            timed_out: AtomicBool::new(false),
        }
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn candidates(&self) -> &[Ball] {
        &self.candidates
    }

    pub fn solve(&self) -> SearchResult {
        let n = self.points.len();
        let all = Bitset::full(n);
        let total: usize = self.weights.iter().sum();
        if total <= self.outlier_budget {
            return SearchResult {
                solution: Some(CoverSolution {
                    chosen: Vec::new(),
                    uncovered: (0..n).collect(),
                    cost: 0.0,
                    uncovered_weight: total,
                }),
                nodes: 1,
                timed_out: false,
            };
        }

        // Top-level branches on point 0: each covering candidate, then the
        // outlier option.
        let mut branches: Vec<Option<usize>> = Vec::new();
        if self.max_balls > 0 {
            branches.extend(self.covering[0].iter().copied().map(Some));
        }
        if self.weights[0] <= self.outlier_budget {
            branches.push(None);
        }

        let results: Vec<(Option<CoverSolution>, u64)> = branches
            .par_iter()
            .map(|&choice| {
                let mut branch = Branch {
                    problem: self,
                    best: None,
                    nodes: 1,
                };
                let mut chosen = Vec::with_capacity(self.max_balls);
                match choice {
                    Some(c) => {
                        chosen.push(c);
                        let rest = all.difference(&self.masks[c]);
                        branch.descend(&rest, &mut chosen, self.costs[c], self.outlier_budget);
                    }
                    None => {
                        let mut rest = all.clone();
                        rest.remove(0);
                        branch.descend(
                            &rest,
                            &mut chosen,
                            0.0,
                            self.outlier_budget - self.weights[0],
                        );
                    }
                }
                (branch.best, branch.nodes)
            })
            .collect();

        let nodes = 1 + results.iter().map(|r| r.1).sum::<u64>();
        let solution = results.into_iter().fold(None, |acc, (s, _)| better(acc, s));
        SearchResult {
            solution,
            nodes,
            timed_out: self.timed_out.load(AtomicOrdering::Relaxed),
        }
    }

    fn finish(&self, chosen: &[usize]) -> CoverSolution {
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        let cost = chosen.iter().map(|&c| self.costs[c]).sum();
        let uncovered: Vec<usize> = (0..self.points.len())
            .filter(|&p| {
                !chosen
                    .iter()
                    .any(|&c| self.masks[c].0[p / 64] >> (p % 64) & 1 == 1)
            })
            .collect();
        let uncovered_weight = uncovered.iter().map(|&p| self.weights[p]).sum();
        CoverSolution {
            chosen,
            uncovered,
            cost,
            uncovered_weight,
        }
    }
}

impl Branch<'_, '_> {
    fn out_of_time(&self) -> bool {
        let problem = self.problem;
        if problem.timed_out.load(AtomicOrdering::Relaxed) {
            return true;
        }
        match problem.deadline {
            Some(deadline) if self.nodes.is_multiple_of(1024) && Instant::now() > deadline => {
                problem.timed_out.store(true, AtomicOrdering::Relaxed);
                true
            }
            _ => false,
        }
    }

    fn bound(&self) -> f64 {
        self.best
            .as_ref()
            .map_or(f64::INFINITY, |b| b.cost * (1.0 + 1e-12))
    }

    fn descend(&mut self, uncovered: &Bitset, chosen: &mut Vec<usize>, cost: f64, budget: usize) {
        self.nodes += 1;
        if cost > self.bound() || self.out_of_time() {
            return;
        }
        let p = match uncovered.first() {
            None => {
                let sol = self.problem.finish(chosen);
                self.best = better(self.best.take(), Some(sol));
                return;
            }
            Some(p) => p,
        };
        let problem = self.problem;
        if chosen.len() < problem.max_balls {
            for &c in &problem.covering[p] {
                let next_cost = cost + problem.costs[c];
                if next_cost > self.bound() {
                    continue;
                }
                chosen.push(c);
                let rest = uncovered.difference(&problem.masks[c]);
                self.descend(&rest, chosen, next_cost, budget);
                chosen.pop();
            }
        }
        if problem.weights[p] <= budget {
            let mut rest = uncovered.clone();
            rest.remove(p);
            self.descend(&rest, chosen, cost, budget - problem.weights[p]);
        }
    }
}
