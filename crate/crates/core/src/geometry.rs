//! Points, α-power edge costs, grid snapping and the ball predicates used
//! by the non-discrete cover solver.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for floating-point equality.
pub const REL_TOL: f64 = 1e-9;

/// Absolute slack when testing whether a point lies inside a ball or an
/// edge exists in a communication graph.
pub const COVER_SLACK: f64 = 1e-9;

/// Relative-tolerance comparison with a tiny absolute floor for values near zero.
pub fn approx_eq(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= 1e-12 || diff <= REL_TOL * a.abs().max(b.abs())
}

/// A point in ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter(
                "point needs at least one coordinate".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(Self { coords })
    }

    /// Shorthand for planar points. Panics on non-finite input.
    pub fn xy(x: f64, y: f64) -> Self {
        Self::new(vec![x, y]).expect("finite planar coordinates")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        }
    }

    fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// An ordered set of points of one common dimension. Indices are identities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().map(Point::dim).ok_or(Error::EmptyPointSet)?;
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        Ok(Self { dim, points })
    }

    /// Builds a planar set from coordinate pairs. Panics on non-finite input.
    pub fn from_xy(coords: &[(f64, f64)]) -> Self {
        Self::new(coords.iter().map(|&(x, y)| Point::xy(x, y)).collect())
            .expect("non-empty planar point list")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, index: usize) -> Result<&Point> {
        self.points.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.points.len(),
        })
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i].distance(&self.points[j])
    }

    /// Coordinate-wise minimum, the default grid anchor.
    pub fn min_corner(&self) -> Point {
        let mut lo = self.points[0].coords.clone();
        for p in &self.points[1..] {
            for (l, c) in lo.iter_mut().zip(&p.coords) {
                *l = l.min(*c);
            }
        }
        Point { coords: lo }
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bbox_diagonal(&self) -> f64 {
        let lo = self.min_corner();
        let mut hi = self.points[0].coords.clone();
        for p in &self.points[1..] {
            for (h, c) in hi.iter_mut().zip(&p.coords) {
                *h = h.max(*c);
            }
        }
        Point { coords: hi }.distance(&lo)
    }

    pub(crate) fn require_dim(&self, required: usize) -> Result<()> {
        if self.dim != required {
            return Err(Error::UnsupportedDimension {
                required,
                found: self.dim,
            });
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// A regular axis-aligned grid: vertices at `origin + i * cell_width`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    cell_width: f64,
    origin: Point,
}

impl GridSpec {
    pub fn new(cell_width: f64, origin: Point) -> Result<Self> {
        if !(cell_width > 0.0 && cell_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid cell width must be positive and finite, got {cell_width}"
            )));
        }
        Ok(Self { cell_width, origin })
    }

    /// Grid anchored at the coordinate-wise minimum of `ps`.
    pub fn anchored_at_min(ps: &PointSet, cell_width: f64) -> Result<Self> {
        Self::new(cell_width, ps.min_corner())
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    /// Index of the half-open cell `[iδ, (i+1)δ)` containing `x` along one axis.
    /// Values within relative tolerance of the upper boundary belong to the
    /// next cell, so grid vertices land in the cell they anchor.
    fn cell_index(&self, axis: usize, x: f64) -> i64 {
        let t = (x - self.origin.coords[axis]) / self.cell_width;
        let mut i = t.floor();
        if (i + 1.0 - t).abs() <= REL_TOL * t.abs().max(1.0) {
            i += 1.0;
        }
        i as i64
    }

    fn vertex_index(&self, axis: usize, x: f64) -> i64 {
        ((x - self.origin.coords[axis]) / self.cell_width).round() as i64
    }

    fn vertex(&self, index: &[i64]) -> Point {
        Point {
            coords: index
                .iter()
                .zip(&self.origin.coords)
                .map(|(&i, &o)| o + i as f64 * self.cell_width)
                .collect(),
        }
    }
}

/// Result of snapping a point set onto a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapped {
    /// Deduplicated grid vertices, in order of first appearance.
    pub reps: PointSet,
    /// `assignment[i]` is the representative index of input point `i`.
    pub assignment: Vec<usize>,
    /// Integer grid coordinates of each representative.
    pub cells: Vec<Vec<i64>>,
}

impl Snapped {
    /// Number of input points mapped to each representative.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut counts = vec![0; self.reps.len()];
        for &r in &self.assignment {
            counts[r] += 1;
        }
        counts
    }
}

fn snap_with(
    ps: &PointSet,
    grid: &GridSpec,
    index_of: impl Fn(usize, f64) -> i64,
) -> Result<Snapped> {
    if grid.origin.dim() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            found: grid.origin.dim(),
        });
    }
    let mut slot: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut cells = Vec::new();
    let mut assignment = Vec::with_capacity(ps.len());
    for p in ps {
        let key: Vec<i64> = p
            .coords
            .iter()
            .enumerate()
            .map(|(axis, &x)| index_of(axis, x))
            .collect();
        let next = cells.len();
        let idx = *slot.entry(key.clone()).or_insert_with(|| {
            cells.push(key);
            next
        });
        assignment.push(idx);
    }
    let reps = PointSet::new(cells.iter().map(|c| grid.vertex(c)).collect())?;
    Ok(Snapped {
        reps,
        assignment,
        cells,
    })
}

/// Maps every point to the minimum-coordinate corner of its grid cell.
pub fn snap_corner(ps: &PointSet, grid: &GridSpec) -> Result<Snapped> {
    snap_with(ps, grid, |axis, x| grid.cell_index(axis, x))
}

/// Maps every point to its nearest grid vertex.
pub fn snap_nearest(ps: &PointSet, grid: &GridSpec) -> Result<Snapped> {
    snap_with(ps, grid, |axis, x| grid.vertex_index(axis, x))
}

/// `|pq|^α`, the energy needed to send from `p` to `q`.
pub fn power_cost(p: &Point, q: &Point, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    p.check_dim(q)?;
    Ok(p.distance(q).powf(alpha))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// A closed ball; radius zero covers only its center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Self { center, radius }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.distance(p) <= self.radius + COVER_SLACK
    }

    pub fn cost(&self, alpha: f64) -> f64 {
        self.radius.powf(alpha)
    }
}

/// Smallest ball with `p` and `q` on its boundary.
pub fn diametral_ball(p: &Point, q: &Point) -> Ball {
    Ball::new(p.midpoint(q), 0.5 * p.distance(q))
}

/// Circle through three planar points, or `None` when they are (numerically)
/// collinear: triangle area below `1e-12 * diag²` of their bounding box.
pub fn circumball(p: &Point, q: &Point, r: &Point) -> Result<Option<Ball>> {
    for x in [p, q, r] {
        if x.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                required: 2,
                found: x.dim(),
            });
        }
    }
    let (ax, ay) = (p.coords[0], p.coords[1]);
    let (bx, by) = (q.coords[0] - ax, q.coords[1] - ay);
    let (cx, cy) = (r.coords[0] - ax, r.coords[1] - ay);
    let cross = bx * cy - by * cx;

    let xs = [p.coords[0], q.coords[0], r.coords[0]];
    let ys = [p.coords[1], q.coords[1], r.coords[1]];
    let span = |v: &[f64; 3]| {
        v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
    };
    let diag2 = span(&xs).powi(2) + span(&ys).powi(2);
    if 0.5 * cross.abs() <= 1e-12 * diag2 || cross == 0.0 {
        return Ok(None);
    }

    // Circumcenter relative to p.
    let d = 2.0 * cross;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    let center = Point::xy(ax + ux, ay + uy);
    let radius = (ux * ux + uy * uy).sqrt();
    Ok(Some(Ball::new(center, radius)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn power_cost_examples() {
        let o = Point::xy(0.0, 0.0);
        assert_relative_eq!(power_cost(&o, &Point::xy(3.0, 4.0), 2.0).unwrap(), 25.0);
        assert_eq!(
            power_cost(&Point::xy(1.0, 1.0), &Point::xy(1.0, 1.0), 3.0).unwrap(),
            0.0
        );
        assert_relative_eq!(
            power_cost(&o, &Point::xy(1.0, 1.0), 4.0).unwrap(),
            4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn power_cost_errors() {
        let p3 = Point::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            power_cost(&Point::xy(0.0, 0.0), &p3, 2.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            power_cost(&Point::xy(0.0, 0.0), &Point::xy(1.0, 0.0), 0.5),
            Err(Error::InvalidAlpha(0.5))
        );
    }

    #[test]
    fn power_cost_breaks_triangle_inequality() {
        // unit-spaced collinear triple, α = 2: 1 + 1 < 4
        let (a, b, c) = (
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 0.0),
            Point::xy(2.0, 0.0),
        );
        let ab = power_cost(&a, &b, 2.0).unwrap();
        let bc = power_cost(&b, &c, 2.0).unwrap();
        let ac = power_cost(&a, &c, 2.0).unwrap();
        assert!(ab + bc < ac);
    }

    #[test]
    fn rejects_bad_points() {
        assert_eq!(Point::new(vec![f64::NAN]), Err(Error::NonFiniteCoordinate));
        assert!(PointSet::new(vec![]).is_err());
        let mixed = vec![Point::xy(0.0, 0.0), Point::new(vec![1.0]).unwrap()];
        assert!(matches!(
            PointSet::new(mixed),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(GridSpec::new(0.0, Point::xy(0.0, 0.0)).is_err());
    }

    #[test]
    fn snap_corner_same_cell() {
        let ps = PointSet::from_xy(&[(0.2, 0.7), (0.3, 0.6)]);
        let grid = GridSpec::new(1.0, Point::xy(0.0, 0.0)).unwrap();
        let s = snap_corner(&ps, &grid).unwrap();
        assert_eq!(s.reps.len(), 1);
        assert_eq!(s.reps.points()[0], Point::xy(0.0, 0.0));
        assert_eq!(s.assignment, vec![0, 0]);
        assert_eq!(s.multiplicities(), vec![2]);
    }

    #[test]
    fn snap_corner_distinct_cells() {
        let ps = PointSet::from_xy(&[(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)]);
        let grid = GridSpec::new(1.0, Point::xy(0.0, 0.0)).unwrap();
        let s = snap_corner(&ps, &grid).unwrap();
        assert_eq!(s.reps.len(), 4);
        assert_eq!(s.reps.points()[3], Point::xy(1.0, 1.0));
    }

    #[test]
    fn snap_corner_half_open_boundary() {
        let ps = PointSet::from_xy(&[(1.0, 0.0), (0.999, 0.0)]);
        let grid = GridSpec::new(1.0, Point::xy(0.0, 0.0)).unwrap();
        let s = snap_corner(&ps, &grid).unwrap();
        assert_eq!(s.reps.points()[0], Point::xy(1.0, 0.0));
        assert_eq!(s.reps.points()[1], Point::xy(0.0, 0.0));
    }

    #[test]
    fn snap_nearest_examples() {
        let grid = GridSpec::new(1.0, Point::xy(0.0, 0.0)).unwrap();
        let ps = PointSet::from_xy(&[(0.4, 0.4), (0.6, 0.6), (2.0, -3.0)]);
        let s = snap_nearest(&ps, &grid).unwrap();
        assert_eq!(s.reps.points()[0], Point::xy(0.0, 0.0));
        assert_eq!(s.reps.points()[1], Point::xy(1.0, 1.0));
        assert_eq!(s.reps.points()[2], Point::xy(2.0, -3.0));
        assert_eq!(ps.points()[2].distance(&s.reps.points()[2]), 0.0);
    }

    #[test]
    fn diametral_examples() {
        let b = diametral_ball(&Point::xy(0.0, 0.0), &Point::xy(2.0, 0.0));
        assert_eq!(b.center, Point::xy(1.0, 0.0));
        assert_eq!(b.radius, 1.0);
        let b = diametral_ball(&Point::xy(0.0, 0.0), &Point::xy(0.0, 0.0));
        assert_eq!(b.radius, 0.0);
        let b = diametral_ball(&Point::xy(0.0, 0.0), &Point::xy(1.0, 1.0));
        assert_eq!(b.center, Point::xy(0.5, 0.5));
        assert_relative_eq!(b.radius, 2f64.sqrt() / 2.0, max_relative = 1e-12);
    }

    /// Circumcenter via Cramer's rule on the perpendicular-bisector system
    /// `2(q-p)·c = |q|²-|p|²`, `2(r-p)·c = |r|²-|p|²`.
    fn circumcenter_oracle(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> (f64, f64, f64) {
        let (a11, a12) = (2.0 * (q.0 - p.0), 2.0 * (q.1 - p.1));
        let (a21, a22) = (2.0 * (r.0 - p.0), 2.0 * (r.1 - p.1));
        let b1 = q.0 * q.0 + q.1 * q.1 - p.0 * p.0 - p.1 * p.1;
        let b2 = r.0 * r.0 + r.1 * r.1 - p.0 * p.0 - p.1 * p.1;
        let det = a11 * a22 - a12 * a21;
        let cx = (b1 * a22 - a12 * b2) / det;
        let cy = (a11 * b2 - b1 * a21) / det;
        (cx, cy, ((cx - p.0).powi(2) + (cy - p.1).powi(2)).sqrt())
    }

    #[test]
    fn circumball_examples() {
        let s3 = 3f64.sqrt();
        let (ox, oy, orad) = circumcenter_oracle((0.0, 0.0), (2.0, 0.0), (1.0, s3));
        // frozen: center (1, 1/√3), radius 2/√3
        assert_relative_eq!(ox, 1.0, max_relative = 1e-12);
        assert_relative_eq!(oy, 1.0 / s3, max_relative = 1e-12);
        assert_relative_eq!(orad, 2.0 / s3, max_relative = 1e-12);
        let b = circumball(
            &Point::xy(0.0, 0.0),
            &Point::xy(2.0, 0.0),
            &Point::xy(1.0, s3),
        )
        .unwrap()
        .unwrap();
        assert_relative_eq!(b.center.coords()[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(b.center.coords()[1], 1.0 / s3, max_relative = 1e-12);
        assert_relative_eq!(b.radius, 2.0 / s3, max_relative = 1e-12);

        let b = circumball(
            &Point::xy(0.0, 0.0),
            &Point::xy(2.0, 0.0),
            &Point::xy(1.0, 1.0),
        )
        .unwrap()
        .unwrap();
        let (ox, oy, orad) = circumcenter_oracle((0.0, 0.0), (2.0, 0.0), (1.0, 1.0));
        assert_eq!((ox, oy, orad), (1.0, 0.0, 1.0));
        assert_relative_eq!(b.center.coords()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.center.coords()[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.radius, 1.0, max_relative = 1e-12);

        let collinear = circumball(
            &Point::xy(0.0, 0.0),
            &Point::xy(1.0, 0.0),
            &Point::xy(2.0, 0.0),
        )
        .unwrap();
        assert!(collinear.is_none());
    }

    #[test]
    fn circumball_rejects_non_planar() {
        let p = Point::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(circumball(&p, &p, &p).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -100.0..100.0f64
    }

    proptest! {
        #[test]
        fn power_cost_symmetric_and_monotone(
            ax in coord(), ay in coord(), bx in coord(), by in coord(),
            alpha in 1.0..4.0f64, stretch in 1.01..3.0f64,
        ) {
            let a = Point::xy(ax, ay);
            let b = Point::xy(bx, by);
            let ab = power_cost(&a, &b, alpha).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, power_cost(&b, &a, alpha).unwrap());
            let far = Point::xy(ax + stretch * (bx - ax), ay + stretch * (by - ay));
            if a != b {
                prop_assert!(power_cost(&a, &far, alpha).unwrap() > ab);
            }
        }

        #[test]
        fn snap_corner_bounds_and_idempotence(
            pts in prop::collection::vec((coord(), coord()), 1..40),
            width in 0.05..10.0f64,
        ) {
            let ps = PointSet::from_xy(&pts);
            let grid = GridSpec::anchored_at_min(&ps, width).unwrap();
            let s = snap_corner(&ps, &grid).unwrap();
            prop_assert!(s.reps.len() <= ps.len());
            for (i, p) in ps.iter().enumerate() {
                let d = p.distance(&s.reps.points()[s.assignment[i]]);
                prop_assert!(d <= 2f64.sqrt() * width * (1.0 + 1e-9));
            }
            let again = snap_corner(&s.reps, &grid).unwrap();
            prop_assert_eq!(&again.reps, &s.reps);
            prop_assert_eq!(again.assignment, (0..s.reps.len()).collect::<Vec<_>>());
        }

        #[test]
        fn snap_nearest_displacement(
            pts in prop::collection::vec((coord(), coord()), 1..40),
            width in 0.05..10.0f64,
        ) {
            let ps = PointSet::from_xy(&pts);
            let grid = GridSpec::new(width, Point::xy(0.0, 0.0)).unwrap();
            let s = snap_nearest(&ps, &grid).unwrap();
            for (i, p) in ps.iter().enumerate() {
                let d = p.distance(&s.reps.points()[s.assignment[i]]);
                prop_assert!(d <= width / 2f64.sqrt() * (1.0 + 1e-9));
            }
        }

        #[test]
        fn circumball_equidistant(
            ax in coord(), ay in coord(), bx in coord(), by in coord(), cx in coord(), cy in coord(),
        ) {
            let (a, b, c) = (Point::xy(ax, ay), Point::xy(bx, by), Point::xy(cx, cy));
            if let Some(ball) = circumball(&a, &b, &c).unwrap() {
                for p in [&a, &b, &c] {
                    let d = ball.center.distance(p);
                    prop_assert!((d - ball.radius).abs() <= 1e-9 * ball.radius.max(1.0));
                }
            }
        }
    }
}
