//! Tours minimising `Σ |p_i p_{i+1}|^α`.
//!
//! For α > 1 the edge weights are not a metric, so shortcutting an MST walk
//! does not work. Instead the tour is assembled from Hamiltonian paths over
//! the MST: `π^a(T)` starts at the root and then visits the children
//! subtrees one after another, each by `π^b`, the reversal of its own `π^a`.
//! Closing `π^a` of the whole tree gives a `2·3^{α−1}`-approximation
//! (6 for α = 2) of the optimal tour.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{approx_eq, check_alpha, Point, PointSet};

/// A spanning tree with a designated root and ordered children.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootedTree {
    pub root: usize,
    /// Children of each node, ascending by index.
    pub children: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    /// Sum of α-power edge weights.
    pub weight: f64,
}

impl RootedTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// `(parent, child)` pairs ordered by child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, c)))
            .collect()
    }

    /// Nodes of the subtree at `v`, every parent before its children.
    pub fn preorder_from(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }
}

/// A path through every node of a subtree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamPath {
    pub order: Vec<usize>,
    pub start: usize,
    pub end: usize,
    pub cost: f64,
}

impl HamPath {
    fn from_order(order: Vec<usize>, ps: &PointSet, alpha: f64) -> Self {
        let cost = order
            .windows(2)
            .map(|w| ps.distance(w[0], w[1]).powf(alpha))
            .sum();
        Self {
            start: order[0],
            end: *order.last().unwrap(),
            order,
            cost,
        }
    }

    pub fn reversed(&self) -> HamPath {
        let mut order = self.order.clone();
        order.reverse();
        HamPath {
            start: self.end,
            end: self.start,
            order,
            cost: self.cost,
        }
    }
}

/// A closed tour, as a cyclic permutation of point indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    pub fn is_permutation_of(&self, n: usize) -> bool {
        is_permutation(&self.order, n)
    }
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    order
        .iter()
        .all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Prim's algorithm on the complete graph, O(n²). Ties between equal
/// weights go to the lexicographically smaller edge `(min, max)`.
pub fn build_mst(ps: &PointSet, alpha: f64, root: usize) -> Result<RootedTree> {
    check_alpha(alpha)?;
    let n = ps.len();
    if root >= n {
        return Err(Error::IndexOutOfRange {
            index: root,
            len: n,
        });
    }
    let pts = ps.points();
    let edge_key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut in_tree = vec![false; n];
    let mut best: Vec<(f64, (usize, usize))> = vec![(f64::INFINITY, (usize::MAX, usize::MAX)); n];
    let mut parent = vec![None; n];
    in_tree[root] = true;
    for v in 0..n {
        if v != root {
            best[v] = (pts[root].distance(&pts[v]), edge_key(root, v));
            parent[v] = Some(root);
        }
    }
    for _ in 1..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| {
                best[a]
                    .0
                    .total_cmp(&best[b].0)
                    .then(best[a].1.cmp(&best[b].1))
            })
            .unwrap();
        in_tree[u] = true;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let cand = (pts[u].distance(&pts[v]), edge_key(u, v));
            if cand.0 < best[v].0 || (cand.0 == best[v].0 && cand.1 < best[v].1) {
                best[v] = cand;
                parent[v] = Some(u);
            }
        }
    }
    let mut children = vec![Vec::new(); n];
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(c);
        }
    }
    let weight = parent
        .iter()
        .enumerate()
        .filter_map(|(c, p)| p.map(|p| pts[p].distance(&pts[c]).powf(alpha)))
        .sum();
    Ok(RootedTree {
        root,
        children,
        parent,
        weight,
    })
}

/// `π^a` of the subtree rooted at `subtree_root`: the root, then `π^b` of
/// each child subtree in child order. Built with an explicit stack.
pub fn pi_a(tree: &RootedTree, subtree_root: usize, ps: &PointSet, alpha: f64) -> Result<HamPath> {
    check_alpha(alpha)?;
    if subtree_root >= tree.len() {
        return Err(Error::IndexOutOfRange {
            index: subtree_root,
            len: tree.len(),
        });
    }
    enum Task {
        Forward(usize),
        Backward(usize),
        Emit(usize),
    }
    let mut order = Vec::new();
    let mut stack = vec![Task::Forward(subtree_root)];
    while let Some(task) = stack.pop() {
        match task {
            Task::Emit(v) => order.push(v),
            // v, π^b(c_1), …, π^b(c_m)
            Task::Forward(v) => {
                for &c in tree.children[v].iter().rev() {
                    stack.push(Task::Backward(c));
                }
                stack.push(Task::Emit(v));
            }
            // reverse of the above: π^a(c_m), …, π^a(c_1), v
            Task::Backward(v) => {
                stack.push(Task::Emit(v));
                for &c in &tree.children[v] {
                    stack.push(Task::Forward(c));
                }
            }
        }
    }
    Ok(HamPath::from_order(order, ps, alpha))
}

/// Reversal of [`pi_a`]: ends at the subtree root.
pub fn pi_b(tree: &RootedTree, subtree_root: usize, ps: &PointSet, alpha: f64) -> Result<HamPath> {
    pi_a(tree, subtree_root, ps, alpha).map(|p| p.reversed())
}

/// Cyclic α-power cost of `order`.
pub fn tour_cost(order: &[usize], ps: &PointSet, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !is_permutation(order, ps.len()) {
        return Err(Error::NotAPermutation(ps.len()));
    }
    let n = order.len();
    Ok((0..n)
        .map(|i| ps.distance(order[i], order[(i + 1) % n]).powf(alpha))
        .sum())
}

/// `2·3^{α−1}`, the guarantee of [`approx_tour`] relative to the MST weight.
pub fn approximation_factor(alpha: f64) -> f64 {
    2.0 * 3f64.powf(alpha - 1.0)
}

/// Closes `π^a` of the MST rooted at point 0 into a tour.
pub fn approx_tour(ps: &PointSet, alpha: f64) -> Result<Tour> {
    let tree = build_mst(ps, alpha, 0)?;
    approx_tour_on(&tree, ps, alpha)
}

/// As [`approx_tour`], reusing an already built tree.
pub fn approx_tour_on(tree: &RootedTree, ps: &PointSet, alpha: f64) -> Result<Tour> {
    let path = pi_a(tree, tree.root, ps, alpha)?;
    let cost = tour_cost(&path.order, ps, alpha)?;
    Ok(Tour {
        order: path.order,
        cost,
    })
}

/// Per-node quantities of the `π^a` recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeBound {
    pub node: usize,
    /// Cost of `π^a` of the subtree.
    pub path_cost: f64,
    /// α-power MST weight of the subtree.
    pub mst_cost: f64,
    /// α-power weight of the edge to the last child (0 for leaves).
    pub last_child_edge: f64,
}

impl NodeBound {
    /// `6·MST − 3·|r r_k|²`, the α = 2 bound on `π^a`.
    pub fn quadratic_bound(&self) -> f64 {
        6.0 * self.mst_cost - 3.0 * self.last_child_edge
    }

    pub fn quadratic_bound_holds(&self) -> bool {
        let bound = self.quadratic_bound();
        self.path_cost <= bound || approx_eq(self.path_cost, bound)
    }
}

/// Evaluates the `π^a` recursion bottom-up without materialising paths:
/// `cost(v) = Σ cost(c_i) + w(v, e_1) + Σ w(c_i, e_{i+1})` with `e_i` the
/// end of `π^a(c_i)`.
pub fn recursion_bounds(tree: &RootedTree, ps: &PointSet, alpha: f64) -> Vec<NodeBound> {
    let n = tree.len();
    let w = |a: usize, b: usize| ps.distance(a, b).powf(alpha);
    let mut end = vec![0; n];
    let mut out: Vec<Option<NodeBound>> = vec![None; n];
    for &v in tree.preorder_from(tree.root).iter().rev() {
        let kids = &tree.children[v];
        let mut path_cost = 0.0;
        let mut mst_cost = 0.0;
        let mut prev = v;
        for &c in kids {
            let child = out[c].as_ref().unwrap();
            path_cost += child.path_cost + w(prev, end[c]);
            mst_cost += child.mst_cost + w(v, c);
            prev = c;
        }
        end[v] = *kids.last().unwrap_or(&v);
        out[v] = Some(NodeBound {
            node: v,
            path_cost,
            mst_cost,
            last_child_edge: kids.last().map_or(0.0, |&c| w(v, c)),
        });
    }
    out.into_iter().flatten().collect()
}

/// `n` unit-spaced points on a line.
pub fn gap_instance(n: usize) -> Result<PointSet> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "gap instance needs at least 3 points, got {n}"
        )));
    }
    PointSet::new((0..n).map(|i| Point::xy(i as f64, 0.0)).collect())
}

/// Even positions left to right, then odd positions right to left. On the
/// unit-spaced line it costs `4n − 6` for α = 2.
pub fn skip_tour(n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).step_by(2).collect();
    order.extend((1..n).step_by(2).rev());
    order
}

/// `(Σ a_i)^α ≤ m^{α−1}·Σ a_i^α` for nonnegative `a`, returned as (lhs, rhs).
pub fn power_mean_sides(values: &[f64], alpha: f64) -> (f64, f64) {
    let m = values.len() as f64;
    let lhs = values.iter().sum::<f64>().powf(alpha);
    let rhs = m.powf(alpha - 1.0) * values.iter().map(|a| a.powf(alpha)).sum::<f64>();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mst_collinear() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let t = build_mst(&ps, 2.0, 0).unwrap();
        assert_eq!(t.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(t.weight, 2.0);
        assert_eq!(t.children[0], vec![1]);
    }

    #[test]
    fn mst_single_point() {
        let ps = PointSet::from_xy(&[(3.0, 3.0)]);
        let t = build_mst(&ps, 2.0, 0).unwrap();
        assert_eq!(t.weight, 0.0);
        assert!(t.edges().is_empty());
        let tour = approx_tour(&ps, 2.0).unwrap();
        assert_eq!(tour.order, vec![0]);
        assert_eq!(tour.cost, 0.0);
    }

    #[test]
    fn mst_tie_break_prefers_smaller_edge() {
        // unit square: many equal edges
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let t = build_mst(&ps, 2.0, 0).unwrap();
        assert_eq!(t.edges(), vec![(0, 1), (0, 2), (1, 3)]);
    }

    #[test]
    fn leaf_path() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0)]);
        let t = build_mst(&ps, 2.0, 0).unwrap();
        let p = pi_a(&t, 1, &ps, 2.0).unwrap();
        assert_eq!(p.order, vec![1]);
        assert_eq!(p.cost, 0.0);
        assert_eq!(pi_b(&t, 1, &ps, 2.0).unwrap().order, vec![1]);
    }

    #[test]
    fn star_path() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]);
        let t = build_mst(&ps, 2.0, 0).unwrap();
        let p = pi_a(&t, 0, &ps, 2.0).unwrap();
        assert_eq!(p.order, vec![0, 1, 2]);
        assert_eq!(p.cost, 5.0);
        assert_eq!(p.end, 2);
        let bounds = recursion_bounds(&t, &ps, 2.0);
        let root = bounds.iter().find(|b| b.node == 0).unwrap();
        assert_eq!(root.path_cost, 5.0);
        assert_eq!(root.quadratic_bound(), 9.0);
    }

    #[test]
    fn path_tree() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let t = build_mst(&ps, 2.0, 0).unwrap();
        let p = pi_a(&t, 0, &ps, 2.0).unwrap();
        assert_eq!(p.order, vec![0, 2, 1]);
        assert_eq!(p.cost, 5.0);
        assert!(p.cost <= 6.0 * 2.0 - 3.0);
        assert_eq!(pi_b(&t, 1, &ps, 2.0).unwrap().order, vec![2, 1]);
    }

    #[test]
    fn two_point_tour() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (3.0, 4.0)]);
        for alpha in [1.0, 2.0, 3.5] {
            let t = approx_tour(&ps, alpha).unwrap();
            assert_relative_eq!(t.cost, 2.0 * 5f64.powf(alpha), max_relative = 1e-12);
        }
    }

    #[test]
    fn equilateral_triangle_tour() {
        let h = 3f64.sqrt() / 2.0;
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)]);
        let t = approx_tour(&ps, 2.0).unwrap();
        assert_relative_eq!(t.cost, 3.0, max_relative = 1e-12);
        let mst = build_mst(&ps, 2.0, 0).unwrap();
        assert!(t.cost <= 6.0 * mst.weight);
    }

    #[test]
    fn tour_cost_examples() {
        let ps = gap_instance(4).unwrap();
        assert_eq!(tour_cost(&[0, 2, 3, 1], &ps, 2.0).unwrap(), 10.0);
        assert_eq!(tour_cost(&[0, 1, 2, 3], &ps, 2.0).unwrap(), 12.0);
        assert_eq!(tour_cost(&[0, 1, 2, 3], &ps, 1.0).unwrap(), 6.0);
        assert_eq!(tour_cost(&[1, 2, 3, 0], &ps, 2.0).unwrap(), 12.0);
        assert_eq!(tour_cost(&[3, 2, 1, 0], &ps, 2.0).unwrap(), 12.0);
        assert_eq!(
            tour_cost(&[0, 1, 1, 3], &ps, 2.0),
            Err(Error::NotAPermutation(4))
        );
        assert!(tour_cost(&[0, 1, 2], &ps, 2.0).is_err());
    }

    #[test]
    fn gap_and_skip_tours() {
        assert!(gap_instance(2).is_err());
        assert_eq!(skip_tour(4), vec![0, 2, 3, 1]);
        assert_eq!(skip_tour(5), vec![0, 2, 4, 3, 1]);
        let ps = gap_instance(32).unwrap();
        let identity: Vec<usize> = (0..32).collect();
        assert_eq!(tour_cost(&identity, &ps, 2.0).unwrap(), 992.0);
        assert_eq!(tour_cost(&skip_tour(32), &ps, 2.0).unwrap(), 122.0);
    }

    #[test]
    fn collinear_four_within_bound() {
        let ps = gap_instance(4).unwrap();
        let t = approx_tour(&ps, 2.0).unwrap();
        assert!(t.is_permutation_of(4));
        assert!(t.cost <= 18.0);
        assert!(t.cost >= 10.0);
    }

    #[test]
    fn power_mean_examples() {
        let (l, r) = power_mean_sides(&[1.0, 1.0, 1.0], 2.0);
        assert_eq!((l, r), (9.0, 9.0));
        let (l, r) = power_mean_sides(&[3.0, 0.0], 3.0);
        assert!(l <= r);
    }

    #[test]
    fn deep_path_tree_does_not_overflow() {
        let ps = gap_instance(4_000).unwrap();
        let t = build_mst(&ps, 2.0, 0).unwrap();
        let p = pi_a(&t, 0, &ps, 2.0).unwrap();
        assert_eq!(p.order.len(), 4_000);
    }

    /// Kruskal with a union-find, independent of the Prim implementation.
    fn kruskal_weight(ps: &PointSet, alpha: f64) -> f64 {
        let n = ps.len();
        let mut edges: Vec<(f64, usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (ps.distance(i, j).powf(alpha), i, j))
            .collect();
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        let mut total = 0.0;
        for (w, i, j) in edges {
            let (a, b) = (find(&mut root, i), find(&mut root, j));
            if a != b {
                root[a] = b;
                total += w;
            }
        }
        total
    }

    fn cloud() -> impl proptest::strategy::Strategy<Value = PointSet> {
        use proptest::prelude::*;
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..=7)
            .prop_map(|xy| PointSet::from_xy(&xy))
    }

    proptest::proptest! {
        #[test]
        fn mst_matches_kruskal(ps in cloud(), alpha in proptest::sample::select(vec![1.0, 2.0, 3.0])) {
            let t = build_mst(&ps, alpha, 0).unwrap();
            proptest::prop_assert_eq!(t.edges().len(), ps.len() - 1);
            let k = kruskal_weight(&ps, alpha);
            proptest::prop_assert!((t.weight - k).abs() <= 1e-9 * k.max(1.0));
        }

        #[test]
        fn pi_a_visits_subtree_and_ends_at_last_child(ps in cloud()) {
            let t = build_mst(&ps, 2.0, 0).unwrap();
            for v in 0..ps.len() {
                let p = pi_a(&t, v, &ps, 2.0).unwrap();
                let mut got = p.order.clone();
                got.sort_unstable();
                let mut want = t.preorder_from(v);
                want.sort_unstable();
                proptest::prop_assert_eq!(got, want);
                proptest::prop_assert_eq!(p.start, v);
                proptest::prop_assert_eq!(p.end, *t.children[v].last().unwrap_or(&v));
                let b = pi_b(&t, v, &ps, 2.0).unwrap();
                proptest::prop_assert_eq!(b.start, p.end);
                proptest::prop_assert_eq!(b.end, v);
            }
        }

        #[test]
        fn quadratic_bound_at_every_node(ps in cloud()) {
            let t = build_mst(&ps, 2.0, 0).unwrap();
            let bounds = recursion_bounds(&t, &ps, 2.0);
            proptest::prop_assert_eq!(bounds.len(), ps.len());
            for b in &bounds {
                proptest::prop_assert!(b.quadratic_bound_holds(), "{:?}", b);
            }
            let root = bounds.iter().find(|b| b.node == t.root).unwrap();
            let path = pi_a(&t, t.root, &ps, 2.0).unwrap();
            proptest::prop_assert!(approx_eq(root.path_cost, path.cost));
        }

        #[test]
        fn tour_within_factor_of_mst(ps in cloud(), alpha in proptest::sample::select(vec![2.0, 3.0, 4.0])) {
            let t = build_mst(&ps, alpha, 0).unwrap();
            let tour = approx_tour_on(&t, &ps, alpha).unwrap();
            proptest::prop_assert!(tour.is_permutation_of(ps.len()));
            proptest::prop_assert!(tour.cost <= approximation_factor(alpha) * t.weight * (1.0 + 1e-9));
        }
    }
}
