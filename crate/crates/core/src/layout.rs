//! Penny layouts of forests: exact placement with prescribed lifted radii,
//! and a randomized fanning heuristic.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::Point2;
use crate::graph::Graph;
use crate::lift::{circle_circle_intersect, LiftError, PennyRealization};
use crate::packing::ToleranceProfile;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("graph is not a forest (cycle {0:?})")]
    NotForest(Vec<String>),
    #[error("no target radius for `{0}`")]
    MissingRadius(String),
    #[error("target radius for `{0}` is not positive and finite")]
    BadRadius(String),
    #[error("every branch fails at `{vertex}` after {nodes} placements")]
    Exhausted { vertex: String, nodes: usize },
    #[error("no valid layout in {attempts} attempts (last rejection: {reason})")]
    BudgetExhausted { attempts: usize, reason: String },
    #[error(transparent)]
    Lift(#[from] LiftError),
}

/// Non-adjacent pennies must be at least this far apart in accepted layouts.
const SEPARATION: f64 = 2.0 + 1e-9;

/// Cap on candidate placements tried by [`realize_tree_with_radii`].
const NODE_BUDGET: usize = 200_000;

/// Angles tried for the root of every component after the first.
const ROOT_ANGLES: usize = 24;

/// Depth-first vertex order per component (roots are the least labels),
/// with each vertex's parent.
fn dfs_order(g: &Graph) -> Vec<(String, Option<String>)> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for root in sorted(g.vertices()) {
        if seen.contains_key(root.as_str()) {
            continue;
        }
        let mut stack = vec![(root.clone(), None::<String>)];
        while let Some((v, parent)) = stack.pop() {
            if seen.insert(v.clone(), ()).is_some() {
                continue;
            }
            let mut next: Vec<&str> = g.neighbors(&v).into_iter().filter(|w| !seen.contains_key(*w)).collect();
            next.reverse();
            stack.extend(next.into_iter().map(|w| (w.to_string(), Some(v.clone()))));
            out.push((v, parent));
        }
    }
    out
}

fn sorted(v: &[String]) -> Vec<String> {
    let mut s = v.to_vec();
    s.sort();
    s
}

fn require_forest(g: &Graph) -> Result<(), LayoutError> {
    match g.find_cycle() {
        Some(c) => Err(LayoutError::NotForest(c)),
        None => Ok(()),
    }
}

/// Places a forest so that each penny lifts to a sphere of the prescribed
/// radius (`‖q_v‖ = √(1 + 2/ρ_v)`), tangent pennies exactly at the tree
/// edges. Branches are explored in `circle_circle_intersect` order (lower
/// `y` first) with backtracking.
pub fn realize_tree_with_radii<T: Real>(
    tree: &Graph,
    target_radii: &BTreeMap<String, T>,
) -> Result<PennyRealization<T>, LayoutError> {
    require_forest(tree)?;
    let mut norm = BTreeMap::new();
    for v in tree.vertices() {
        let rho = *target_radii.get(v).ok_or_else(|| LayoutError::MissingRadius(v.clone()))?;
        if !(rho > T::zero() && rho.is_finite()) {
            return Err(LayoutError::BadRadius(v.clone()));
        }
        norm.insert(v.clone(), (T::one() + T::two() / rho).sqrt());
    }
    let order = dfs_order(tree);
    let mut search = Search { tree, order: &order, norm: &norm, placed: Vec::new(), nodes: 0, deepest: 0 };
    if search.place(0) {
        let r = PennyRealization::new(order.iter().map(|(v, _)| v.clone()).zip(search.placed))?;
        let by_label = sorted(tree.vertices());
        let r = PennyRealization::new(by_label.iter().map(|v| (v.clone(), r.position(v).expect("placed"))))?;
        Ok(r)
    } else {
        let vertex = order.get(search.deepest).map_or_else(String::new, |(v, _)| v.clone());
        Err(LayoutError::Exhausted { vertex, nodes: search.nodes })
    }
}

struct Search<'a, T> {
    tree: &'a Graph,
    order: &'a [(String, Option<String>)],
    norm: &'a BTreeMap<String, T>,
    placed: Vec<Point2<T>>,
    nodes: usize,
    deepest: usize,
}

impl<T: Real> Search<'_, T> {
    fn place(&mut self, i: usize) -> bool {
        if i == self.order.len() {
            return true;
        }
        self.deepest = self.deepest.max(i);
        let (v, parent) = &self.order[i];
        let d = self.norm[v];
        let candidates: Vec<Point2<T>> = match parent {
            Some(p) => {
                let at = self.order.iter().position(|(u, _)| u == p).expect("parent placed first");
                let pp = self.placed[at];
                circle_circle_intersect(d * d, pp.x, pp.y, T::lit(4.0)).unwrap_or_default()
            }
            None => (0..ROOT_ANGLES)
                .map(|k| Point2::from_angle(T::lit(TAU * k as f64 / ROOT_ANGLES as f64)).scale(d))
                .collect(),
        };
        for c in candidates {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                return false;
            }
            if !self.fits(c, v) {
                continue;
            }
            self.placed.push(c);
            if self.place(i + 1) {
                return true;
            }
            self.placed.pop();
            if self.nodes > NODE_BUDGET {
                return false;
            }
        }
        false
    }

    fn fits(&self, c: Point2<T>, v: &str) -> bool {
        if !(c.norm() > T::one() + T::lit(1e-9)) {
            return false;
        }
        self.placed
            .iter()
            .zip(self.order)
            .all(|(&p, (u, _))| self.tree.has_edge(u, v) || c.dist(p) > T::lit(SEPARATION))
    }
}

/// Attempts made by [`heuristic_penny_layout`] before giving up.
pub const LAYOUT_ATTEMPTS: usize = 200;

/// Randomized layout of a forest whose penny contact graph is exactly the
/// forest, seeded from `seed`.
pub fn heuristic_penny_layout<T: Real>(tree: &Graph, seed: u64) -> Result<PennyRealization<T>, LayoutError> {
    heuristic_penny_layout_with(tree, &mut ChaCha8Rng::seed_from_u64(seed), LAYOUT_ATTEMPTS)
}

/// [`heuristic_penny_layout`] drawing from a caller-supplied generator.
///
/// Each component grows from an end of a longest path. Every vertex spreads
/// its neighbors evenly around itself with jitter, sending its largest
/// subtree in the direction closest to straight outward. Components are
/// stacked apart and the whole layout is moved to the right of the
/// forbidden disk.
pub fn heuristic_penny_layout_with<T: Real, R: Rng + ?Sized>(
    tree: &Graph,
    rng: &mut R,
    attempts: usize,
) -> Result<PennyRealization<T>, LayoutError> {
    require_forest(tree)?;
    let tol = ToleranceProfile::default();
    let mut reason = String::from("no attempts");
    for _ in 0..attempts {
        let Some(positions) = fan_forest(tree, rng) else {
            reason = "some vertex has no room for its neighbors".into();
            continue;
        };
        let r = PennyRealization::new(sorted(tree.vertices()).into_iter().map(|v| {
            let p = positions[&v];
            (v, Point2::new(T::lit(p.x), T::lit(p.y)))
        }))?;
        match check_layout(tree, &r, &tol) {
            Ok(()) => return Ok(r),
            Err(e) => reason = e,
        }
    }
    Err(LayoutError::BudgetExhausted { attempts, reason })
}

fn check_layout<T: Real>(tree: &Graph, r: &PennyRealization<T>, tol: &ToleranceProfile<T>) -> Result<(), String> {
    for (v, p) in r.pennies() {
        if !(p.norm() > T::one() + T::lit(1e-9)) {
            return Err(format!("`{v}` inside the forbidden disk"));
        }
    }
    let pennies: Vec<(&str, Point2<T>)> = r.pennies().collect();
    for (i, (v, p)) in pennies.iter().enumerate() {
        for (w, q) in &pennies[i + 1..] {
            if !tree.has_edge(v, w) && !(p.dist(*q) > T::lit(SEPARATION)) {
                return Err(format!("`{v}` and `{w}` too close"));
            }
        }
    }
    match r.contact_graph(tol) {
        Ok(g) if &g == tree => Ok(()),
        Ok(_) => Err("contact graph differs from the tree".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Margin kept beyond every angular lower bound, in radians.
const ANGLE_MARGIN: f64 = 2.0 * PI / 180.0;

/// Smallest angular gap between two neighbors of a vertex: neighbors 60°
/// apart touch.
const MIN_GAP: f64 = PI / 3.0 + ANGLE_MARGIN;

fn fan_forest<R: Rng + ?Sized>(tree: &Graph, rng: &mut R) -> Option<BTreeMap<String, Point2<f64>>> {
    let mut out = BTreeMap::new();
    let mut top = 0.0f64;
    let mut comps = tree.components();
    comps.sort();
    for comp in comps {
        let sub = tree.induced(&comp);
        let local = fan_tree(&sub, rng)?;
        let (min_y, max_y) = local.values().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
        // Stack components upwards with clearance between penny boundaries.
        let shift = top - min_y + if out.is_empty() { 0.0 } else { 3.0 + rng.gen_range(0.0..1.0) };
        top = max_y + shift;
        for (v, p) in local {
            out.insert(v, Point2::new(p.x, p.y + shift));
        }
    }
    let (min_x, min_y, max_y) =
        out.values().fold((f64::MAX, f64::MAX, f64::MIN), |(a, b, c), p| (a.min(p.x), b.min(p.y), c.max(p.y)));
    let dx = 1.6 + rng.gen_range(0.0..0.8) - min_x;
    let dy = -(min_y + max_y) / 2.0 + rng.gen_range(-0.5..0.5);
    out.values_mut().for_each(|p| *p = Point2::new(p.x + dx, p.y + dy));
    Some(out)
}

/// A vertex waiting to fan out its children.
struct Pending {
    v: String,
    parent: String,
    /// Lower bounds on the vertex's first and last gap (counter-clockwise
    /// from the parent), forced by the parent's gaps on the same sides.
    first_min: f64,
    last_min: f64,
}

/// Lays out one tree. Neighbors of a vertex are separated by angular gaps
/// of more than 60°; for an edge `uv`, the gaps at `u` and `v` on the same
/// side of the edge must sum to more than 180°, which keeps the pennies
/// next to the edge at both ends apart.
fn fan_tree<R: Rng + ?Sized>(tree: &Graph, rng: &mut R) -> Option<BTreeMap<String, Point2<f64>>> {
    let root = longest_path_end(tree);
    let sizes = subtree_sizes(tree, &root);
    let mut pos = BTreeMap::from([(root.clone(), Point2::new(0.0, 0.0))]);
    let mut queue = std::collections::VecDeque::new();
    // The root is a leaf (or isolated): its single gap is the full turn.
    if let Some(child) = tree.neighbors(&root).first() {
        pos.insert(child.to_string(), Point2::from_angle(rng.gen_range(-0.2..0.2)).scale(2.0));
        queue.push_back(Pending { v: child.to_string(), parent: root.clone(), first_min: MIN_GAP, last_min: MIN_GAP });
    }
    while let Some(Pending { v, parent, first_min, last_min }) = queue.pop_front() {
        let here = pos[&v];
        let mut children: Vec<&str> = tree.neighbors(&v).into_iter().filter(|w| *w != parent).collect();
        if children.is_empty() {
            continue;
        }
        children.sort_by_key(|w| std::cmp::Reverse(sizes[*w]));
        let back = (pos[&parent] - here).angle();
        let heading = here.angle();
        let degree = |w: &str| tree.degree(w).expect("vertex of tree");

        let mut options: Vec<(f64, Vec<&str>, Vec<f64>)> = Vec::new();
        for order in permutations(&children) {
            let demands: Vec<usize> = order.iter().map(|w| degree(w)).collect();
            if let Some(gaps) = allocate_gaps(first_min, last_min, &demands) {
                let slack = TAU - gaps.iter().sum::<f64>();
                let spread = slack / gaps.len() as f64;
                let at = order.iter().position(|w| *w == children[0]).expect("heaviest child");
                let angle = back + gaps[..=at].iter().sum::<f64>() + spread * (at + 1) as f64;
                options.push((angle_gap(angle, heading), order, gaps));
            }
        }
        if options.is_empty() {
            return None;
        }
        options.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Usually send the largest subtree straightest; sometimes explore.
        let pick = if rng.gen_bool(0.6) { 0 } else { rng.gen_range(0..options.len()) };
        let (_, order, mut gaps) = options.swap_remove(pick);
        let slack = TAU - gaps.iter().sum::<f64>();
        let weights: Vec<f64> = gaps.iter().map(|_| 1e-9 + rng.gen_range(0.0f64..1.0).powi(3)).collect();
        let total: f64 = weights.iter().sum();
        gaps.iter_mut().zip(&weights).for_each(|(g, w)| *g += slack * w / total);

        let mut angle = back;
        for (i, w) in order.into_iter().enumerate() {
            angle += gaps[i];
            pos.insert(w.to_string(), here + Point2::from_angle(angle).scale(2.0));
            queue.push_back(Pending {
                v: w.to_string(),
                parent: v.clone(),
                first_min: MIN_GAP.max(PI + ANGLE_MARGIN - gaps[i]),
                last_min: MIN_GAP.max(PI + ANGLE_MARGIN - gaps[i + 1]),
            });
        }
    }
    Some(pos)
}

/// Smallest gaps `G_0..G_m` (counter-clockwise from the parent) around a
/// vertex whose children, in order, have the given degrees; `None` when
/// they cannot fit in a full turn. Child `i` sits between `G_i` and
/// `G_{i+1}` and needs room for its own gaps against them.
fn allocate_gaps(first_min: f64, last_min: f64, child_degrees: &[usize]) -> Option<Vec<f64>> {
    let m = child_degrees.len();
    let mut gaps = vec![MIN_GAP; m + 1];
    gaps[0] = gaps[0].max(first_min);
    gaps[m] = gaps[m].max(last_min);
    for (i, &k) in child_degrees.iter().enumerate() {
        if k < 2 {
            continue;
        }
        // Child gaps facing G_i and G_{i+1} need at least π + margin − G.
        let others = (k - 2) as f64 * MIN_GAP;
        let room = TAU - others;
        let need = |g: f64| MIN_GAP.max(PI + ANGLE_MARGIN - g);
        if need(gaps[i]) + MIN_GAP > room {
            gaps[i] = gaps[i].max(PI + ANGLE_MARGIN - (room - MIN_GAP));
        }
        let rest = room - need(gaps[i]);
        if rest < MIN_GAP {
            return None;
        }
        gaps[i + 1] = gaps[i + 1].max(PI + ANGLE_MARGIN - rest);
    }
    (gaps.iter().sum::<f64>() <= TAU).then_some(gaps)
}

fn permutations<'a>(items: &[&'a str]) -> Vec<Vec<&'a str>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// An end of a longest path (least label among ties).
fn longest_path_end(tree: &Graph) -> String {
    let start = sorted(tree.vertices()).into_iter().next().expect("non-empty component");
    farthest(tree, &start)
}

fn farthest(tree: &Graph, from: &str) -> String {
    let mut dist = BTreeMap::from([(from.to_string(), 0usize)]);
    let mut queue = std::collections::VecDeque::from([from.to_string()]);
    while let Some(v) = queue.pop_front() {
        for w in tree.neighbors(&v) {
            if !dist.contains_key(w) {
                dist.insert(w.to_string(), dist[&v] + 1);
                queue.push_back(w.to_string());
            }
        }
    }
    let best = dist.values().copied().max().unwrap_or(0);
    dist.into_iter().find(|(_, d)| *d == best).map(|(v, _)| v).expect("non-empty")
}

fn subtree_sizes(tree: &Graph, root: &str) -> BTreeMap<String, usize> {
    let mut order = Vec::new();
    let mut parent = BTreeMap::new();
    let mut stack = vec![root.to_string()];
    parent.insert(root.to_string(), None::<String>);
    while let Some(v) = stack.pop() {
        for w in tree.neighbors(&v) {
            if !parent.contains_key(w) {
                parent.insert(w.to_string(), Some(v.clone()));
                stack.push(w.to_string());
            }
        }
        order.push(v);
    }
    let mut size: BTreeMap<String, usize> = order.iter().map(|v| (v.clone(), 1)).collect();
    for v in order.iter().rev() {
        if let Some(Some(p)) = parent.get(v) {
            let s = size[v];
            *size.get_mut(p).expect("parent") += s;
        }
    }
    size
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_tree;

    fn radii(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(v, r)| (v.to_string(), *r)).collect()
    }

    #[test]
    fn single_vertex_on_the_axis() {
        let g = Graph::new(["v"], std::iter::empty::<(&str, &str)>()).unwrap();
        let r = realize_tree_with_radii(&g, &radii(&[("v", 0.5)])).unwrap();
        assert!(r.position("v").unwrap().dist(Point2::new(5f64.sqrt(), 0.0)) < 1e-15);
    }

    #[test]
    fn edge_with_equal_radii() {
        let g = Graph::path(&["u", "v"]).unwrap();
        let r = realize_tree_with_radii(&g, &radii(&[("u", 2.0 / 3.0), ("v", 2.0 / 3.0)])).unwrap();
        assert!(r.position("u").unwrap().dist(Point2::new(2.0, 0.0)) < 1e-15);
        let expect = Point2::new(2.0 * (PI / 3.0).cos(), -2.0 * (PI / 3.0).sin());
        assert!(r.position("v").unwrap().dist(expect) < 1e-14);
    }

    #[test]
    fn huge_radii_are_infeasible() {
        // An edge alone always fits (norms exceed 1, so the distance-2 circle
        // meets the norm circle), but two neighbors of a vertex near the disk
        // are both pushed to the antipodal point.
        let g = Graph::path(&["u", "v"]).unwrap();
        assert!(realize_tree_with_radii(&g, &radii(&[("u", 1e6), ("v", 1e6)])).is_ok());
        let g = Graph::path(&["u", "v", "w"]).unwrap();
        let err = realize_tree_with_radii(&g, &radii(&[("u", 1e6), ("v", 1e6), ("w", 1e6)])).unwrap_err();
        assert!(matches!(err, LayoutError::Exhausted { .. }), "{err:?}");
    }

    #[test]
    fn cycles_and_missing_radii_rejected() {
        let c = Graph::cycle(&["x", "y", "z"]).unwrap();
        assert!(matches!(realize_tree_with_radii::<f64>(&c, &BTreeMap::new()), Err(LayoutError::NotForest(_))));
        let p = Graph::path(&["x", "y"]).unwrap();
        assert_eq!(realize_tree_with_radii(&p, &radii(&[("x", 1.0)])), Err(LayoutError::MissingRadius("y".into())));
        assert!(matches!(heuristic_penny_layout::<f64>(&c, 1), Err(LayoutError::NotForest(_))));
    }

    #[test]
    fn realized_forest_has_prescribed_lift_radii() {
        let g = Graph::new(["a", "b", "c", "d", "e"], [("a", "b"), ("b", "c"), ("d", "e")]).unwrap();
        let want = radii(&[("a", 0.5), ("b", 0.4), ("c", 0.6), ("d", 0.3), ("e", 0.5)]);
        let r = realize_tree_with_radii(&g, &want).unwrap();
        assert_eq!(r.contact_graph(&ToleranceProfile::default()).unwrap(), g);
        for (v, q) in r.pennies() {
            let (_, rho) = crate::lift::penny_to_sphere(q).unwrap();
            assert!((rho - want[v]).abs() < 1e-12 * want[v]);
        }
    }

    #[test]
    fn paths_lay_out_for_every_seed() {
        let p5 = Graph::path(&["p0", "p1", "p2", "p3", "p4"]).unwrap();
        for seed in 0..50 {
            let r = heuristic_penny_layout::<f64>(&p5, seed).unwrap();
            assert_eq!(r.contact_graph(&ToleranceProfile::default()).unwrap(), p5);
        }
    }

    #[test]
    fn six_star_always_fails() {
        let leaves = ["l0", "l1", "l2", "l3", "l4", "l5"];
        let g = Graph::new(std::iter::once("c").chain(leaves), leaves.iter().map(|l| ("c", *l))).unwrap();
        for seed in 0..5 {
            assert!(matches!(heuristic_penny_layout::<f64>(&g, seed), Err(LayoutError::BudgetExhausted { .. })));
        }
    }

    #[test]
    fn random_small_trees_mostly_succeed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut ok = 0;
        for _ in 0..100 {
            let n = rng.gen_range(2..=8);
            let t = random_tree(&mut rng, n, "v");
            if t.max_degree() <= 5 {
                ok += usize::from(heuristic_penny_layout_with::<f64, _>(&t, &mut rng, LAYOUT_ATTEMPTS).is_ok());
            } else {
                ok += 1;
            }
        }
        assert_eq!(ok, 100);
    }

    #[test]
    fn forests_are_laid_out_apart() {
        let g = Graph::new(["a", "b", "c", "d"], [("a", "b"), ("c", "d")]).unwrap();
        let r = heuristic_penny_layout::<f64>(&g, 3).unwrap();
        assert_eq!(r.contact_graph(&ToleranceProfile::default()).unwrap(), g);
    }

    #[test]
    fn same_seed_same_layout() {
        let g = Graph::path(&["a", "b", "c"]).unwrap();
        assert_eq!(heuristic_penny_layout::<f64>(&g, 9).unwrap(), heuristic_penny_layout::<f64>(&g, 9).unwrap());
    }
}
