//! Bar-joint frameworks: rigidity matrices, equilibrium stresses, the
//! stress-free verdict and incremental 0-extension certificates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{maxwell_bound, Graph};
use crate::linalg::{singular_values_of_rows, svd_columns};
use crate::packing::{Packing, PackingError, ToleranceProfile};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RigidityError {
    #[error("edge {0}-{1} has coincident endpoint placements")]
    CoincidentEndpoints(String, String),
    #[error("no placement for vertex `{0}`")]
    MissingPlacement(String),
    #[error("placement of `{vertex}` has {got} coordinates, expected {dim}")]
    DimensionMismatch { vertex: String, got: usize, dim: usize },
    #[error("{count} points can never be affinely independent in dimension {dim}")]
    TooManyPoints { count: usize, dim: usize },
    #[error("at least one point is required")]
    NoPoints,
    #[error(transparent)]
    Packing(#[from] PackingError),
}

/// A graph with a point in ℝ^d for each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework<T> {
    graph: Graph,
    dim: usize,
    /// Aligned with `graph.vertices()`.
    points: Vec<Vec<T>>,
}

impl<T: Real> Framework<T> {
    pub fn new(graph: Graph, dim: usize, placement: &BTreeMap<String, Vec<T>>) -> Result<Self, RigidityError> {
        let points = graph
            .vertices()
            .iter()
            .map(|v| {
                let p = placement.get(v).ok_or_else(|| RigidityError::MissingPlacement(v.clone()))?;
                if p.len() != dim {
                    return Err(RigidityError::DimensionMismatch { vertex: v.clone(), got: p.len(), dim });
                }
                Ok(p.clone())
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { graph, dim, points })
    }

    /// The contact framework of a packing: contact graph placed at the centers.
    pub fn from_packing(pk: &Packing<T>, tol: &ToleranceProfile<T>) -> Result<Self, RigidityError> {
        let graph = pk.contact_graph(tol)?;
        let dim = pk.dimension();
        let points = graph
            .vertices()
            .iter()
            .map(|v| pk.sphere(v).expect("contact graph uses packing ids").center.to_array()[..dim].to_vec())
            .collect();
        Ok(Self { graph, dim, points })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, v: &str) -> Option<&[T]> {
        self.graph.index_of(v).map(|i| self.points[i].as_slice())
    }

    /// Applies `f` to every placement.
    pub fn map_points(&self, mut f: impl FnMut(&[T]) -> Vec<T>) -> Self {
        Self { graph: self.graph.clone(), dim: self.dim, points: self.points.iter().map(|p| f(p)).collect() }
    }
}

/// The `|E| × d|V|` rigidity matrix, rows in sorted edge order, column
/// blocks in vertex order.
pub fn rigidity_matrix<T: Real>(fw: &Framework<T>) -> Result<Vec<Vec<T>>, RigidityError> {
    let d = fw.dim;
    let cols = d * fw.graph.vertex_count();
    fw.graph
        .edges()
        .map(|(v, w)| {
            let (i, j) = (fw.graph.index_of(v).expect("edge endpoint"), fw.graph.index_of(w).expect("edge endpoint"));
            let (pv, pw) = (&fw.points[i], &fw.points[j]);
            if pv == pw {
                return Err(RigidityError::CoincidentEndpoints(v.into(), w.into()));
            }
            let mut row = vec![T::zero(); cols];
            for k in 0..d {
                row[i * d + k] = pv[k] - pw[k];
                row[j * d + k] = pw[k] - pv[k];
            }
            Ok(row)
        })
        .collect()
}

/// Rank and stress-space analysis of a framework.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressReport {
    pub dimension: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub dof: usize,
    pub rank: usize,
    pub stress_dim: usize,
    pub stress_free: bool,
    pub rank_tol: f64,
    /// Sorted edge order; stress vectors are indexed by it.
    pub edges: Vec<[String; 2]>,
    /// The `min(|E|, d|V|)` singular values of the rigidity matrix, descending.
    pub singular_values: Vec<f64>,
    /// Smallest retained singular value over the largest.
    pub sigma_min_ratio: Option<f64>,
    /// Largest discarded singular value over the largest; with
    /// `sigma_min_ratio` this brackets the spectral gap at the rank cut.
    pub dropped_sigma_ratio: Option<f64>,
    /// `d|V| − d(d+1)/2`, when `|V| ≥ d`.
    pub maxwell_bound: Option<i64>,
    /// Orthonormal basis of the stress space.
    pub stress_basis: Vec<Vec<f64>>,
}

/// Orthonormal basis of the left null space of the rigidity matrix.
///
/// Singular values at or below `rank_tol·σ_max` count as zero.
pub fn stress_basis<T: Real>(fw: &Framework<T>, rank_tol: T) -> Result<StressReport, RigidityError> {
    let rows = rigidity_matrix(fw)?;
    let (e, dof) = (rows.len(), fw.dim * fw.graph.vertex_count());
    // Rᵀ has the rows of R as its columns; its null space is the stress space.
    let svd = svd_columns(&rows);
    let cut = rank_tol.max(T::epsilon() * T::lit(64.0));
    let sigma_max = svd.values.first().copied().unwrap_or_else(T::zero);
    let rank = if sigma_max > T::zero() { svd.values.iter().filter(|&&s| s > cut * sigma_max).count() } else { 0 };
    let reported = e.min(dof);
    let ratio = |s: T| (s / sigma_max).as_f64();
    let stress_basis = svd.right[rank..].iter().map(|v| canonical_sign(v)).collect();
    let n = fw.graph.vertex_count() as u64;
    Ok(StressReport {
        dimension: fw.dim,
        vertex_count: fw.graph.vertex_count(),
        edge_count: e,
        dof,
        rank,
        stress_dim: e - rank,
        stress_free: rank == e,
        rank_tol: cut.as_f64(),
        edges: fw.graph.edges().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
        singular_values: svd.values[..reported].iter().map(|s| s.as_f64()).collect(),
        sigma_min_ratio: (rank > 0).then(|| ratio(svd.values[rank - 1])),
        dropped_sigma_ratio: (rank < reported).then(|| ratio(svd.values[rank])),
        maxwell_bound: maxwell_bound(fw.dim as u64, n).ok(),
        stress_basis,
    })
}

/// Flips a vector so its first clearly nonzero entry is positive.
fn canonical_sign<T: Real>(v: &[T]) -> Vec<f64> {
    let big = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let lead = v.iter().find(|x| x.abs() > big * T::lit(1e-6)).copied().unwrap_or_else(T::one);
    let s = if lead < T::zero() { -T::one() } else { T::one() };
    v.iter().map(|&x| (s * x).as_f64()).collect()
}

/// Stress analysis of a packing's contact framework; `stress_free` in the
/// report is the verdict.
pub fn is_stress_free<T: Real>(pk: &Packing<T>, tol: &ToleranceProfile<T>) -> Result<StressReport, RigidityError> {
    stress_basis(&Framework::from_packing(pk, tol)?, tol.rank_tol)
}

/// Ratio of the smallest to largest singular value of the difference matrix
/// `(p_i − p_0)`; `None` for a single point.
pub fn affine_sigma_ratio<T: Real>(points: &[Vec<T>]) -> Result<Option<T>, RigidityError> {
    let first = points.first().ok_or(RigidityError::NoPoints)?;
    let dim = first.len();
    if points.len() > dim + 1 {
        return Err(RigidityError::TooManyPoints { count: points.len(), dim });
    }
    if points.len() == 1 {
        return Ok(None);
    }
    let diffs: Vec<Vec<T>> = points[1..].iter().map(|p| p.iter().zip(first).map(|(&a, &b)| a - b).collect()).collect();
    let values = singular_values_of_rows(&diffs);
    let (max, min) = (values[0], values[values.len() - 1]);
    Ok(Some(if max > T::zero() { min / max } else { T::zero() }))
}

/// Whether the points span an affine subspace of dimension `count − 1`.
pub fn affine_independent<T: Real>(points: &[Vec<T>], tol: T) -> Result<bool, RigidityError> {
    Ok(affine_sigma_ratio(points)?.is_none_or(|r| r > tol))
}

/// One step of a 0-extension sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionStep {
    pub vertex: String,
    pub prior_neighbors: Vec<String>,
    /// Affine-independence margin of the vertex and its prior neighbors.
    pub sigma_ratio: Option<f64>,
}

/// A successful 0-extension sequence; certifies the framework stress-free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub steps: Vec<ExtensionStep>,
}

#[derive(Clone, Debug, Error, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExtensionFailure {
    #[error("packing is not valid: {message}")]
    InvalidPacking { message: String },
    #[error("`{vertex}` is not a vertex")]
    UnknownVertex { vertex: String },
    #[error("`{vertex}` appears twice in the order")]
    DuplicateVertex { vertex: String },
    #[error("order omits vertices {missing:?}")]
    MissingVertices { missing: Vec<String> },
    #[error("`{vertex}` has {count} prior neighbors, more than d = {dim}")]
    TooManyNeighbors { vertex: String, count: usize, dim: usize },
    #[error("`{vertex}` and its prior neighbors are affinely dependent (sigma ratio {sigma_ratio:e})")]
    AffinelyDependent { vertex: String, sigma_ratio: f64 },
}

impl ExtensionFailure {
    /// The vertex at which the sequence failed, if the failure is local.
    pub fn vertex(&self) -> Option<&str> {
        match self {
            Self::UnknownVertex { vertex }
            | Self::DuplicateVertex { vertex }
            | Self::TooManyNeighbors { vertex, .. }
            | Self::AffinelyDependent { vertex, .. } => Some(vertex),
            _ => None,
        }
    }
}

/// Checks that adding the vertices in `order` is a sequence of 0-extensions
/// of the contact framework: each vertex has at most `d` earlier neighbors,
/// affinely independent together with it.
pub fn zero_extension_certificate<T: Real, S: AsRef<str>>(
    pk: &Packing<T>,
    order: &[S],
    tol: &ToleranceProfile<T>,
) -> Result<Certificate, ExtensionFailure> {
    let fw =
        Framework::from_packing(pk, tol).map_err(|e| ExtensionFailure::InvalidPacking { message: e.to_string() })?;
    let g = fw.graph();
    let mut placed = BTreeMap::new();
    for (i, v) in order.iter().enumerate() {
        let v = v.as_ref();
        if !g.contains(v) {
            return Err(ExtensionFailure::UnknownVertex { vertex: v.into() });
        }
        if placed.insert(v.to_string(), i).is_some() {
            return Err(ExtensionFailure::DuplicateVertex { vertex: v.into() });
        }
    }
    let missing: Vec<String> = g.vertices().iter().filter(|v| !placed.contains_key(*v)).cloned().collect();
    if !missing.is_empty() {
        return Err(ExtensionFailure::MissingVertices { missing });
    }
    let mut steps = Vec::with_capacity(order.len());
    for (i, v) in order.iter().enumerate() {
        let v = v.as_ref();
        let prior: Vec<String> = g.neighbors(v).into_iter().filter(|w| placed[*w] < i).map(str::to_string).collect();
        if prior.len() > fw.dim() {
            return Err(ExtensionFailure::TooManyNeighbors { vertex: v.into(), count: prior.len(), dim: fw.dim() });
        }
        let points: Vec<Vec<T>> = std::iter::once(v)
            .chain(prior.iter().map(String::as_str))
            .map(|u| fw.point(u).expect("vertex of framework").to_vec())
            .collect();
        let ratio = affine_sigma_ratio(&points).expect("at most d + 1 points");
        if let Some(r) = ratio {
            if !(r > tol.rank_tol) {
                return Err(ExtensionFailure::AffinelyDependent { vertex: v.into(), sigma_ratio: r.as_f64() });
            }
        }
        steps.push(ExtensionStep { vertex: v.into(), prior_neighbors: prior, sigma_ratio: ratio.map(Real::as_f64) });
    }
    Ok(Certificate { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;
    use crate::packing::Sphere;
    use crate::sampling::{random_point, random_rotation};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn framework(g: Graph, pts: &[&[f64]]) -> Framework<f64> {
        let dim = pts[0].len();
        let placement = g.vertices().iter().cloned().zip(pts.iter().map(|p| p.to_vec())).collect();
        Framework::new(g, dim, &placement).unwrap()
    }

    /// Rank via nalgebra's SVD, the independent oracle.
    fn oracle_rank(rows: &[Vec<f64>], rel: f64) -> usize {
        if rows.is_empty() {
            return 0;
        }
        let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
        let sv = m.singular_values();
        let max = sv.max();
        sv.iter().filter(|&&s| s > rel * max).count()
    }

    /// Σ_w σ_vw (p_v − p_w) at every vertex, computed from the graph directly.
    fn max_imbalance(fw: &Framework<f64>, sigma: &[f64]) -> f64 {
        let g = fw.graph();
        let mut worst = 0.0f64;
        for v in g.vertices() {
            let pv = fw.point(v).unwrap();
            let mut force = vec![0.0; fw.dim()];
            for (k, (a, b)) in g.edges().enumerate() {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                let pw = fw.point(w).unwrap();
                for c in 0..fw.dim() {
                    force[c] += sigma[k] * (pv[c] - pw[c]);
                }
            }
            worst = worst.max(force.iter().map(|x| x.abs()).fold(0.0, f64::max));
        }
        worst
    }

    #[test]
    fn single_edge_row() {
        let g = Graph::path(&["1", "2"]).unwrap();
        let fw = framework(g, &[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(rigidity_matrix(&fw).unwrap(), vec![vec![-1.0, 0.0, 0.0, 1.0, 0.0, 0.0]]);
    }

    #[test]
    fn coincident_endpoints_rejected() {
        let fw = framework(Graph::path(&["x", "y"]).unwrap(), &[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(rigidity_matrix(&fw), Err(RigidityError::CoincidentEndpoints(..))));
    }

    #[test]
    fn planar_triangle_rank_three() {
        let fw = framework(Graph::complete(&["p", "q", "r"]).unwrap(), &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let rows = rigidity_matrix(&fw).unwrap();
        assert_eq!((rows.len(), rows[0].len()), (3, 6));
        assert_eq!(oracle_rank(&rows, 1e-8), 3);
        let rep = stress_basis(&fw, 1e-8).unwrap();
        assert_eq!((rep.rank, rep.stress_dim), (3, 0));
        assert!(rep.stress_free);
    }

    #[test]
    fn generic_k5_in_space_has_one_stress() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let fw = framework(Graph::complete(&["a", "b", "c", "d", "e"]).unwrap(), &refs);
        let rows = rigidity_matrix(&fw).unwrap();
        assert_eq!((rows.len(), rows[0].len()), (10, 15));
        assert_eq!(oracle_rank(&rows, 1e-8), 9);
        let rep = stress_basis(&fw, 1e-8).unwrap();
        assert_eq!((rep.rank, rep.stress_dim), (9, 1));
        assert_eq!(rep.maxwell_bound, Some(9));
        assert!(max_imbalance(&fw, &rep.stress_basis[0]) < 1e-12);
        assert!(rep.dropped_sigma_ratio.unwrap() < 1e-12 && rep.sigma_min_ratio.unwrap() > 1e-3);
    }

    #[test]
    fn regular_tetrahedron_is_stress_free() {
        let s = 1.0 / 2f64.sqrt();
        let pts: [&[f64]; 4] = [&[1.0, 0.0, -s], &[-1.0, 0.0, -s], &[0.0, 1.0, s], &[0.0, -1.0, s]];
        let fw = framework(Graph::complete(&["1", "2", "3", "4"]).unwrap(), &pts);
        let rep = stress_basis(&fw, 1e-8).unwrap();
        assert_eq!((rep.rank, rep.stress_dim), (6, 0));
        assert_eq!(oracle_rank(&rigidity_matrix(&fw).unwrap(), 1e-8), 6);
    }

    #[test]
    fn tree_at_generic_points_is_stress_free() {
        let g = Graph::new(["r", "x", "y", "z", "w"], [("r", "x"), ("r", "y"), ("y", "z"), ("y", "w")]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let rep = stress_basis(&framework(g, &refs), 1e-8).unwrap();
        assert_eq!(rep.stress_dim, 0);
    }

    #[test]
    fn two_tangent_spheres() {
        let pk = Packing::new(
            3,
            vec![Sphere::new("a", Point3::new(0.0, 0.0, -1.0), 1.0), Sphere::new("b", Point3::new(0.0, 0.0, 1.0), 1.0)],
            None,
        )
        .unwrap();
        let rep = is_stress_free(&pk, &ToleranceProfile::default()).unwrap();
        assert!(rep.stress_free);
        assert_eq!(rep.edge_count, 1);
    }

    #[test]
    fn affine_independence_examples() {
        let tol = 1e-8;
        let tet = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(affine_independent(&tet, tol).unwrap());
        let flat = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(!affine_independent(&flat, tol).unwrap());
        let thin = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 1e-12, 0.0]];
        assert!(!affine_independent(&thin, tol).unwrap());
        let mut five = tet.clone();
        five.push(vec![1.0, 1.0, 1.0]);
        assert!(matches!(affine_independent(&five, tol), Err(RigidityError::TooManyPoints { count: 5, dim: 3 })));
        assert!(affine_independent(&[vec![3.0, 3.0, 3.0]], tol).unwrap());
    }

    fn packing_from(pts: &[(&str, [f64; 3], f64)]) -> Packing<f64> {
        Packing::new(3, pts.iter().map(|(id, c, r)| Sphere::new(*id, Point3::from_array(*c), *r)).collect(), None)
            .unwrap()
    }

    #[test]
    fn path_certificate_in_both_directions() {
        let pk = packing_from(&[("p", [0.0, 0.0, 0.0], 1.0), ("q", [2.0, 0.0, 0.0], 1.0), ("r", [2.0, 3.0, 0.0], 2.0)]);
        let tol = ToleranceProfile::default();
        let cert = zero_extension_certificate(&pk, &["p", "q", "r"], &tol).unwrap();
        assert_eq!(cert.steps[2].prior_neighbors, vec!["q".to_string()]);
        assert!(zero_extension_certificate(&pk, &["r", "q", "p"], &tol).is_ok());
        assert!(is_stress_free(&pk, &tol).unwrap().stress_free);
    }

    #[test]
    fn certificate_order_errors() {
        let pk = packing_from(&[("p", [0.0, 0.0, 0.0], 1.0), ("q", [2.0, 0.0, 0.0], 1.0)]);
        let tol = ToleranceProfile::default();
        assert!(matches!(zero_extension_certificate(&pk, &["p"], &tol), Err(ExtensionFailure::MissingVertices { .. })));
        assert!(matches!(
            zero_extension_certificate(&pk, &["p", "p", "q"], &tol),
            Err(ExtensionFailure::DuplicateVertex { .. })
        ));
        assert!(matches!(
            zero_extension_certificate(&pk, &["p", "zz"], &tol),
            Err(ExtensionFailure::UnknownVertex { .. })
        ));
    }

    #[test]
    fn k5_certificate_fails_at_fifth_vertex() {
        // Five mutually tangent spheres: a regular tetrahedron of unit spheres
        // plus the small sphere in its center.
        let s = 2f64.sqrt();
        let tet = [[1.0, 0.0, -1.0 / s], [-1.0, 0.0, -1.0 / s], [0.0, 1.0, 1.0 / s], [0.0, -1.0, 1.0 / s]];
        let circum = Point3::from_array(tet[0]).norm();
        let mut spheres: Vec<Sphere<f64>> =
            tet.iter().enumerate().map(|(i, c)| Sphere::new(format!("t{i}"), Point3::from_array(*c), 1.0)).collect();
        spheres.push(Sphere::new("m", Point3::zero(), circum - 1.0));
        let pk = Packing::new(3, spheres, None).unwrap();
        let tol = ToleranceProfile::default();
        assert_eq!(pk.contact_graph(&tol).unwrap().edge_count(), 10);
        for order in [["t0", "t1", "t2", "t3", "m"], ["m", "t3", "t1", "t0", "t2"]] {
            let fail = zero_extension_certificate(&pk, &order, &tol).unwrap_err();
            assert_eq!(fail, ExtensionFailure::TooManyNeighbors { vertex: order[4].into(), count: 4, dim: 3 });
        }
        let rep = is_stress_free(&pk, &tol).unwrap();
        assert_eq!(rep.stress_dim, 1);
    }

    #[test]
    fn coplanar_extension_fails() {
        // Three unit spheres around a fourth, all centered on z = 0.
        let h = 3f64.sqrt();
        let pk = packing_from(&[
            ("p", [0.0, 0.0, 0.0], 1.0),
            ("q", [2.0, 0.0, 0.0], 1.0),
            ("r", [-1.0, h, 0.0], 1.0),
            ("s", [-1.0, -h, 0.0], 1.0),
        ]);
        let tol = ToleranceProfile::default();
        let fail = zero_extension_certificate(&pk, &["q", "r", "s", "p"], &tol).unwrap_err();
        assert!(matches!(fail, ExtensionFailure::AffinelyDependent { ref vertex, .. } if vertex == "p"), "{fail:?}");
        // Adding p first gives three one-neighbor steps instead.
        assert!(zero_extension_certificate(&pk, &["p", "q", "r", "s"], &tol).is_ok());
    }

    #[test]
    fn failure_serializes_with_reason() {
        let f = ExtensionFailure::TooManyNeighbors { vertex: "v".into(), count: 4, dim: 3 };
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"reason\":\"too_many_neighbors\""), "{s}");
        assert_eq!(f.vertex(), Some("v"));
    }

    fn random_framework(rng: &mut ChaCha8Rng, dim: usize) -> Framework<f64> {
        let n = rng.gen_range(2..9);
        let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((labels[i].as_str(), labels[j].as_str()));
                }
            }
        }
        let g = Graph::new(labels.iter().map(String::as_str), edges).unwrap();
        let placement =
            labels.iter().map(|l| (l.clone(), (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect();
        Framework::new(g, dim, &placement).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn stress_report_invariants(seed in any::<u64>(), dim in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fw = random_framework(&mut rng, dim);
            let rep = stress_basis(&fw, 1e-8).unwrap();
            prop_assert_eq!(rep.stress_dim, rep.edge_count - rep.rank);
            prop_assert_eq!(rep.stress_basis.len(), rep.stress_dim);
            prop_assert_eq!(rep.rank, oracle_rank(&rigidity_matrix(&fw).unwrap(), 1e-8));
            if let Some(m) = rep.maxwell_bound {
                prop_assert!(rep.stress_dim as i64 >= rep.edge_count as i64 - m);
            }
            for (i, s) in rep.stress_basis.iter().enumerate() {
                prop_assert!(max_imbalance(&fw, s) < 1e-8);
                for (j, t) in rep.stress_basis.iter().enumerate() {
                    let d: f64 = s.iter().zip(t).map(|(a, b)| a * b).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((d - expect).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn stress_dim_invariant_under_rigid_motion(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fw = random_framework(&mut rng, 3);
            let rot = random_rotation::<f64, _>(&mut rng);
            let shift: Point3<f64> = random_point(&mut rng, 5.0);
            let moved = fw.map_points(|p| (rot.mul_vec(Point3::new(p[0], p[1], p[2])) + shift).to_array().to_vec());
            prop_assert_eq!(stress_basis(&fw, 1e-8).unwrap().stress_dim, stress_basis(&moved, 1e-8).unwrap().stress_dim);
        }
    }
}
