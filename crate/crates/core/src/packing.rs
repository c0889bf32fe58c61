//! Sphere and circle packings: validation against the tangency/disjointness
//! definition, contact-graph extraction, pose normalization and JSON I/O.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Mat3, Point3, RigidMotion};
use crate::graph::{Graph, GraphJson};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PackingError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("sphere `{0}` has a non-positive or non-finite radius")]
    NonPositiveRadius(String),
    #[error("sphere `{0}` has a non-finite center or a center of the wrong dimension")]
    BadCenter(String),
    #[error("duplicate sphere id `{0}`")]
    DuplicateId(String),
    #[error("unknown sphere id `{0}`")]
    UnknownId(String),
    #[error("declared graph vertices do not match sphere ids")]
    GraphMismatch,
    #[error("invalid packing: {} overlapping pair(s)", .0.overlap_count)]
    Invalid(Box<ValidationReport>),
    #[error("operation requires a 3-dimensional packing")]
    NotThreeDimensional,
    #[error("hub spheres `{0}` and `{1}` have coincident centers")]
    CoincidentHubs(String, String),
    #[error("tolerance {name} = {value} must lie in (0, 1e-2)")]
    Tolerance { name: &'static str, value: f64 },
}

/// Relative tolerances for contact classification and rank decisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile<T> {
    /// `|gap| ≤ contact_tol·(r_v + r_w)` counts as a contact.
    pub contact_tol: T,
    /// `gap < −overlap_tol·(r_v + r_w)` counts as an overlap.
    pub overlap_tol: T,
    /// Singular values at or below `rank_tol·σ_max` are treated as zero.
    pub rank_tol: T,
}

impl<T: Real> Default for ToleranceProfile<T> {
    fn default() -> Self {
        Self { contact_tol: T::lit(1e-9), overlap_tol: T::lit(1e-9), rank_tol: T::lit(1e-8) }
    }
}

impl<T: Real> ToleranceProfile<T> {
    pub fn new(contact_tol: T, overlap_tol: T, rank_tol: T) -> Result<Self, PackingError> {
        let tol = Self { contact_tol, overlap_tol, rank_tol };
        tol.check()?;
        Ok(tol)
    }

    pub fn check(&self) -> Result<(), PackingError> {
        for (name, value) in
            [("contact_tol", self.contact_tol), ("overlap_tol", self.overlap_tol), ("rank_tol", self.rank_tol)]
        {
            if !(value > T::zero() && value < T::lit(1e-2)) {
                return Err(PackingError::Tolerance { name, value: value.as_f64() });
            }
        }
        Ok(())
    }
}

/// A ball: label, center and radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Sphere<T> {
    pub id: String,
    pub center: Point3<T>,
    pub radius: T,
}

impl<T: Real> Sphere<T> {
    pub fn new(id: impl Into<String>, center: Point3<T>, radius: T) -> Self {
        Self { id: id.into(), center, radius }
    }
}

/// A finite packing of spheres (dimension 3) or circles (dimension 2).
///
/// Circle packings store their centers with `z = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Packing<T> {
    dimension: usize,
    spheres: Vec<Sphere<T>>,
    index: BTreeMap<String, usize>,
    graph: Option<Graph>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairClass {
    Separated,
    Contact,
    Overlap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub class: PairClass,
    /// `‖p_a − p_b‖ − (r_a + r_b)`.
    pub gap: f64,
    /// `gap / (r_a + r_b)`.
    pub relative_gap: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDiscrepancy {
    /// Declared edges that are not contacts.
    pub missing_contacts: Vec<[String; 2]>,
    /// Contacts that are not declared edges.
    pub undeclared_contacts: Vec<[String; 2]>,
}

impl GraphDiscrepancy {
    pub fn is_empty(&self) -> bool {
        self.missing_contacts.is_empty() && self.undeclared_contacts.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub contact_count: usize,
    pub overlap_count: usize,
    /// One entry per unordered pair, ids sorted within and across pairs.
    pub pairs: Vec<PairReport>,
    /// Present when the packing declares a graph.
    pub declared_graph_discrepancy: Option<GraphDiscrepancy>,
}

impl ValidationReport {
    /// Classification of the pair `{v, w}`, in either argument order.
    pub fn class_of(&self, v: &str, w: &str) -> Option<PairClass> {
        let (a, b) = if v <= w { (v, w) } else { (w, v) };
        self.pairs.iter().find(|p| p.a == a && p.b == b).map(|p| p.class)
    }

    pub fn worst_contact_residual(&self) -> f64 {
        self.pairs.iter().filter(|p| p.class == PairClass::Contact).map(|p| p.relative_gap.abs()).fold(0.0, f64::max)
    }
}

/// Classifies a pair from its gap and radius sum.
///
/// Gaps in `[−overlap_tol·s, −contact_tol·s)` (only possible when
/// `overlap_tol > contact_tol`) are reported as contacts.
pub fn classify_gap<T: Real>(gap: T, radius_sum: T, tol: &ToleranceProfile<T>) -> PairClass {
    if gap > tol.contact_tol * radius_sum {
        PairClass::Separated
    } else if gap < -(tol.overlap_tol.max(tol.contact_tol)) * radius_sum {
        PairClass::Overlap
    } else {
        PairClass::Contact
    }
}

impl<T: Real> Packing<T> {
    pub fn new(dimension: usize, spheres: Vec<Sphere<T>>, graph: Option<Graph>) -> Result<Self, PackingError> {
        if dimension != 2 && dimension != 3 {
            return Err(PackingError::Dimension(dimension));
        }
        let mut index = BTreeMap::new();
        for (i, s) in spheres.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                return Err(PackingError::DuplicateId(s.id.clone()));
            }
            if !(s.radius > T::zero() && s.radius.is_finite()) {
                return Err(PackingError::NonPositiveRadius(s.id.clone()));
            }
            if !s.center.is_finite() || (dimension == 2 && s.center.z != T::zero()) {
                return Err(PackingError::BadCenter(s.id.clone()));
            }
        }
        if let Some(g) = &graph {
            if g.vertex_count() != spheres.len() || !spheres.iter().all(|s| g.contains(&s.id)) {
                return Err(PackingError::GraphMismatch);
            }
        }
        Ok(Self { dimension, spheres, index, graph })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spheres(&self) -> &[Sphere<T>] {
        &self.spheres
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.spheres.iter().map(|s| s.id.clone()).collect()
    }

    pub fn sphere(&self, id: &str) -> Option<&Sphere<T>> {
        self.index.get(id).map(|&i| &self.spheres[i])
    }

    pub fn declared_graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    pub fn with_declared_graph(self, graph: Option<Graph>) -> Result<Self, PackingError> {
        Self::new(self.dimension, self.spheres, graph)
    }

    /// Replaces every sphere, keeping ids, dimension and declared graph.
    pub fn map_spheres<E, F>(&self, mut f: F) -> Result<Self, E>
    where
        F: FnMut(&Sphere<T>) -> Result<(Point3<T>, T), E>,
        E: From<PackingError>,
    {
        let spheres = self
            .spheres
            .iter()
            .map(|s| f(s).map(|(c, r)| Sphere::new(s.id.clone(), c, r)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Self::new(self.dimension, spheres, self.graph.clone())?)
    }

    /// Classifies every unordered pair as separated, in contact, or overlapping.
    pub fn validate(&self, tol: &ToleranceProfile<T>) -> Result<ValidationReport, PackingError> {
        if let Some(s) = self.spheres.iter().find(|s| !(s.radius > T::zero())) {
            return Err(PackingError::NonPositiveRadius(s.id.clone()));
        }
        let mut order: Vec<usize> = (0..self.spheres.len()).collect();
        order.sort_by(|&a, &b| self.spheres[a].id.cmp(&self.spheres[b].id));
        let mut pairs = Vec::new();
        let (mut contact_count, mut overlap_count) = (0, 0);
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                let (si, sj) = (&self.spheres[i], &self.spheres[j]);
                let sum = si.radius + sj.radius;
                let gap = si.center.dist(sj.center) - sum;
                let class = classify_gap(gap, sum, tol);
                match class {
                    PairClass::Contact => contact_count += 1,
                    PairClass::Overlap => overlap_count += 1,
                    PairClass::Separated => {}
                }
                pairs.push(PairReport {
                    a: si.id.clone(),
                    b: sj.id.clone(),
                    class,
                    gap: gap.as_f64(),
                    relative_gap: (gap / sum).as_f64(),
                });
            }
        }
        let declared_graph_discrepancy = self.graph.as_ref().map(|g| {
            let mut d = GraphDiscrepancy::default();
            for p in &pairs {
                let declared = g.has_edge(&p.a, &p.b);
                let touching = p.class == PairClass::Contact;
                if declared && !touching {
                    d.missing_contacts.push([p.a.clone(), p.b.clone()]);
                } else if touching && !declared {
                    d.undeclared_contacts.push([p.a.clone(), p.b.clone()]);
                }
            }
            d
        });
        Ok(ValidationReport {
            valid: overlap_count == 0,
            contact_count,
            overlap_count,
            pairs,
            declared_graph_discrepancy,
        })
    }

    /// The graph whose edges are exactly the contact pairs.
    pub fn contact_graph(&self, tol: &ToleranceProfile<T>) -> Result<Graph, PackingError> {
        let report = self.validate(tol)?;
        if !report.valid {
            return Err(PackingError::Invalid(Box::new(report)));
        }
        Ok(contact_graph_from_report(self, &report))
    }

    /// Pairwise center distances, in sphere order.
    pub fn distance_matrix(&self) -> Vec<Vec<T>> {
        self.spheres.iter().map(|a| self.spheres.iter().map(|b| a.center.dist(b.center)).collect()).collect()
    }

    /// The rigid motion placing `hub_a` at `(0,0,−r_a)` with `hub_b` on the
    /// positive z-axis, at `(0,0,r_b)` when the hubs are tangent.
    pub fn pose_motion(&self, hub_a: &str, hub_b: &str) -> Result<RigidMotion<T>, PackingError> {
        if self.dimension != 3 {
            return Err(PackingError::NotThreeDimensional);
        }
        let a = self.sphere(hub_a).ok_or_else(|| PackingError::UnknownId(hub_a.into()))?;
        let b = self.sphere(hub_b).ok_or_else(|| PackingError::UnknownId(hub_b.into()))?;
        let axis = b.center - a.center;
        let len = axis.norm();
        if !(len > T::zero()) {
            return Err(PackingError::CoincidentHubs(hub_a.into(), hub_b.into()));
        }
        Ok(RigidMotion {
            rotation: Mat3::rotation_onto_z(axis.scale(T::one() / len)),
            from: a.center,
            to: Point3::new(T::zero(), T::zero(), -a.radius),
        })
    }

    /// Applies a rigid motion to every center.
    pub fn transformed_by(&self, motion: &RigidMotion<T>) -> Self {
        let spheres =
            self.spheres.iter().map(|s| Sphere::new(s.id.clone(), motion.apply(s.center), s.radius)).collect();
        Self::new(self.dimension, spheres, self.graph.clone()).expect("rigid motions preserve validity")
    }

    /// Moves the packing rigidly so `hub_a` sits at `(0,0,−r_a)` and `hub_b`
    /// on the positive z-axis (at `(0,0,r_b)` when the hubs touch).
    pub fn normalize_pose(&self, hub_a: &str, hub_b: &str) -> Result<Self, PackingError> {
        Ok(self.transformed_by(&self.pose_motion(hub_a, hub_b)?))
    }

    pub fn to_json(&self) -> PackingJson {
        PackingJson::from(self)
    }
}

pub(crate) fn contact_graph_from_report<T: Real>(pk: &Packing<T>, report: &ValidationReport) -> Graph {
    let edges = report.pairs.iter().filter(|p| p.class == PairClass::Contact).map(|p| (p.a.as_str(), p.b.as_str()));
    Graph::new(pk.spheres.iter().map(|s| s.id.as_str()), edges).expect("pairs reference packing ids")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereJson {
    pub id: String,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// The JSON shape of a packing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingJson {
    pub dimension: usize,
    pub spheres: Vec<SphereJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
}

impl<T: Real> From<&Packing<T>> for PackingJson {
    fn from(pk: &Packing<T>) -> Self {
        Self {
            dimension: pk.dimension,
            spheres: pk
                .spheres
                .iter()
                .map(|s| SphereJson {
                    id: s.id.clone(),
                    center: s.center.to_array()[..pk.dimension].iter().map(|c| c.as_f64()).collect(),
                    radius: s.radius.as_f64(),
                })
                .collect(),
            graph: pk.graph.as_ref().map(GraphJson::from),
        }
    }
}

impl<T: Real> TryFrom<PackingJson> for Packing<T> {
    type Error = PackingError;
    fn try_from(j: PackingJson) -> Result<Self, PackingError> {
        let dim = j.dimension;
        if dim != 2 && dim != 3 {
            return Err(PackingError::Dimension(dim));
        }
        let spheres = j
            .spheres
            .into_iter()
            .map(|s| {
                if s.center.len() != dim {
                    return Err(PackingError::BadCenter(s.id));
                }
                let c = |i: usize| s.center.get(i).copied().map(T::lit).unwrap_or_else(T::zero);
                Ok(Sphere::new(s.id.clone(), Point3::new(c(0), c(1), c(2)), T::lit(s.radius)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let graph = j.graph.map(Graph::try_from).transpose().map_err(|_| PackingError::GraphMismatch)?;
        Packing::new(dim, spheres, graph)
    }
}
