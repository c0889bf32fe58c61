//! Unit pennies in the plane outside the forbidden unit disk, and their lift
//! to spheres tangent to two unit hub spheres at `(0,0,±1)`.
//!
//! Pennies have radius 1, so two pennies touch at center distance 2. A penny
//! at `q` lifts to the sphere of radius `ρ = 2/(‖q‖² − 1)` centered at
//! `(ρq, 0)`, which is tangent to both hubs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Point3};
use crate::graph::{Graph, GraphError};
use crate::packing::{classify_gap, Packing, PackingError, PairClass, Sphere, ToleranceProfile};
use crate::scalar::Real;

/// Center distance of two touching pennies.
pub const CONTACT_DISTANCE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("penny `{id}` at distance {norm} from the origin is inside the closed forbidden disk")]
    ForbiddenDisk { id: String, norm: f64 },
    #[error("point at distance {0} from the origin is inside the closed forbidden disk")]
    InsideDisk(f64),
    #[error("pennies `{a}` and `{b}` overlap (center distance {distance})")]
    Overlap { a: String, b: String, distance: f64 },
    #[error("duplicate penny id `{0}`")]
    DuplicateId(String),
    #[error("penny `{0}` has a non-finite position")]
    NonFinite(String),
    #[error("contact_distance must be 2, got {0}")]
    ContactDistance(f64),
    #[error("sphere is not tangent to both hubs (residuals {lower:e}, {upper:e})")]
    NotTangent { lower: f64, upper: f64 },
    #[error("sphere center is off the plane z = 0 (z = {0:e})")]
    OffPlane(f64),
    #[error("radius must be positive and finite")]
    BadRadius,
    #[error("circles are concentric")]
    Concentric,
    #[error("circle_circle_intersect needs p > 0 and q > 0")]
    NonPositiveSquaredRadius,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

/// Real solutions of `x² + y² = p` and `(x − α)² + (y − β)² = q`, sorted by
/// `y` then `x`. Tangent circles give one point.
pub fn circle_circle_intersect<T: Real>(p: T, alpha: T, beta: T, q: T) -> Result<Vec<Point2<T>>, LiftError> {
    if !(p > T::zero() && q > T::zero()) {
        return Err(LiftError::NonPositiveSquaredRadius);
    }
    if alpha == T::zero() && beta == T::zero() {
        return Err(LiftError::Concentric);
    }
    // Subtracting the equations leaves the radical line αx + βy = c.
    let n2 = alpha * alpha + beta * beta;
    let c = (p - q + n2) / T::two();
    // Solve the line for the variable with the larger coefficient, then the
    // quadratic in the other; its discriminant is (coef)²·(p·n2 − c²).
    let disc = p * n2 - c * c;
    let scale = p * n2 + c * c;
    let swap = beta.abs() > alpha.abs();
    let (u, w) = if swap { (beta, alpha) } else { (alpha, beta) };
    let solve = |root: T| -> Point2<T> {
        // Roots of n2·s² − 2cw·s + c² − p·u² = 0 in the free variable s.
        let s = (c * w + root) / n2;
        let t = (c - w * s) / u;
        if swap {
            Point2::new(s, t)
        } else {
            Point2::new(t, s)
        }
    };
    let mut out = if disc.abs() <= T::epsilon() * T::lit(64.0) * scale {
        vec![solve(T::zero())]
    } else if disc < T::zero() {
        Vec::new()
    } else {
        let root = u.abs() * disc.sqrt();
        vec![solve(root), solve(-root)]
    };
    out.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap().then(a.x.partial_cmp(&b.x).unwrap()));
    Ok(out)
}

/// Sphere tangent to both unit hubs corresponding to the penny at `q`.
pub fn penny_to_sphere<T: Real>(q: Point2<T>) -> Result<(Point3<T>, T), LiftError> {
    let d2 = q.norm_sq();
    if !(d2 > T::one()) {
        return Err(LiftError::InsideDisk(d2.sqrt().as_f64()));
    }
    let rho = T::two() / (d2 - T::one());
    Ok((Point3::new(rho * q.x, rho * q.y, T::zero()), rho))
}

/// Inverse of [`penny_to_sphere`]; requires tangency to both hubs and a
/// center on `z = 0`, each within 1e-9.
pub fn sphere_to_penny<T: Real>(center: Point3<T>, radius: T) -> Result<Point2<T>, LiftError> {
    if !(radius > T::zero() && radius.is_finite()) {
        return Err(LiftError::BadRadius);
    }
    let tol = T::tol_floor(1e-9);
    if !(center.z.abs() <= tol) {
        return Err(LiftError::OffPlane(center.z.as_f64()));
    }
    let hub = |z: f64| center.dist(Point3::new(T::zero(), T::zero(), T::lit(z))) - (radius + T::one());
    let (lower, upper) = (hub(-1.0), hub(1.0));
    let scale = radius + T::one();
    if !(lower.abs() <= tol * scale && upper.abs() <= tol * scale) {
        return Err(LiftError::NotTangent { lower: lower.as_f64(), upper: upper.as_f64() });
    }
    Ok(center.xy().scale(T::one() / radius))
}

/// Unit pennies, each labelled and placed outside the closed unit disk.
#[derive(Clone, Debug, PartialEq)]
pub struct PennyRealization<T> {
    ids: Vec<String>,
    positions: Vec<Point2<T>>,
    index: BTreeMap<String, usize>,
}

impl<T: Real> PennyRealization<T> {
    /// Checks ids and finiteness; see [`PennyRealization::validate`] for the
    /// geometric conditions.
    pub fn new<S: Into<String>>(pennies: impl IntoIterator<Item = (S, Point2<T>)>) -> Result<Self, LiftError> {
        let mut out = Self { ids: Vec::new(), positions: Vec::new(), index: BTreeMap::new() };
        for (id, p) in pennies {
            let id = id.into();
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(LiftError::NonFinite(id));
            }
            if out.index.insert(id.clone(), out.ids.len()).is_some() {
                return Err(LiftError::DuplicateId(id));
            }
            out.ids.push(id);
            out.positions.push(p);
        }
        Ok(out)
    }

    pub fn empty() -> Self {
        Self { ids: Vec::new(), positions: Vec::new(), index: BTreeMap::new() }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<Point2<T>> {
        self.index.get(id).map(|&i| self.positions[i])
    }

    pub fn pennies(&self) -> impl Iterator<Item = (&str, Point2<T>)> + '_ {
        self.ids.iter().map(String::as_str).zip(self.positions.iter().copied())
    }

    /// Pairs as (a, b, class), sorted by label.
    fn classified_pairs(&self, tol: &ToleranceProfile<T>) -> Vec<(&str, &str, PairClass, T)> {
        let two = T::lit(CONTACT_DISTANCE);
        let order: Vec<usize> = self.index.values().copied().collect();
        let mut out = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                let d = self.positions[i].dist(self.positions[j]);
                out.push((self.ids[i].as_str(), self.ids[j].as_str(), classify_gap(d - two, two, tol), d));
            }
        }
        out
    }

    /// Outside the closed forbidden disk, and no two pennies overlap.
    pub fn validate(&self, tol: &ToleranceProfile<T>) -> Result<(), LiftError> {
        for (id, p) in self.pennies() {
            if !(p.norm() > T::one()) {
                return Err(LiftError::ForbiddenDisk { id: id.into(), norm: p.norm().as_f64() });
            }
        }
        match self.classified_pairs(tol).into_iter().find(|x| x.2 == PairClass::Overlap) {
            Some((a, b, _, d)) => Err(LiftError::Overlap { a: a.into(), b: b.into(), distance: d.as_f64() }),
            None => Ok(()),
        }
    }

    /// Graph with an edge per touching pair.
    pub fn contact_graph(&self, tol: &ToleranceProfile<T>) -> Result<Graph, LiftError> {
        self.validate(tol)?;
        let pairs = self.classified_pairs(tol);
        let edges = pairs.iter().filter(|x| x.2 == PairClass::Contact).map(|x| (x.0, x.1));
        Ok(Graph::new(self.ids.iter().map(String::as_str), edges)?)
    }

    /// Pennies as 2-dimensional unit disks (for plotting and validation).
    pub fn to_packing(&self) -> Result<Packing<T>, LiftError> {
        let spheres = self.pennies().map(|(id, p)| Sphere::new(id, p.to_3d(), T::one())).collect();
        Ok(Packing::new(2, spheres, None)?)
    }

    pub fn to_json(&self) -> PennyRealizationJson {
        PennyRealizationJson {
            pennies: self
                .pennies()
                .map(|(id, p)| PennyJson { id: id.into(), position: [p.x.as_f64(), p.y.as_f64()] })
                .collect(),
            contact_distance: CONTACT_DISTANCE,
        }
    }

    pub fn from_json(j: &PennyRealizationJson) -> Result<Self, LiftError> {
        if j.contact_distance != CONTACT_DISTANCE {
            return Err(LiftError::ContactDistance(j.contact_distance));
        }
        Self::new(j.pennies.iter().map(|p| (p.id.clone(), Point2::new(T::lit(p.position[0]), T::lit(p.position[1])))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PennyJson {
    pub id: String,
    pub position: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PennyRealizationJson {
    pub pennies: Vec<PennyJson>,
    pub contact_distance: f64,
}

/// Lifts a realization to a 3-dimensional packing: unit hubs at `(0,0,−1)`
/// (`hub_a`) and `(0,0,1)` (`hub_b`), one hub-tangent sphere per penny. The
/// declared graph is the penny contact graph joined with the hubs.
pub fn lift_packing<T: Real>(
    r: &PennyRealization<T>,
    hub_a: &str,
    hub_b: &str,
    tol: &ToleranceProfile<T>,
) -> Result<Packing<T>, LiftError> {
    let declared = r.contact_graph(tol)?.join_k2(hub_a, hub_b)?;
    let mut spheres = vec![
        Sphere::new(hub_a, Point3::new(T::zero(), T::zero(), -T::one()), T::one()),
        Sphere::new(hub_b, Point3::new(T::zero(), T::zero(), T::one()), T::one()),
    ];
    for (id, q) in r.pennies() {
        let (c, rho) = penny_to_sphere(q)?;
        spheres.push(Sphere::new(id, c, rho));
    }
    Ok(Packing::new(3, spheres, Some(declared))?)
}

/// Seven pennies: one at `center`, six around it at distance 2.
pub fn hexagonal_flower<T: Real>(center: Point2<T>) -> PennyRealization<T> {
    let petals = (0..6).map(|k| {
        let angle = T::lit(std::f64::consts::FRAC_PI_3 * k as f64);
        (format!("p{k}"), center + Point2::from_angle(angle).scale(T::two()))
    });
    PennyRealization::new(std::iter::once(("c".to_string(), center)).chain(petals)).expect("distinct ids")
}
