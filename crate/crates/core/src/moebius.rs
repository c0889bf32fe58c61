//! Three-dimensional Möbius transforms `u ↦ a + λA(u − b)/‖u − b‖^τ`,
//! their action on points and spheres, and the two normalization pipelines
//! that bring a `G ⊕ K₂` packing into standard form.
//!
//! Compositions are kept as explicit stage lists ([`TransformPipeline`]) and
//! evaluated stage by stage; they are never collapsed into a single map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Mat3, Point3, RigidMotion};
use crate::packing::{Packing, PackingError, ToleranceProfile, ValidationReport};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("lambda must be a nonzero finite number")]
    ZeroLambda,
    #[error("tau must be 0 or 2, got {0}")]
    BadTau(u8),
    #[error("linear part is not orthogonal (max |AᵀA − I| = {0:e})")]
    NotOrthogonal(f64),
    #[error("point hits the singularity of stage {stage}")]
    Singular { stage: usize },
    #[error("a pipeline needs at least one stage")]
    EmptyPipeline,
    #[error("stage {stage} maps sphere `{id}` to a plane")]
    PlaneImage { stage: usize, id: String },
    #[error("shrink parameter must be nonzero")]
    ZeroShrink,
    #[error("scale family needs lambda > mu > 0 (got lambda = {lambda}, mu = {mu})")]
    ScaleOrder { lambda: f64, mu: f64 },
    #[error("hub `{hub}` is not adjacent to `{vertex}`")]
    NotJoin { hub: String, vertex: String },
    #[error("could not separate equal hub radii without a sphere straddling the singularity")]
    EqualHubRadii,
    #[error("contact graph changed under the normalization pipeline")]
    ContactGraphChanged(Box<ValidationReport>),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

/// The exponent `τ` of a Möbius transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tau {
    /// Similarity: `a + λA(u − b)`.
    Zero,
    /// Inversion composed with a similarity: `a + λA(u − b)/‖u − b‖²`.
    Two,
}

impl Tau {
    pub fn as_u8(self) -> u8 {
        match self {
            Tau::Zero => 0,
            Tau::Two => 2,
        }
    }
}

impl TryFrom<u8> for Tau {
    type Error = MoebiusError;
    fn try_from(v: u8) -> Result<Self, MoebiusError> {
        match v {
            0 => Ok(Tau::Zero),
            2 => Ok(Tau::Two),
            other => Err(MoebiusError::BadTau(other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusTransform<T> {
    a: Point3<T>,
    b: Point3<T>,
    lambda: T,
    tau: Tau,
    linear: Mat3<T>,
}

/// Image of a sphere: a sphere, or a plane when the singularity lies on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SphereImage<T> {
    Sphere {
        center: Point3<T>,
        radius: T,
    },
    /// `normal` is a unit vector pointing from the plane towards the side
    /// holding the images of points outside the original sphere.
    Plane {
        point: Point3<T>,
        normal: Point3<T>,
    },
}

impl<T: Real> SphereImage<T> {
    pub fn sphere(self) -> Option<(Point3<T>, T)> {
        match self {
            SphereImage::Sphere { center, radius } => Some((center, radius)),
            SphereImage::Plane { .. } => None,
        }
    }
}

impl<T: Real> MoebiusTransform<T> {
    /// Validates `λ ≠ 0` and `AᵀA = I` (to 1e-12, or a few ulps for `f32`).
    pub fn new(a: Point3<T>, b: Point3<T>, lambda: T, tau: Tau, linear: Mat3<T>) -> Result<Self, MoebiusError> {
        if lambda == T::zero() || !lambda.is_finite() {
            return Err(MoebiusError::ZeroLambda);
        }
        let defect = linear.orthogonality_defect();
        if !(defect <= T::tol_floor(1e-12)) {
            return Err(MoebiusError::NotOrthogonal(defect.as_f64()));
        }
        Ok(Self { a, b, lambda, tau, linear })
    }

    pub fn identity() -> Self {
        Self::similarity(Point3::zero(), T::one())
    }

    /// `u ↦ u + shift`.
    pub fn translation(shift: Point3<T>) -> Self {
        Self { a: shift, b: Point3::zero(), lambda: T::one(), tau: Tau::Zero, linear: Mat3::identity() }
    }

    /// `u ↦ center + factor·(u − center)`.
    pub fn similarity(center: Point3<T>, factor: T) -> Self {
        Self::new(center, center, factor, Tau::Zero, Mat3::identity()).expect("nonzero factor")
    }

    /// `u ↦ center + k(u − center)/‖u − center‖²`.
    pub fn inversion(center: Point3<T>, k: T) -> Self {
        Self::new(center, center, k, Tau::Two, Mat3::identity()).expect("nonzero inversion power")
    }

    pub fn rigid(motion: &RigidMotion<T>) -> Result<Self, MoebiusError> {
        Self::new(motion.to, motion.from, T::one(), Tau::Zero, motion.rotation)
    }

    pub fn a(&self) -> Point3<T> {
        self.a
    }
    pub fn b(&self) -> Point3<T> {
        self.b
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn tau(&self) -> Tau {
        self.tau
    }
    pub fn linear(&self) -> &Mat3<T> {
        &self.linear
    }

    /// The point with no image, if any.
    pub fn singularity(&self) -> Option<Point3<T>> {
        (self.tau == Tau::Two).then_some(self.b)
    }

    pub fn apply_point(&self, u: Point3<T>) -> Result<Point3<T>, MoebiusError> {
        self.apply_point_at(u, 0)
    }

    fn apply_point_at(&self, u: Point3<T>, stage: usize) -> Result<Point3<T>, MoebiusError> {
        let w = u - self.b;
        let scale = match self.tau {
            Tau::Zero => self.lambda,
            Tau::Two => {
                let n2 = w.norm_sq();
                if n2 == T::zero() {
                    return Err(MoebiusError::Singular { stage });
                }
                self.lambda / n2
            }
        };
        let out = self.a + self.linear.mul_vec(w).scale(scale);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(MoebiusError::Singular { stage })
        }
    }

    /// Image of the sphere with the given center and radius.
    pub fn apply_sphere(&self, center: Point3<T>, radius: T) -> SphereImage<T> {
        let w = center - self.b;
        match self.tau {
            Tau::Zero => SphereImage::Sphere {
                center: self.a + self.linear.mul_vec(w).scale(self.lambda),
                radius: self.lambda.abs() * radius,
            },
            Tau::Two => {
                let w2 = w.norm_sq();
                let power = w2 - radius * radius;
                let on_sphere = power.abs() <= T::epsilon() * T::lit(16.0) * (w2 + radius * radius);
                if on_sphere {
                    // Inversion sends the sphere through b to the plane
                    // {y : y·w = 1/2}; its exterior lands on the side of a.
                    let n = w.scale(T::one() / radius);
                    let point = self.a + self.linear.mul_vec(w).scale(self.lambda / (T::two() * radius * radius));
                    let normal = self.linear.mul_vec(n).scale(-self.lambda.signum());
                    SphereImage::Plane { point, normal }
                } else {
                    SphereImage::Sphere {
                        center: self.a + self.linear.mul_vec(w).scale(self.lambda / power),
                        radius: self.lambda.abs() * radius / power.abs(),
                    }
                }
            }
        }
    }
}

/// An ordered, non-empty list of transforms applied first to last.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformPipeline<T> {
    stages: Vec<MoebiusTransform<T>>,
}

impl<T: Real> TransformPipeline<T> {
    pub fn new(stages: Vec<MoebiusTransform<T>>) -> Result<Self, MoebiusError> {
        if stages.is_empty() {
            return Err(MoebiusError::EmptyPipeline);
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[MoebiusTransform<T>] {
        &self.stages
    }

    /// Appends the stages of `other` after the stages of `self`.
    pub fn then(mut self, other: &Self) -> Self {
        self.stages.extend_from_slice(&other.stages);
        self
    }

    pub fn apply_point(&self, u: Point3<T>) -> Result<Point3<T>, MoebiusError> {
        self.stages.iter().enumerate().try_fold(u, |p, (i, s)| s.apply_point_at(p, i))
    }

    /// Image of a sphere; a plane is only allowed as the final image.
    pub fn apply_sphere(&self, center: Point3<T>, radius: T) -> Result<SphereImage<T>, MoebiusError> {
        let mut img = SphereImage::Sphere { center, radius };
        for (i, s) in self.stages.iter().enumerate() {
            img = match img {
                SphereImage::Sphere { center, radius } => s.apply_sphere(center, radius),
                SphereImage::Plane { .. } => return Err(MoebiusError::PlaneImage { stage: i - 1, id: String::new() }),
            };
        }
        Ok(img)
    }

    /// Maps every sphere of a packing; any plane image is an error.
    pub fn apply_packing(&self, pk: &Packing<T>) -> Result<Packing<T>, MoebiusError> {
        apply_stages(&self.stages, pk)
    }
}

fn apply_stages<T: Real>(stages: &[MoebiusTransform<T>], pk: &Packing<T>) -> Result<Packing<T>, MoebiusError> {
    stages.iter().enumerate().try_fold(pk.clone(), |cur, (i, s)| apply_stage(s, i, &cur))
}

fn apply_stage<T: Real>(s: &MoebiusTransform<T>, index: usize, pk: &Packing<T>) -> Result<Packing<T>, MoebiusError> {
    pk.map_spheres(|sp| match s.apply_sphere(sp.center, sp.radius) {
        SphereImage::Sphere { center, radius } if center.is_finite() && radius.is_finite() => Ok((center, radius)),
        _ => Err(MoebiusError::PlaneImage { stage: index, id: sp.id.clone() }),
    })
}

impl<T: Real> From<MoebiusTransform<T>> for TransformPipeline<T> {
    fn from(t: MoebiusTransform<T>) -> Self {
        Self { stages: vec![t] }
    }
}

/// `φᵗ(u) = (t,0,0) + t²(u − (t,0,0))/‖u − (t,0,0)‖²`.
///
/// Fixes the origin and `(t,0,0)` (its singularity); spheres far from the
/// singularity keep their radius as `t → ∞` and shrink as `t → 0`.
pub fn shrink_transform<T: Real>(t: T) -> Result<MoebiusTransform<T>, MoebiusError> {
    if t == T::zero() || !t.is_finite() {
        return Err(MoebiusError::ZeroShrink);
    }
    Ok(MoebiusTransform::inversion(Point3::new(t, T::zero(), T::zero()), t * t))
}

/// Closed-form radius of `φᵗ(S)` for `S` centered at `center` with radius
/// `radius`, valid when `(t,0,0)` lies outside `S`.
pub fn predicted_radius<T: Real>(t: T, center: Point3<T>, radius: T) -> Option<T> {
    let d2 = (Point3::new(t, T::zero(), T::zero()) - center).norm_sq();
    (d2 > radius * radius).then(|| radius * t * t / (d2 - radius * radius))
}

/// The four stages `φ₁..φ₄` taking hubs of radii `ratio > 1` (centered at
/// `(0,0,−ratio)`) and `1` (centered at `(0,0,1)`) to unit hubs at
/// `(0,0,∓1)`, fixing `(0,0,0)`, `(0,0,2)` and sending `(0,0,−2·ratio)` to
/// `(0,0,−2)`.
fn hub_equalizing_stages<T: Real>(ratio: T) -> [MoebiusTransform<T>; 4] {
    let one = T::one();
    let two = T::two();
    let four = T::lit(4.0);
    let dm = ratio - one;
    let dp = ratio + one;
    let singular_height = four * ratio / dm;
    [
        MoebiusTransform::translation(Point3::new(T::zero(), T::zero(), -singular_height)),
        MoebiusTransform::inversion(Point3::zero(), one),
        MoebiusTransform::similarity(Point3::zero(), -two * four * ratio * dp / (dm * dm)),
        MoebiusTransform::translation(Point3::new(T::zero(), T::zero(), -two * dp / dm)),
    ]
}

/// The five-stage family `φ^{λ,μ}`: scale by `1/μ`, then equalize hubs of
/// radii `λ` (below) and `μ` (above) tangent at the origin.
pub fn scale_standard_form<T: Real>(lambda: T, mu: T) -> Result<TransformPipeline<T>, MoebiusError> {
    if !(mu > T::zero() && lambda > mu && lambda.is_finite()) {
        return Err(MoebiusError::ScaleOrder { lambda: lambda.as_f64(), mu: mu.as_f64() });
    }
    let mut stages = vec![MoebiusTransform::similarity(Point3::zero(), T::one() / mu)];
    stages.extend(hub_equalizing_stages(lambda / mu));
    TransformPipeline::new(stages)
}

/// Below this hub-radius ratio the equalizing stages lose accuracy, so a
/// preconditioning inversion first spreads the hub radii apart.
const MIN_HUB_RATIO: f64 = 1.5;

/// Result of [`standard_form`].
#[derive(Clone, Debug)]
pub struct StandardForm<T> {
    pub packing: Packing<T>,
    pub pipeline: TransformPipeline<T>,
    /// Hub-radius ratio fed to the equalizing stages.
    pub hub_ratio: T,
    /// Whether a preconditioning inversion was needed.
    pub preconditioned: bool,
}

/// Möbius-normalizes a packing with contact graph `G ⊕ K₂`: `hub_a` ends as
/// the unit sphere at `(0,0,−1)`, `hub_b` as the unit sphere at `(0,0,1)`,
/// and every other center on the plane `z = 0`.
pub fn standard_form<T: Real>(
    pk: &Packing<T>,
    hub_a: &str,
    hub_b: &str,
    tol: &ToleranceProfile<T>,
) -> Result<StandardForm<T>, MoebiusError> {
    if pk.dimension() != 3 {
        return Err(PackingError::NotThreeDimensional.into());
    }
    let graph = pk.contact_graph(tol)?;
    for hub in [hub_a, hub_b] {
        if !graph.contains(hub) {
            return Err(PackingError::UnknownId(hub.into()).into());
        }
        for v in graph.vertices() {
            if v != hub && !graph.has_edge(hub, v) {
                return Err(MoebiusError::NotJoin { hub: hub.into(), vertex: v.clone() });
            }
        }
    }
    let radius = |p: &Packing<T>, id: &str| p.sphere(id).expect("hub present").radius;
    let (big, small) = if radius(pk, hub_a) >= radius(pk, hub_b) { (hub_a, hub_b) } else { (hub_b, hub_a) };

    let mut stages = Vec::new();
    let mut cur = pk.clone();
    let mut push = |stage: MoebiusTransform<T>, cur: &mut Packing<T>| -> Result<(), MoebiusError> {
        *cur = apply_stage(&stage, stages.len(), cur)?;
        stages.push(stage);
        Ok(())
    };
    push(MoebiusTransform::rigid(&cur.pose_motion(big, small)?)?, &mut cur)?;

    let mut ratio = radius(&cur, big) / radius(&cur, small);
    let preconditioned = ratio < T::lit(MIN_HUB_RATIO);
    if preconditioned {
        let stage = precondition_stage(&cur, radius(&cur, big)).ok_or(MoebiusError::EqualHubRadii)?;
        push(stage, &mut cur)?;
        // The inversion swaps the hubs along the axis; pose again.
        push(MoebiusTransform::rigid(&cur.pose_motion(big, small)?)?, &mut cur)?;
        ratio = radius(&cur, big) / radius(&cur, small);
    }

    push(MoebiusTransform::similarity(Point3::zero(), T::one() / radius(&cur, small)), &mut cur)?;
    for stage in hub_equalizing_stages(ratio) {
        push(stage, &mut cur)?;
    }

    if big != hub_a {
        // Half-turn about the x-axis swaps the hub positions.
        let flip = MoebiusTransform::new(
            Point3::zero(),
            Point3::zero(),
            T::one(),
            Tau::Zero,
            Mat3::rotation_x(T::lit(std::f64::consts::PI)),
        )?;
        push(flip, &mut cur)?;
    }

    let report = cur.validate(tol)?;
    let after = crate::packing::contact_graph_from_report(&cur, &report);
    if !report.valid || after != graph {
        return Err(MoebiusError::ContactGraphChanged(Box::new(report)));
    }
    Ok(StandardForm { packing: cur, pipeline: TransformPipeline::new(stages)?, hub_ratio: ratio, preconditioned })
}

/// An inversion centered on the negative z-axis, below the larger hub
/// (center `(0,0,−big_radius)`, tangent to the smaller hub at the origin).
/// Fixes the origin and swaps the hubs along the axis; the image of the
/// larger hub is at least three times the image of the smaller one.
fn precondition_stage<T: Real>(pk: &Packing<T>, big_radius: T) -> Option<MoebiusTransform<T>> {
    const MULTIPLES: [f64; 10] = [4.0, 3.0, 6.0, 2.5, 8.0, 12.0, 16.0, 24.0, 48.0, 96.0];
    MULTIPLES.iter().find_map(|&m| {
        let depth = T::lit(m) * big_radius;
        let center = Point3::new(T::zero(), T::zero(), -depth);
        let clear = pk.spheres().iter().all(|s| {
            let d2 = (s.center - center).norm_sq();
            d2 - s.radius * s.radius > T::lit(1e-6) * d2
        });
        clear.then(|| MoebiusTransform::inversion(center, depth * depth))
    })
}

/// JSON shape of a single transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformJson {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub lambda: f64,
    pub tau: u8,
    #[serde(rename = "A")]
    pub linear: [[f64; 3]; 3],
}

impl<T: Real> From<&MoebiusTransform<T>> for TransformJson {
    fn from(t: &MoebiusTransform<T>) -> Self {
        let f = |p: Point3<T>| p.to_array().map(|x| x.as_f64());
        Self {
            a: f(t.a),
            b: f(t.b),
            lambda: t.lambda.as_f64(),
            tau: t.tau.as_u8(),
            linear: t.linear.rows.map(|r| r.map(|x| x.as_f64())),
        }
    }
}

impl<T: Real> TryFrom<&TransformJson> for MoebiusTransform<T> {
    type Error = MoebiusError;
    fn try_from(j: &TransformJson) -> Result<Self, MoebiusError> {
        let p = |a: [f64; 3]| Point3::from_array(a.map(T::lit));
        MoebiusTransform::new(
            p(j.a),
            p(j.b),
            T::lit(j.lambda),
            Tau::try_from(j.tau)?,
            Mat3::from_rows(j.linear.map(|r| r.map(T::lit))),
        )
    }
}

impl<T: Real> TransformPipeline<T> {
    pub fn to_json(&self) -> Vec<TransformJson> {
        self.stages.iter().map(TransformJson::from).collect()
    }

    pub fn from_json(stages: &[TransformJson]) -> Result<Self, MoebiusError> {
        Self::new(stages.iter().map(MoebiusTransform::try_from).collect::<Result<_, _>>()?)
    }
}
