//! Chains of circles in the standard-form plane: circle `i` has radius `r_i`
//! and center at distance `d_i = √(r_i² + 2r_i)` from the origin (the plane
//! section of a sphere tangent to both unit hubs), and consecutive circles
//! touch. The closure defect measures how far the last circle is from
//! touching the first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Point3};
use crate::packing::{Packing, PackingError, Sphere};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("a chain needs at least {min} radii, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("radius {index} is not positive and finite")]
    BadRadius { index: usize },
    #[error("circles {index} and {} cannot touch: triangle inequality fails", .index + 1)]
    Triangle { index: usize },
    #[error("bracket must satisfy 0 < lo < hi")]
    BadBracket,
    #[error("chain fails at the bracket endpoint {endpoint}: {source}")]
    BracketEndpoint { endpoint: f64, source: Box<ChainError> },
}

/// Positions and radii of a built chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainResult<T> {
    pub radii: Vec<T>,
    pub positions: Vec<Point2<T>>,
    /// `‖p_1 − p_k‖ − (r_1 + r_k)`.
    pub closure_defect: T,
}

/// Distance from the origin of the circle of radius `r`.
pub fn plane_distance<T: Real>(r: T) -> T {
    (r * r + T::two() * r).sqrt()
}

/// Places the circles clockwise starting from `(d_1, 0)`.
pub fn build_chain<T: Real>(radii: &[T]) -> Result<ChainResult<T>, ChainError> {
    if radii.len() < 2 {
        return Err(ChainError::TooShort { min: 2, got: radii.len() });
    }
    if let Some(index) = radii.iter().position(|r| !(*r > T::zero() && r.is_finite())) {
        return Err(ChainError::BadRadius { index });
    }
    let d: Vec<T> = radii.iter().map(|&r| plane_distance(r)).collect();
    let mut positions = Vec::with_capacity(radii.len());
    let mut angle = T::zero();
    positions.push(Point2::new(d[0], T::zero()));
    for i in 0..radii.len() - 1 {
        let s = radii[i] + radii[i + 1];
        let (a, b) = (d[i], d[i + 1]);
        if !(a + b > s && a + s > b && b + s > a) {
            return Err(ChainError::Triangle { index: i });
        }
        let cos = ((a * a + b * b - s * s) / (T::two() * a * b)).max(-T::one()).min(T::one());
        angle = angle - cos.acos();
        positions.push(Point2::from_angle(angle).scale(b));
    }
    let k = radii.len() - 1;
    let closure_defect = positions[0].dist(positions[k]) - (radii[0] + radii[k]);
    Ok(ChainResult { radii: radii.to_vec(), positions, closure_defect })
}

/// Number of grid cells scanned for sign changes of the defect.
pub const CLOSE_GRID_CELLS: usize = 256;

/// Roots must reach this closure defect to be reported.
pub const CLOSE_TOLERANCE: f64 = 1e-12;

/// Radii `r_k` for which the chain `prefix ++ [r_k]` closes.
///
/// Scans `bracket` on a log-spaced grid, bisects every sign change of the
/// defect and keeps roots whose rebuilt defect is below
/// [`CLOSE_TOLERANCE`]. Grid nodes where the chain cannot be built are
/// skipped. Returns roots in increasing order; may be empty.
pub fn close_chain_solve<T: Real>(prefix: &[T], bracket: (T, T)) -> Result<Vec<T>, ChainError> {
    if prefix.len() < 2 {
        return Err(ChainError::TooShort { min: 3, got: prefix.len() + 1 });
    }
    let (lo, hi) = bracket;
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(ChainError::BadBracket);
    }
    build_chain(prefix)?;
    let defect = |r: T| -> Result<T, ChainError> {
        let mut radii = prefix.to_vec();
        radii.push(r);
        build_chain(&radii).map(|c| c.closure_defect)
    };
    for end in [lo, hi] {
        defect(end).map_err(|e| ChainError::BracketEndpoint { endpoint: end.as_f64(), source: Box::new(e) })?;
    }
    let cells = T::lit(CLOSE_GRID_CELLS as f64);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let nodes: Vec<T> = (0..=CLOSE_GRID_CELLS)
        .map(|i| match i {
            0 => lo,
            i if i == CLOSE_GRID_CELLS => hi,
            i => (llo + (lhi - llo) * T::lit(i as f64) / cells).exp(),
        })
        .collect();
    let values: Vec<Option<T>> = nodes.iter().map(|&r| defect(r).ok()).collect();

    let mut roots: Vec<T> = Vec::new();
    for i in 0..CLOSE_GRID_CELLS {
        let (Some(fa), Some(fb)) = (values[i], values[i + 1]) else { continue };
        let root = if fa == T::zero() {
            nodes[i]
        } else if fb == T::zero() || fa.signum() == fb.signum() {
            continue;
        } else {
            bisect(&defect, nodes[i], nodes[i + 1], fa)
        };
        if defect(root).is_ok_and(|f| f.abs() < T::tol_floor(CLOSE_TOLERANCE)) {
            roots.push(root);
        }
    }
    if let Some(&f) = values[CLOSE_GRID_CELLS].as_ref() {
        if f == T::zero() {
            roots.push(hi);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-10) * b.abs());
    Ok(roots)
}

fn bisect<T: Real>(f: &impl Fn(T) -> Result<T, ChainError>, mut a: T, mut b: T, mut fa: T) -> T {
    for _ in 0..200 {
        let m = (a + b) / T::two();
        if m <= a || m >= b || (b - a) <= T::lit(1e-14) * m {
            break;
        }
        // The chain is buildable across a bracketing cell except in
        // degenerate cases; treat a failure as the far side.
        let Ok(fm) = f(m) else {
            b = m;
            continue;
        };
        if fm == T::zero() {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let (ea, eb) = (f(a).map(T::abs), f(b).map(T::abs));
    match (ea, eb) {
        (Ok(x), Ok(y)) if y < x => b,
        (Err(_), Ok(_)) => b,
        _ => a,
    }
}

/// The standard-form packing of a chain: unit hubs at `(0,0,−1)` (`hub_a`)
/// and `(0,0,1)` (`hub_b`) and circle `i` as the sphere `c{i}` (1-based)
/// centered at `(p_i, 0)`. No graph is declared; contacts are measured.
pub fn chain_packing<T: Real>(chain: &ChainResult<T>, hub_a: &str, hub_b: &str) -> Result<Packing<T>, PackingError> {
    let mut spheres = vec![
        Sphere::new(hub_a, Point3::new(T::zero(), T::zero(), -T::one()), T::one()),
        Sphere::new(hub_b, Point3::new(T::zero(), T::zero(), T::one()), T::one()),
    ];
    for (i, (p, &r)) in chain.positions.iter().zip(&chain.radii).enumerate() {
        spheres.push(Sphere::new(format!("c{}", i + 1), p.to_3d(), r));
    }
    Packing::new(3, spheres, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainJson {
    pub radii: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub closure_defect: f64,
}

impl<T: Real> ChainResult<T> {
    pub fn to_json(&self) -> ChainJson {
        ChainJson {
            radii: self.radii.iter().map(|r| r.as_f64()).collect(),
            positions: self.positions.iter().map(|p| [p.x.as_f64(), p.y.as_f64()]).collect(),
            closure_defect: self.closure_defect.as_f64(),
        }
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}
