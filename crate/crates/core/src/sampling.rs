//! Random inputs for experiments and tests: rotations, Möbius transforms,
//! labelled trees and hub-tangent spheres.

use rand::Rng;

use crate::geom::{Mat3, Point3};
use crate::graph::Graph;
use crate::moebius::{MoebiusTransform, Tau, TransformPipeline};
use crate::packing::Packing;
use crate::scalar::Real;

/// Uniform point in the cube `[-half, half]³`.
pub fn random_point<T: Real, R: Rng + ?Sized>(rng: &mut R, half: f64) -> Point3<T> {
    let mut c = || T::lit(rng.gen_range(-half..=half));
    Point3::new(c(), c(), c())
}

/// Haar-uniform rotation (Shoemake's unit-quaternion construction).
pub fn random_rotation<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Mat3<T> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = std::f64::consts::TAU;
    let (s1, s2) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (s1 * (tau * u2).sin(), s1 * (tau * u2).cos(), s2 * (tau * u3).sin(), s2 * (tau * u3).cos());
    let m = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ];
    Mat3::from_rows(m.map(|r| r.map(T::lit)))
}

/// Log-uniform sample from `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// A single Möbius transform with random parameters; `λ` has random sign
/// and magnitude in `[0.3, 3]`, `τ` is 0 or 2 with equal odds.
pub fn random_moebius<T: Real, R: Rng + ?Sized>(rng: &mut R) -> MoebiusTransform<T> {
    let a = random_point(rng, 3.0);
    let b = random_point(rng, 3.0);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let lambda = T::lit(sign * log_uniform(rng, 0.3, 3.0));
    let tau = if rng.gen_bool(0.5) { Tau::Zero } else { Tau::Two };
    MoebiusTransform::new(a, b, lambda, tau, random_rotation(rng)).expect("valid random parameters")
}

/// An inversion whose center stays clear of every sphere of `pk`, followed
/// by a random similarity; the image is again a packing with the same
/// contact graph.
pub fn random_moebius_avoiding<T: Real, R: Rng + ?Sized>(pk: &Packing<T>, rng: &mut R) -> TransformPipeline<T> {
    let extent = pk.spheres().iter().map(|s| s.center.norm() + s.radius).fold(T::one(), T::max).as_f64();
    let center = loop {
        let c: Point3<T> = random_point(rng, 1.5 * extent);
        if pk.spheres().iter().all(|s| c.dist(s.center) > T::lit(1.25) * s.radius) {
            break c;
        }
    };
    let k = T::lit(log_uniform(rng, 0.25, 4.0) * extent * extent);
    let inversion = MoebiusTransform::inversion(center, k);
    let sim = MoebiusTransform::new(
        random_point(rng, 2.0),
        Point3::zero(),
        T::lit(log_uniform(rng, 0.3, 3.0) / extent),
        Tau::Zero,
        random_rotation(rng),
    )
    .expect("valid similarity");
    TransformPipeline::new(vec![inversion, sim]).expect("non-empty")
}

/// Uniform labelled tree on `n` vertices labelled `{prefix}0..`, decoded
/// from a random Prüfer sequence.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, prefix: &str) -> Graph {
    let label = |i: usize| format!("{prefix}{i}");
    let labels: Vec<String> = (0..n).map(label).collect();
    if n < 2 {
        return Graph::new(labels.iter().map(String::as_str), std::iter::empty::<(&str, &str)>()).expect("valid");
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let edges = prufer_decode(n, &seq);
    Graph::new(labels.iter().map(String::as_str), edges.iter().map(|&(u, v)| (labels[u].as_str(), labels[v].as_str())))
        .expect("Prüfer sequences decode to trees")
}

/// Standard linear-scan Prüfer decoding to an edge list.
pub fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    assert_eq!(seq.len() + 2, n, "Prüfer sequence length must be n - 2");
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Center of a sphere of radius `r` tangent to the hubs `(0,0,−ra)`/`ra`
/// and `(0,0,rb)`/`rb`, placed at the given azimuth.
pub fn sphere_tangent_to_hubs<T: Real>(ra: T, rb: T, r: T, azimuth: T) -> Point3<T> {
    let h = r * (ra - rb) / (ra + rb);
    let rho = ((r + ra) * (r + ra) - (h + ra) * (h + ra)).sqrt();
    Point3::new(rho * azimuth.cos(), rho * azimuth.sin(), h)
}
