//! Seeded Monte Carlo experiments. Every trial draws from its own ChaCha
//! stream selected by `(seed, trial index)`, so reports do not depend on
//! how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{build_chain, close_chain_solve, ChainError, CLOSE_GRID_CELLS};
use crate::graph::Graph;
use crate::layout::{heuristic_penny_layout_with, LAYOUT_ATTEMPTS};
use crate::lift::{lift_packing, PennyRealizationJson};
use crate::packing::ToleranceProfile;
use crate::rigidity::{is_stress_free, zero_extension_certificate, ExtensionFailure, StressReport};
use crate::sampling::{log_uniform, random_tree};

/// Name and version written into every report.
pub const TOOLKIT: &str = concat!("packrigid ", env!("CARGO_PKG_VERSION"));

/// Labels of the two hub spheres added by the lift.
pub const HUBS: [&str; 2] = ["ha", "hb"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("size range [{0}, {1}] must satisfy 1 ≤ lo ≤ hi")]
    SizeRange(usize, usize),
    #[error("radius bounds [{0}, {1}] must satisfy 0 < lo ≤ hi < ∞")]
    RadiusBounds(f64, f64),
    #[error("chain length range [{0}, {1}] must satisfy 3 ≤ lo ≤ hi")]
    ChainRange(usize, usize),
    #[error(transparent)]
    Tolerance(#[from] crate::packing::PackingError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Inclusive range of tree sizes.
    pub tree_size_range: [usize; 2],
    /// Bounds of the log-uniform radius distribution.
    pub radii: [f64; 2],
    pub tolerance: ToleranceProfile<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            tree_size_range: [2, 8],
            radii: [0.1, 10.0],
            tolerance: ToleranceProfile::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        let [lo, hi] = self.tree_size_range;
        if lo == 0 || lo > hi {
            return Err(ExperimentError::SizeRange(lo, hi));
        }
        let [a, b] = self.radii;
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(ExperimentError::RadiusBounds(a, b));
        }
        self.tolerance.check()?;
        Ok(())
    }

    /// The random stream of one trial.
    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport<R, S> {
    pub toolkit: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_length_range: Option<[usize; 2]>,
    pub summary: S,
    pub records: Vec<R>,
}

/// Rank data of one lifted packing, without the stress basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub rank: usize,
    pub stress_dim: usize,
    pub stress_free: bool,
    pub sigma_min_ratio: Option<f64>,
    pub dropped_sigma_ratio: Option<f64>,
    pub maxwell_bound: Option<i64>,
    /// `stress_dim ≥ |E| − maxwell_bound`.
    pub maxwell_consistent: bool,
}

impl From<&StressReport> for SpectralSummary {
    fn from(r: &StressReport) -> Self {
        Self {
            vertex_count: r.vertex_count,
            edge_count: r.edge_count,
            rank: r.rank,
            stress_dim: r.stress_dim,
            stress_free: r.stress_free,
            sigma_min_ratio: r.sigma_min_ratio,
            dropped_sigma_ratio: r.dropped_sigma_ratio,
            maxwell_bound: r.maxwell_bound,
            maxwell_consistent: maxwell_consistent(r),
        }
    }
}

/// Whether a report obeys `stress_dim ≥ |E| − (d|V| − d(d+1)/2)`; vacuous
/// when `|V| < d`.
pub fn maxwell_consistent(r: &StressReport) -> bool {
    r.maxwell_bound.is_none_or(|m| r.stress_dim as i64 >= r.edge_count as i64 - m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressTrial {
    pub trial: usize,
    pub tree: Graph,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<PennyRealizationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout_failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_failure: Option<ExtensionFailure>,
    /// Certificate and SVD verdict coincide.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StressAggregate {
    pub trials: usize,
    pub layouts: usize,
    pub layout_failures: usize,
    pub errors: usize,
    pub stress_free: usize,
    pub certified: usize,
    pub agreements: usize,
    /// Trials certified stress-free whose SVD found a stress; always zero
    /// unless something is broken.
    pub certified_but_stressed: usize,
    pub maxwell_violations: usize,
    pub min_sigma_min_ratio: Option<f64>,
}

pub type StressFreeReport = ExperimentReport<StressTrial, StressAggregate>;

/// Random trees, laid out as pennies and lifted: is the `G ⊕ K₂` packing
/// stress-free, and does a 0-extension certificate confirm it?
pub fn montecarlo_stressfree(cfg: &ExperimentConfig) -> Result<StressFreeReport, ExperimentError> {
    cfg.check()?;
    let records: Vec<StressTrial> = (0..cfg.trials).into_par_iter().map(|i| stress_trial(cfg, i)).collect();
    let mut s = StressAggregate { trials: records.len(), ..Default::default() };
    for r in &records {
        s.layouts += usize::from(r.layout.is_some());
        s.layout_failures += usize::from(r.layout_failure.is_some());
        s.errors += usize::from(r.error.is_some());
        if let Some(sp) = &r.spectrum {
            s.stress_free += usize::from(sp.stress_free);
            s.maxwell_violations += usize::from(!sp.maxwell_consistent);
            if let Some(x) = sp.sigma_min_ratio {
                s.min_sigma_min_ratio = Some(s.min_sigma_min_ratio.map_or(x, |m: f64| m.min(x)));
            }
            if r.certified == Some(true) && !sp.stress_free {
                s.certified_but_stressed += 1;
            }
        }
        s.certified += usize::from(r.certified == Some(true));
        s.agreements += usize::from(r.agree == Some(true));
    }
    Ok(ExperimentReport {
        toolkit: TOOLKIT.into(),
        experiment: "stressfree".into(),
        config: cfg.clone(),
        chain_length_range: None,
        summary: s,
        records,
    })
}

fn stress_trial(cfg: &ExperimentConfig, trial: usize) -> StressTrial {
    let mut rng = cfg.trial_rng(trial);
    let n = rng.gen_range(cfg.tree_size_range[0]..=cfg.tree_size_range[1]);
    let tree = random_tree(&mut rng, n, "v");
    let mut rec = StressTrial {
        trial,
        tree: tree.clone(),
        layout: None,
        layout_failure: None,
        error: None,
        spectrum: None,
        certified: None,
        certificate_failure: None,
        agree: None,
    };
    let layout = match heuristic_penny_layout_with::<f64, _>(&tree, &mut rng, LAYOUT_ATTEMPTS) {
        Ok(l) => l,
        Err(e) => {
            rec.layout_failure = Some(e.to_string());
            return rec;
        }
    };
    rec.layout = Some(layout.to_json());
    let packing = match lift_packing(&layout, HUBS[0], HUBS[1], &cfg.tolerance) {
        Ok(p) => p,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let report = match is_stress_free(&packing, &cfg.tolerance) {
        Ok(r) => r,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    // Hubs first, then the tree grown leaf by leaf: each new vertex sees
    // both hubs and at most one tree neighbor.
    let mut order: Vec<String> = HUBS.iter().map(|h| h.to_string()).collect();
    order.extend(tree.leaf_elimination_order().expect("trees are forests").into_iter().rev());
    let cert = zero_extension_certificate(&packing, &order, &cfg.tolerance);
    rec.certified = Some(cert.is_ok());
    rec.agree = Some(cert.is_ok() == report.stress_free);
    rec.certificate_failure = cert.err();
    rec.spectrum = Some(SpectralSummary::from(&report));
    rec
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainTrial {
    pub trial: usize,
    pub radii: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure_defect: Option<f64>,
    /// Index of the first consecutive pair that cannot touch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangle_failure: Option<usize>,
    /// Radii replacing the last one that close the chain exactly.
    pub closing_radii: Vec<f64>,
    /// Rebuilt closure defects of `closing_radii`.
    pub closing_defects: Vec<f64>,
}

/// Nearest-rank quantiles of `|closure_defect|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| v[((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(Self { min: v[0], p10: at(0.1), p50: at(0.5), p90: at(0.9), max: v[v.len() - 1] })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ChainAggregate {
    pub trials: usize,
    pub built: usize,
    pub triangle_failures: usize,
    pub min_abs_defect: Option<f64>,
    pub abs_defect_quantiles: Option<Quantiles>,
    pub closures_found: usize,
    pub max_rebuilt_defect: Option<f64>,
}

pub type ChainReport = ExperimentReport<ChainTrial, ChainAggregate>;

/// Random chains with `k` circles, `k` uniform in `k_range` (inclusive):
/// closure defects, and exact closures found by replacing the last radius.
pub fn montecarlo_chain(cfg: &ExperimentConfig, k_range: [usize; 2]) -> Result<ChainReport, ExperimentError> {
    cfg.check()?;
    if k_range[0] < 3 || k_range[0] > k_range[1] {
        return Err(ExperimentError::ChainRange(k_range[0], k_range[1]));
    }
    let records: Vec<ChainTrial> = (0..cfg.trials).into_par_iter().map(|i| chain_trial(cfg, k_range, i)).collect();
    let defects: Vec<f64> = records.iter().filter_map(|r| r.closure_defect).map(f64::abs).collect();
    let quantiles = Quantiles::of(&defects);
    let summary = ChainAggregate {
        trials: records.len(),
        built: defects.len(),
        triangle_failures: records.iter().filter(|r| r.triangle_failure.is_some()).count(),
        min_abs_defect: quantiles.as_ref().map(|q| q.min),
        abs_defect_quantiles: quantiles,
        closures_found: records.iter().filter(|r| !r.closing_radii.is_empty()).count(),
        max_rebuilt_defect: records.iter().flat_map(|r| r.closing_defects.iter().map(|d| d.abs())).reduce(f64::max),
    };
    Ok(ExperimentReport {
        toolkit: TOOLKIT.into(),
        experiment: "chain".into(),
        config: cfg.clone(),
        chain_length_range: Some(k_range),
        summary,
        records,
    })
}

fn chain_trial(cfg: &ExperimentConfig, k_range: [usize; 2], trial: usize) -> ChainTrial {
    let mut rng = cfg.trial_rng(trial);
    let k = rng.gen_range(k_range[0]..=k_range[1]);
    let [lo, hi] = cfg.radii;
    let radii: Vec<f64> = (0..k).map(|_| log_uniform(&mut rng, lo, hi)).collect();
    let mut rec = ChainTrial {
        trial,
        radii: radii.clone(),
        closure_defect: None,
        triangle_failure: None,
        closing_radii: vec![],
        closing_defects: vec![],
    };
    match build_chain(&radii) {
        Ok(c) => rec.closure_defect = Some(c.closure_defect),
        Err(ChainError::Triangle { index }) => rec.triangle_failure = Some(index),
        Err(e) => unreachable!("sampled radii are valid: {e}"),
    }
    let prefix = &radii[..k - 1];
    if let Some(bracket) = feasible_bracket(prefix, lo, hi) {
        if let Ok(roots) = close_chain_solve(prefix, bracket) {
            for r in roots {
                let mut closed = prefix.to_vec();
                closed.push(r);
                let defect = build_chain(&closed).expect("roots are buildable").closure_defect;
                rec.closing_radii.push(r);
                rec.closing_defects.push(defect);
            }
        }
    }
    rec
}

/// Smallest and largest grid radius in `[lo, hi]` at which `prefix ++ [r]`
/// can be built.
pub fn feasible_bracket(prefix: &[f64], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let ok = |r: f64| {
        let mut radii = prefix.to_vec();
        radii.push(r);
        build_chain(&radii).is_ok()
    };
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> =
        (0..=CLOSE_GRID_CELLS).map(|i| lo * (ratio * i as f64 / CLOSE_GRID_CELLS as f64).exp()).collect();
    let first = grid.iter().copied().find(|&r| ok(r))?;
    let last = grid.iter().rev().copied().find(|&r| ok(r))?;
    (first < last).then_some((first, last))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ExperimentConfig {
        ExperimentConfig { seed: 7, trials, ..Default::default() }
    }

    #[test]
    fn config_errors() {
        assert_eq!(montecarlo_stressfree(&small(0)).unwrap_err(), ExperimentError::NoTrials);
        let bad = ExperimentConfig { tree_size_range: [5, 3], ..small(1) };
        assert!(matches!(bad.check(), Err(ExperimentError::SizeRange(5, 3))));
        let bad = ExperimentConfig { radii: [0.0, 1.0], ..small(1) };
        assert!(bad.check().is_err());
        assert!(matches!(montecarlo_chain(&small(1), [2, 4]), Err(ExperimentError::ChainRange(2, 4))));
    }

    #[test]
    fn stressfree_small_run() {
        let rep = montecarlo_stressfree(&small(12)).unwrap();
        let s = &rep.summary;
        assert_eq!(rep.records.len(), 12);
        assert_eq!(s.layouts + s.layout_failures + s.errors, 12);
        assert!(s.layouts >= 10, "{s:?}");
        assert_eq!(s.stress_free, s.layouts);
        assert_eq!(s.certified, s.layouts);
        assert_eq!(s.agreements, s.layouts);
        assert_eq!(s.maxwell_violations, 0);
    }

    #[test]
    fn chain_small_run() {
        let rep = montecarlo_chain(&small(40), [3, 6]).unwrap();
        let s = &rep.summary;
        assert_eq!(s.built + s.triangle_failures, 40);
        assert!(s.min_abs_defect.unwrap() > 1e-6);
        assert!(s.max_rebuilt_defect.unwrap() < 1e-10);
        for r in &rep.records {
            assert!((3..=6).contains(&r.radii.len()));
        }
    }

    #[test]
    fn trial_streams_are_independent_of_count() {
        let a = montecarlo_chain(&small(5), [3, 6]).unwrap();
        let b = montecarlo_chain(&small(9), [3, 6]).unwrap();
        assert_eq!(a.records[..], b.records[..5]);
    }

    #[test]
    fn quantiles_nearest_rank() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let q = Quantiles::of(&v).unwrap();
        assert_eq!((q.min, q.p10, q.p50, q.p90, q.max), (1.0, 1.0, 5.0, 9.0, 10.0));
        assert!(Quantiles::of(&[]).is_none());
    }
}
