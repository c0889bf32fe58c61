//! Acceptance suite: one check per criterion, each printing a PASS/FAIL
//! line. Runs without the libtest harness so every line reaches the test
//! log in order; exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use packrigid::experiment::{feasible_bracket, maxwell_consistent, montecarlo_chain, montecarlo_stressfree};
use packrigid::lift::hexagonal_flower;
use packrigid::moebius::{scale_standard_form, SphereImage};
use packrigid::sampling::{log_uniform, random_moebius, random_moebius_avoiding, random_point, random_tree};
use packrigid::{
    build_chain, chain_packing, close_chain_solve, heuristic_penny_layout, is_stress_free, lift_packing,
    sphere_contact_bound, standard_form, ExperimentConfig, Graph, MoebiusTransform, Packing64, Pennies64, Point2,
    Point3, Tolerance64,
};

const HA: &str = "ha";
const HB: &str = "hb";

type Outcome = Result<String, String>;

/// Every packing built by the suite, for the Maxwell check.
#[derive(Default)]
struct Seen {
    packings: Vec<(String, Packing64)>,
}

impl Seen {
    fn add(&mut self, what: impl Into<String>, pk: &Packing64) {
        self.packings.push((what.into(), pk.clone()));
    }
}

fn tol() -> Tolerance64 {
    Tolerance64::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_relative_tangency(pk: &Packing64, g: &Graph) -> f64 {
    g.edges()
        .map(|(a, b)| {
            let (a, b) = (pk.sphere(a).unwrap(), pk.sphere(b).unwrap());
            let s = a.radius + b.radius;
            (a.center.dist(b.center) - s).abs() / s
        })
        .fold(0.0, f64::max)
}

fn lift_correspondence(seen: &mut Seen) -> Outcome {
    let flower = hexagonal_flower(Point2::new(10.0, 0.0));
    let pk = lift_packing(&flower, HA, HB, &tol()).map_err(|e| e.to_string())?;
    seen.add("flower lift", &pk);
    let g = pk.contact_graph(&tol()).map_err(|e| e.to_string())?;
    let expected = flower.contact_graph(&tol()).unwrap().join_k2(HA, HB).unwrap();
    let residual = max_relative_tangency(&pk, &g);
    ensure(pk.len() == 9, || format!("{} spheres", pk.len()))?;
    ensure(g.edge_count() == 27 && g.edge_count() as i64 == sphere_contact_bound(7), || {
        format!("{} contacts", g.edge_count())
    })?;
    ensure(g == expected, || "contact graph differs from flower + K2".into())?;
    ensure(residual < 1e-10, || format!("tangency residual {residual:e}"))?;
    Ok(format!("9 spheres, 27 contacts, max relative residual {residual:.1e}"))
}

fn forest_stress_freeness(seen: &mut Seen) -> Outcome {
    let cfg = ExperimentConfig { seed: 20_240_601, trials: 100, tree_size_range: [2, 8], ..Default::default() };
    let rep = montecarlo_stressfree(&cfg).map_err(|e| e.to_string())?;
    for r in &rep.records {
        if let Some(l) = &r.layout {
            let pennies = Pennies64::from_json(l).unwrap();
            seen.add(format!("stressfree trial {}", r.trial), &lift_packing(&pennies, "ha", "hb", &tol()).unwrap());
        }
    }
    let s = &rep.summary;
    ensure(s.errors == 0, || format!("{} trials errored", s.errors))?;
    ensure(s.layouts > 0, || "no successful layouts".into())?;
    ensure(s.stress_free == s.layouts, || format!("stress-free in {}/{} layouts", s.stress_free, s.layouts))?;
    ensure(s.certified == s.layouts && s.agreements == s.layouts, || {
        format!("certified {}, agreeing {} of {}", s.certified, s.agreements, s.layouts)
    })?;
    let ratio = s.min_sigma_min_ratio.unwrap_or(0.0);
    ensure(ratio >= 1e-6, || format!("smallest sigma ratio {ratio:e}"))?;
    Ok(format!(
        "{}/{} layouts succeeded, all stress-free and certified, min sigma ratio {ratio:.2e}",
        s.layouts, s.trials
    ))
}

/// A closed chain of `k` circles whose packing has contact graph exactly
/// `C_k ⊕ K₂`, from seeded random prefixes.
fn closed_chain(k: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<f64>, Packing64)> {
    let labels: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
    let target = Graph::cycle(&labels).unwrap().join_k2(HA, HB).unwrap();
    for _ in 0..2000 {
        let prefix: Vec<f64> = (0..k - 1).map(|_| log_uniform(rng, 0.3, 6.0)).collect();
        let Some(bracket) = feasible_bracket(&prefix, 0.1, 10.0) else { continue };
        let Ok(roots) = close_chain_solve(&prefix, bracket) else { continue };
        for r in roots {
            let mut radii = prefix.clone();
            radii.push(r);
            let chain = build_chain(&radii).ok()?;
            let pk = chain_packing(&chain, HA, HB).ok()?;
            if pk.contact_graph(&tol()).is_ok_and(|g| g == target) {
                return Some((radii, pk));
            }
        }
    }
    None
}

fn cycle_obstruction(seen: &mut Seen) -> Outcome {
    let cfg = ExperimentConfig { seed: 7_777, trials: 1000, ..Default::default() };
    let rep = montecarlo_chain(&cfg, [3, 6]).map_err(|e| e.to_string())?;
    let min = rep.summary.min_abs_defect.ok_or("no chain could be built")?;
    ensure(min > 1e-6, || format!("min |defect| {min:e}"))?;
    let rebuilt = rep.summary.max_rebuilt_defect.unwrap_or(0.0);
    ensure(rebuilt < 1e-10, || format!("re-injected closure defect {rebuilt:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut per_k = Vec::new();
    for k in 3..=6 {
        let (radii, pk) = closed_chain(k, &mut rng).ok_or_else(|| format!("no clean closure for k = {k}"))?;
        seen.add(format!("closed {k}-chain"), &pk);
        let defect = build_chain(&radii).unwrap().closure_defect;
        ensure(defect.abs() < 1e-10, || format!("k = {k}: rebuilt defect {defect:e}"))?;
        let report = is_stress_free(&pk, &tol()).map_err(|e| e.to_string())?;
        ensure(report.stress_dim >= 1, || format!("k = {k}: stress_dim 0"))?;
        ensure(report.edge_count == 3 * k + 1, || format!("k = {k}: {} contacts", report.edge_count))?;
        if k == 3 {
            ensure(report.stress_dim == 1, || format!("K5 stress_dim {}", report.stress_dim))?;
        }
        per_k.push(format!("k={k}: stress_dim {}", report.stress_dim));
    }
    Ok(format!(
        "{} chains built, min |defect| {min:.2e}, {} closures re-injected (max defect {rebuilt:.1e}); {}",
        rep.summary.built,
        rep.summary.closures_found,
        per_k.join(", ")
    ))
}

fn standard_form_recovery(seen: &mut Seen) -> Outcome {
    let t = tol();
    let mut done = 0;
    let mut worst = [0.0f64; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    while done < 50 {
        let n = rng.gen_range(2..=8);
        let tree = random_tree(&mut rng, n, "v");
        let Ok(pennies) = heuristic_penny_layout::<f64>(&tree, rng.gen()) else { continue };
        let lifted = lift_packing(&pennies, HA, HB, &t).map_err(|e| e.to_string())?;
        let graph = lifted.contact_graph(&t).map_err(|e| e.to_string())?;
        let moved = random_moebius_avoiding(&lifted, &mut rng).apply_packing(&lifted).map_err(|e| e.to_string())?;
        let moved_graph = moved.contact_graph(&t).map_err(|e| format!("moved packing: {e}"))?;
        ensure(moved_graph == graph, || "random transform changed the contacts".into())?;
        seen.add(format!("moved packing {done}"), &moved);

        let sf = standard_form(&moved, HA, HB, &t).map_err(|e| format!("packing {done}: {e}"))?;
        seen.add(format!("standard form {done}"), &sf.packing);
        let pk = &sf.packing;
        let (a, b) = (pk.sphere(HA).unwrap(), pk.sphere(HB).unwrap());
        let hub_r = (a.radius - 1.0).abs().max((b.radius - 1.0).abs());
        let hub_c = a.center.dist(Point3::new(0.0, 0.0, -1.0)).max(b.center.dist(Point3::new(0.0, 0.0, 1.0)));
        let others = pk.spheres().iter().filter(|s| s.id != HA && s.id != HB);
        let z = others.clone().map(|s| s.center.z.abs()).fold(0.0, f64::max);
        let plane = others
            .map(|s| (s.center.x.powi(2) + s.center.y.powi(2) - (s.radius.powi(2) + 2.0 * s.radius)).abs())
            .fold(0.0, f64::max);
        let g = pk.contact_graph(&t).map_err(|e| e.to_string())?;
        ensure(g == graph, || format!("packing {done}: contact graph changed"))?;
        ensure(hub_r < 1e-9 && hub_c < 1e-9, || format!("packing {done}: hub radius {hub_r:e}, center {hub_c:e}"))?;
        ensure(z < 1e-8, || format!("packing {done}: |z| {z:e}"))?;
        ensure(plane < 1e-8, || format!("packing {done}: x²+y² − r² − 2r off by {plane:e}"))?;
        for (w, x) in worst.iter_mut().zip([hub_r, hub_c, z, plane]) {
            *w = w.max(x);
        }
        done += 1;
    }
    Ok(format!(
        "50 packings; worst hub radius {:.1e}, hub center {:.1e}, |z| {:.1e}, plane identity {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn maxwell_consistency(seen: &Seen) -> Outcome {
    let mut checked = 0;
    for (what, pk) in &seen.packings {
        if pk.len() < pk.dimension() {
            continue;
        }
        let report = is_stress_free(pk, &tol()).map_err(|e| format!("{what}: {e}"))?;
        ensure(maxwell_consistent(&report), || {
            format!(
                "{what}: stress_dim {} < |E| − bound = {} − {:?}",
                report.stress_dim, report.edge_count, report.maxwell_bound
            )
        })?;
        checked += 1;
    }
    Ok(format!("{checked} packings, no violations"))
}

fn clique_corollary(seen: &mut Seen) -> Outcome {
    let pair = Pennies64::new([("p", Point2::new(3.0, 0.0)), ("q", Point2::new(3.0, 2.0))]).unwrap();
    let pk = lift_packing(&pair, HA, HB, &tol()).map_err(|e| e.to_string())?;
    seen.add("penny pair lift", &pk);
    let g = pk.contact_graph(&tol()).map_err(|e| e.to_string())?;
    ensure(g == Graph::complete(&[HA, HB, "p", "q"]).unwrap(), || "pair lift is not K4".into())?;
    let k4 = is_stress_free(&pk, &tol()).map_err(|e| e.to_string())?;
    ensure(k4.stress_free, || "K4 lift has a stress".into())?;

    let r3 = close_chain_solve(&[6.0, 6.0], (0.5, 100.0)).map_err(|e| e.to_string())?;
    let r3 = *r3.first().ok_or("3-chain does not close")?;
    let pk = chain_packing(&build_chain(&[6.0, 6.0, r3]).unwrap(), HA, HB).map_err(|e| e.to_string())?;
    seen.add("closed 3-chain", &pk);
    let g = pk.contact_graph(&tol()).map_err(|e| e.to_string())?;
    ensure(g == Graph::complete(&[HA, HB, "c1", "c2", "c3"]).unwrap() && g.edge_count() == 10, || {
        format!("3-chain lift has {} contacts", g.edge_count())
    })?;
    let k5 = is_stress_free(&pk, &tol()).map_err(|e| e.to_string())?;
    ensure(k5.stress_dim == 1, || format!("K5 stress_dim {}", k5.stress_dim))?;
    Ok("pair lift is K4 and stress-free; closed 3-chain lift is K5 with 10 contacts, stress_dim 1".into())
}

fn moebius_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut inv, mut tan, mut img) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        // Involution: an inversion applied twice.
        let c: Point3<f64> = random_point(&mut rng, 3.0);
        let f = MoebiusTransform::inversion(c, log_uniform(&mut rng, 0.1, 10.0));
        let u = loop {
            let u: Point3<f64> = random_point(&mut rng, 5.0);
            if u.dist(c) > 0.05 {
                break u;
            }
        };
        let back = f.apply_point(f.apply_point(u).unwrap()).unwrap();
        inv = inv.max(back.dist(u) / u.norm().max(1.0));

        // Tangency preservation and sphere-image agreement under a general map.
        let g = random_moebius::<f64, _>(&mut rng);
        let (c1, r1) = (random_point::<f64, _>(&mut rng, 2.0), log_uniform(&mut rng, 0.2, 2.0));
        let dir = random_point::<f64, _>(&mut rng, 1.0);
        let dir = dir.scale(1.0 / dir.norm());
        let r2 = log_uniform(&mut rng, 0.2, 2.0);
        let c2 = c1 + dir.scale(r1 + r2);
        if let Some(s) = g.singularity() {
            // Keep clear of the spheres' surfaces, where images blow up.
            if (s.dist(c1) - r1).abs() < 0.05 || (s.dist(c2) - r2).abs() < 0.05 {
                continue;
            }
        }
        let (SphereImage::Sphere { center: d1, radius: s1 }, SphereImage::Sphere { center: d2, radius: s2 }) =
            (g.apply_sphere(c1, r1), g.apply_sphere(c2, r2))
        else {
            return Err("sphere mapped to a plane away from the singularity".into());
        };
        let dist = d1.dist(d2);
        let gap = (dist - (s1 + s2)).abs().min((dist - (s1 - s2).abs()).abs()) / (s1 + s2);
        tan = tan.max(gap);
        for _ in 0..8 {
            let v = random_point::<f64, _>(&mut rng, 1.0);
            let p = c1 + v.scale(r1 / v.norm());
            let q = g.apply_point(p).unwrap();
            img = img.max((q.dist(d1) - s1).abs() / s1.max(1.0));
        }
    }
    ensure(inv < 1e-9, || format!("involution error {inv:e}"))?;
    ensure(tan < 1e-9, || format!("tangency error {tan:e}"))?;
    ensure(img < 1e-9, || format!("sphere-image error {img:e}"))?;

    let mut fixed = 0.0f64;
    for _ in 0..20 {
        let r = log_uniform(&mut rng, 1.5, 50.0);
        let p = scale_standard_form(r, 1.0).map_err(|e| e.to_string())?;
        for (from, to) in [(0.0, 0.0), (2.0, 2.0), (-2.0 * r, -2.0)] {
            let image = p.apply_point(Point3::new(0.0, 0.0, from)).map_err(|e| e.to_string())?;
            fixed = fixed.max(image.dist(Point3::new(0.0, 0.0, to)));
        }
    }
    ensure(fixed < 1e-12, || format!("fixed-point error {fixed:e}"))?;
    Ok(format!(
        "1000 cases: involution {inv:.1e}, tangency {tan:.1e}, sphere image {img:.1e}; fixed points {fixed:.1e}"
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_packrigid");
    let run = |args: &[&str], env_seed: Option<&str>| -> Result<Vec<u8>, String> {
        let mut cmd = Command::new(bin);
        cmd.args(args).env_remove("PACKRIGID_SEED");
        if let Some(s) = env_seed {
            cmd.env("PACKRIGID_SEED", s);
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(out.stdout)
    };
    let mut compared = 0;
    for exp in [["montecarlo", "stressfree", "--trials", "40"], ["montecarlo", "chain", "--trials", "200"]] {
        let base: Vec<&str> = exp.iter().copied().chain(["--seed", "12345"]).collect();
        let with_threads = |n: &'static str| -> Vec<&str> { base.iter().copied().chain(["--threads", n]).collect() };
        let reference = run(&with_threads("1"), None)?;
        for (args, env) in [
            (with_threads("1"), None),
            (with_threads("4"), None),
            (with_threads("3"), None),
            (exp.iter().copied().chain(["--threads", "2"]).collect(), Some("12345")),
        ] {
            ensure(run(&args, env)? == reference, || format!("{args:?} (env seed {env:?}) differs"))?;
            compared += 1;
        }
    }
    let other = run(&["montecarlo", "chain", "--trials", "200", "--seed", "54321"], None)?;
    let reference = run(&["montecarlo", "chain", "--trials", "200", "--seed", "12345"], None)?;
    ensure(other != reference, || "different seeds gave the same report".into())?;
    Ok(format!("{compared} reruns byte-identical across 1-4 threads and PACKRIGID_SEED"))
}

fn main() -> ExitCode {
    let mut seen = Seen::default();
    let results: Vec<(&str, Outcome)> = vec![
        ("lift/contact correspondence", lift_correspondence(&mut seen)),
        ("stress-freeness of forests", forest_stress_freeness(&mut seen)),
        ("cycle obstruction", cycle_obstruction(&mut seen)),
        ("standard form", standard_form_recovery(&mut seen)),
        ("clique corollary", clique_corollary(&mut seen)),
        ("moebius kernel", moebius_kernel()),
        ("determinism", determinism()),
    ];
    // Maxwell runs last so it sees every packing built above.
    let maxwell = maxwell_consistency(&seen);
    let mut ordered: Vec<(usize, &str, &Outcome)> = Vec::new();
    for (i, (name, r)) in results.iter().enumerate() {
        let number = if i < 4 { i + 1 } else { i + 2 };
        ordered.push((number, name, r));
    }
    ordered.push((5, "maxwell consistency", &maxwell));
    ordered.sort_by_key(|x| x.0);

    let mut failed = 0;
    for (n, name, r) in ordered {
        match r {
            Ok(detail) => println!("criterion {n} ({name}): PASS: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
