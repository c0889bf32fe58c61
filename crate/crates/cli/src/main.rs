use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use packrigid::chain::ChainJson;
use packrigid::experiment::{montecarlo_chain, montecarlo_stressfree, ExperimentConfig};
use packrigid::graph::GraphJson;
use packrigid::lift::PennyRealizationJson;
use packrigid::moebius::TransformJson;
use packrigid::packing::PackingJson;
use packrigid::rigidity::{Certificate, ExtensionFailure, StressReport};
use packrigid::{
    build_chain, close_chain_solve, is_stress_free, json, lift_packing, maxwell_bound, penny_edge_bound, render_svg,
    sphere_contact_bound, standard_form, zero_extension_certificate, Chain64, Packing64, Pennies64, Plot, Tolerance64,
};

#[derive(Parser)]
#[command(name = "packrigid", version, about = "Sphere packings with G + K2 contact graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Relative contact and overlap tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Relative singular-value cut for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    rank_tol: f64,
    #[arg(long, global = true, env = "PACKRIGID_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every pair of a packing; fails if any pair overlaps or the
    /// declared graph disagrees with the contacts.
    Validate { packing: PathBuf },
    /// Print the contact graph of a packing.
    Contacts { packing: PathBuf },
    /// Stress space of the contact framework; fails if a stress exists.
    Stress {
        packing: PathBuf,
        /// Also check this vertex order as a 0-extension certificate
        /// (comma-separated).
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
    },
    /// Möbius-normalize a packing with contact graph G + K2.
    StandardForm {
        packing: PathBuf,
        #[arg(long)]
        hub_a: String,
        #[arg(long)]
        hub_b: String,
    },
    /// Lift a penny realization to a packing with two unit hubs.
    Lift {
        pennies: PathBuf,
        #[arg(long, default_value = "ha")]
        hub_a: String,
        #[arg(long, default_value = "hb")]
        hub_b: String,
    },
    /// Build a chain of hub-tangent circles from its radii.
    Chain {
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        /// Treat the radii as a prefix and solve for closing last radii.
        #[arg(long)]
        close: bool,
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.1,10")]
        bracket: Vec<f64>,
    },
    /// Seeded Monte Carlo experiments.
    Montecarlo {
        #[arg(value_enum)]
        experiment: Experiment,
        #[arg(long, default_value_t = 2)]
        min_n: usize,
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 3)]
        min_k: usize,
        #[arg(long, default_value_t = 6)]
        max_k: usize,
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.1,10")]
        radii: Vec<f64>,
    },
    /// Edge-count bounds for n vertices in dimension d.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 3)]
        d: u64,
    },
    /// Draw pennies, a planar or standard-form packing, or a chain as SVG.
    Plot { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Stressfree,
    Chain,
}

/// Exit status 2: the invocation or its input could not be understood.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl From<anyhow::Error> for Usage {
    fn from(e: anyhow::Error) -> Self {
        Self(e)
    }
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Rendered output and whether the verdict was positive.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn json<S: Serialize>(value: &S, ok: bool) -> anyhow::Result<Self> {
        Ok(Self { text: json::to_string(value)?, ok })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.global.out, &out.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    let tol = Tolerance64::new(g.tol, g.tol, g.rank_tol).map_err(|e| Usage(anyhow!(e)))?;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Usage(anyhow!("cannot configure {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Validate { packing } => {
            let pk = read_packing(packing)?;
            let report = pk.validate(&tol).map_err(anyhow::Error::from)?;
            Ok(Outcome::json(&report, report.valid)?)
        }
        Command::Contacts { packing } => {
            let pk = read_packing(packing)?;
            let graph = pk.contact_graph(&tol).map_err(anyhow::Error::from)?;
            Ok(Outcome::json(&GraphJson::from(&graph), true)?)
        }
        Command::Stress { packing, order } => {
            #[derive(Serialize)]
            struct Out {
                stress: StressReport,
                #[serde(skip_serializing_if = "Option::is_none")]
                certificate: Option<Certificate>,
                #[serde(skip_serializing_if = "Option::is_none")]
                certificate_failure: Option<ExtensionFailure>,
            }
            let pk = read_packing(packing)?;
            let stress = is_stress_free(&pk, &tol).map_err(anyhow::Error::from)?;
            let cert = order.as_ref().map(|o| zero_extension_certificate(&pk, o, &tol));
            let ok = stress.stress_free && cert.as_ref().is_none_or(Result::is_ok);
            let (certificate, certificate_failure) = match cert {
                Some(Ok(c)) => (Some(c), None),
                Some(Err(f)) => (None, Some(f)),
                None => (None, None),
            };
            Ok(Outcome::json(&Out { stress, certificate, certificate_failure }, ok)?)
        }
        Command::StandardForm { packing, hub_a, hub_b } => {
            #[derive(Serialize)]
            struct Out {
                packing: PackingJson,
                pipeline: Vec<TransformJson>,
                hub_ratio: f64,
                preconditioned: bool,
            }
            let pk = read_packing(packing)?;
            let sf = standard_form(&pk, hub_a, hub_b, &tol).map_err(anyhow::Error::from)?;
            let out = Out {
                packing: sf.packing.to_json(),
                pipeline: sf.pipeline.to_json(),
                hub_ratio: sf.hub_ratio,
                preconditioned: sf.preconditioned,
            };
            Ok(Outcome::json(&out, true)?)
        }
        Command::Lift { pennies, hub_a, hub_b } => {
            let j: PennyRealizationJson = parse(&read_input(pennies)?)?;
            let r = Pennies64::from_json(&j).map_err(|e| Usage(anyhow!(e)))?;
            let pk = lift_packing(&r, hub_a, hub_b, &tol).map_err(anyhow::Error::from)?;
            Ok(Outcome::json(&pk.to_json(), true)?)
        }
        Command::Chain { radii, close, bracket } => {
            let [lo, hi] = pair(bracket, "--bracket")?;
            if *close {
                #[derive(Serialize)]
                struct Out {
                    prefix: Vec<f64>,
                    bracket: [f64; 2],
                    closing_radii: Vec<f64>,
                    chains: Vec<ChainJson>,
                }
                let roots = close_chain_solve(radii, (lo, hi)).map_err(|e| Usage(anyhow!(e)))?;
                let chains = roots
                    .iter()
                    .map(|&r| {
                        let mut all = radii.clone();
                        all.push(r);
                        build_chain(&all).map(|c| c.to_json())
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(anyhow::Error::from)?;
                let ok = !roots.is_empty();
                Ok(Outcome::json(&Out { prefix: radii.clone(), bracket: [lo, hi], closing_radii: roots, chains }, ok)?)
            } else {
                let c = build_chain(radii).map_err(anyhow::Error::from)?;
                Ok(Outcome::json(&c.to_json(), true)?)
            }
        }
        Command::Montecarlo { experiment, min_n, max_n, min_k, max_k, radii } => {
            let cfg = ExperimentConfig {
                seed: g.seed,
                trials: g.trials,
                tree_size_range: [*min_n, *max_n],
                radii: pair(radii, "--radii")?,
                tolerance: tol,
            };
            cfg.check().map_err(|e| Usage(anyhow!(e)))?;
            match experiment {
                Experiment::Stressfree => {
                    let rep = montecarlo_stressfree(&cfg).map_err(anyhow::Error::from)?;
                    let s = &rep.summary;
                    let ok = s.certified_but_stressed == 0 && s.stress_free == s.layouts && s.errors == 0;
                    Ok(Outcome::json(&rep, ok)?)
                }
                Experiment::Chain => {
                    let rep = montecarlo_chain(&cfg, [*min_k, *max_k]).map_err(|e| Usage(anyhow!(e)))?;
                    Ok(Outcome::json(&rep, true)?)
                }
            }
        }
        Command::Bounds { n, d } => {
            #[derive(Serialize)]
            struct Out {
                n: u64,
                d: u64,
                maxwell_bound: i64,
                penny_edge_bound: i64,
                sphere_contact_bound: i64,
            }
            let m = maxwell_bound(*d, *n).map_err(|e| Usage(anyhow!(e)))?;
            let out = Out {
                n: *n,
                d: *d,
                maxwell_bound: m,
                penny_edge_bound: penny_edge_bound(*n),
                sphere_contact_bound: sphere_contact_bound(*n),
            };
            Ok(Outcome::json(&out, true)?)
        }
        Command::Plot { input } => {
            let value: Value = parse(&read_input(input)?)?;
            let svg = if value.get("pennies").is_some() {
                let r = Pennies64::from_json(&parse_value(value)?).map_err(|e| Usage(anyhow!(e)))?;
                render_svg(Plot::Pennies(&r), &tol)
            } else if value.get("spheres").is_some() {
                let pk = Packing64::try_from(parse_value::<PackingJson>(value)?).map_err(|e| Usage(anyhow!(e)))?;
                render_svg(Plot::Packing(&pk), &tol)
            } else if value.get("radii").is_some() {
                let j: ChainJson = parse_value(value)?;
                let c: Chain64 = build_chain(&j.radii).map_err(|e| Usage(anyhow!(e)))?;
                render_svg(Plot::Chain(&c), &tol)
            } else {
                return Err(Usage(anyhow!("input is neither pennies, a packing nor a chain")).into());
            };
            Ok(Outcome { text: svg.map_err(anyhow::Error::from)?, ok: true })
        }
    }
}

fn pair(v: &[f64], flag: &str) -> Result<[f64; 2], Usage> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(Usage(anyhow!("{flag} takes two comma-separated numbers"))),
    }
}

/// Reads a file, or standard input for `-`.
fn read_input(path: &Path) -> Result<String, Usage> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Usage> {
    Ok(serde_json::from_str(text).context("parsing JSON input")?)
}

fn parse_value<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, Usage> {
    Ok(serde_json::from_value(v).context("parsing JSON input")?)
}

fn read_packing(path: &Path) -> Result<Packing64, Usage> {
    let j: PackingJson = parse(&read_input(path)?)?;
    Packing64::try_from(j).map_err(|e| Usage(anyhow!(e)))
}
