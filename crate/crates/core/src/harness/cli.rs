//! Command-line interface definitions and dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::Serialize;

use super::amplify::{amplification_experiment, pathwise_experiment};
use super::config::{ExperimentConfig, ExperimentKind};
use super::counterexample::{counterexample_experiment, default_counterexample_grid};
use super::curve::{threshold_curve, CurveOptions};
use super::record::RunRecord;
use super::sandwich::{sandwich_experiment, SandwichOptions};
use crate::error::{Error, Result};
use crate::heights::{
    choose_k, max_correlation, suspension_contraction_experiment, transfer_matrix_monte_carlo,
    transfer_matrix_quadrature, transversality_check, zonal_battery,
};
use crate::maps::sphere::{surrogate_sphere_family, SurrogateParams};
use crate::maps::{
    certify_generators, default_generators, pillowcase_family, search_generators, torus_family, ExpansionFamily,
    GeneratorSet, UnimodularMatrix,
};
use crate::rgg::{find_threshold_radius, MonotoneProperty};
use crate::rng::{derive_seed, stream};
use crate::spaces::{SpaceDescriptor, SpaceKind};
use crate::spectral::{
    contraction_battery, contraction_bound_sq, discrete_torus_norm, kesten_tree_norm, orbit_bfs, tree_ball_size,
    FrequencyVector,
};

#[derive(Debug, Parser)]
#[command(name = "geothresh", version, about = "Threshold experiments for random geometric graphs")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of Monte Carlo trials (command-specific default).
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Write the run record here (`.csv` for curves, JSON otherwise).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run the experiment described by a TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "GEOTHRESH_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability curve of a property over a radius grid.
    Threshold(ThresholdArgs),
    /// Amplification inequality at r and K^t r.
    Amplify(AmplifyArgs),
    /// Containment G(Phi x, r) ⊆ G(x, K^t r), with a K/2 negative control.
    Pathwise(PathwiseArgs),
    /// Cube and torus comparison.
    Sandwich(SandwichArgs),
    /// Giant property on disjoint intervals against the circle.
    Counterexample(CounterexampleArgs),
    /// Spectral constants of the expansion families.
    Spectral {
        #[command(subcommand)]
        command: SpectralCommand,
    },
    /// Maximal correlation of perpendicular heights on S^m.
    Maxcorr(MaxcorrArgs),
    /// Certify a generator pair, or search for certified pairs.
    CertifyGenerators(CertifyArgs),
    /// Suspension contraction experiment on S^3.
    Suspend(SuspendArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value = "torus:2")]
    pub space: SpaceDescriptor,
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value = "connected")]
    pub property: MonotoneProperty,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Geometric grid `min,max,points`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub grid: Option<Vec<f64>>,
    /// Locate r(1/2) by bisection to this width.
    #[arg(long)]
    pub bisect_tol: Option<f64>,
    /// Overlay the amplification prediction at K^t r(1/2).
    #[arg(long)]
    pub overlay_t: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AmplifyArgs {
    #[arg(long, default_value = "torus:2")]
    pub space: SpaceDescriptor,
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value = "edge")]
    pub property: MonotoneProperty,
    /// Base radius; tuned to `--target` when absent.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub target: f64,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
}

#[derive(Debug, Args)]
pub struct PathwiseArgs {
    #[arg(long, default_value = "torus:2")]
    pub space: SpaceDescriptor,
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    #[arg(long, default_value_t = 0.02)]
    pub r: f64,
}

#[derive(Debug, Args)]
pub struct SandwichArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub r: f64,
    /// Reverse the inclusion and fold with factor 1; the run must fail.
    #[arg(long)]
    pub negative_control: bool,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Defaults to 0.5 + 3/sqrt(n).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum SpectralCommand {
    /// Walk-operator norm on a ball of the 4-regular tree.
    Kesten {
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Exact frequency-side contraction on random sparse functions.
    Contraction {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        max_support: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_entry: i64,
    },
    /// Orbit trees of random nonzero frequencies.
    Orbit {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        starts: usize,
    },
    /// Averaging-operator norm on the discrete torus (Z/q)^d.
    Discrete {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        modulus: u64,
    },
}

#[derive(Debug, Args)]
pub struct MaxcorrArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Also cross-check with a Monte Carlo transfer matrix.
    #[arg(long)]
    pub mc_samples: Option<u64>,
    /// Run the transversality battery on (S^m)^n instead.
    #[arg(long)]
    pub transversality: bool,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Matrix `a` as `a11,a12;a21,a22`.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long, default_value_t = crate::maps::generators::CERTIFIED_LENGTH)]
    pub max_len: usize,
    /// Search for certified pairs instead.
    #[arg(long)]
    pub search: bool,
    #[arg(long, default_value_t = 3)]
    pub max_entry: i64,
    #[arg(long, default_value_t = 5)]
    pub limit: usize,
}

#[derive(Debug, Args)]
pub struct SuspendArgs {
    /// Walk length per leg; chosen from measured fiber mixing when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub max_k: usize,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

/// Parses `a11,a12;a21,a22`.
pub fn parse_matrix(s: &str) -> Result<UnimodularMatrix> {
    let rows: std::result::Result<Vec<Vec<i64>>, _> =
        s.split(';').map(|r| r.split(',').map(|x| x.trim().parse::<i64>()).collect()).collect();
    let rows = rows.map_err(|_| Error::usage(format!("bad matrix `{s}`")))?;
    UnimodularMatrix::new(rows)
}

fn generators_from(pair: Option<[[[i64; 2]; 2]; 2]>) -> Result<GeneratorSet> {
    match pair {
        None => Ok(default_generators().clone()),
        Some([a, b]) => {
            let m = |x: [[i64; 2]; 2]| UnimodularMatrix::new(x.iter().map(|r| r.to_vec()).collect());
            certify_generators(&m(a)?, &m(b)?, crate::maps::generators::CERTIFIED_LENGTH)
        }
    }
}

/// The certified family acting on a torus or the pillowcase.
pub fn family_for(space: SpaceDescriptor, gens: &GeneratorSet) -> Result<ExpansionFamily> {
    match space.kind() {
        SpaceKind::Torus => torus_family(space.dim(), gens),
        SpaceKind::Pillowcase => pillowcase_family(gens),
        _ => Err(Error::usage(format!("no certified expansion family on {space}"))),
    }
}

fn tuned_radius(space: SpaceDescriptor, n: usize, property: &MonotoneProperty, target: f64, trials: u64, seed: u64) -> Result<f64> {
    find_threshold_radius(space, n, property, target, 1e-5, trials, derive_seed(seed, "tune"))
}

/// Runs a config file.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let gens = generators_from(cfg.family.generators)?;
    let space = cfg.space.unwrap_or_else(|| SpaceDescriptor::torus(2));
    let property = cfg.property.clone().unwrap_or(MonotoneProperty::Connected);
    match cfg.kind {
        ExperimentKind::Threshold => {
            threshold_curve(space, cfg.n, &property, &cfg.radius_list()?, cfg.trials, cfg.seed, CurveOptions::default())
        }
        ExperimentKind::Amplify => {
            let family = family_for(space, &gens)?;
            let r = cfg.radius.ok_or_else(|| Error::usage("amplify config needs radius"))?;
            amplification_experiment(cfg.n, &property, r, cfg.family.t, &family, cfg.trials, cfg.seed)
        }
        ExperimentKind::Pathwise => {
            let family = family_for(space, &gens)?;
            let r = cfg.radius.ok_or_else(|| Error::usage("pathwise config needs radius"))?;
            pathwise_experiment(&family, cfg.n, cfg.family.t, r, cfg.trials, cfg.seed)
        }
        ExperimentKind::Sandwich => {
            let r = cfg.radius.ok_or_else(|| Error::usage("sandwich config needs radius"))?;
            sandwich_experiment(space.dim(), cfg.n, r, cfg.trials, cfg.seed, SandwichOptions::default())
        }
        ExperimentKind::Counterexample => {
            let radii = match cfg.radius_list() {
                Ok(r) => r,
                Err(_) => default_counterexample_grid(9),
            };
            let alpha = match &cfg.property {
                Some(MonotoneProperty::Giant { alpha }) => Some(*alpha),
                _ => None,
            };
            counterexample_experiment(cfg.n, &radii, alpha, cfg.trials, cfg.seed)
        }
    }
}

#[derive(Debug, Serialize)]
struct Params<T: Serialize> {
    command: &'static str,
    seed: u64,
    trials: Option<u64>,
    args: T,
}

fn record<T: Serialize>(command: &'static str, seed: u64, trials: Option<u64>, args: T) -> Result<RunRecord> {
    RunRecord::new(command, &Params { command, seed, trials, args })
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<RunRecord> {
    let started = Instant::now();
    let seed = cli.seed;
    if let Some(path) = &cli.config {
        if cli.command.is_some() {
            return Err(Error::usage("--config cannot be combined with a subcommand"));
        }
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(t) = cli.trials {
            cfg.trials = t;
        }
        let rec = run_config(&cfg)?;
        if let (None, Some(out)) = (&cli.out, &cfg.out) {
            rec.save(out)?;
        }
        return Ok(rec.finish(started));
    }
    let command = cli.command.as_ref().ok_or_else(|| Error::usage("a subcommand or --config is required"))?;
    let rec = match command {
        Command::Threshold(a) => {
            let radii = match (&a.radii, &a.grid) {
                (Some(r), _) => r.clone(),
                (None, Some(g)) => {
                    super::config::RadiusGrid { min: g[0], max: g[1], points: g[2] as usize }.radii()?
                }
                (None, None) => {
                    super::config::RadiusGrid { min: a.space.diameter() / 100.0, max: a.space.diameter(), points: 13 }
                        .radii()?
                }
            };
            let family = match a.overlay_t {
                Some(_) => Some(family_for(a.space, default_generators())?),
                None => None,
            };
            let options = CurveOptions {
                bisection_tol: a.bisect_tol,
                overlay: family.as_ref().zip(a.overlay_t),
            };
            threshold_curve(a.space, a.n, &a.property, &radii, cli.trials.unwrap_or(2000), seed, options)?
        }
        Command::Amplify(a) => {
            let trials = cli.trials.unwrap_or(10_000);
            let family = family_for(a.space, default_generators())?;
            let r = match a.r {
                Some(r) => r,
                None => tuned_radius(a.space, a.n, &a.property, a.target, trials, seed)?,
            };
            amplification_experiment(a.n, &a.property, r, a.t, &family, trials, seed)?
        }
        Command::Pathwise(a) => {
            let family = family_for(a.space, default_generators())?;
            pathwise_experiment(&family, a.n, a.t, a.r, cli.trials.unwrap_or(10_000), seed)?
        }
        Command::Sandwich(a) => {
            let options = if a.negative_control { SandwichOptions::negative_control() } else { SandwichOptions::default() };
            sandwich_experiment(a.d, a.n, a.r, cli.trials.unwrap_or(10_000), seed, options)?
        }
        Command::Counterexample(a) => {
            let radii = a.radii.clone().unwrap_or_else(|| default_counterexample_grid(a.points));
            counterexample_experiment(a.n, &radii, a.alpha, cli.trials.unwrap_or(2000), seed)?
        }
        Command::Spectral { command } => spectral(command, seed, cli.trials)?,
        Command::Maxcorr(a) => maxcorr(a, seed, cli.trials)?,
        Command::CertifyGenerators(a) => certify(a, seed)?,
        Command::Suspend(a) => suspend(a, seed)?,
    };
    Ok(rec.finish(started))
}

fn spectral(command: &SpectralCommand, seed: u64, trials: Option<u64>) -> Result<RunRecord> {
    let gens = default_generators();
    match command {
        SpectralCommand::Kesten { depth } => {
            let mut rec = record("spectral-kesten", seed, None, serde_json::json!({ "depth": depth }))?;
            let est = kesten_tree_norm(*depth)?;
            let bound = 3f64.sqrt() / 2.0;
            rec.derive("estimate", est)?;
            rec.derive("limit", bound)?;
            rec.check("kesten-upper", est <= bound + 1e-9, est, bound + 1e-9, "estimate never exceeds sqrt(3)/2");
            Ok(rec)
        }
        SpectralCommand::Contraction { d, n, max_support, max_entry } => {
            let trials = trials.unwrap_or(1000);
            let args = serde_json::json!({ "d": d, "n": n, "max_support": max_support, "max_entry": max_entry });
            let mut rec = record("spectral-contraction", seed, Some(trials), args)?;
            let family = torus_family(*d, gens)?;
            let batch = contraction_battery(&family, &gens.hash(), *n, trials as usize, *max_support, *max_entry, seed)?;
            let bound = contraction_bound_sq(*d);
            rec.check(
                "contraction",
                batch.max_ratio <= bound + 1e-12,
                batch.max_ratio,
                bound + 1e-12,
                "max ||Qh||^2/||h||^2",
            );
            rec.derive("batch", &batch)?;
            Ok(rec)
        }
        SpectralCommand::Orbit { d, n, depth, starts } => {
            let args = serde_json::json!({ "d": d, "n": n, "depth": depth, "starts": starts });
            let mut rec = record("spectral-orbit", seed, None, args)?;
            let family = torus_family(*d, gens)?;
            let mut rng = stream(seed, 0);
            let mut collisions = 0;
            let mut sizes_ok = true;
            for _ in 0..*starts {
                let v = loop {
                    let e: Vec<i64> = (0..d * n).map(|_| rng.random_range(-10..=10)).collect();
                    if let Ok(v) = FrequencyVector::from_flat(*d, e) {
                        break v;
                    }
                };
                let rep = orbit_bfs(&family, &v, *depth)?;
                collisions += rep.collisions;
                if *d == 2 {
                    sizes_ok &= orbit_bfs(&family, &v, 2)?.vertices == tree_ball_size(2);
                }
            }
            rec.check("orbit-collisions", collisions == 0, collisions as f64, 0.0, "non-backtracking revisits");
            if *d == 2 {
                rec.check(
                    "ball-size",
                    sizes_ok,
                    tree_ball_size(2) as f64,
                    17.0,
                    "every depth-2 ball has 2*3^2 - 1 vertices",
                );
            }
            Ok(rec)
        }
        SpectralCommand::Discrete { d, n, modulus } => {
            let mut rec = record("spectral-discrete", seed, None, serde_json::json!({ "d": d, "n": n, "modulus": modulus }))?;
            let family = torus_family(*d, gens)?;
            let rep = discrete_torus_norm(*modulus, *n, &family, seed)?;
            rec.derive("report", &rep)?;
            Ok(rec)
        }
    }
}

fn maxcorr(a: &MaxcorrArgs, seed: u64, trials: Option<u64>) -> Result<RunRecord> {
    let mut rec = record("maxcorr", seed, trials, serde_json::json!({
        "m": a.m, "degree": a.degree, "mc_samples": a.mc_samples, "transversality": a.transversality, "n": a.n, "bins": a.bins,
    }))?;
    if a.transversality {
        let samples = trials.unwrap_or(1_000_000);
        let tests = zonal_battery(a.m, a.n, &(0..=a.m).collect::<Vec<_>>(), 6, 20, derive_seed(seed, "battery"))?;
        let rep = transversality_check(a.m, a.n, &tests, samples, a.bins, seed)?;
        rec.check("transversality", rep.passed, rep.max_estimate, rep.bound + rep.eps_stat, "max ||E2 E1 f||/||f|| <= 1/m + eps_stat");
        rec.derive("eps_stat", rep.eps_stat)?;
        rec.derive("report", &rep)?;
        return Ok(rec);
    }
    let c = max_correlation(a.m, a.degree)?;
    let target = 1.0 / a.m as f64;
    rec.derive("c_m", c)?;
    rec.check("c_m", (c - target).abs() <= 2e-3, (c - target).abs(), 2e-3, "|c_m - 1/m|");
    if let Some(samples) = a.mc_samples {
        let q = transfer_matrix_quadrature(a.m, a.degree)?;
        let mc = transfer_matrix_monte_carlo(a.m, a.degree, samples, seed)?;
        let se = mc.stderr.as_ref().expect("monte carlo has standard errors");
        let mut worst: f64 = 0.0;
        for k in 0..=a.degree {
            for l in 0..=a.degree {
                if se[k][l] > 0.0 {
                    worst = worst.max((q.entries[k][l] - mc.entries[k][l]).abs() / se[k][l]);
                }
            }
        }
        rec.check("monte-carlo", worst <= 4.0, worst, 4.0, "max |quadrature - monte carlo| / stderr");
    }
    Ok(rec)
}

fn certify(a: &CertifyArgs, seed: u64) -> Result<RunRecord> {
    let mut rec = record("certify-generators", seed, None, serde_json::json!({
        "a": a.a, "b": a.b, "max_len": a.max_len, "search": a.search, "max_entry": a.max_entry, "limit": a.limit,
    }))?;
    if a.search {
        let hits = search_generators(a.max_entry, a.max_len, a.limit);
        rec.check("found", !hits.is_empty(), hits.len() as f64, 1.0, "certified pairs found");
        rec.derive("hits", &hits)?;
        return Ok(rec);
    }
    let set = match (&a.a, &a.b) {
        (None, None) => certify_generators(&default_generators().a, &default_generators().b, a.max_len)?,
        (Some(x), Some(y)) => certify_generators(&parse_matrix(x)?, &parse_matrix(y)?, a.max_len)?,
        _ => return Err(Error::usage("give both --a and --b, or neither")),
    };
    rec.derive("hash", set.hash())?;
    rec.derive("distortion", set.distortion())?;
    rec.derive("generators", &set)?;
    rec.check("certified", true, set.certificate.words_checked as f64, 0.0, "reduced words checked");
    Ok(rec)
}

fn suspend(a: &SuspendArgs, seed: u64) -> Result<RunRecord> {
    let mut rec = record("suspend", seed, None, serde_json::json!({
        "k": a.k, "max_k": a.max_k, "n": a.n, "degree": a.degree, "samples": a.samples,
    }))?;
    rec.derive("note", "validates the suspension mechanism with the surrogate S^2 family; its constants are measured")?;
    let inner = surrogate_sphere_family(SurrogateParams::default());
    let tests = zonal_battery(3, a.n, &[0, 1, 2, 3], a.degree, 10, derive_seed(seed, "battery"))?;
    let mixing_seed = derive_seed(seed, "fiber");
    let mixing = match a.k {
        Some(k) => Some(crate::heights::fiber_mixing_estimate(&inner, k, &tests, a.samples, mixing_seed)?),
        None => choose_k(&inner, a.max_k, &tests, a.samples, mixing_seed)?,
    };
    let Some(mixing) = mixing else {
        rec.check("fiber-mixing", false, f64::NAN, crate::heights::delta_limit(3), "no k <= max_k mixes enough");
        return Ok(rec);
    };
    rec.derive("q_hat_k", mixing.upper)?;
    rec.derive("q_hat", mixing.upper.powf(1.0 / mixing.k as f64))?;
    let rep = suspension_contraction_experiment(&inner, mixing.k, mixing.upper, &tests, a.samples, derive_seed(seed, "q2q1"))?;
    rec.check("conclusive", rep.conclusive, rep.delta, rep.delta_limit, "q_hat^k < (1 - 1/m)/4");
    if rep.conclusive {
        rec.check("contraction", rep.passed, rep.max_ratio, rep.bound, "||Q2 Q1 f||/||f|| <= 1/m + 2 q_hat^k + 3 sigma");
    }
    rec.derive("report", &rep)?;
    Ok(rec)
}
