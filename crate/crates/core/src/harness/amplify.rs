use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use crate::error::{Error, Result};
use crate::maps::{apply_word, ExpansionFamily};
use crate::rgg::{estimate_curve, Configuration, MonotoneProperty};
use crate::rng::stream;

/// `1 - ((1-p)/p)(1-rho)^(2t)`; `-inf` at `p = 0`.
pub fn amplification_bound(p: f64, rho: f64, t: usize) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    1.0 - (1.0 - p) / p * (1.0 - rho).powi(2 * t as i32)
}

#[derive(Debug, Clone, Serialize)]
struct AmplifyParams<'a> {
    space: String,
    n: usize,
    property: &'a MonotoneProperty,
    r: f64,
    t: usize,
    family: &'a str,
    distortion: f64,
    rho: f64,
    trials: u64,
    seed: u64,
}

/// Estimates `p = P(F at r)` and `p' = P(F at K^t r)` on shared
/// configurations and checks `p' >= bound(p_lo) - 3 stderr(p')`, where
/// `p_lo` is the Wilson lower limit of `p`.
pub fn amplification_experiment(
    n: usize,
    property: &MonotoneProperty,
    r: f64,
    t: usize,
    family: &ExpansionFamily,
    trials: u64,
    seed: u64,
) -> Result<RunRecord> {
    let started = Instant::now();
    let rho = family
        .rho
        .ok_or_else(|| Error::usage(format!("family {} has no certified contraction rate", family.label)))?;
    let space = family.space;
    let amplified = family.distortion.powi(t as i32) * r;
    let params = AmplifyParams {
        space: space.to_string(),
        n,
        property,
        r,
        t,
        family: &family.label,
        distortion: family.distortion,
        rho,
        trials,
        seed,
    };
    let mut rec = RunRecord::new("amplify", &params)?;
    let est = estimate_curve(space, n, &[r, amplified], property, trials, seed);
    let (p, p2) = (est[0], est[1]);
    rec.estimate("base", r, p);
    rec.estimate("amplified", amplified, p2);
    let bound = amplification_bound(p.ci_low, rho, t);
    let degenerate = amplified >= space.diameter();
    rec.derive("amplified_radius", amplified)?;
    rec.derive("bound", if bound.is_finite() { Some(bound) } else { None })?;
    rec.derive("degenerate", degenerate)?;
    rec.derive("vacuous", p.value <= 0.05 || bound <= 0.0)?;
    let limit = if bound.is_finite() { bound - 3.0 * p2.stderr } else { f64::NEG_INFINITY };
    rec.check(
        "amplification",
        p2.value >= limit,
        p2.value,
        limit,
        format!("p(K^t r) >= 1 - ((1-p_lo)/p_lo)(1-rho)^(2t) - 3 stderr, p_lo = {}", p.ci_low),
    );
    Ok(rec.finish(started))
}

/// A pair joined in `G(Phi x, r)` but not in `G(x, C^t r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwiseViolation {
    pub trial: u64,
    pub word: Vec<usize>,
    pub pair: (usize, usize),
    pub mapped_distance: f64,
    pub original_distance: f64,
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwiseReport {
    pub trials: u64,
    pub t: usize,
    pub r: f64,
    /// The constant `C` being tested in place of the distortion.
    pub constant: f64,
    pub violations: u64,
    /// Violation with the smallest trial index.
    pub first: Option<PathwiseViolation>,
}

/// Checks `G(Phi x, r) ⊆ G(x, C^t r)` for random configurations `x` and
/// random words `Phi` of length `t`.
pub fn pathwise_monotone_check(
    family: &ExpansionFamily,
    n: usize,
    t: usize,
    r: f64,
    constant: f64,
    trials: u64,
    seed: u64,
) -> Result<PathwiseReport> {
    let space = family.space;
    let wide = constant.powi(t as i32) * r;
    let found: Vec<(u64, Option<PathwiseViolation>)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, Option<PathwiseViolation>)> {
            let mut rng = stream(seed, trial);
            let x = Configuration::sample(space, n, &mut rng);
            let word = family.sample_word(t, &mut rng);
            let y = apply_word(&word, family, &x)?;
            let (px, py) = (x.points(), y.points());
            let mut count = 0;
            let mut first = None;
            for i in 0..n {
                for j in i + 1..n {
                    let dy = space.distance_unchecked(&py[i], &py[j]);
                    if dy > r {
                        continue;
                    }
                    let dx = space.distance_unchecked(&px[i], &px[j]);
                    if dx > wide {
                        count += 1;
                        first.get_or_insert_with(|| PathwiseViolation {
                            trial,
                            word: word.letters.clone(),
                            pair: (i, j),
                            mapped_distance: dy,
                            original_distance: dx,
                            config: x.clone(),
                        });
                    }
                }
            }
            Ok((count, first))
        })
        .collect::<Result<_>>()?;
    Ok(PathwiseReport {
        trials,
        t,
        r,
        constant,
        violations: found.iter().map(|f| f.0).sum(),
        first: found.into_iter().find_map(|f| f.1),
    })
}

#[derive(Debug, Clone, Serialize)]
struct PathwiseParams<'a> {
    space: String,
    n: usize,
    t: usize,
    r: f64,
    family: &'a str,
    distortion: f64,
    trials: u64,
    seed: u64,
}

/// Runs the containment check at the family's distortion, and again at half
/// of it as a negative control that must find violations.
pub fn pathwise_experiment(
    family: &ExpansionFamily,
    n: usize,
    t: usize,
    r: f64,
    trials: u64,
    seed: u64,
) -> Result<RunRecord> {
    let started = Instant::now();
    let params = PathwiseParams { space: family.space.to_string(), n, t, r, family: &family.label, distortion: family.distortion, trials, seed };
    let mut rec = RunRecord::new("pathwise", &params)?;
    let main = pathwise_monotone_check(family, n, t, r, family.distortion, trials, seed)?;
    rec.check(
        "containment",
        main.violations == 0,
        main.violations as f64,
        0.0,
        "edges of G(Phi x, r) missing from G(x, K^t r)",
    );
    rec.derive("containment", &main)?;
    if t > 0 {
        let control = pathwise_monotone_check(family, n, t, r, family.distortion / 2.0, trials, seed)?;
        rec.check(
            "negative-control",
            control.violations >= 1,
            control.violations as f64,
            1.0,
            "violations with K replaced by K/2",
        );
        rec.derive("negative_control", &control)?;
    }
    Ok(rec.finish(started))
}
