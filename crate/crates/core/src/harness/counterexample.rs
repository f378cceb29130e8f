use std::time::Instant;

use serde::Serialize;

use super::record::RunRecord;
use crate::error::{Error, Result};
use crate::rgg::{estimate_curve, MonotoneProperty};
use crate::rng::derive_seed;
use crate::spaces::SpaceDescriptor;

/// `0.5 + 3/sqrt(n)`.
pub fn default_alpha(n: usize) -> f64 {
    0.5 + 3.0 / (n as f64).sqrt()
}

/// Geometric grid of `points` radii spanning two decades below `0.9`.
pub fn default_counterexample_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = (0.009_f64, 0.9_f64);
    let step = (hi / lo).ln() / (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| lo * (step * i as f64).exp()).collect()
}

#[derive(Debug, Clone, Serialize)]
struct CounterexampleParams<'a> {
    n: usize,
    alpha: f64,
    radii: &'a [f64],
    trials: u64,
    seed: u64,
}

/// Curves of `giant:alpha` on two disjoint unit intervals and on the
/// circle. Passes when the interval curve stays in `[0.2, 0.8]` over the
/// whole grid while the circle curve drops below 0.05 and rises above 0.95.
pub fn counterexample_experiment(n: usize, radii: &[f64], alpha: Option<f64>, trials: u64, seed: u64) -> Result<RunRecord> {
    let started = Instant::now();
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::usage("counterexample grid needs positive radii"));
    }
    let alpha = alpha.unwrap_or_else(|| default_alpha(n));
    let mut rec = RunRecord::new("counterexample", &CounterexampleParams { n, alpha, radii, trials, seed })?;
    let property = MonotoneProperty::Giant { alpha };
    let flat = estimate_curve(SpaceDescriptor::intervals(), n, radii, &property, trials, derive_seed(seed, "intervals"));
    let steep = estimate_curve(SpaceDescriptor::torus(1), n, radii, &property, trials, derive_seed(seed, "circle"));
    for (&r, e) in radii.iter().zip(&flat) {
        rec.estimate("intervals", r, *e);
    }
    for (&r, e) in radii.iter().zip(&steep) {
        rec.estimate("circle", r, *e);
    }
    let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().copied().fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    rec.derive("decades", decades)?;
    rec.check("grid-span", decades >= 2.0 - 1e-9, decades, 2.0, "multiplicative decades covered by the grid");
    let flat_min = flat.iter().map(|e| e.value).fold(1.0, f64::min);
    let flat_max = flat.iter().map(|e| e.value).fold(0.0, f64::max);
    rec.check("intervals-floor", flat_min >= 0.2, flat_min, 0.2, "disjoint-intervals curve stays >= 0.2");
    rec.check("intervals-ceiling", flat_max <= 0.8, flat_max, 0.8, "disjoint-intervals curve stays <= 0.8");
    let steep_min = steep.iter().map(|e| e.value).fold(1.0, f64::min);
    let steep_max = steep.iter().map(|e| e.value).fold(0.0, f64::max);
    rec.check("circle-low", steep_min < 0.05, steep_min, 0.05, "circle curve drops below 0.05");
    rec.check("circle-high", steep_max > 0.95, steep_max, 0.95, "circle curve rises above 0.95");
    Ok(rec.finish(started))
}
