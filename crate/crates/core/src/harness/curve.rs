use std::time::Instant;

use serde::Serialize;

use super::amplify::amplification_bound;
use super::record::RunRecord;
use super::stats::Estimate;
use crate::error::{Error, Result};
use crate::maps::ExpansionFamily;
use crate::rgg::{estimate_curve, estimate_probability, find_threshold_radius, MonotoneProperty};
use crate::rng::derive_seed;
use crate::spaces::SpaceDescriptor;

/// First radius where the curve reaches `target`, by linear interpolation
/// between grid points.
pub fn interpolate_crossing(radii: &[f64], values: &[f64], target: f64) -> Option<f64> {
    let i = values.iter().position(|&v| v >= target)?;
    if i == 0 {
        return Some(radii[0]);
    }
    let (r0, r1, v0, v1) = (radii[i - 1], radii[i], values[i - 1], values[i]);
    Some(r0 + (target - v0) / (v1 - v0) * (r1 - r0))
}

#[derive(Debug, Clone, Serialize)]
struct CurveParams<'a> {
    space: String,
    n: usize,
    property: &'a MonotoneProperty,
    radii: &'a [f64],
    trials: u64,
    seed: u64,
    bisection_tol: Option<f64>,
    overlay: Option<(&'a str, usize)>,
}

/// Threshold-curve options.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurveOptions<'a> {
    /// Also locate the half-probability radius by bisection to this width.
    pub bisection_tol: Option<f64>,
    /// Estimate the property at `K^t r(1/2)` against the amplification bound.
    pub overlay: Option<(&'a ExpansionFamily, usize)>,
}

/// Per-radius estimates on shared configurations, the interpolated
/// half-probability radius, and checks that adjacent estimates never
/// decrease by more than three combined standard errors.
pub fn threshold_curve(
    space: SpaceDescriptor,
    n: usize,
    property: &MonotoneProperty,
    radii: &[f64],
    trials: u64,
    seed: u64,
    options: CurveOptions,
) -> Result<RunRecord> {
    let started = Instant::now();
    if radii.is_empty() || radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::usage("radius grid must be nonempty and sorted"));
    }
    if !property.is_nontrivial(n) {
        return Err(Error::usage(format!("property {property} is trivial for n = {n}")));
    }
    let params = CurveParams {
        space: space.to_string(),
        n,
        property,
        radii,
        trials,
        seed,
        bisection_tol: options.bisection_tol,
        overlay: options.overlay.map(|(f, t)| (f.label.as_str(), t)),
    };
    let mut rec = RunRecord::new("threshold", &params)?;
    let est: Vec<Estimate> = estimate_curve(space, n, radii, property, trials, seed);
    for (&r, e) in radii.iter().zip(&est) {
        rec.estimate("curve", r, *e);
    }
    let worst = est
        .windows(2)
        .map(|w| (w[0].value - w[1].value) - 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    if radii.len() > 1 {
        rec.check("monotone", worst <= 0.0, worst, 0.0, "largest drop between adjacent radii minus 3 sigma");
    }
    let values: Vec<f64> = est.iter().map(|e| e.value).collect();
    let half = interpolate_crossing(radii, &values, 0.5);
    rec.derive("half_radius_interpolated", half)?;
    if let Some(tol) = options.bisection_tol {
        let r = find_threshold_radius(space, n, property, 0.5, tol, trials, derive_seed(seed, "bisection"))?;
        rec.derive("half_radius", r)?;
        rec.derive("half_radius_tol", tol)?;
    }
    if let (Some((family, t)), Some(r)) = (options.overlay, half) {
        let wide = family.distortion.powi(t as i32) * r;
        let p = estimate_probability(space, n, r, property, trials, derive_seed(seed, "overlay-base"));
        let p2 = estimate_probability(space, n, wide, property, trials, derive_seed(seed, "overlay-wide"));
        rec.estimate("overlay-base", r, p);
        rec.estimate("overlay-amplified", wide, p2);
        if let Some(rho) = family.rho {
            rec.derive("overlay_bound", amplification_bound(p.ci_low, rho, t).max(-1e300))?;
        }
    }
    Ok(rec.finish(started))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolates_linearly() {
        let r = [0.1, 0.2, 0.3];
        assert!((interpolate_crossing(&r, &[0.2, 0.4, 0.6], 0.5).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(interpolate_crossing(&r, &[0.6, 0.7, 0.8], 0.5), Some(0.1));
        assert_eq!(interpolate_crossing(&r, &[0.1, 0.2, 0.3], 0.5), None);
    }

    #[test]
    fn curve_endpoints() {
        let space = SpaceDescriptor::torus(2);
        let rec = threshold_curve(space, 8, &MonotoneProperty::Connected, &[0.0, space.diameter()], 300, 1, CurveOptions::default())
            .unwrap();
        assert_eq!(rec.estimates[0].estimate.value, 0.0);
        assert_eq!(rec.estimates[1].estimate.value, 1.0);
    }

    #[test]
    fn circle_edge_curve_is_linear() {
        let radii: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).collect();
        let rec = threshold_curve(SpaceDescriptor::torus(1), 2, &MonotoneProperty::Edge, &radii, 20_000, 2, CurveOptions::default())
            .unwrap();
        for e in &rec.estimates {
            assert!((e.estimate.value - 2.0 * e.radius).abs() <= 4.0 * e.estimate.stderr, "{e:?}");
        }
        assert!(rec.passed);
    }

    #[test]
    fn trivial_property_rejected() {
        let err = threshold_curve(SpaceDescriptor::torus(1), 1, &MonotoneProperty::Edge, &[0.1], 10, 0, CurveOptions::default())
            .unwrap_err();
        assert!(err.is_usage());
    }
}
