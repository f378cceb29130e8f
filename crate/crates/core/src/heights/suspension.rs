use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::battery::TestFunction;
use super::poly::MultiPointFunction;
use crate::error::{Error, Result};
use crate::maps::{suspend_family, ComposedFamily, ExpansionFamily, SpaceMap};
use crate::maps::sphere::suspend_once;
use crate::rng::{stream, Stream, BLOCK};
use crate::spaces::{SpaceDescriptor, SpacePoint, SpaceKind};

/// Norms below this are treated as zero.
const DEGENERATE: f64 = 1e-12;

/// `||T g|| / ||g||` for one test function, with `||T g||^2` estimated by
/// `E g(W x) g(W' x)` over independent members `W`, `W'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorRatio {
    pub name: String,
    /// Exact `||g||^2`.
    pub norm_sq: f64,
    /// Estimated `||T g||^2` and its standard error.
    pub image_norm_sq: f64,
    pub image_stderr: f64,
    pub ratio: f64,
    /// Ratio with `image_norm_sq` raised by three standard errors.
    pub upper: f64,
    /// `g` vanishes, so the ratio is undefined; reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberMixingReport {
    pub k: usize,
    pub samples: u64,
    pub results: Vec<OperatorRatio>,
    /// Largest ratio over non-degenerate test functions: the estimate of `q^k`.
    pub estimate: f64,
    /// Largest upper bound: the `q^k` used downstream.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspensionReport {
    pub m: usize,
    pub k: usize,
    pub samples: u64,
    /// Measured fiber mixing `q^k` (upper estimate).
    pub delta: f64,
    /// `(1 - 1/m)/4`.
    pub delta_limit: f64,
    /// `1/m + 2 delta`.
    pub bound: f64,
    pub distortion: f64,
    pub results: Vec<OperatorRatio>,
    pub max_ratio: f64,
    pub max_upper: f64,
    /// False when `delta >= delta_limit`; no ratios are computed then.
    pub conclusive: bool,
    pub suggested_k: Option<usize>,
    pub passed: bool,
}

fn sphere_coords(p: SpacePoint) -> Vec<f64> {
    match p {
        SpacePoint::Sphere(z) => z,
        other => other.coords(),
    }
}

fn apply_all(map: &SpaceMap, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter().map(|z| sphere_coords(map.apply_unchecked(&SpacePoint::Sphere(z.clone())))).collect()
}

/// Estimates `E g_j(W x) g_j(W' x)` for every `g_j`, with `x` uniform on
/// `(S^m)^n` and `W`, `W'` drawn independently by `draw`.
fn product_estimates<D>(m: usize, tests: &[MultiPointFunction], samples: u64, seed: u64, draw: D) -> Vec<(f64, f64)>
where
    D: Fn(&mut Stream) -> SpaceMap + Sync,
{
    let n = tests.first().map_or(1, |t| t.points);
    let space = SpaceDescriptor::sphere(m);
    let blocks = samples.div_ceil(BLOCK as u64);
    let partial: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, b);
            let mut acc = vec![(0.0, 0.0); tests.len()];
            for _ in 0..(BLOCK as u64).min(samples - b * BLOCK as u64) {
                let x: Vec<Vec<f64>> = (0..n).map(|_| sphere_coords(space.sample(&mut rng))).collect();
                let y = apply_all(&draw(&mut rng), &x);
                let z = apply_all(&draw(&mut rng), &x);
                for (a, g) in acc.iter_mut().zip(tests) {
                    let v = g.eval(&y) * g.eval(&z);
                    a.0 += v;
                    a.1 += v * v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![(0.0, 0.0); tests.len()];
    for block in partial {
        for (t, a) in total.iter_mut().zip(block) {
            t.0 += a.0;
            t.1 += a.1;
        }
    }
    let nf = samples as f64;
    total
        .into_iter()
        .map(|(s, ss)| {
            let mean = s / nf;
            let var = (ss / nf - mean * mean).max(0.0);
            (mean, (var / nf).sqrt())
        })
        .collect()
}

fn ratios(names: &[String], funcs: &[MultiPointFunction], est: Vec<(f64, f64)>) -> Vec<OperatorRatio> {
    names
        .iter()
        .zip(funcs)
        .zip(est)
        .map(|((name, g), (image, se))| {
            let norm_sq = g.norm_sq();
            let degenerate = norm_sq < DEGENERATE;
            let (ratio, upper) = if degenerate {
                (0.0, 0.0)
            } else {
                ((image.max(0.0) / norm_sq).sqrt(), ((image + 3.0 * se).max(0.0) / norm_sq).sqrt())
            };
            OperatorRatio { name: name.clone(), norm_sq, image_norm_sq: image, image_stderr: se, ratio, upper, degenerate }
        })
        .collect()
}

fn max_of(results: &[OperatorRatio], pick: impl Fn(&OperatorRatio) -> f64) -> f64 {
    results.iter().filter(|r| !r.degenerate).map(pick).fold(0.0, f64::max)
}

fn check_tests(m: usize, tests: &[TestFunction]) -> Result<()> {
    if tests.is_empty() {
        return Err(Error::usage("no test functions supplied"));
    }
    let n = tests[0].f.points;
    for t in tests {
        if t.f.points != n || t.f.coords != m + 1 {
            return Err(Error::usage(format!("test function {} is not defined on (S^{m})^{n}", t.name)));
        }
    }
    Ok(())
}

/// Estimates `sup ||P_1^k f - E_1 f|| / ||f - E_1 f||` over the test
/// functions, where `P_1` averages over the suspension of `inner` acting
/// diagonally on `(S^m)^n` and `E_1` conditions on the heights.
pub fn fiber_mixing_estimate(
    inner: &ExpansionFamily,
    k: usize,
    tests: &[TestFunction],
    samples: u64,
    seed: u64,
) -> Result<FiberMixingReport> {
    let leg = suspend_once(inner)?;
    let m = leg.space.dim();
    check_tests(m, tests)?;
    let names: Vec<String> = tests.iter().map(|t| t.name.clone()).collect();
    let funcs: Vec<MultiPointFunction> =
        tests.iter().map(|t| t.f.clone().plus(&t.f.condition_on(0).scale(-1.0))).collect();
    let results = if k == 0 {
        names
            .iter()
            .zip(&funcs)
            .map(|(name, g)| {
                let norm_sq = g.norm_sq();
                let degenerate = norm_sq < DEGENERATE;
                let r = if degenerate { 0.0 } else { 1.0 };
                OperatorRatio {
                    name: name.clone(),
                    norm_sq,
                    image_norm_sq: norm_sq,
                    image_stderr: 0.0,
                    ratio: r,
                    upper: r,
                    degenerate,
                }
            })
            .collect()
    } else {
        let est = product_estimates(m, &funcs, samples, seed, |rng| leg.sample_word(k, rng).to_map(&leg));
        ratios(&names, &funcs, est)
    };
    Ok(FiberMixingReport {
        k,
        samples,
        estimate: max_of(&results, |r| r.ratio),
        upper: max_of(&results, |r| r.upper),
        results,
    })
}

/// `(1 - 1/m)/4`.
pub fn delta_limit(m: usize) -> f64 {
    (1.0 - 1.0 / m as f64) / 4.0
}

/// The smallest `k` in `1..=max_k` whose measured fiber mixing is below
/// `(1 - 1/m)/4`, with its report.
pub fn choose_k(
    inner: &ExpansionFamily,
    max_k: usize,
    tests: &[TestFunction],
    samples: u64,
    seed: u64,
) -> Result<Option<FiberMixingReport>> {
    let limit = delta_limit(inner.space.dim() + 1);
    for k in 1..=max_k {
        let rep = fiber_mixing_estimate(inner, k, tests, samples, seed)?;
        if rep.upper < limit {
            return Ok(Some(rep));
        }
    }
    Ok(None)
}

/// Estimates `||Q_2 Q_1 f|| / ||f||` on `(S^m)^n` for mean-zero test
/// functions, with `Q_i` the `k`-step walks on the two suspension legs of
/// `inner`, against the bound `1/m + 2 delta`.
pub fn suspension_contraction_experiment(
    inner: &ExpansionFamily,
    k: usize,
    delta: f64,
    tests: &[TestFunction],
    samples: u64,
    seed: u64,
) -> Result<SuspensionReport> {
    if inner.space.kind() != SpaceKind::Sphere {
        return Err(Error::usage(format!("suspension needs a sphere family, got {}", inner.space)));
    }
    let family: ComposedFamily = suspend_family(inner, k)?;
    let m = family.space.dim();
    check_tests(m, tests)?;
    let limit = delta_limit(m);
    let bound = 1.0 / m as f64 + 2.0 * delta;
    let mut report = SuspensionReport {
        m,
        k,
        samples,
        delta,
        delta_limit: limit,
        bound,
        distortion: family.distortion,
        results: Vec::new(),
        max_ratio: 0.0,
        max_upper: 0.0,
        conclusive: delta < limit,
        suggested_k: None,
        passed: false,
    };
    if !report.conclusive {
        // q^k geometric in k: scale k so that delta^(k'/k) < limit.
        if delta > 0.0 && delta < 1.0 {
            let k2 = (k as f64 * limit.ln() / delta.ln()).floor() as usize + 1;
            report.suggested_k = Some(k2.max(k + 1));
        }
        return Ok(report);
    }
    let names: Vec<String> = tests.iter().map(|t| t.name.clone()).collect();
    let funcs: Vec<MultiPointFunction> = tests.iter().map(|t| t.f.centered()).collect();
    let est = product_estimates(m, &funcs, samples, seed, |rng| family.member_map(&family.sample_member(rng)));
    report.results = ratios(&names, &funcs, est);
    report.max_ratio = max_of(&report.results, |r| r.ratio);
    report.max_upper = max_of(&report.results, |r| r.upper);
    report.passed = report.results.iter().filter(|r| !r.degenerate).all(|r| {
        let se = if r.ratio > 0.0 { r.image_stderr / (2.0 * r.ratio * r.norm_sq) } else { 0.0 };
        r.ratio <= bound + 3.0 * se.max(r.upper - r.ratio)
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::battery::{zonal_battery, zonal_factor};
    use crate::maps::sphere::{surrogate_sphere_family, SurrogateParams};

    fn surrogate() -> ExpansionFamily {
        surrogate_sphere_family(SurrogateParams::default())
    }

    #[test]
    fn height_functions_have_zero_fiber_part() {
        let f = MultiPointFunction::product(1, 4, vec![(0, zonal_factor(3, 0, 2).unwrap())]);
        let t = TestFunction { name: "phi2(h)".into(), f };
        let rep = fiber_mixing_estimate(&surrogate(), 2, &[t], 4096, 1).unwrap();
        assert!(rep.results[0].degenerate);
        assert_eq!(rep.estimate, 0.0);
    }

    #[test]
    fn zero_steps_is_the_identity() {
        let tests = zonal_battery(3, 1, &[1, 2], 2, 0, 0).unwrap();
        let rep = fiber_mixing_estimate(&surrogate(), 0, &tests, 1, 0).unwrap();
        assert!(rep.results.iter().all(|r| r.ratio == 1.0));
    }

    #[test]
    fn surrogate_walk_mixes_fibers() {
        let tests = zonal_battery(3, 1, &[1, 2, 3], 2, 4, 5).unwrap();
        let rep = fiber_mixing_estimate(&surrogate(), 6, &tests, 50_000, 2).unwrap();
        for r in rep.results.iter().filter(|r| !r.degenerate) {
            assert!(r.image_norm_sq + 5.0 * r.image_stderr < r.norm_sq, "{r:?}");
        }
    }

    #[test]
    fn large_delta_is_inconclusive() {
        let tests = zonal_battery(3, 1, &[1], 1, 0, 0).unwrap();
        let rep = suspension_contraction_experiment(&surrogate(), 1, 0.5, &tests, 100, 0).unwrap();
        assert!(!rep.conclusive);
        assert!(rep.results.is_empty());
        assert!(rep.suggested_k.unwrap() > 1);
    }

    #[test]
    fn single_height_function_respects_bound() {
        // phi2 of the first height: E_1-measurable, and conditioning on the
        // second height contracts it by exactly 1/3.
        let f = MultiPointFunction::product(1, 4, vec![(0, zonal_factor(3, 0, 2).unwrap())]);
        let t = TestFunction { name: "phi2(h1)".into(), f };
        let rep = suspension_contraction_experiment(&surrogate(), 3, 0.1, &[t], 20_000, 4).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.max_ratio < rep.bound);
    }
}
