use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::battery::TestFunction;
use super::law::HeightLaw;
use crate::error::{Error, Result};
use crate::rng::{stream, BLOCK};
use crate::spaces::{SpaceDescriptor, SpacePoint};

/// Cells with fewer samples than this widen the statistical slack.
pub const MIN_CELL_COUNT: u64 = 25;

/// One test function's `||E_2 E_1 f|| / ||f||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioResult {
    pub name: String,
    /// Binned Monte Carlo estimate.
    pub estimate: f64,
    /// Exact value from the polynomial calculus.
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub m: usize,
    pub n: usize,
    pub samples: u64,
    pub bins: usize,
    pub cells: usize,
    pub min_cell_count: u64,
    pub eps_stat: f64,
    /// Set when some cell fell below [`MIN_CELL_COUNT`].
    pub flagged: bool,
    /// `1/m`.
    pub bound: f64,
    pub results: Vec<RatioResult>,
    /// Names of test functions dropped because they vanish after centering.
    pub excluded: Vec<String>,
    pub max_estimate: f64,
    pub max_exact: f64,
    pub passed: bool,
}

/// Heights of points on `S^m`, with the two coordinates stored per point.
struct Sample {
    points: Vec<Vec<f64>>,
}

fn sample_configurations(m: usize, n: usize, samples: u64, seed: u64) -> Vec<Sample> {
    let space = SpaceDescriptor::sphere(m);
    let blocks = samples.div_ceil(BLOCK as u64);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = stream(seed, b);
            let len = (BLOCK as u64).min(samples - b * BLOCK as u64);
            (0..len)
                .map(|_| {
                    let points = (0..n)
                        .map(|_| match space.sample(&mut rng) {
                            SpacePoint::Sphere(z) => z,
                            _ => unreachable!(),
                        })
                        .collect();
                    Sample { points }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn cell_index(law: &HeightLaw, points: &[Vec<f64>], c: usize, bins: usize) -> usize {
    points.iter().fold(0, |acc, z| {
        let b = ((law.cdf(z[c]) * bins as f64) as usize).min(bins - 1);
        acc * bins + b
    })
}

/// Estimates `||E_2 E_1 f||/||f||` on `(S^m)^n` for every test function,
/// where `E_c` is conditional expectation given coordinate `c` of every
/// point. Conditional expectations are binned into `bins` equal-mass cells
/// per point, so there are `bins^n` cells. Passes when every estimate is at
/// most `1/m + eps_stat` with `eps_stat = 2 sqrt(cells/N)`.
pub fn transversality_check(
    m: usize,
    n: usize,
    tests: &[TestFunction],
    samples: u64,
    bins: usize,
    seed: u64,
) -> Result<TransversalityReport> {
    let law = HeightLaw::new(m)?;
    if bins < 1 || n == 0 {
        return Err(Error::usage("transversality check needs bins >= 1 and n >= 1"));
    }
    let cells = bins
        .checked_pow(n as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::SizeLimit(format!("{bins}^{n} cells")))?;
    for t in tests {
        if t.f.points != n || t.f.coords != m + 1 {
            return Err(Error::usage(format!("test function {} is not defined on (S^{m})^{n}", t.name)));
        }
    }
    let data = sample_configurations(m, n, samples, seed);
    let first: Vec<usize> = data.par_iter().map(|s| cell_index(&law, &s.points, 0, bins)).collect();
    let second: Vec<usize> = data.par_iter().map(|s| cell_index(&law, &s.points, 1, bins)).collect();
    let mut count1 = vec![0u64; cells];
    let mut count2 = vec![0u64; cells];
    for (&a, &b) in first.iter().zip(&second) {
        count1[a] += 1;
        count2[b] += 1;
    }
    let min_cell_count = count1.iter().chain(&count2).copied().min().unwrap_or(0);
    let flagged = min_cell_count < MIN_CELL_COUNT;
    let mut eps_stat = 2.0 * (cells as f64 / samples as f64).sqrt();
    if flagged {
        eps_stat = eps_stat.max(2.0 / (min_cell_count.max(1) as f64).sqrt());
    }

    let mut excluded = Vec::new();
    let kept: Vec<&TestFunction> = tests
        .iter()
        .filter(|t| {
            let keep = t.f.norm_sq() > 1e-14;
            if !keep {
                excluded.push(t.name.clone());
            }
            keep
        })
        .collect();
    let results: Vec<RatioResult> = kept
        .par_iter()
        .map(|t| {
            let exact_num = t.f.condition_on(0).condition_on(1).norm_sq();
            let exact = (exact_num / t.f.norm_sq()).sqrt();
            let values: Vec<f64> = data.iter().map(|s| t.f.eval(&s.points)).collect();
            let mean = values.iter().sum::<f64>() / samples as f64;
            let mut sum1 = vec![0.0; cells];
            let mut norm = 0.0;
            for (v, &a) in values.iter().zip(&first) {
                sum1[a] += v - mean;
                norm += (v - mean) * (v - mean);
            }
            let mut sum2 = vec![0.0; cells];
            for (&a, &b) in first.iter().zip(&second) {
                sum2[b] += sum1[a] / count1[a] as f64;
            }
            let num: f64 = sum2
                .iter()
                .zip(&count2)
                .filter(|(_, &c)| c > 0)
                .map(|(s, &c)| s * s / c as f64)
                .sum();
            RatioResult { name: t.name.clone(), estimate: (num / norm).sqrt(), exact }
        })
        .collect();
    let bound = 1.0 / m as f64;
    let max_estimate = results.iter().map(|r| r.estimate).fold(0.0, f64::max);
    let max_exact = results.iter().map(|r| r.exact).fold(0.0, f64::max);
    Ok(TransversalityReport {
        m,
        n,
        samples,
        bins,
        cells,
        min_cell_count,
        eps_stat,
        flagged,
        bound,
        passed: max_estimate <= bound + eps_stat,
        results,
        excluded,
        max_estimate,
        max_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heights::battery::{zonal_battery, zonal_factor};
    use crate::heights::poly::MultiPointFunction;

    #[test]
    fn exact_ratio_of_first_height_is_one_over_m() {
        let m = 3;
        let p0 = zonal_factor(m, 0, 2).unwrap();
        let f = MultiPointFunction::product(1, m + 1, vec![(0, p0)]).centered();
        let e = f.condition_on(0).condition_on(1);
        // E[phi2(z0) | z1] = c * phi2(z1) with c = -1/m for the degree-2
        // zonal function, so the ratio is 1/m.
        let ratio = (e.norm_sq() / f.norm_sq()).sqrt();
        assert!((ratio - 1.0 / m as f64).abs() < 1e-10, "{ratio}");
    }

    #[test]
    fn binned_estimates_track_exact_values() {
        let tests = zonal_battery(2, 1, &[0, 1, 2], 4, 0, 3).unwrap();
        let rep = transversality_check(2, 1, &tests, 200_000, 20, 7).unwrap();
        assert!(!rep.flagged);
        for r in &rep.results {
            assert!(r.exact <= 0.5 + 1e-9, "{r:?}");
            // Binning only coarsens the conditioning, which biases downward.
            assert!(r.estimate < r.exact + rep.eps_stat, "{r:?}");
            if r.name.starts_with("phi1") || r.name.starts_with("phi2") {
                assert!((r.estimate - r.exact).abs() < rep.eps_stat, "{r:?}");
            }
        }
        assert!(rep.passed);
    }

    #[test]
    fn zero_function_is_excluded() {
        let zero = TestFunction { name: "zero".into(), f: MultiPointFunction::zero(1, 3) };
        let rep = transversality_check(2, 1, &[zero], 1000, 5, 0).unwrap();
        assert_eq!(rep.excluded, vec!["zero".to_string()]);
        assert!(rep.results.is_empty());
    }

    #[test]
    fn too_few_samples_are_flagged() {
        let tests = zonal_battery(2, 2, &[0, 1], 2, 0, 0).unwrap();
        let rep = transversality_check(2, 2, &tests, 2000, 20, 0).unwrap();
        assert!(rep.flagged);
        assert!(rep.eps_stat >= 2.0 / (MIN_CELL_COUNT as f64).sqrt());
    }
}
