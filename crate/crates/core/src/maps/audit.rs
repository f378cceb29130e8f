//! Statistical audits of measure preservation and distortion.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::{perturb, SpaceMap};
use crate::error::{Error, Result};
use crate::harness::stats::chi_square_test;
use crate::rng::{stream, BLOCK};
use crate::spaces::{SpaceDescriptor, SpaceKind, SpacePoint};

/// A partition of a space into equal-measure cells.
#[derive(Debug, Clone)]
pub struct Partition {
    space: SpaceDescriptor,
    shape: Shape,
}

#[derive(Debug, Clone)]
enum Shape {
    /// Bins per coordinate on the leading coordinates.
    Grid(Vec<usize>),
    /// Height bands on coordinate 0 times longitude sectors of coordinates (1, 2).
    Sphere { bands: usize, sectors: usize, height: Beta },
    /// Angle cells on the circle.
    Circle(usize),
    /// First lift coordinate in `[0, 1/2]`, second in `[0, 1)`.
    Pillowcase(usize, usize),
    Intervals(usize),
}

impl Partition {
    /// The fixed 100-cell partition used by the family audits.
    pub fn standard(space: SpaceDescriptor) -> Self {
        let shape = match space.kind() {
            SpaceKind::Torus | SpaceKind::Cube => Shape::Grid(match space.dim() {
                1 => vec![100],
                2 => vec![10, 10],
                3 => vec![5, 5, 4],
                _ => vec![5, 5, 2, 2],
            }),
            SpaceKind::Sphere if space.dim() == 1 => Shape::Circle(100),
            SpaceKind::Sphere => return Self::sphere(space.dim(), 10, 10),
            SpaceKind::Pillowcase => Shape::Pillowcase(10, 10),
            SpaceKind::DisjointIntervals => Shape::Intervals(100),
        };
        Partition { space, shape }
    }

    /// Equal-mass height bands on coordinate 0 times longitude sectors, on `S^m`, `m >= 2`.
    pub fn sphere(m: usize, bands: usize, sectors: usize) -> Self {
        assert!(m >= 2, "sphere partition needs m >= 2");
        let height = Beta::new(m as f64 / 2.0, m as f64 / 2.0).expect("valid beta parameters");
        Partition { space: SpaceDescriptor::sphere(m), shape: Shape::Sphere { bands, sectors, height } }
    }

    pub fn cells(&self) -> usize {
        match &self.shape {
            Shape::Grid(b) => b.iter().product(),
            Shape::Sphere { bands, sectors, .. } => bands * sectors,
            Shape::Circle(c) | Shape::Intervals(c) => *c,
            Shape::Pillowcase(a, b) => a * b,
        }
    }

    pub fn cell_of(&self, x: &SpacePoint) -> usize {
        let bin = |v: f64, n: usize| ((v * n as f64) as usize).min(n - 1);
        match (&self.shape, x) {
            (Shape::Grid(bins), _) => {
                let c = x.coords();
                bins.iter().zip(&c).fold(0, |acc, (&n, &v)| acc * n + bin(v, n))
            }
            (Shape::Sphere { bands, sectors, height }, SpacePoint::Sphere(z)) => {
                let band = bin(height.cdf((z[0] + 1.0) / 2.0), *bands);
                let angle = (z[2].atan2(z[1]) + PI) / (2.0 * PI);
                band * sectors + bin(angle, *sectors)
            }
            (Shape::Circle(n), SpacePoint::Sphere(z)) => bin((z[1].atan2(z[0]) + PI) / (2.0 * PI), *n),
            (Shape::Pillowcase(a, b), SpacePoint::Pillowcase(_)) => {
                let c = x.coords();
                bin(2.0 * c[0], *a) * b + bin(c[1], *b)
            }
            (Shape::Intervals(n), SpacePoint::Interval(t)) => {
                let u = if *t <= 1.0 { t / 2.0 } else { (t - 1.0) / 2.0 };
                bin(u, *n)
            }
            _ => panic!("point {} does not match partition of {}", x.kind_name(), self.space),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureReport {
    pub samples: u64,
    pub cells: usize,
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

/// Pushes `samples` uniform points through `map` and tests the image counts
/// against the uniform cell probabilities at the 99.9% level.
pub fn audit_measure_preservation(map: &SpaceMap, partition: &Partition, samples: u64, seed: u64) -> MeasureReport {
    audit_pushforward(map.domain(), |x| map.apply_unchecked(x), partition, samples, seed)
}

/// As [`audit_measure_preservation`], for any point transformation of `space`.
pub fn audit_pushforward<F>(space: SpaceDescriptor, f: F, partition: &Partition, samples: u64, seed: u64) -> MeasureReport
where
    F: Fn(&SpacePoint) -> SpacePoint + Sync,
{
    let cells = partition.cells();
    let blocks = samples.div_ceil(BLOCK as u64);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = stream(seed, blk);
            let mut local = vec![0u64; cells];
            let len = (samples - blk * BLOCK as u64).min(BLOCK as u64);
            for _ in 0..len {
                let y = f(&space.sample(&mut rng));
                local[partition.cell_of(&y)] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let probs = vec![1.0 / cells as f64; cells];
    let (statistic, critical, passed) = chi_square_test(&counts, &probs, 0.999);
    MeasureReport { samples, cells, statistic, critical, passed }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionReport {
    pub pairs: u64,
    pub bound: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Samples pairs (half uniform, half at small random scales) and checks that
/// `d(phi x, phi y) / d(x, y)` lies in `[1/(K + eps), K + eps]` for the map and
/// its inverse.
pub fn audit_distortion(map: &SpaceMap, bound: f64, pairs: u64, tolerance: f64, seed: u64) -> DistortionReport {
    let space = map.domain();
    let inverse = map.inverse();
    let blocks = pairs.div_ceil(BLOCK as u64);
    let (max_ratio, min_ratio) = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = stream(seed, blk);
            let len = (pairs - blk * BLOCK as u64).min(BLOCK as u64);
            let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
            for i in 0..len {
                let (x, y) = sample_pair(space, i % 2 == 0, &mut rng);
                let d = space.distance_unchecked(&x, &y);
                if d == 0.0 {
                    continue;
                }
                for f in [map, &inverse] {
                    let r = space.distance_unchecked(&f.apply_unchecked(&x), &f.apply_unchecked(&y)) / d;
                    hi = hi.max(r);
                    lo = lo.min(r);
                }
            }
            (hi, lo)
        })
        .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
    let passed = max_ratio <= bound + tolerance && min_ratio >= 1.0 / (bound + tolerance);
    DistortionReport { pairs, bound, max_ratio, min_ratio, tolerance, passed }
}

/// A uniform pair, or a uniform point and a nearby perturbation.
pub(crate) fn sample_pair<R: Rng + ?Sized>(space: SpaceDescriptor, uniform: bool, rng: &mut R) -> (SpacePoint, SpacePoint) {
    let x = space.sample(rng);
    if uniform {
        let y = space.sample(rng);
        (x, y)
    } else {
        let scale = 10f64.powf(-rng.random_range(1.0..3.0));
        let y = perturb(space, &x, scale, rng);
        (x, y)
    }
}

/// Fails unless the report passed.
pub fn require_measure(report: &MeasureReport, what: &str) -> Result<()> {
    if report.passed {
        Ok(())
    } else {
        Err(Error::Audit(format!(
            "{what}: chi-square {:.2} exceeds {:.2} on {} cells",
            report.statistic, report.critical, report.cells
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::UnimodularMatrix;

    #[test]
    fn partitions_are_equal_mass() {
        for s in ["torus:2", "torus:3", "sphere:1", "sphere:2", "sphere:3", "pillowcase", "intervals", "cube:2"] {
            let space: SpaceDescriptor = s.parse().unwrap();
            let id = SpaceMap::Identity(space);
            let report = audit_measure_preservation(&id, &Partition::standard(space), 200_000, 9);
            assert!(report.passed, "{s}: {report:?}");
            assert_eq!(report.cells, 100);
        }
    }

    #[test]
    fn non_preserving_map_is_caught() {
        let partition = Partition::sphere(2, 10, 10);
        let mut rng = stream(4, 0);
        let mut counts = vec![0u64; 100];
        for _ in 0..100_000 {
            let x = SpaceDescriptor::sphere(2).sample(&mut rng);
            let mut z = x.coords();
            z[0] *= 0.5;
            crate::spaces::normalize(&mut z);
            counts[partition.cell_of(&SpacePoint::Sphere(z))] += 1;
        }
        let (_, _, passed) = chi_square_test(&counts, &vec![0.01; 100], 0.999);
        assert!(!passed);
    }

    #[test]
    fn cat_map_distortion() {
        let a = UnimodularMatrix::new(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let k = a.op_norm();
        let f = SpaceMap::TorusLinear(a);
        let rep = audit_distortion(&f, k, 100_000, 1e-6, 3);
        assert!(rep.passed, "{rep:?}");
        assert!(rep.max_ratio > 0.95 * k);
        let tight = audit_distortion(&f, 2.0, 100_000, 1e-6, 3);
        assert!(!tight.passed);
    }
}
