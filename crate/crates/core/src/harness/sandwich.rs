use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use crate::error::Result;
use crate::rgg::{estimate_probability, MonotoneProperty};
use crate::rng::{derive_seed, stream};
use crate::spaces::{fold_to_cube, SpaceDescriptor, SpacePoint, TorusPoint};

/// An edge present on one side of an inclusion and missing on the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichViolation {
    pub trial: u64,
    pub pair: (usize, usize),
    pub left: f64,
    pub right: f64,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub trials: u64,
    pub violations: u64,
    pub first: Option<SandwichViolation>,
}

/// The sandwich options. The negative control reverses the coupled
/// inclusion and folds with factor 1, and must then fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichOptions {
    pub fold_factor: f64,
    pub reverse: bool,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        SandwichOptions { fold_factor: 2.0, reverse: false }
    }
}

impl SandwichOptions {
    pub fn negative_control() -> Self {
        SandwichOptions { fold_factor: 1.0, reverse: true }
    }
}

/// Counts pairs with `left <= r` and `right > r_right`, over trials drawing
/// points from `draw`.
fn inclusion<D>(n: usize, trials: u64, seed: u64, r: f64, r_right: f64, draw: D) -> InclusionReport
where
    D: Fn(&mut crate::rng::Stream) -> (Vec<Vec<f64>>, Box<dyn Fn(usize, usize) -> (f64, f64)>) + Sync,
{
    let found: Vec<(u64, Option<SandwichViolation>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, trial);
            let (points, dist) = draw(&mut rng);
            let mut count = 0;
            let mut first = None;
            for i in 0..n {
                for j in i + 1..n {
                    let (left, right) = dist(i, j);
                    if left <= r && right > r_right {
                        count += 1;
                        first.get_or_insert_with(|| SandwichViolation {
                            trial,
                            pair: (i, j),
                            left,
                            right,
                            points: points.clone(),
                        });
                    }
                }
            }
            (count, first)
        })
        .collect();
    InclusionReport {
        trials,
        violations: found.iter().map(|f| f.0).sum(),
        first: found.into_iter().find_map(|f| f.1),
    }
}

/// Configurations in `[0,1)^d` read as torus and cube points.
pub fn coupled_inclusion(d: usize, n: usize, r: f64, trials: u64, seed: u64, reverse: bool) -> InclusionReport {
    let (torus, cube) = (SpaceDescriptor::torus(d), SpaceDescriptor::cube(d));
    inclusion(n, trials, seed, r, r, move |rng| {
        let t: Vec<TorusPoint> = (0..n).map(|_| TorusPoint::sample(d, rng)).collect();
        let c: Vec<Vec<f64>> = t.iter().map(|p| p.to_reals()).collect();
        let tp: Vec<SpacePoint> = t.into_iter().map(SpacePoint::Torus).collect();
        let cp: Vec<SpacePoint> = c.iter().cloned().map(SpacePoint::Cube).collect();
        let dist = move |i: usize, j: usize| {
            let dt = torus.distance_unchecked(&tp[i], &tp[j]);
            let dc = cube.distance_unchecked(&cp[i], &cp[j]);
            if reverse { (dt, dc) } else { (dc, dt) }
        };
        (c, Box::new(dist))
    })
}

/// Torus edges at `r` against folded cube edges at `factor * r`.
pub fn fold_inclusion(d: usize, n: usize, r: f64, factor: f64, trials: u64, seed: u64) -> InclusionReport {
    let (torus, cube) = (SpaceDescriptor::torus(d), SpaceDescriptor::cube(d));
    inclusion(n, trials, seed, r, factor * r, move |rng| {
        let t: Vec<TorusPoint> = (0..n).map(|_| TorusPoint::sample(d, rng)).collect();
        let c: Vec<Vec<f64>> = t.iter().map(fold_to_cube).collect();
        let tp: Vec<SpacePoint> = t.iter().cloned().map(SpacePoint::Torus).collect();
        let cp: Vec<SpacePoint> = c.iter().cloned().map(SpacePoint::Cube).collect();
        let dist = move |i: usize, j: usize| {
            (torus.distance_unchecked(&tp[i], &tp[j]), cube.distance_unchecked(&cp[i], &cp[j]))
        };
        (t.iter().map(|p| p.to_reals()).collect(), Box::new(dist))
    })
}

#[derive(Debug, Clone, Serialize)]
struct SandwichParams {
    d: usize,
    n: usize,
    r: f64,
    trials: u64,
    seed: u64,
    options: SandwichOptions,
}

/// Pathwise inclusions between cube and torus graphs, and the two
/// inequalities `P_C(r) <= P_T(r) <= P_C(2r)` for connectivity within three
/// combined standard errors.
pub fn sandwich_experiment(d: usize, n: usize, r: f64, trials: u64, seed: u64, options: SandwichOptions) -> Result<RunRecord> {
    let started = Instant::now();
    let mut rec = RunRecord::new("sandwich", &SandwichParams { d, n, r, trials, seed, options })?;
    let coupled = coupled_inclusion(d, n, r, trials, derive_seed(seed, "coupled"), options.reverse);
    rec.check("coupled-inclusion", coupled.violations == 0, coupled.violations as f64, 0.0, "E_cube(r) ⊆ E_torus(r)");
    rec.derive("coupled", &coupled)?;
    let fold = fold_inclusion(d, n, r, options.fold_factor, trials, derive_seed(seed, "fold"));
    rec.check(
        "fold-inclusion",
        fold.violations == 0,
        fold.violations as f64,
        0.0,
        format!("folded E_torus(r) ⊆ E_cube({} r)", options.fold_factor),
    );
    rec.derive("fold", &fold)?;

    let prop = MonotoneProperty::Connected;
    let (torus, cube) = (SpaceDescriptor::torus(d), SpaceDescriptor::cube(d));
    let pc = estimate_probability(cube, n, r, &prop, trials, derive_seed(seed, "cube-r"));
    let pt = estimate_probability(torus, n, r, &prop, trials, derive_seed(seed, "torus-r"));
    let pc2 = estimate_probability(cube, n, 2.0 * r, &prop, trials, derive_seed(seed, "cube-2r"));
    rec.estimate("cube", r, pc);
    rec.estimate("torus", r, pt);
    rec.estimate("cube", 2.0 * r, pc2);
    let s1 = 3.0 * (pc.stderr.powi(2) + pt.stderr.powi(2)).sqrt();
    rec.check("lower", pc.value <= pt.value + s1, pc.value - pt.value, s1, "P_C(r) <= P_T(r) + 3 sigma");
    let s2 = 3.0 * (pt.stderr.powi(2) + pc2.stderr.powi(2)).sqrt();
    rec.check("upper", pt.value <= pc2.value + s2, pt.value - pc2.value, s2, "P_T(r) <= P_C(2r) + 3 sigma");
    Ok(rec.finish(started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgg::estimate_probability;

    #[test]
    fn two_point_edge_probabilities() {
        // Two uniform points: P_torus(edge) = 2r, P_interval(edge) = 2r - r^2.
        let r = 0.2;
        let trials = 40_000;
        let pt = estimate_probability(SpaceDescriptor::torus(1), 2, r, &MonotoneProperty::Edge, trials, 1);
        let pc = estimate_probability(SpaceDescriptor::cube(1), 2, r, &MonotoneProperty::Edge, trials, 2);
        assert!((pt.value - 2.0 * r).abs() < 4.0 * pt.stderr);
        assert!((pc.value - (2.0 * r - r * r)).abs() < 4.0 * pc.stderr);
    }

    #[test]
    fn full_radius_gives_certainty() {
        let rec = sandwich_experiment(2, 6, 2f64.sqrt(), 200, 0, SandwichOptions::default()).unwrap();
        assert!(rec.estimates.iter().all(|e| e.estimate.value == 1.0));
        assert!(rec.passed);
    }

    #[test]
    fn inclusions_hold_and_negative_control_fails() {
        let good = sandwich_experiment(2, 20, 0.2, 500, 4, SandwichOptions::default()).unwrap();
        assert!(good.checks.iter().filter(|c| c.name.ends_with("inclusion")).all(|c| c.passed), "{good:?}");
        let bad = coupled_inclusion(2, 20, 0.2, 500, 4, true);
        assert!(bad.violations > 0);
        let bad = fold_inclusion(2, 20, 0.2, 1.0, 500, 4);
        assert!(bad.violations > 0);
    }
}
