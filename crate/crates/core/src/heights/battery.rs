use rand::Rng;
use rand_distr::StandardNormal;

use super::poly::{MultiPointFunction, SpherePoly};
use super::zonal::build_zonal_basis;
use crate::error::Result;
use crate::rng::stream;

/// A named mean-zero test function on `(S^m)^n`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: String,
    pub f: MultiPointFunction,
}

/// `phi_k(z_c)` of one point on `S^m`, as a polynomial.
pub fn zonal_factor(m: usize, c: usize, k: usize) -> Result<SpherePoly> {
    let basis = build_zonal_basis(m, k)?;
    Ok(SpherePoly::univariate(m + 1, c, &basis.coefficients[k]))
}

/// Tensor products `prod_i phi_{k_i}(z_{i, c_i})` over points of `(S^m)^n`
/// with total degree in `1..=max_degree`, using coordinates `coords`, plus
/// `random_combos` random linear combinations of them. All are centered.
pub fn zonal_battery(
    m: usize,
    n: usize,
    coords: &[usize],
    max_degree: usize,
    random_combos: usize,
    seed: u64,
) -> Result<Vec<TestFunction>> {
    let basis = build_zonal_basis(m, max_degree)?;
    let factor = |c: usize, k: usize| SpherePoly::univariate(m + 1, c, &basis.coefficients[k]);
    // Each point is either absent or carries (coordinate, degree).
    let mut choices: Vec<Option<(usize, usize)>> = vec![None];
    for &c in coords {
        for k in 1..=max_degree {
            choices.push(Some((c, k)));
        }
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    loop {
        let degree: usize = assignment.iter().filter_map(|&i| choices[i]).map(|(_, k)| k).sum();
        if (1..=max_degree).contains(&degree) {
            let mut factors = Vec::new();
            let mut names = Vec::new();
            for (pt, &i) in assignment.iter().enumerate() {
                if let Some((c, k)) = choices[i] {
                    factors.push((pt, factor(c, k)));
                    names.push(format!("phi{k}(x{}[{}])", pt + 1, c + 1));
                }
            }
            let f = MultiPointFunction::product(n, m + 1, factors).centered();
            out.push(TestFunction { name: names.join("*"), f });
        }
        // next assignment in mixed radix
        let mut p = 0;
        loop {
            if p == n {
                return Ok(with_combinations(out, random_combos, seed));
            }
            assignment[p] += 1;
            if assignment[p] < choices.len() {
                break;
            }
            assignment[p] = 0;
            p += 1;
        }
    }
}

fn with_combinations(mut base: Vec<TestFunction>, count: usize, seed: u64) -> Vec<TestFunction> {
    if base.is_empty() {
        return base;
    }
    let mut rng = stream(seed, 0);
    let singles = base.len();
    for r in 0..count {
        let parts = rng.random_range(2..=5);
        let (points, coords) = (base[0].f.points, base[0].f.coords);
        let mut f = MultiPointFunction::zero(points, coords);
        for _ in 0..parts {
            let j = rng.random_range(0..singles);
            let w: f64 = rng.sample(StandardNormal);
            f = f.plus(&base[j].f.clone().scale(w));
        }
        base.push(TestFunction { name: format!("random-combination-{r}"), f: f.centered() });
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_mean_zero_and_unit_scale() {
        let b = zonal_battery(2, 2, &[0, 1, 2], 3, 5, 1).unwrap();
        assert_eq!(b.len(), 9 + 9 + 27 + 5);
        for t in &b {
            assert!(t.f.mean().abs() < 1e-12, "{}", t.name);
        }
        // single zonal factors have unit norm
        assert!((b[0].f.norm_sq() - 1.0).abs() < 1e-10);
    }
}
