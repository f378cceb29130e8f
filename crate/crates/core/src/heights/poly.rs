//! Exact polynomial calculus on products of spheres.
//!
//! Integrals use the monomial moments of the uniform law on `S^{N-1}`:
//! `E[prod z_i^(2b_i)] = prod (2b_i - 1)!! / prod_{k < |b|} (N + 2k)`, and odd
//! moments vanish.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A polynomial in the `N` coordinates of one point of `S^{N-1}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpherePoly {
    coords: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

fn double_factorial_odd(e: u32) -> f64 {
    // (e - 1)!! for even e
    (1..e).step_by(2).map(|k| k as f64).product()
}

/// `E[prod z^e]` for a uniform point on the sphere in `R^coords`.
pub fn monomial_moment(coords: usize, exps: &[u32]) -> f64 {
    if exps.iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let half: u32 = exps.iter().sum::<u32>() / 2;
    let num: f64 = exps.iter().map(|&e| double_factorial_odd(e)).product();
    let den: f64 = (0..half).map(|k| (coords as f64) + 2.0 * k as f64).product();
    num / den
}

impl SpherePoly {
    pub fn zero(coords: usize) -> Self {
        SpherePoly { coords, terms: BTreeMap::new() }
    }

    pub fn constant(coords: usize, c: f64) -> Self {
        let mut p = Self::zero(coords);
        p.add_term(vec![0; coords], c);
        p
    }

    /// `sum_j coeffs[j] z_c^j`.
    pub fn univariate(coords: usize, c: usize, coeffs: &[f64]) -> Self {
        let mut p = Self::zero(coords);
        for (j, &a) in coeffs.iter().enumerate() {
            let mut e = vec![0; coords];
            e[c] = j as u32;
            p.add_term(e, a);
        }
        p
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(exps).or_insert(0.0);
        *slot += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn mul(&self, other: &SpherePoly) -> SpherePoly {
        let mut out = Self::zero(self.coords);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(z).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.terms.iter().map(|(e, c)| c * monomial_moment(self.coords, e)).sum()
    }

    /// `E[p | z_c = h]` as coefficients of a polynomial in `h`.
    ///
    /// Given `z_c = h`, the other coordinates are `sqrt(1 - h^2) u` with `u`
    /// uniform on the sphere in `R^(N-1)`.
    pub fn condition_on(&self, c: usize) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for (e, coef) in &self.terms {
            let rest: Vec<u32> = e.iter().enumerate().filter(|&(i, _)| i != c).map(|(_, &k)| k).collect();
            let moment = monomial_moment(self.coords - 1, &rest);
            if moment == 0.0 {
                continue;
            }
            let half = rest.iter().sum::<u32>() / 2;
            // h^{e_c} (1 - h^2)^half
            let mut binom = 1.0;
            for j in 0..=half {
                let deg = e[c] as usize + 2 * j as usize;
                if out.len() <= deg {
                    out.resize(deg + 1, 0.0);
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out[deg] += coef * moment * sign * binom;
                binom = binom * (half - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }
}

/// A function on `(S^{N-1})^n`: a sum of products of one-point polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPointFunction {
    pub points: usize,
    pub coords: usize,
    pub terms: Vec<(f64, Vec<SpherePoly>)>,
}

impl MultiPointFunction {
    pub fn zero(points: usize, coords: usize) -> Self {
        MultiPointFunction { points, coords, terms: Vec::new() }
    }

    pub fn constant(points: usize, coords: usize, c: f64) -> Self {
        let mut f = Self::zero(points, coords);
        f.terms.push((c, vec![SpherePoly::constant(coords, 1.0); points]));
        f
    }

    /// `prod_i factors[i](x_i)`; missing factors are 1.
    pub fn product(points: usize, coords: usize, factors: Vec<(usize, SpherePoly)>) -> Self {
        let mut polys = vec![SpherePoly::constant(coords, 1.0); points];
        for (i, p) in factors {
            polys[i] = polys[i].mul(&p);
        }
        MultiPointFunction { points, coords, terms: vec![(1.0, polys)] }
    }

    pub fn scale(mut self, c: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.0 *= c);
        self
    }

    pub fn plus(mut self, other: &MultiPointFunction) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn eval(&self, x: &[Vec<f64>]) -> f64 {
        self.terms.iter().map(|(c, ps)| c * ps.iter().zip(x).map(|(p, z)| p.eval(z)).product::<f64>()).sum()
    }

    pub fn mean(&self) -> f64 {
        self.terms.iter().map(|(c, ps)| c * ps.iter().map(|p| p.mean()).product::<f64>()).sum()
    }

    /// `E[f g]` for independent uniform points.
    pub fn inner(&self, other: &MultiPointFunction) -> f64 {
        let mut acc = 0.0;
        for (a, ps) in &self.terms {
            for (b, qs) in &other.terms {
                acc += a * b * ps.iter().zip(qs).map(|(p, q)| p.mul(q).mean()).product::<f64>();
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).max(0.0)
    }

    /// `f - E f`.
    pub fn centered(&self) -> Self {
        let m = self.mean();
        self.clone().plus(&Self::constant(self.points, self.coords, -m))
    }

    /// Conditional expectation given coordinate `c` of every point.
    pub fn condition_on(&self, c: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, ps)| (*k, ps.iter().map(|p| SpherePoly::univariate(self.coords, c, &p.condition_on(c))).collect()))
            .collect();
        MultiPointFunction { points: self.points, coords: self.coords, terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::spaces::SpaceDescriptor;

    #[test]
    fn moments_on_s2() {
        // E[z^2] = 1/3, E[z^4] = 1/5, E[z1^2 z2^2] = 1/15
        assert!((monomial_moment(3, &[2, 0, 0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((monomial_moment(3, &[4, 0, 0]) - 1.0 / 5.0).abs() < 1e-15);
        assert!((monomial_moment(3, &[2, 2, 0]) - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(monomial_moment(3, &[1, 1, 0]), 0.0);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let space = SpaceDescriptor::sphere(3);
        let mut rng = stream(1, 0);
        let n = 400_000;
        let e = [2u32, 4, 0, 2];
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let z = space.sample(&mut rng).coords();
            let v: f64 = e.iter().zip(&z).map(|(&k, &x)| x.powi(k as i32)).product();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - monomial_moment(4, &e)).abs() < 4.0 * se);
    }

    #[test]
    fn conditioning_on_s2() {
        // On S^2, E[z2^2 | z1 = h] = (1 - h^2)/2.
        let mut p = SpherePoly::zero(3);
        p.add_term(vec![0, 2, 0], 1.0);
        let c = p.condition_on(0);
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[2] + 0.5).abs() < 1e-15);
        // Tower property: E[E[p | z1]] = E[p].
        let mut q = SpherePoly::zero(3);
        q.add_term(vec![2, 2, 2], 3.0);
        q.add_term(vec![1, 0, 2], 1.0);
        let cond = SpherePoly::univariate(3, 0, &q.condition_on(0));
        assert!((cond.mean() - q.mean()).abs() < 1e-15);
    }

    #[test]
    fn multipoint_algebra() {
        let coords = 3;
        let z0 = SpherePoly::univariate(coords, 0, &[0.0, 1.0]);
        let f = MultiPointFunction::product(2, coords, vec![(0, z0.clone()), (1, z0.clone())]);
        assert!(f.mean().abs() < 1e-15);
        assert!((f.norm_sq() - 1.0 / 9.0).abs() < 1e-15);
        let g = f.clone().plus(&MultiPointFunction::constant(2, coords, 2.0));
        assert!((g.mean() - 2.0).abs() < 1e-15);
        assert!(g.centered().mean().abs() < 1e-15);
        let x = vec![vec![0.6, 0.8, 0.0], vec![0.0, 0.0, 1.0]];
        assert!((g.eval(&x) - 2.0).abs() < 1e-15);
        // E[z1 z1' | heights] is itself.
        assert!((f.condition_on(0).norm_sq() - f.norm_sq()).abs() < 1e-15);
        // conditioning on the other coordinate kills it
        assert!(f.condition_on(1).norm_sq() < 1e-30);
    }
}
