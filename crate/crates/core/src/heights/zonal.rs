use serde::{Deserialize, Serialize};

use super::law::HeightLaw;
use super::quadrature::{gauss_jacobi, Rule, NODES};
use crate::error::{Error, Result};

/// Highest supported degree.
pub const MAX_DEGREE: usize = 16;

/// Orthonormal polynomials `phi_0, ..., phi_D` for `nu_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonalBasis {
    pub m: usize,
    pub degree: usize,
    /// `coefficients[k][j]` is the coefficient of `x^j` in `phi_k`.
    pub coefficients: Vec<Vec<f64>>,
    /// `x phi_k = b[k+1] phi_{k+1} + b[k] phi_{k-1}`, with `b[0] = 0`.
    pub recurrence: Vec<f64>,
}

/// Gram-Schmidt (in Stieltjes form, with reorthogonalization) under the
/// `nu_m` Gauss rule.
pub fn build_zonal_basis(m: usize, degree: usize) -> Result<ZonalBasis> {
    if degree > MAX_DEGREE {
        return Err(Error::usage(format!("degree {degree} above {MAX_DEGREE}")));
    }
    let law = HeightLaw::new(m)?;
    let rule = gauss_jacobi(NODES, law.exponent())?;
    let inner = |a: &[f64], b: &[f64]| -> f64 { rule.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum() };

    let mut values: Vec<Vec<f64>> = vec![vec![1.0; NODES]];
    let mut coefficients = vec![vec![1.0]];
    let mut recurrence = vec![0.0];
    for k in 1..=degree {
        let mut v: Vec<f64> = values[k - 1].iter().zip(&rule.nodes).map(|(p, x)| p * x).collect();
        let mut c = vec![0.0];
        c.extend_from_slice(&coefficients[k - 1]);
        for _ in 0..2 {
            for j in 0..k {
                let proj = inner(&v, &values[j]);
                v.iter_mut().zip(&values[j]).for_each(|(a, b)| *a -= proj * b);
                c.iter_mut().zip(&coefficients[j]).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-200) {
            return Err(Error::Numerical(format!("degree {k} collapsed under quadrature")));
        }
        v.iter_mut().for_each(|a| *a /= norm);
        c.iter_mut().for_each(|a| *a /= norm);
        values.push(v);
        coefficients.push(c);
        recurrence.push(norm);
    }
    Ok(ZonalBasis { m, degree, coefficients, recurrence })
}

impl ZonalBasis {
    /// `phi_0(x), ..., phi_D(x)` by the three-term recurrence.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree + 1);
        out.push(1.0);
        if self.degree >= 1 {
            out.push(x / self.recurrence[1]);
        }
        for k in 1..self.degree {
            let next = (x * out[k] - self.recurrence[k] * out[k - 1]) / self.recurrence[k + 1];
            out.push(next);
        }
        out
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        self.eval_all(x)[k]
    }

    /// `phi_k(x)` from the monomial coefficients.
    pub fn eval_monomial(&self, k: usize, x: f64) -> f64 {
        self.coefficients[k].iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn rule(&self) -> Result<Rule> {
        gauss_jacobi(NODES, HeightLaw::new(self.m)?.exponent())
    }

    /// `int phi_k phi_l d nu_m` for all pairs.
    pub fn gram(&self) -> Result<Vec<Vec<f64>>> {
        let rule = self.rule()?;
        let vals: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| self.eval_all(x)).collect();
        let d = self.degree + 1;
        Ok((0..d)
            .map(|k| (0..d).map(|l| vals.iter().zip(&rule.weights).map(|(v, w)| w * v[k] * v[l]).sum()).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_for_several_m() {
        for m in [2, 3, 4, 7] {
            let b = build_zonal_basis(m, 16).unwrap();
            let g = b.gram().unwrap();
            for (k, row) in g.iter().enumerate() {
                for (l, &v) in row.iter().enumerate() {
                    let target = if k == l { 1.0 } else { 0.0 };
                    assert!((v - target).abs() < 1e-8, "m {m} ({k},{l}) = {v}");
                }
            }
        }
    }

    #[test]
    fn low_degrees() {
        let b = build_zonal_basis(3, 4).unwrap();
        assert_eq!(b.coefficients[0], vec![1.0]);
        assert!(b.coefficients[1][0].abs() < 1e-14);
        // E[x^2] under nu_3 is 1/4, so phi_1 = 2x.
        assert!((b.coefficients[1][1] - 2.0).abs() < 1e-12);
        for x in [-0.9, -0.2, 0.4, 1.0] {
            for k in 0..=4 {
                assert!((b.eval(k, x) - b.eval_monomial(k, x)).abs() < 1e-10);
            }
        }
    }

    fn legendre(k: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if k == 0 {
            return 1.0;
        }
        for j in 1..k {
            let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn m2_is_scaled_legendre() {
        let b = build_zonal_basis(2, 10).unwrap();
        for k in 0..=10 {
            let scale = ((2 * k + 1) as f64).sqrt();
            for x in [-0.95, -0.5, 0.0, 0.3, 0.8] {
                assert!((b.eval(k, x) - scale * legendre(k, x)).abs() < 1e-9, "k {k}");
            }
        }
    }

    #[test]
    fn degree_limit() {
        assert!(build_zonal_basis(2, 17).is_err());
    }
}
