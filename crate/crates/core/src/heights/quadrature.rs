use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes per axis for every quadrature in this module.
pub const NODES: usize = 256;

/// A quadrature rule for a probability measure on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss rule with `n` nodes for the weight `(1 - x^2)^a`, `a > -1`,
/// normalized to total mass 1 (Golub-Welsch).
pub fn gauss_jacobi(n: usize, a: f64) -> Result<Rule> {
    if a <= -1.0 || n == 0 {
        return Err(Error::usage("Gauss-Jacobi rule needs a > -1 and n >= 1"));
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b2 = if k == 1 {
            1.0 / (3.0 + 2.0 * a)
        } else {
            kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0))
        };
        jacobi[(k - 1, k)] = b2.sqrt();
        jacobi[(k, k - 1)] = b2.sqrt();
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if pairs.iter().any(|p| !(p.1 > 0.0) || !p.0.is_finite()) {
        return Err(Error::Numerical("quadrature weight underflow".into()));
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1 / total).collect() })
}
