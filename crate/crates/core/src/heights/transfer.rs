use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{gauss_jacobi, NODES};
use super::zonal::build_zonal_basis;
use crate::error::{Error, Result};
use crate::rng::{stream, BLOCK};
use crate::spaces::SpaceDescriptor;

/// `M[k][l] = E[phi_k(X) phi_l(Y)]` for two perpendicular coordinates `X, Y`
/// of a uniform point on `S^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m: usize,
    pub degree: usize,
    pub entries: Vec<Vec<f64>>,
    /// Per-entry standard errors (Monte Carlo only).
    pub stderr: Option<Vec<Vec<f64>>>,
    /// `"quadrature:<nodes>"` or `"monte-carlo:<samples>"`.
    pub method: String,
}

/// Exact-to-rounding transfer matrix: `X ~ nu_m`, and given `X = x`,
/// `Y = sqrt(1 - x^2) W` with `W ~ nu_{m-1}` (the arcsine law when `m = 2`).
pub fn transfer_matrix_quadrature(m: usize, degree: usize) -> Result<TransferMatrix> {
    let basis = build_zonal_basis(m, degree)?;
    let outer = gauss_jacobi(NODES, (m as f64 - 2.0) / 2.0)?;
    let inner = gauss_jacobi(NODES, (m as f64 - 3.0) / 2.0)?;
    let d = degree + 1;
    let mut entries = vec![vec![0.0; d]; d];
    for (&x, &wx) in outer.nodes.iter().zip(&outer.weights) {
        let px = basis.eval_all(x);
        let s = (1.0 - x * x).max(0.0).sqrt();
        let mut py = vec![0.0; d];
        for (&w, &ww) in inner.nodes.iter().zip(&inner.weights) {
            let v = basis.eval_all(s * w);
            py.iter_mut().zip(&v).for_each(|(a, b)| *a += ww * b);
        }
        for k in 0..d {
            for l in 0..d {
                entries[k][l] += wx * px[k] * py[l];
            }
        }
    }
    Ok(TransferMatrix { m, degree, entries, stderr: None, method: format!("quadrature:{NODES}") })
}

/// Monte Carlo transfer matrix from uniform points on `S^m`, `X = z_1`, `Y = z_2`.
pub fn transfer_matrix_monte_carlo(m: usize, degree: usize, samples: u64, seed: u64) -> Result<TransferMatrix> {
    if samples < 2 {
        return Err(Error::usage("need at least two samples"));
    }
    let basis = build_zonal_basis(m, degree)?;
    let space = SpaceDescriptor::sphere(m);
    let d = degree + 1;
    let blocks = samples.div_ceil(BLOCK as u64);
    let sums: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = stream(seed, blk);
            let len = (samples - blk * BLOCK as u64).min(BLOCK as u64);
            let mut s1 = vec![0.0; d * d];
            let mut s2 = vec![0.0; d * d];
            for _ in 0..len {
                let z = space.sample(&mut rng).coords();
                let (px, py) = (basis.eval_all(z[0]), basis.eval_all(z[1]));
                for k in 0..d {
                    for l in 0..d {
                        let v = px[k] * py[l];
                        s1[k * d + l] += v;
                        s2[k * d + l] += v * v;
                    }
                }
            }
            (s1, s2)
        })
        .collect();
    let mut s1 = vec![0.0; d * d];
    let mut s2 = vec![0.0; d * d];
    for (a, b) in &sums {
        s1.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        s2.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    let nf = samples as f64;
    let entries: Vec<Vec<f64>> = (0..d).map(|k| (0..d).map(|l| s1[k * d + l] / nf).collect()).collect();
    let stderr = (0..d)
        .map(|k| {
            (0..d)
                .map(|l| {
                    let mean = entries[k][l];
                    let var = (s2[k * d + l] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
                    (var / nf).sqrt()
                })
                .collect()
        })
        .collect();
    Ok(TransferMatrix { m, degree, entries, stderr: Some(stderr), method: format!("monte-carlo:{samples}") })
}

impl TransferMatrix {
    /// Largest singular value of the block on degrees `1..=D`.
    pub fn top_mean_zero_singular_value(&self) -> f64 {
        let d = self.degree;
        if d == 0 {
            return 0.0;
        }
        DMatrix::from_fn(d, d, |i, j| self.entries[i + 1][j + 1]).singular_values().max()
    }

    /// Diagonal entries `M[k][k]`, the per-degree scalars.
    pub fn degree_scalars(&self) -> Vec<f64> {
        (0..=self.degree).map(|k| self.entries[k][k]).collect()
    }
}

/// `c_m` estimated as the top mean-zero singular value of the quadrature
/// transfer matrix at degree `D`.
pub fn max_correlation(m: usize, degree: usize) -> Result<f64> {
    if degree < 2 {
        return Err(Error::usage("maximal correlation needs degree >= 2"));
    }
    Ok(transfer_matrix_quadrature(m, degree)?.top_mean_zero_singular_value())
}

/// Normalized Gegenbauer value `C_k^lambda(0) / C_k^lambda(1)` with
/// `lambda = (m - 1)/2`: the scalar by which conditioning on a perpendicular
/// coordinate acts on degree `k`.
pub fn gegenbauer_scalar(m: usize, k: usize) -> f64 {
    let lambda = (m as f64 - 1.0) / 2.0;
    let c = |x: f64| -> f64 {
        let (mut c0, mut c1) = (1.0, 2.0 * lambda * x);
        if k == 0 {
            return 1.0;
        }
        for n in 1..k {
            let nf = n as f64;
            let c2 = (2.0 * x * (nf + lambda) * c1 - (nf + 2.0 * lambda - 1.0) * c0) / (nf + 1.0);
            c0 = c1;
            c1 = c2;
        }
        c1
    };
    c(0.0) / c(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_of_quadrature_matrix() {
        for m in [2, 3, 4] {
            let t = transfer_matrix_quadrature(m, 8).unwrap();
            assert!((t.entries[0][0] - 1.0).abs() < 1e-12);
            for k in 0..=8 {
                for l in 0..=8 {
                    if k != l {
                        assert!(t.entries[k][l].abs() < 1e-10, "m {m} ({k},{l})");
                    }
                }
                assert!((t.entries[k][k] - gegenbauer_scalar(m, k)).abs() < 1e-10, "m {m} k {k}");
            }
        }
    }

    #[test]
    fn max_correlation_is_one_over_m() {
        for m in [2, 3, 4, 5] {
            let c = max_correlation(m, 8).unwrap();
            assert!((c - 1.0 / m as f64).abs() < 1e-9, "m {m}: {c}");
        }
        let mut prev = 0.0;
        for d in 2..=12 {
            let c = max_correlation(3, d).unwrap();
            assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn dirichlet_moment_value() {
        // On S^2, E[z1^2 z2^2] = 1/15 and Var(z1^2) = 4/45, so the degree-2
        // correlation is (1/15 - 1/9) / (4/45) = -1/2.
        let corr: f64 = (1.0 / 15.0 - 1.0 / 9.0) / (4.0 / 45.0);
        assert!((corr + 0.5).abs() < 1e-12);
        let t = transfer_matrix_quadrature(2, 8).unwrap();
        assert!((t.entries[2][2] - corr).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let q = transfer_matrix_quadrature(3, 4).unwrap();
        let mc = transfer_matrix_monte_carlo(3, 4, 200_000, 5).unwrap();
        let se = mc.stderr.as_ref().unwrap();
        for k in 0..=4 {
            for l in 0..=4 {
                let tol = 4.0 * se[k][l] + 1e-12;
                assert!((q.entries[k][l] - mc.entries[k][l]).abs() <= tol, "({k},{l})");
            }
        }
        assert!(mc.entries[0][1].abs() <= 3.0 * se[0][1]);
    }
}
