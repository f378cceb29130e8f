//! Norm of the simple random walk on a truncated 4-regular tree.

use crate::error::{Error, Result};

/// Off-diagonal entries of the radial reduction of the walk on the ball of
/// radius `depth`, in level coordinates scaled by the square roots of the
/// level sizes: `1/2` between the root and level 1, `sqrt(3)/4` after that.
/// Mass leaving the ball is dropped.
fn radial_couplings(depth: usize) -> Vec<f64> {
    (0..depth).map(|l| if l == 0 { 0.5 } else { 3f64.sqrt() / 4.0 }).collect()
}

fn tridiagonal_apply(off: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let mut acc = 0.0;
        if i > 0 {
            acc += off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += off[i] * x[i + 1];
        }
        out[i] = acc;
    }
}

/// Power-iteration estimate of the walk operator's norm on the ball of
/// radius `depth`. The estimate is `||M x|| / ||x||` for the final iterate and
/// so never exceeds the true norm, which is below `sqrt(3)/2`.
pub fn kesten_tree_norm(depth: usize) -> Result<f64> {
    if depth < 5 {
        return Err(Error::usage("tree depth must be at least 5"));
    }
    let off = radial_couplings(depth);
    Ok(power_norm(depth + 1, |x, out| tridiagonal_apply(&off, x, out)))
}

/// `||A x|| / ||x||` after iterating `x <- A x` to convergence from the all-ones vector.
fn power_norm(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> f64 {
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..200_000 {
        apply(&x, &mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (norm - estimate).abs() <= 1e-15 * norm;
        estimate = norm;
        x.iter_mut().zip(&y).for_each(|(a, b)| *a = b / norm);
        if converged {
            break;
        }
    }
    estimate
}

/// The same estimate computed on the explicit tree, for small depths.
pub fn kesten_tree_norm_explicit(depth: usize) -> f64 {
    // Vertices in BFS order; parent[v] and the level sizes give adjacency.
    let mut parent = vec![usize::MAX];
    let mut level_start = vec![0usize];
    for l in 0..depth {
        let start = level_start[l];
        let end = parent.len();
        level_start.push(end);
        for v in start..end {
            let children = if l == 0 { 4 } else { 3 };
            for _ in 0..children {
                parent.push(v);
            }
        }
    }
    let n = parent.len();
    power_norm(n, |x, out| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for v in 1..n {
            let p = parent[v];
            out[v] += 0.25 * x[p];
            out[p] += 0.25 * x[v];
        }
    })
}
