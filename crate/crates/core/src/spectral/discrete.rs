//! Finite-model diagnostic: the family acting on `((Z/N)^d)^n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{ExpansionFamily, UnimodularMatrix};
use crate::rgg::UnionFind;
use crate::rng::stream;

/// Largest state space the diagnostic will build.
pub const MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNormReport {
    pub modulus: u64,
    pub d: usize,
    pub n: usize,
    pub states: usize,
    pub orbits: usize,
    /// Norm on mean-zero functions. Every orbit indicator is fixed, so this
    /// is 1 whenever there are at least two orbits.
    pub mean_zero_norm: f64,
    /// Norm on the complement of the orbit indicators, when that is nonzero.
    pub orbit_complement_norm: Option<f64>,
    pub iterations: usize,
}

struct Action {
    states: usize,
    forward: Vec<Vec<u32>>,
    backward: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

fn state_count(modulus: u64, d: usize, n: usize) -> Result<usize> {
    let mut total: u128 = 1;
    for _ in 0..d * n {
        total = total.saturating_mul(modulus as u128);
    }
    if total > MAX_STATES as u128 {
        return Err(Error::SizeLimit(format!("{modulus}^({d}*{n}) states exceed {MAX_STATES}")));
    }
    Ok(total as usize)
}

fn component_table(a: &UnimodularMatrix, modulus: u64) -> Vec<u32> {
    let d = a.dim();
    let size = (modulus as usize).pow(d as u32);
    let m = modulus as i128;
    (0..size)
        .map(|idx| {
            let mut x = vec![0i128; d];
            let mut r = idx;
            for c in x.iter_mut().rev() {
                *c = (r % modulus as usize) as i128;
                r /= modulus as usize;
            }
            let mut out = 0usize;
            for i in 0..d {
                let v: i128 = (0..d).map(|j| a.get(i, j) as i128 * x[j]).sum();
                out = out * modulus as usize + v.rem_euclid(m) as usize;
            }
            out as u32
        })
        .collect()
}

fn build_action(family: &ExpansionFamily, modulus: u64, n: usize) -> Result<Action> {
    if modulus < 2 {
        return Err(Error::usage("modulus must be at least 2"));
    }
    let mats = family
        .torus_matrices()
        .ok_or_else(|| Error::usage("discrete torus diagnostic needs a torus-linear family"))?;
    let d = family.space.dim();
    let states = state_count(modulus, d, n)?;
    let comp = (modulus as usize).pow(d as u32);
    let mut forward = Vec::with_capacity(mats.len());
    for a in &mats {
        let table = component_table(a, modulus);
        let perm: Vec<u32> = (0..states)
            .map(|s| {
                let mut r = s;
                let mut digits = vec![0usize; n];
                for c in digits.iter_mut().rev() {
                    *c = r % comp;
                    r /= comp;
                }
                digits.iter().fold(0usize, |acc, &c| acc * comp + table[c] as usize) as u32
            })
            .collect();
        forward.push(perm);
    }
    let backward = forward
        .iter()
        .map(|p| {
            let mut inv = vec![0u32; states];
            for (s, &t) in p.iter().enumerate() {
                inv[t as usize] = s as u32;
            }
            inv
        })
        .collect();
    Ok(Action { states, forward, backward, weights: family.weights.clone() })
}

impl Action {
    /// `(T f)(x) = sum_A w_A f(A x)`.
    fn apply(&self, f: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (p, &w) in self.forward.iter().zip(&self.weights) {
            for (o, &t) in out.iter_mut().zip(p) {
                *o += w * f[t as usize];
            }
        }
    }

    fn apply_adjoint(&self, f: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (p, &w) in self.backward.iter().zip(&self.weights) {
            for (o, &t) in out.iter_mut().zip(p) {
                *o += w * f[t as usize];
            }
        }
    }

    fn orbits(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.states);
        for p in &self.forward {
            for (s, &t) in p.iter().enumerate() {
                uf.union(s, t as usize);
            }
        }
        (0..self.states).map(|s| uf.find(s)).collect()
    }
}

fn project_out(f: &mut [f64], label: &[usize], sizes: &[f64], sums: &mut [f64]) {
    sums.iter_mut().for_each(|s| *s = 0.0);
    for (v, &l) in f.iter().zip(label) {
        sums[l] += v;
    }
    for (v, &l) in f.iter_mut().zip(label) {
        *v -= sums[l] / sizes[l];
    }
}

/// Power iteration for `||T||` on the complement of the orbit indicators of
/// the family's action on `((Z/N)^d)^n`.
///
/// Reduction mod `N` can create short cycles absent from the infinite model,
/// so this is a diagnostic rather than a bound check.
pub fn discrete_torus_norm(modulus: u64, n: usize, family: &ExpansionFamily, seed: u64) -> Result<DiscreteNormReport> {
    let act = build_action(family, modulus, n)?;
    let roots = act.orbits();
    let mut index = vec![usize::MAX; act.states];
    let mut label = vec![0usize; act.states];
    let mut sizes: Vec<f64> = Vec::new();
    for (s, &r) in roots.iter().enumerate() {
        if index[r] == usize::MAX {
            index[r] = sizes.len();
            sizes.push(0.0);
        }
        label[s] = index[r];
        sizes[index[r]] += 1.0;
    }
    let orbits = sizes.len();
    let mut iterations = 0;
    let complement = if orbits == act.states {
        None
    } else {
        let mut rng = stream(seed, 0);
        let mut x: Vec<f64> = (0..act.states).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut sums = vec![0.0; orbits];
        let mut y = vec![0.0; act.states];
        let mut z = vec![0.0; act.states];
        project_out(&mut x, &label, &sizes, &mut sums);
        let mut estimate = 0.0f64;
        for it in 0..5000 {
            let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm_x);
            act.apply(&x, &mut y);
            let ratio = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            act.apply_adjoint(&y, &mut z);
            project_out(&mut z, &label, &sizes, &mut sums);
            std::mem::swap(&mut x, &mut z);
            iterations = it + 1;
            let done = (ratio - estimate).abs() <= 1e-12 * ratio.max(1e-300);
            estimate = ratio;
            if done || ratio == 0.0 {
                break;
            }
        }
        Some(estimate.min(1.0))
    };
    let mean_zero_norm = if orbits >= 2 { 1.0 } else { complement.unwrap_or(0.0) };
    Ok(DiscreteNormReport {
        modulus,
        d: family.space.dim(),
        n,
        states: act.states,
        orbits,
        mean_zero_norm,
        orbit_complement_norm: complement,
        iterations,
    })
}

/// Reports for each modulus in turn.
pub fn discrete_trend(moduli: &[u64], n: usize, family: &ExpansionFamily, seed: u64) -> Result<Vec<DiscreteNormReport>> {
    moduli.iter().map(|&m| discrete_torus_norm(m, n, family, seed)).collect()
}

/// For `n = 1`: the largest difference between the singular values of `T`
/// on mean-zero point functions and those of its frequency-side matrix on
/// nonzero frequencies of `(Z/N)^d`.
pub fn parseval_discrepancy(modulus: u64, family: &ExpansionFamily) -> Result<f64> {
    use nalgebra::DMatrix;
    let act = build_action(family, modulus, 1)?;
    let s = act.states;
    if s > 4096 {
        return Err(Error::SizeLimit("dense spot check limited to 4096 states".into()));
    }
    let mut point = DMatrix::<f64>::zeros(s, s);
    for (p, &w) in act.forward.iter().zip(&act.weights) {
        for (x, &t) in p.iter().enumerate() {
            point[(x, t as usize)] += w;
        }
    }
    let proj = DMatrix::<f64>::from_fn(s, s, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / s as f64);
    let restricted = &proj * point * &proj;
    let transposes: Vec<UnimodularMatrix> = family.torus_matrices().expect("checked").iter().map(|a| a.transpose()).collect();
    let mut freq = DMatrix::<f64>::zeros(s - 1, s - 1);
    for (at, &w) in transposes.iter().zip(&family.weights) {
        let table = component_table(at, modulus);
        for xi in 1..s {
            // T chi_xi = sum_A w chi_{A^T xi}
            let image = table[xi] as usize;
            freq[(image - 1, xi - 1)] += w;
        }
    }
    let mut a: Vec<f64> = restricted.singular_values().iter().copied().collect();
    let mut b: Vec<f64> = freq.singular_values().iter().copied().collect();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    a.pop();
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
