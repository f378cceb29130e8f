//! Exact frequency-side action of torus automorphisms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{ExpansionFamily, UnimodularMatrix};

/// A frequency `v = (v_1, ..., v_n)` in `(Z^d)^n`, not all zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyVector {
    d: usize,
    entries: Vec<i64>,
}

impl FrequencyVector {
    pub fn new(components: Vec<Vec<i64>>) -> Result<Self> {
        let d = components.first().map(|c| c.len()).unwrap_or(0);
        if d == 0 || components.iter().any(|c| c.len() != d) {
            return Err(Error::usage("frequency components must be non-empty and of equal length"));
        }
        Self::from_flat(d, components.into_iter().flatten().collect())
    }

    /// `n * d` entries, component after component.
    pub fn from_flat(d: usize, entries: Vec<i64>) -> Result<Self> {
        if d == 0 || entries.is_empty() || !entries.len().is_multiple_of(d) {
            return Err(Error::usage("frequency length must be a positive multiple of d"));
        }
        if entries.iter().all(|&x| x == 0) {
            return Err(Error::usage("the zero frequency is excluded"));
        }
        Ok(FrequencyVector { d, entries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.entries.len() / self.d
    }

    pub fn component(&self, i: usize) -> &[i64] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn components(&self) -> impl Iterator<Item = &[i64]> {
        self.entries.chunks(self.d)
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// Multiplies every component by `m` exactly.
    pub fn transform(&self, m: &UnimodularMatrix) -> Result<Self> {
        if m.dim() != self.d {
            return Err(Error::usage(format!("matrix of size {} on frequencies of dimension {}", m.dim(), self.d)));
        }
        let d = self.d;
        let mut out = vec![0i64; self.entries.len()];
        for (c, o) in self.entries.chunks(d).zip(out.chunks_mut(d)) {
            for (i, slot) in o.iter_mut().enumerate() {
                let mut acc: i64 = 0;
                for (j, &x) in c.iter().enumerate() {
                    acc = m
                        .get(i, j)
                        .checked_mul(x)
                        .and_then(|p| acc.checked_add(p))
                        .ok_or_else(|| Error::Overflow(format!("frequency {:?}", self.entries)))?;
                }
                *slot = acc;
            }
        }
        Ok(FrequencyVector { d, entries: out })
    }
}

/// `(A^T)^-1 v`, the frequency seen by `f . A^-1`.
pub fn frequency_step(a: &UnimodularMatrix, v: &FrequencyVector) -> Result<FrequencyVector> {
    v.transform(&a.inverse().transpose())
}

/// `h` with finite support on nonzero frequencies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseFrequencyFunction {
    support: BTreeMap<FrequencyVector, Complex64>,
}

impl SparseFrequencyFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// `delta_v`.
    pub fn delta(v: FrequencyVector) -> Self {
        let mut h = Self::new();
        h.add(v, Complex64::new(1.0, 0.0));
        h
    }

    pub fn add(&mut self, v: FrequencyVector, amplitude: Complex64) {
        *self.support.entry(v).or_insert(Complex64::new(0.0, 0.0)) += amplitude;
    }

    pub fn get(&self, v: &FrequencyVector) -> Complex64 {
        self.support.get(v).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FrequencyVector, &Complex64)> {
        self.support.iter()
    }

    pub fn norm_sq(&self) -> f64 {
        self.support.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Random `h` with up to `max_support` atoms whose entries are uniform
    /// in `[-max_entry, max_entry]`, with complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, max_support: usize, max_entry: i64, rng: &mut R) -> Self {
        let mut h = Self::new();
        let size = rng.random_range(1..=max_support);
        while h.support_len() < size {
            let entries: Vec<i64> = (0..d * n).map(|_| rng.random_range(-max_entry..=max_entry)).collect();
            if let Ok(v) = FrequencyVector::from_flat(d, entries) {
                let amp = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                h.add(v, amp);
            }
        }
        h
    }
}

/// `Q h`, the exact frequency-side average of the family's composition operators:
/// `Q h(u) = sum_A w_A h((A^T)^-1 u)`, i.e. an atom at `v` is pushed to `A^T v`.
pub fn apply_q(family: &ExpansionFamily, h: &SparseFrequencyFunction) -> Result<SparseFrequencyFunction> {
    let mats = family
        .torus_matrices()
        .ok_or_else(|| Error::usage("frequency operator needs a torus-linear family"))?;
    let transposes: Vec<UnimodularMatrix> = mats.iter().map(|a| a.transpose()).collect();
    let mut out = SparseFrequencyFunction::new();
    for (v, &amp) in h.iter() {
        for (at, &w) in transposes.iter().zip(&family.weights) {
            out.add(v.transform(at)?, amp * w);
        }
    }
    Ok(out)
}

/// The literal contraction bound on the squared ratio: `3/4` for `d = 2`,
/// `1 - 1/(2d)` for `d >= 3`.
pub fn contraction_bound_sq(d: usize) -> f64 {
    if d == 2 {
        0.75
    } else {
        1.0 - 1.0 / (2.0 * d as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionResult {
    pub ratio: f64,
    pub bound: f64,
}

/// `||Q h|| / ||h||`, failing if its square exceeds [`contraction_bound_sq`] by more than `1e-12`.
pub fn contraction_check(family: &ExpansionFamily, h: &SparseFrequencyFunction) -> Result<ContractionResult> {
    let norm_sq = h.norm_sq();
    if norm_sq == 0.0 {
        return Err(Error::usage("contraction ratio of the zero function"));
    }
    let qh = apply_q(family, h)?;
    let ratio_sq = qh.norm_sq() / norm_sq;
    let bound_sq = contraction_bound_sq(family.space.dim());
    let result = ContractionResult { ratio: ratio_sq.sqrt(), bound: bound_sq.sqrt() };
    if ratio_sq > bound_sq + 1e-12 {
        let atoms: Vec<String> = h.iter().take(4).map(|(v, _)| format!("{:?}", v.entries())).collect();
        return Err(Error::Contraction { ratio: result.ratio, bound: result.bound, witness: atoms.join(", ") });
    }
    Ok(result)
}

/// Planes `{p, q}` for which some component of `v` has a nonzero entry in
/// coordinate `p` or `q`.
pub fn detection_count(v: &FrequencyVector, d: usize) -> usize {
    let touched: Vec<bool> = (0..d).map(|c| v.components().any(|comp| comp[c] != 0)).collect();
    crate::maps::family::planes(d).into_iter().filter(|&(p, q)| touched[p] || touched[q]).count()
}

/// Whether every component of `v` vanishes on both coordinates of the plane.
pub fn in_plane_kernel(v: &FrequencyVector, plane: (usize, usize)) -> bool {
    v.components().all(|c| c[plane.0] == 0 && c[plane.1] == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{default_generators, torus_family};
    use crate::rng::stream;

    fn fv(c: &[&[i64]]) -> FrequencyVector {
        FrequencyVector::new(c.iter().map(|x| x.to_vec()).collect()).unwrap()
    }

    #[test]
    fn zero_frequency_rejected() {
        assert!(FrequencyVector::new(vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(FrequencyVector::new(vec![vec![0, 0], vec![0, 1]]).is_ok());
    }

    #[test]
    fn step_identity_and_inverse() {
        let id = UnimodularMatrix::identity(2);
        let v = fv(&[&[3, -4], &[0, 7]]);
        assert_eq!(frequency_step(&id, &v).unwrap(), v);
        let a = default_generators().b.clone();
        let back = frequency_step(&a, &frequency_step(&a.inverse(), &v).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn step_preserves_coordinates_outside_plane() {
        let f = torus_family(3, default_generators()).unwrap();
        let v = fv(&[&[0, 0, 5], &[0, 0, -2]]);
        for m in &f.maps[..4] {
            // maps 0..4 act on the plane {1, 2}
            assert_eq!(frequency_step(m.as_torus_matrix().unwrap(), &v).unwrap(), v);
        }
    }

    #[test]
    fn delta_contracts_to_one_half() {
        let f = torus_family(2, default_generators()).unwrap();
        let h = SparseFrequencyFunction::delta(fv(&[&[1, 0]]));
        let q = apply_q(&f, &h).unwrap();
        assert_eq!(q.support_len(), 4);
        assert!((q.norm() - 0.5).abs() < 1e-15);
        assert!((contraction_check(&f, &h).unwrap().ratio - 0.5).abs() < 1e-15);
    }

    #[test]
    fn support_is_pushed_by_transposes() {
        let f = torus_family(2, default_generators()).unwrap();
        let mut rng = stream(1, 0);
        let h = SparseFrequencyFunction::random(2, 2, 10, 20, &mut rng);
        let q = apply_q(&f, &h).unwrap();
        for (u, _) in q.iter() {
            let hit = h.iter().any(|(v, _)| {
                f.torus_matrices().unwrap().iter().any(|a| &v.transform(&a.transpose()).unwrap() == u)
            });
            assert!(hit);
        }
        assert!(q.norm() <= h.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn detection_counts() {
        assert_eq!(detection_count(&fv(&[&[1, 0, 0]]), 3), 2);
        assert_eq!(detection_count(&fv(&[&[1, 2, 3]]), 3), 3);
        assert_eq!(detection_count(&fv(&[&[0, 0, 0, 1]]), 4), 3);
    }

    #[test]
    fn plane_kernel_is_fixed_by_plane_average() {
        let f = torus_family(3, default_generators()).unwrap();
        let plane_family = ExpansionFamily::uniform(f.space, f.maps[..4].to_vec(), (0..4).map(|i| Some(i ^ 1)).collect(), f.distortion, None, "plane");
        let mut h = SparseFrequencyFunction::new();
        h.add(fv(&[&[0, 0, 1], &[0, 0, 3]]), Complex64::new(1.0, 2.0));
        h.add(fv(&[&[0, 0, -4], &[0, 0, 0]]), Complex64::new(-0.5, 0.0));
        assert!(h.iter().all(|(v, _)| in_plane_kernel(v, (0, 1))));
        assert_eq!(apply_q(&plane_family, &h).unwrap(), h);
    }

    #[test]
    fn overflow_is_an_error() {
        let f = torus_family(2, default_generators()).unwrap();
        let h = SparseFrequencyFunction::delta(fv(&[&[i64::MAX / 2, 1]]));
        assert!(matches!(apply_q(&f, &h), Err(Error::Overflow(_))));
    }
}
