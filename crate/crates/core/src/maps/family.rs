use rand::Rng;
use serde::{Deserialize, Serialize};

use super::audit::{audit_measure_preservation, audit_pushforward, require_measure, sample_pair, Partition};
use super::generators::GeneratorSet;
use super::matrix::UnimodularMatrix;
use super::{Bijection, SpaceMap};
use crate::error::{Error, Result};
use crate::rgg::Configuration;
use crate::rng::stream;
use crate::spaces::SpaceDescriptor;

/// A finite weighted family of measure-preserving maps with a declared
/// distortion bound and, when known, a claimed spectral gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFamily {
    pub space: SpaceDescriptor,
    pub maps: Vec<SpaceMap>,
    pub weights: Vec<f64>,
    /// Index of each map's inverse within the family, if present.
    pub inverse_index: Vec<Option<usize>>,
    pub distortion: f64,
    pub rho: Option<f64>,
    pub label: String,
}

impl ExpansionFamily {
    /// A uniformly weighted family.
    pub fn uniform(
        space: SpaceDescriptor,
        maps: Vec<SpaceMap>,
        inverse_index: Vec<Option<usize>>,
        distortion: f64,
        rho: Option<f64>,
        label: impl Into<String>,
    ) -> Self {
        let w = 1.0 / maps.len() as f64;
        ExpansionFamily { space, weights: vec![w; maps.len()], maps, inverse_index, distortion, rho, label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Draws a map index according to the weights.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.maps.len() - 1
    }

    /// A word of `t` independently drawn letters.
    pub fn sample_word<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Word {
        Word::new((0..t).map(|_| self.sample_index(rng)).collect(), self)
    }

    /// The integer matrices of a torus-linear family.
    pub fn torus_matrices(&self) -> Option<Vec<&UnimodularMatrix>> {
        self.maps.iter().map(|m| m.as_torus_matrix()).collect()
    }

    /// Audits every member (and its inverse) for measure preservation and
    /// for the declared distortion bound.
    pub fn audit(&self, samples: u64, pairs: u64, seed: u64) -> Result<()> {
        let partition = Partition::standard(self.space);
        for (i, m) in self.maps.iter().enumerate() {
            for (j, f) in [m.clone(), m.inverse()].iter().enumerate() {
                let s = crate::rng::derive_seed(seed, &format!("measure/{i}/{j}"));
                require_measure(&audit_measure_preservation(f, &partition, samples, s), &format!("map {i}"))?;
            }
            let rep = super::audit::audit_distortion(m, self.distortion, pairs, 1e-6, crate::rng::derive_seed(seed, &format!("lip/{i}")));
            if !rep.passed {
                return Err(Error::Audit(format!(
                    "map {i}: sampled ratios [{:.6}, {:.6}] exceed declared K = {:.6}",
                    rep.min_ratio, rep.max_ratio, self.distortion
                )));
            }
        }
        Ok(())
    }
}

/// A sequence of family indices, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<usize>,
    pub reduced: bool,
}

impl Word {
    pub fn empty() -> Self {
        Word { letters: Vec::new(), reduced: true }
    }

    pub fn new(letters: Vec<usize>, family: &ExpansionFamily) -> Self {
        let reduced = letters.windows(2).all(|w| family.inverse_index[w[0]] != Some(w[1]));
        Word { letters, reduced }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The inverse word, when every letter's inverse is in the family.
    pub fn inverse(&self, family: &ExpansionFamily) -> Option<Word> {
        let letters: Option<Vec<usize>> = self.letters.iter().rev().map(|&l| family.inverse_index[l]).collect();
        Some(Word::new(letters?, family))
    }

    /// The composed map.
    pub fn to_map(&self, family: &ExpansionFamily) -> SpaceMap {
        if self.letters.is_empty() {
            return SpaceMap::Identity(family.space);
        }
        SpaceMap::Compose(self.letters.iter().map(|&l| family.maps[l].clone()).collect())
    }
}

/// Applies the word's maps, first letter first, to every point.
pub fn apply_word(word: &Word, family: &ExpansionFamily, config: &Configuration) -> Result<Configuration> {
    if config.space() != family.space {
        return Err(Error::SpaceMismatch { expected: family.space.to_string(), got: config.space().to_string() });
    }
    if let Some(&bad) = word.letters.iter().find(|&&l| l >= family.len()) {
        return Err(Error::usage(format!("letter {bad} out of range for a family of {}", family.len())));
    }
    let points = config
        .points()
        .iter()
        .map(|p| word.letters.iter().fold(p.clone(), |x, &l| family.maps[l].apply_unchecked(&x)))
        .collect();
    Configuration::new(config.space(), points)
}

/// Planes `{p, q}` (0-based, `p < q`) of `d` coordinates, in lexicographic order.
pub fn planes(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|p| (p + 1..d).map(move |q| (p, q))).collect()
}

/// The gap `1 - sqrt(1 - 1/(2d))` of the plane-embedded torus family.
pub fn torus_gap(d: usize) -> f64 {
    1.0 - (1.0 - 1.0 / (2.0 * d as f64)).sqrt()
}

/// Uniform family of `s(e)` for every plane `e` of `T^d` and `s` in
/// `{a, a^-1, b, b^-1}`. Map `4 * plane + letter` has inverse `... ^ 1`.
pub fn torus_family(d: usize, gens: &GeneratorSet) -> Result<ExpansionFamily> {
    if d < 2 {
        return Err(Error::usage("torus families need d >= 2"));
    }
    gens.ensure_usable()?;
    let letters = gens.letters();
    let mut maps = Vec::new();
    for (p, q) in planes(d) {
        for s in &letters {
            maps.push(SpaceMap::TorusLinear(UnimodularMatrix::embed_in_plane(s, p, q, d)?));
        }
    }
    let inverse_index = (0..maps.len()).map(|i| Some(i ^ 1)).collect();
    Ok(ExpansionFamily::uniform(
        SpaceDescriptor::torus(d),
        maps,
        inverse_index,
        gens.distortion(),
        Some(torus_gap(d)),
        format!("torus:{d}/{}", &gens.hash()[..12]),
    ))
}

/// The four `d = 2` maps descended to the pillowcase.
pub fn pillowcase_family(gens: &GeneratorSet) -> Result<ExpansionFamily> {
    gens.ensure_usable()?;
    let maps = gens.letters().into_iter().map(SpaceMap::PillowcaseLinear).collect();
    Ok(ExpansionFamily::uniform(
        SpaceDescriptor::pillowcase(),
        maps,
        (0..4).map(|i| Some(i ^ 1)).collect(),
        gens.distortion(),
        Some(torus_gap(2)),
        format!("pillowcase/{}", &gens.hash()[..12]),
    ))
}

/// Sample sizes for auditing a transfer bijection.
#[derive(Debug, Clone, Copy)]
pub struct TransferAudit {
    pub samples: u64,
    pub pairs: u64,
    pub seed: u64,
}

impl Default for TransferAudit {
    fn default() -> Self {
        TransferAudit { samples: 200_000, pairs: 100_000, seed: 0 }
    }
}

/// Conjugates every map by `psi`, after checking on sampled pairs that
/// `a d(x, y) <= d(psi x, psi y) <= b d(x, y)` and that `psi` preserves measure.
/// The distortion becomes `(b / a) K`; the gap is unchanged.
pub fn transfer_family(
    family: &ExpansionFamily,
    psi: &Bijection,
    a: f64,
    b: f64,
    audit: TransferAudit,
) -> Result<ExpansionFamily> {
    if !(a > 0.0 && a <= b) {
        return Err(Error::usage(format!("need 0 < a <= b, got a = {a}, b = {b}")));
    }
    let space = psi.space();
    if space != family.space {
        return Err(Error::SpaceMismatch { expected: family.space.to_string(), got: space.to_string() });
    }
    if !matches!(psi, Bijection::Identity(_)) {
        let rel = 1e-9;
        let mut rng = stream(audit.seed, 0);
        for i in 0..audit.pairs {
            let (x, y) = sample_pair(space, i % 2 == 0, &mut rng);
            let d = space.distance_unchecked(&x, &y);
            let e = space.distance_unchecked(&psi.apply(&x), &psi.apply(&y));
            if e < a * d * (1.0 - rel) || e > b * d * (1.0 + rel) {
                return Err(Error::Audit(format!(
                    "bijection distorts a pair by {:.6}, outside [{a}, {b}]",
                    e / d
                )));
            }
        }
        let report = audit_pushforward(space, |x| psi.apply(x), &Partition::standard(space), audit.samples, audit.seed ^ 1);
        require_measure(&report, "transfer bijection")?;
    }
    let maps = family
        .maps
        .iter()
        .map(|m| match psi {
            Bijection::Identity(_) => m.clone(),
            _ => SpaceMap::Conjugated { psi: psi.clone(), inner: Box::new(m.clone()) },
        })
        .collect();
    Ok(ExpansionFamily {
        space,
        maps,
        weights: family.weights.clone(),
        inverse_index: family.inverse_index.clone(),
        distortion: (b / a) * family.distortion,
        rho: family.rho,
        label: format!("{}~", family.label),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::generators::default_generators;
    use crate::spaces::{canonicalize_pillowcase, SpacePoint, TorusPoint};

    #[test]
    fn family_sizes() {
        let g = default_generators();
        let f2 = torus_family(2, g).unwrap();
        assert_eq!(f2.len(), 4);
        assert!(f2.weights.iter().all(|&w| w == 0.25));
        assert_eq!(torus_family(3, g).unwrap().len(), 12);
        assert_eq!(torus_family(4, g).unwrap().len(), 24);
        assert!((f2.rho.unwrap() - (1.0 - 0.75f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn inverse_indices_pair_up() {
        let f = torus_family(3, default_generators()).unwrap();
        for (i, m) in f.maps.iter().enumerate() {
            let inv = &f.maps[f.inverse_index[i].unwrap()];
            let prod = m.as_torus_matrix().unwrap().checked_mul(inv.as_torus_matrix().unwrap()).unwrap();
            assert!(prod.is_identity());
        }
    }

    #[test]
    fn word_and_inverse_restore_configuration() {
        let f = torus_family(2, default_generators()).unwrap();
        let mut rng = stream(7, 0);
        let config = Configuration::sample(f.space, 20, &mut rng);
        let w = f.sample_word(6, &mut rng);
        let back = apply_word(&w.inverse(&f).unwrap(), &f, &apply_word(&w, &f, &config).unwrap()).unwrap();
        assert_eq!(back, config);
        assert_eq!(apply_word(&Word::empty(), &f, &config).unwrap(), config);
    }

    #[test]
    fn reduced_flag() {
        let f = torus_family(2, default_generators()).unwrap();
        assert!(Word::new(vec![0, 2, 0], &f).reduced);
        assert!(!Word::new(vec![0, 1], &f).reduced);
    }

    #[test]
    fn word_distances_scale_by_at_most_k_power() {
        let f = torus_family(2, default_generators()).unwrap();
        let mut rng = stream(8, 0);
        for t in 0..4 {
            let config = Configuration::sample(f.space, 30, &mut rng);
            let w = f.sample_word(t, &mut rng);
            let image = apply_word(&w, &f, &config).unwrap();
            let kt = f.distortion.powi(t as i32);
            for (d0, d1) in config.pair_distances().iter().zip(image.pair_distances()) {
                assert!(d1 <= kt * d0 * (1.0 + 1e-12) + 1e-15);
                assert!(d1 * kt * (1.0 + 1e-12) + 1e-15 >= *d0);
            }
        }
    }

    #[test]
    fn pillowcase_square_commutes() {
        let g = default_generators();
        let torus = torus_family(2, g).unwrap();
        let pill = pillowcase_family(g).unwrap();
        assert_eq!(pill.distortion, torus.distortion);
        assert_eq!(pill.rho, torus.rho);
        let mut rng = stream(9, 0);
        for _ in 0..100_000 {
            let x = TorusPoint::sample(2, &mut rng);
            for (tm, pm) in torus.maps.iter().zip(&pill.maps) {
                let down = pm.apply_unchecked(&SpacePoint::Pillowcase(canonicalize_pillowcase(&x)));
                let SpacePoint::Torus(tx) = tm.apply_unchecked(&SpacePoint::Torus(x.clone())) else { unreachable!() };
                assert_eq!(down, SpacePoint::Pillowcase(canonicalize_pillowcase(&tx)));
                let SpacePoint::Torus(tnx) = tm.apply_unchecked(&SpacePoint::Torus(x.negate())) else { unreachable!() };
                assert_eq!(tnx, tx.negate());
            }
        }
    }

    #[test]
    fn transfers_compose_factors() {
        let f = torus_family(2, default_generators()).unwrap();
        let id = transfer_family(&f, &Bijection::Identity(f.space), 1.0, 1.0, TransferAudit::default()).unwrap();
        assert_eq!(id.maps, f.maps);
        assert_eq!(id.distortion, f.distortion);
        let swap = Bijection::CoordinateSwap { space: f.space, i: 0, j: 1 };
        let s = transfer_family(&f, &swap, 1.0, 1.0, TransferAudit::default()).unwrap();
        assert_eq!(s.distortion, f.distortion);
        let a = UnimodularMatrix::new(vec![vec![1, 1], vec![0, 1]]).unwrap();
        let (lo, hi) = (1.0 / a.inverse().op_norm(), a.op_norm());
        let audit = TransferAudit { samples: 100_000, pairs: 20_000, seed: 4 };
        let once = transfer_family(&s, &Bijection::TorusLinear(a.clone()), lo, hi, audit).unwrap();
        let twice = transfer_family(&once, &Bijection::TorusLinear(a.clone()), lo, hi, audit).unwrap();
        assert!((twice.distortion - f.distortion * (hi / lo).powi(2)).abs() < 1e-9);
        assert!(matches!(
            transfer_family(&f, &Bijection::TorusLinear(a), 1.0, 1.0, audit),
            Err(Error::Audit(_))
        ));
    }

    #[test]
    fn transferred_maps_are_conjugates() {
        let f = torus_family(2, default_generators()).unwrap();
        let a = UnimodularMatrix::new(vec![vec![1, 1], vec![0, 1]]).unwrap();
        let psi = Bijection::TorusLinear(a.clone());
        let t = transfer_family(&f, &psi, 1.0 / a.inverse().op_norm(), a.op_norm(), TransferAudit::default()).unwrap();
        let mut rng = stream(10, 0);
        for _ in 0..1000 {
            let x = f.space.sample(&mut rng);
            let direct = a.checked_mul(f.maps[2].as_torus_matrix().unwrap()).unwrap().checked_mul(&a.inverse()).unwrap();
            assert_eq!(t.maps[2].apply_unchecked(&x), SpaceMap::TorusLinear(direct).apply_unchecked(&x));
        }
    }
}
