//! The supported metric probability spaces.
//!
//! Torus coordinates are stored in fixed point: a coordinate is an element of
//! the dyadic circle `2^-53 Z / Z`, held as the high 53 bits of a `u64`. Integer
//! matrices act on the torus by wrapping integer arithmetic, so linear maps,
//! negation and the pillowcase involution are exact, and every coordinate is
//! exactly representable as an `f64` in `[0, 1)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of significant fractional bits in a torus coordinate.
pub const FRAC_BITS: u32 = 53;
const LOW_BITS: u32 = 64 - FRAC_BITS;
const TWO_POW_M64: f64 = 1.0 / 18_446_744_073_709_551_616.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    Torus,
    Sphere,
    Cube,
    Pillowcase,
    DisjointIntervals,
}

/// A supported metric probability space. Construct through [`SpaceDescriptor::new`]
/// or by parsing a config string such as `"torus:3"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    dim: usize,
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind, dim: usize) -> Result<Self> {
        let ok = match kind {
            SpaceKind::Torus | SpaceKind::Cube | SpaceKind::Sphere => dim >= 1,
            SpaceKind::Pillowcase => dim == 2,
            SpaceKind::DisjointIntervals => dim == 1,
        };
        if !ok {
            return Err(Error::usage(format!("unsupported space {kind:?} of dimension {dim}")));
        }
        Ok(SpaceDescriptor { kind, dim })
    }

    pub fn torus(d: usize) -> Self {
        Self::new(SpaceKind::Torus, d).expect("torus dimension must be positive")
    }

    pub fn sphere(m: usize) -> Self {
        Self::new(SpaceKind::Sphere, m).expect("sphere dimension must be positive")
    }

    pub fn cube(d: usize) -> Self {
        Self::new(SpaceKind::Cube, d).expect("cube dimension must be positive")
    }

    pub fn pillowcase() -> Self {
        SpaceDescriptor { kind: SpaceKind::Pillowcase, dim: 2 }
    }

    pub fn intervals() -> Self {
        SpaceDescriptor { kind: SpaceKind::DisjointIntervals, dim: 1 }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Intrinsic dimension: `d` for tori and cubes, `m` for `S^m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored coordinates of a point (`m + 1` for `S^m`).
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Sphere => self.dim + 1,
            _ => self.dim,
        }
    }

    pub fn diameter(&self) -> f64 {
        let d = self.dim as f64;
        match self.kind {
            SpaceKind::Torus => d.sqrt() / 2.0,
            SpaceKind::Cube => d.sqrt(),
            SpaceKind::Sphere => PI,
            // (0,0) and (1/2,1/2) are both fixed by the involution.
            SpaceKind::Pillowcase => std::f64::consts::FRAC_1_SQRT_2,
            SpaceKind::DisjointIntervals => 3.0,
        }
    }

    /// Draws one point from the space's normalized measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpacePoint {
        match self.kind {
            SpaceKind::Torus => SpacePoint::Torus(TorusPoint::sample(self.dim, rng)),
            SpaceKind::Cube => SpacePoint::Cube((0..self.dim).map(|_| rng.random::<f64>()).collect()),
            SpaceKind::Sphere => SpacePoint::Sphere(sample_sphere(self.dim, rng)),
            SpaceKind::Pillowcase => {
                let t = TorusPoint::sample(2, rng);
                SpacePoint::Pillowcase(canonicalize_pillowcase(&t))
            }
            SpaceKind::DisjointIntervals => {
                let v: f64 = rng.random::<f64>() * 2.0;
                SpacePoint::Interval(if v < 1.0 { v } else { v + 1.0 })
            }
        }
    }

    pub fn contains(&self, p: &SpacePoint) -> bool {
        match (self.kind, p) {
            (SpaceKind::Torus, SpacePoint::Torus(t)) => t.dim() == self.dim,
            (SpaceKind::Sphere, SpacePoint::Sphere(z)) => z.len() == self.dim + 1,
            (SpaceKind::Cube, SpacePoint::Cube(c)) => c.len() == self.dim,
            (SpaceKind::Pillowcase, SpacePoint::Pillowcase(_)) => true,
            (SpaceKind::DisjointIntervals, SpacePoint::Interval(_)) => true,
            _ => false,
        }
    }

    /// Metric distance. Fails when either point does not belong to the space.
    pub fn distance(&self, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
        for p in [x, y] {
            if !self.contains(p) {
                return Err(Error::SpaceMismatch { expected: self.to_string(), got: p.kind_name().into() });
            }
        }
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance without membership checks; callers guarantee both points belong
    /// to this space. Used in the O(n^2) graph-building loop.
    #[inline]
    pub fn distance_unchecked(&self, x: &SpacePoint, y: &SpacePoint) -> f64 {
        match (x, y) {
            (SpacePoint::Torus(a), SpacePoint::Torus(b)) => torus_distance(&a.0, &b.0),
            (SpacePoint::Sphere(a), SpacePoint::Sphere(b)) => sphere_distance(a, b),
            (SpacePoint::Cube(a), SpacePoint::Cube(b)) => euclidean(a, b),
            (SpacePoint::Pillowcase(a), SpacePoint::Pillowcase(b)) => pillowcase_distance(a, b),
            (SpacePoint::Interval(a), SpacePoint::Interval(b)) => (a - b).abs(),
            _ => f64::NAN,
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Torus => write!(f, "torus:{}", self.dim),
            SpaceKind::Sphere => write!(f, "sphere:{}", self.dim),
            SpaceKind::Cube => write!(f, "cube:{}", self.dim),
            SpaceKind::Pillowcase => write!(f, "pillowcase"),
            SpaceKind::DisjointIntervals => write!(f, "intervals"),
        }
    }
}

impl FromStr for SpaceDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let dim = |arg: Option<&str>| -> Result<usize> {
            arg.ok_or_else(|| Error::usage(format!("space `{s}` needs a dimension")))?
                .parse::<usize>()
                .map_err(|_| Error::usage(format!("bad dimension in `{s}`")))
        };
        match name {
            "torus" => Self::new(SpaceKind::Torus, dim(arg)?),
            "sphere" => Self::new(SpaceKind::Sphere, dim(arg)?),
            "cube" => Self::new(SpaceKind::Cube, dim(arg)?),
            "pillowcase" if arg.is_none() => Ok(Self::pillowcase()),
            "intervals" if arg.is_none() => Ok(Self::intervals()),
            _ => Err(Error::usage(format!("unknown space `{s}`"))),
        }
    }
}

impl Serialize for SpaceDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SpaceDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point on `T^d` in fixed point (see module docs).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusPoint(pub(crate) Vec<u64>);

impl TorusPoint {
    pub fn sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        TorusPoint((0..d).map(|_| rng.random::<u64>() & !((1u64 << LOW_BITS) - 1)).collect())
    }

    /// Reduces real coordinates mod 1. Exact `1.0` maps to `0.0`.
    pub fn from_reals(x: &[f64]) -> Self {
        TorusPoint(x.iter().map(|&v| real_to_fixed(v)).collect())
    }

    pub fn from_raw(raw: Vec<u64>) -> Self {
        TorusPoint(raw.into_iter().map(|k| k & !((1u64 << LOW_BITS) - 1)).collect())
    }

    pub fn raw(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinates as reals in `[0, 1)`; exact.
    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().map(|&k| fixed_to_real(k)).collect()
    }

    /// `-x mod 1`, exact.
    pub fn negate(&self) -> Self {
        TorusPoint(self.0.iter().map(|k| k.wrapping_neg()).collect())
    }

    /// Applies an integer matrix (row-major, `d x d`) modulo 1.
    pub fn apply_integer_matrix(&self, rows: &[Vec<i64>]) -> Self {
        let out = rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.0)
                    .fold(0u64, |acc, (&a, &x)| acc.wrapping_add((a as u64).wrapping_mul(x)))
            })
            .collect();
        TorusPoint(out)
    }
}

/// `x mod 1` in `[0, 1)`, with exact `1.0` (and anything that rounds there) sent to `0.0`.
pub fn reduce_mod1(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn real_to_fixed(x: f64) -> u64 {
    let r = reduce_mod1(x);
    let j = (r * (1u64 << FRAC_BITS) as f64).floor() as u64;
    (j & ((1u64 << FRAC_BITS) - 1)) << LOW_BITS
}

#[inline]
fn fixed_to_real(k: u64) -> f64 {
    (k >> LOW_BITS) as f64 * (1.0 / (1u64 << FRAC_BITS) as f64)
}

/// Distance from `k` to `0` on the circle, as a real in `[0, 1/2]`.
#[inline]
fn circle_to_zero(k: u64) -> f64 {
    k.min(k.wrapping_neg()) as f64 * TWO_POW_M64
}

#[inline]
fn torus_distance(a: &[u64], b: &[u64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let c = circle_to_zero(x.wrapping_sub(y));
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn sphere_distance(a: &[f64], b: &[f64]) -> f64 {
    2.0 * (0.5 * euclidean(a, b)).min(1.0).asin()
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn pillowcase_distance(a: &[u64; 2], b: &[u64; 2]) -> f64 {
    let nb = [b[0].wrapping_neg(), b[1].wrapping_neg()];
    torus_distance(a, b).min(torus_distance(a, &nb))
}

/// A point of one of the supported spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpacePoint {
    Torus(TorusPoint),
    /// `m + 1` coordinates of unit Euclidean norm.
    Sphere(Vec<f64>),
    Cube(Vec<f64>),
    /// Canonical lift in fixed point; see [`canonicalize_pillowcase`].
    Pillowcase([u64; 2]),
    /// A real in `[0,1] ∪ [2,3]`.
    Interval(f64),
}

impl SpacePoint {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SpacePoint::Torus(_) => "torus point",
            SpacePoint::Sphere(_) => "sphere point",
            SpacePoint::Cube(_) => "cube point",
            SpacePoint::Pillowcase(_) => "pillowcase point",
            SpacePoint::Interval(_) => "interval point",
        }
    }

    pub fn as_torus(&self) -> Option<&TorusPoint> {
        match self {
            SpacePoint::Torus(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_sphere(&self) -> Option<&[f64]> {
        match self {
            SpacePoint::Sphere(z) => Some(z),
            _ => None,
        }
    }

    /// Real coordinates of the point (pillowcase: the canonical lift).
    pub fn coords(&self) -> Vec<f64> {
        match self {
            SpacePoint::Torus(t) => t.to_reals(),
            SpacePoint::Sphere(z) | SpacePoint::Cube(z) => z.clone(),
            SpacePoint::Pillowcase(p) => p.iter().map(|&k| fixed_to_real(k)).collect(),
            SpacePoint::Interval(x) => vec![*x],
        }
    }
}

fn sample_sphere<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..=m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Rescales a nonzero vector to unit norm.
pub fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// The folding map `T^d -> [0,1]^d`, `x_j -> 2 dist(x_j, 0)`.
pub fn fold_to_cube(x: &TorusPoint) -> Vec<f64> {
    x.0.iter().map(|&k| 2.0 * circle_to_zero(k)).collect()
}

/// Canonical representative of the orbit `{x, -x}` in `T^2`: the
/// lexicographically smaller of the two fixed-point lifts.
pub fn canonicalize_pillowcase(x: &TorusPoint) -> [u64; 2] {
    assert_eq!(x.dim(), 2, "pillowcase points live on T^2");
    let a = [x.0[0], x.0[1]];
    let b = [a[0].wrapping_neg(), a[1].wrapping_neg()];
    if b < a {
        b
    } else {
        a
    }
}

/// The torus lift of a pillowcase point.
pub fn pillowcase_lift(p: &[u64; 2]) -> TorusPoint {
    TorusPoint(p.to_vec())
}
