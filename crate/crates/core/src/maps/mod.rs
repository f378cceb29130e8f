//! Measure-preserving bounded-distortion maps and the expansion families
//! built from them.

pub mod audit;
pub mod family;
pub mod generators;
pub mod matrix;
pub mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{canonicalize_pillowcase, normalize, pillowcase_lift, SpaceDescriptor, SpaceKind, SpacePoint};

pub use audit::{audit_distortion, audit_measure_preservation, DistortionReport, MeasureReport, Partition};
pub use family::{apply_word, pillowcase_family, torus_family, transfer_family, ExpansionFamily, Word};
pub use generators::{certify_generators, default_generators, search_generators, GeneratorSet};
pub use matrix::UnimodularMatrix;
pub use sphere::{suspend_family, surrogate_sphere_family, twist_distortion, ComposedFamily};

/// A map of one of the supported spaces onto itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceMap {
    Identity(SpaceDescriptor),
    /// `x -> A x mod 1` on `T^d`.
    TorusLinear(UnimodularMatrix),
    /// A `2 x 2` torus map descended to `T^2 / {x ~ -x}`.
    PillowcaseLinear(UnimodularMatrix),
    /// An orthogonal matrix acting on `S^m`, rows of length `m + 1`.
    Rotation(Vec<Vec<f64>>),
    /// Rotates the `(i, j)` coordinate plane by `rate * z[axis]`.
    Twist { dim: usize, i: usize, j: usize, axis: usize, rate: f64 },
    /// `(h, cos(theta) u) -> (h, cos(theta) phi(u))` with height coordinate 0
    /// and `phi` acting on `S^{m-1}`.
    Suspended(Box<SpaceMap>),
    /// `psi . inner . psi^-1`.
    Conjugated { psi: Bijection, inner: Box<SpaceMap> },
    /// Applies the listed maps in order, first element first.
    Compose(Vec<SpaceMap>),
}

/// A measure-preserving bijection used to move a family between spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bijection {
    Identity(SpaceDescriptor),
    /// Exchanges coordinates `i` and `j` (an isometry of tori, cubes and spheres).
    CoordinateSwap { space: SpaceDescriptor, i: usize, j: usize },
    TorusLinear(UnimodularMatrix),
    Rotation(Vec<Vec<f64>>),
}

impl Bijection {
    pub fn space(&self) -> SpaceDescriptor {
        match self {
            Bijection::Identity(s) | Bijection::CoordinateSwap { space: s, .. } => *s,
            Bijection::TorusLinear(a) => SpaceDescriptor::torus(a.dim()),
            Bijection::Rotation(r) => SpaceDescriptor::sphere(r.len() - 1),
        }
    }

    pub fn apply(&self, x: &SpacePoint) -> SpacePoint {
        match self {
            Bijection::Identity(_) => x.clone(),
            Bijection::CoordinateSwap { i, j, .. } => swap_coords(x, *i, *j),
            Bijection::TorusLinear(a) => SpaceMap::TorusLinear(a.clone()).apply_unchecked(x),
            Bijection::Rotation(r) => SpaceMap::Rotation(r.clone()).apply_unchecked(x),
        }
    }

    pub fn apply_inverse(&self, x: &SpacePoint) -> SpacePoint {
        match self {
            Bijection::Identity(_) => x.clone(),
            Bijection::CoordinateSwap { i, j, .. } => swap_coords(x, *i, *j),
            Bijection::TorusLinear(a) => SpaceMap::TorusLinear(a.inverse()).apply_unchecked(x),
            Bijection::Rotation(r) => SpaceMap::Rotation(transpose(r)).apply_unchecked(x),
        }
    }
}

fn swap_coords(x: &SpacePoint, i: usize, j: usize) -> SpacePoint {
    let mut y = x.clone();
    match &mut y {
        SpacePoint::Torus(t) => t.0.swap(i, j),
        SpacePoint::Sphere(z) | SpacePoint::Cube(z) => z.swap(i, j),
        SpacePoint::Pillowcase(p) => {
            p.swap(i, j);
            *p = canonicalize_pillowcase(&pillowcase_lift(p));
        }
        SpacePoint::Interval(_) => {}
    }
    y
}

pub(crate) fn transpose(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = r.len();
    (0..n).map(|i| (0..n).map(|j| r[j][i]).collect()).collect()
}

impl SpaceMap {
    /// The space the map acts on.
    pub fn domain(&self) -> SpaceDescriptor {
        match self {
            SpaceMap::Identity(s) => *s,
            SpaceMap::TorusLinear(a) => SpaceDescriptor::torus(a.dim()),
            SpaceMap::PillowcaseLinear(_) => SpaceDescriptor::pillowcase(),
            SpaceMap::Rotation(r) => SpaceDescriptor::sphere(r.len() - 1),
            SpaceMap::Twist { dim, .. } => SpaceDescriptor::sphere(*dim),
            SpaceMap::Suspended(inner) => SpaceDescriptor::sphere(inner.domain().dim() + 1),
            SpaceMap::Conjugated { psi, .. } => psi.space(),
            SpaceMap::Compose(maps) => maps.first().map(|m| m.domain()).expect("non-empty composition"),
        }
    }

    /// Applies the map after checking the point belongs to its domain.
    pub fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        let space = self.domain();
        if !space.contains(x) {
            return Err(Error::SpaceMismatch { expected: space.to_string(), got: x.kind_name().into() });
        }
        Ok(self.apply_unchecked(x))
    }

    pub fn apply_unchecked(&self, x: &SpacePoint) -> SpacePoint {
        match (self, x) {
            (SpaceMap::Identity(_), _) => x.clone(),
            (SpaceMap::TorusLinear(a), SpacePoint::Torus(t)) => SpacePoint::Torus(t.apply_integer_matrix(&a.rows())),
            (SpaceMap::PillowcaseLinear(a), SpacePoint::Pillowcase(p)) => {
                let image = pillowcase_lift(p).apply_integer_matrix(&a.rows());
                SpacePoint::Pillowcase(canonicalize_pillowcase(&image))
            }
            (SpaceMap::Rotation(r), SpacePoint::Sphere(z)) => {
                let mut out: Vec<f64> = r.iter().map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum()).collect();
                normalize(&mut out);
                SpacePoint::Sphere(out)
            }
            (SpaceMap::Twist { i, j, axis, rate, .. }, SpacePoint::Sphere(z)) => {
                let (s, c) = (rate * z[*axis]).sin_cos();
                let mut out = z.clone();
                out[*i] = c * z[*i] - s * z[*j];
                out[*j] = s * z[*i] + c * z[*j];
                normalize(&mut out);
                SpacePoint::Sphere(out)
            }
            (SpaceMap::Suspended(inner), SpacePoint::Sphere(z)) => SpacePoint::Sphere(suspend_apply(inner, z)),
            (SpaceMap::Conjugated { psi, inner }, _) => psi.apply(&inner.apply_unchecked(&psi.apply_inverse(x))),
            (SpaceMap::Compose(maps), _) => maps.iter().fold(x.clone(), |p, m| m.apply_unchecked(&p)),
            (map, point) => panic!("map on {} applied to {}", map.domain(), point.kind_name()),
        }
    }

    pub fn inverse(&self) -> SpaceMap {
        match self {
            SpaceMap::Identity(s) => SpaceMap::Identity(*s),
            SpaceMap::TorusLinear(a) => SpaceMap::TorusLinear(a.inverse()),
            SpaceMap::PillowcaseLinear(a) => SpaceMap::PillowcaseLinear(a.inverse()),
            SpaceMap::Rotation(r) => SpaceMap::Rotation(transpose(r)),
            SpaceMap::Twist { dim, i, j, axis, rate } => {
                SpaceMap::Twist { dim: *dim, i: *i, j: *j, axis: *axis, rate: -rate }
            }
            SpaceMap::Suspended(inner) => SpaceMap::Suspended(Box::new(inner.inverse())),
            SpaceMap::Conjugated { psi, inner } => {
                SpaceMap::Conjugated { psi: psi.clone(), inner: Box::new(inner.inverse()) }
            }
            SpaceMap::Compose(maps) => SpaceMap::Compose(maps.iter().rev().map(|m| m.inverse()).collect()),
        }
    }

    /// A bound on the Lipschitz constant of the map and of its inverse.
    pub fn lipschitz_bound(&self) -> f64 {
        match self {
            SpaceMap::Identity(_) | SpaceMap::Rotation(_) => 1.0,
            SpaceMap::TorusLinear(a) | SpaceMap::PillowcaseLinear(a) => a.op_norm().max(a.inverse().op_norm()),
            SpaceMap::Twist { rate, .. } => twist_distortion(*rate),
            SpaceMap::Suspended(inner) | SpaceMap::Conjugated { inner, .. } => inner.lipschitz_bound(),
            SpaceMap::Compose(maps) => maps.iter().map(|m| m.lipschitz_bound()).product(),
        }
    }

    /// The integer matrix of a torus-linear map.
    pub fn as_torus_matrix(&self) -> Option<&UnimodularMatrix> {
        match self {
            SpaceMap::TorusLinear(a) => Some(a),
            _ => None,
        }
    }
}

fn suspend_apply(inner: &SpaceMap, z: &[f64]) -> Vec<f64> {
    let h = z[0];
    let rest = &z[1..];
    let radius = rest.iter().map(|x| x * x).sum::<f64>().sqrt();
    if radius == 0.0 {
        return z.to_vec();
    }
    let u: Vec<f64> = rest.iter().map(|x| x / radius).collect();
    let image = match inner.apply_unchecked(&SpacePoint::Sphere(u)) {
        SpacePoint::Sphere(v) => v,
        _ => unreachable!("inner map of a suspension acts on a sphere"),
    };
    let mut out = Vec::with_capacity(z.len());
    out.push(h);
    out.extend(image.iter().map(|x| radius * x));
    out
}

/// Applies a map, checking that it acts on `x`'s space.
pub fn apply_map(map: &SpaceMap, x: &SpacePoint) -> Result<SpacePoint> {
    map.apply(x)
}

/// Perturbs `x` by a random displacement of roughly `scale`, staying in `space`.
pub fn perturb<R: rand::Rng + ?Sized>(space: SpaceDescriptor, x: &SpacePoint, scale: f64, rng: &mut R) -> SpacePoint {
    use crate::spaces::TorusPoint;
    use rand_distr::StandardNormal;
    let mut noise = |len: usize| -> Vec<f64> { (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect() };
    match (space.kind(), x) {
        (SpaceKind::Torus, SpacePoint::Torus(t)) => {
            let v: Vec<f64> = t.to_reals().iter().zip(noise(t.dim())).map(|(a, b)| a + b).collect();
            SpacePoint::Torus(TorusPoint::from_reals(&v))
        }
        (SpaceKind::Sphere, SpacePoint::Sphere(z)) => {
            let mut v: Vec<f64> = z.iter().zip(noise(z.len())).map(|(a, b)| a + b).collect();
            normalize(&mut v);
            SpacePoint::Sphere(v)
        }
        (SpaceKind::Cube, SpacePoint::Cube(z)) => {
            SpacePoint::Cube(z.iter().zip(noise(z.len())).map(|(a, b)| (a + b).clamp(0.0, 1.0)).collect())
        }
        (SpaceKind::Pillowcase, SpacePoint::Pillowcase(p)) => {
            let lift = pillowcase_lift(p).to_reals();
            let v: Vec<f64> = lift.iter().zip(noise(2)).map(|(a, b)| a + b).collect();
            SpacePoint::Pillowcase(canonicalize_pillowcase(&TorusPoint::from_reals(&v)))
        }
        (SpaceKind::DisjointIntervals, SpacePoint::Interval(t)) => {
            let (lo, hi) = if *t <= 1.0 { (0.0, 1.0) } else { (2.0, 3.0) };
            SpacePoint::Interval((t + noise(1)[0]).clamp(lo, hi))
        }
        _ => panic!("point {} is not in {space}", x.kind_name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::spaces::TorusPoint;

    #[test]
    fn identity_matrix_fixes_points() {
        let mut rng = stream(1, 0);
        let id = SpaceMap::TorusLinear(UnimodularMatrix::identity(3));
        for _ in 0..100 {
            let x = SpaceDescriptor::torus(3).sample(&mut rng);
            assert_eq!(id.apply(&x).unwrap(), x);
        }
    }

    #[test]
    fn mismatched_space_is_rejected() {
        let id = SpaceMap::TorusLinear(UnimodularMatrix::identity(2));
        let x = SpacePoint::Sphere(vec![1.0, 0.0, 0.0]);
        assert!(matches!(id.apply(&x), Err(Error::SpaceMismatch { .. })));
        let x3 = SpacePoint::Torus(TorusPoint::from_reals(&[0.1, 0.2, 0.3]));
        assert!(id.apply(&x3).is_err());
    }

    #[test]
    fn torus_map_and_inverse_cancel_exactly() {
        let a = UnimodularMatrix::new(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let f = SpaceMap::TorusLinear(a);
        let mut rng = stream(2, 0);
        for _ in 0..1000 {
            let x = SpaceDescriptor::torus(2).sample(&mut rng);
            assert_eq!(f.inverse().apply_unchecked(&f.apply_unchecked(&x)), x);
        }
    }

    #[test]
    fn suspension_fixes_poles_and_heights() {
        let inner = SpaceMap::Twist { dim: 2, i: 0, j: 1, axis: 2, rate: 1.0 };
        let s = SpaceMap::Suspended(Box::new(SpaceMap::Compose(vec![
            inner,
            sphere::plane_rotation(2, 1, 2, 0.7),
        ])));
        for pole in [1.0, -1.0] {
            let p = SpacePoint::Sphere(vec![pole, 0.0, 0.0, 0.0]);
            assert_eq!(s.apply(&p).unwrap(), p);
        }
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            let x = SpaceDescriptor::sphere(3).sample(&mut rng);
            let y = s.apply(&x).unwrap();
            assert!((x.coords()[0] - y.coords()[0]).abs() <= 1e-12);
            let norm: f64 = y.coords().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_by_swap_moves_the_fixed_coordinate() {
        let inner = SpaceMap::Suspended(Box::new(sphere::plane_rotation(2, 0, 1, 0.9)));
        let psi = Bijection::CoordinateSwap { space: SpaceDescriptor::sphere(3), i: 0, j: 1 };
        let c = SpaceMap::Conjugated { psi, inner: Box::new(inner) };
        let mut rng = stream(4, 0);
        for _ in 0..100 {
            let x = SpaceDescriptor::sphere(3).sample(&mut rng);
            let y = c.apply(&x).unwrap();
            assert!((x.coords()[1] - y.coords()[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn inverses_undo_sphere_maps() {
        let f = SpaceMap::Compose(vec![
            SpaceMap::Twist { dim: 2, i: 0, j: 1, axis: 2, rate: 1.3 },
            sphere::plane_rotation(2, 0, 2, 1.1),
        ]);
        let g = f.inverse();
        let mut rng = stream(5, 0);
        for _ in 0..1000 {
            let x = SpaceDescriptor::sphere(2).sample(&mut rng);
            let back = g.apply_unchecked(&f.apply_unchecked(&x));
            assert!(SpaceDescriptor::sphere(2).distance(&x, &back).unwrap() < 1e-7);
        }
    }
}
