//! Sphere maps: rotations, latitude-dependent twists, the twist-and-rotate
//! surrogate family on `S^2`, and suspension to higher spheres.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::{ExpansionFamily, Word};
use super::{Bijection, SpaceMap};
use crate::error::{Error, Result};
use crate::spaces::{SpaceDescriptor, SpaceKind, SpacePoint};

/// Rotation of `S^m` by `angle` in the `(i, j)` coordinate plane.
pub fn plane_rotation(m: usize, i: usize, j: usize, angle: f64) -> SpaceMap {
    let n = m + 1;
    let mut r: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect();
    let (s, c) = angle.sin_cos();
    r[i][i] = c;
    r[i][j] = -s;
    r[j][i] = s;
    r[j][j] = c;
    SpaceMap::Rotation(r)
}

/// Lipschitz constant of a twist with the given rate: the largest singular
/// value of the shear `[[1, 0], [c, 1]]`, `(c + sqrt(c^2 + 4)) / 2`.
pub fn twist_distortion(rate: f64) -> f64 {
    let c = rate.abs();
    (c + (c * c + 4.0).sqrt()) / 2.0
}

/// Parameters of the twist-and-rotate surrogate family on `S^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    /// Twist rate about the third coordinate axis.
    pub rate: f64,
    /// Rotation angle in the `(2, 3)` coordinate plane.
    pub first_angle: f64,
    /// Rotation angle in the `(1, 3)` coordinate plane.
    pub second_angle: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams { rate: 1.0, first_angle: 1.0, second_angle: 2.0 }
    }
}

/// The surrogate family on `S^2`: `R_1 . tau`, `R_2 . tau` and their
/// inverses, where `tau` rotates the `(1, 2)` plane by `rate * z_3`.
///
/// Every member preserves area exactly; the gap is not claimed.
pub fn surrogate_sphere_family(params: SurrogateParams) -> ExpansionFamily {
    let twist = SpaceMap::Twist { dim: 2, i: 0, j: 1, axis: 2, rate: params.rate };
    let phi1 = SpaceMap::Compose(vec![twist.clone(), plane_rotation(2, 1, 2, params.first_angle)]);
    let phi2 = SpaceMap::Compose(vec![twist, plane_rotation(2, 0, 2, params.second_angle)]);
    let maps = vec![phi1.clone(), phi1.inverse(), phi2.clone(), phi2.inverse()];
    ExpansionFamily::uniform(
        SpaceDescriptor::sphere(2),
        maps,
        (0..4).map(|i| Some(i ^ 1)).collect(),
        twist_distortion(params.rate),
        None,
        format!("surrogate-s2/{}/{}/{}", params.rate, params.first_angle, params.second_angle),
    )
}

/// The suspension of a family on `S^{m-1}` to `S^m`, with height coordinate 0.
pub fn suspend_once(inner: &ExpansionFamily) -> Result<ExpansionFamily> {
    if inner.space.kind() != SpaceKind::Sphere {
        return Err(Error::usage(format!("cannot suspend a family on {}", inner.space)));
    }
    let m = inner.space.dim() + 1;
    Ok(ExpansionFamily {
        space: SpaceDescriptor::sphere(m),
        maps: inner.maps.iter().map(|f| SpaceMap::Suspended(Box::new(f.clone()))).collect(),
        weights: inner.weights.clone(),
        inverse_index: inner.inverse_index.clone(),
        distortion: inner.distortion,
        rho: None,
        label: format!("susp({})", inner.label),
    })
}

/// The suspension conjugated by the swap of coordinates 0 and 1, so that
/// coordinate 1 plays the role of height.
pub fn rotated_copy(suspended: &ExpansionFamily) -> ExpansionFamily {
    let psi = Bijection::CoordinateSwap { space: suspended.space, i: 0, j: 1 };
    ExpansionFamily {
        maps: suspended
            .maps
            .iter()
            .map(|f| SpaceMap::Conjugated { psi: psi.clone(), inner: Box::new(f.clone()) })
            .collect(),
        label: format!("swap({})", suspended.label),
        ..suspended.clone()
    }
}

/// The composed family realizing `Q_2 Q_1` on `S^m`, where `Q_i = P_i^k`.
///
/// A member is a pair of words `(w1, w2)` of length `k` over the two legs.
/// As an operator `T f(x) = E f(w1(w2(x)))`, so `w2` is applied to points
/// first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedFamily {
    pub space: SpaceDescriptor,
    /// Suspended inner maps; height is coordinate 0.
    pub first_leg: ExpansionFamily,
    /// Swap-conjugated copy; height is coordinate 1.
    pub second_leg: ExpansionFamily,
    pub k: usize,
    /// `K_inner^(2k)`.
    pub distortion: f64,
}

impl ComposedFamily {
    /// `K_inner^k`.
    pub fn leg_distortion(&self) -> f64 {
        self.first_leg.distortion.powi(self.k as i32)
    }

    /// Number of members, `|inner|^(2k)`, saturating.
    pub fn member_count(&self) -> u128 {
        (self.first_leg.len() as u128).saturating_pow(self.k as u32).saturating_mul(
            (self.second_leg.len() as u128).saturating_pow(self.k as u32),
        )
    }

    /// A member drawn with probability equal to its weight.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> (Word, Word) {
        (self.first_leg.sample_word(self.k, rng), self.second_leg.sample_word(self.k, rng))
    }

    pub fn apply_member(&self, member: &(Word, Word), x: &SpacePoint) -> SpacePoint {
        let (w1, w2) = member;
        let y = w2.letters.iter().fold(x.clone(), |p, &l| self.second_leg.maps[l].apply_unchecked(&p));
        w1.letters.iter().fold(y, |p, &l| self.first_leg.maps[l].apply_unchecked(&p))
    }

    pub fn member_map(&self, member: &(Word, Word)) -> SpaceMap {
        let (w1, w2) = member;
        let mut maps: Vec<SpaceMap> = w2.letters.iter().map(|&l| self.second_leg.maps[l].clone()).collect();
        maps.extend(w1.letters.iter().map(|&l| self.first_leg.maps[l].clone()));
        if maps.is_empty() {
            SpaceMap::Identity(self.space)
        } else {
            SpaceMap::Compose(maps)
        }
    }
}

/// Suspends `inner` (on `S^{m-1}`, `m >= 3`) and composes `k`-step walks on
/// the two height legs.
pub fn suspend_family(inner: &ExpansionFamily, k: usize) -> Result<ComposedFamily> {
    if k == 0 {
        return Err(Error::usage("suspension needs k >= 1"));
    }
    if inner.space.kind() != SpaceKind::Sphere || inner.space.dim() + 1 < 3 {
        return Err(Error::usage(format!("suspension needs an inner family on S^(m-1) with m >= 3, got {}", inner.space)));
    }
    let first_leg = suspend_once(inner)?;
    let second_leg = rotated_copy(&first_leg);
    Ok(ComposedFamily {
        space: first_leg.space,
        distortion: inner.distortion.powi(2 * k as i32),
        first_leg,
        second_leg,
        k,
    })
}
