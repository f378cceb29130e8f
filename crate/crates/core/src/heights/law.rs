use statrs::distribution::{Beta, Continuous, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// The law `nu_m` of one coordinate of a uniform point on `S^m`, with density
/// proportional to `(1 - x^2)^((m - 2)/2)` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightLaw {
    m: usize,
}

impl HeightLaw {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::usage("height laws are defined for m >= 2"));
        }
        Ok(HeightLaw { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Exponent `(m - 2)/2` of the weight `(1 - x^2)^a`.
    pub fn exponent(&self) -> f64 {
        (self.m as f64 - 2.0) / 2.0
    }

    /// `(X + 1)/2` is `Beta(m/2, m/2)`.
    pub fn beta(&self) -> Beta {
        let p = self.m as f64 / 2.0;
        Beta::new(p, p).expect("positive beta parameters")
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::usage(format!("height {x} outside [-1, 1]")));
        }
        Ok(0.5 * self.beta().pdf((x + 1.0) / 2.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.beta().cdf(((x + 1.0) / 2.0).clamp(0.0, 1.0))
    }

    /// `Z_m = int (1 - x^2)^a dx = B(1/2, a + 1)`.
    pub fn normalizer(&self) -> f64 {
        let a = self.exponent();
        (ln_gamma(0.5) + ln_gamma(a + 1.0) - ln_gamma(a + 1.5)).exp()
    }
}

/// Density of `nu_m` at `x`.
pub fn height_density(m: usize, x: f64) -> Result<f64> {
    HeightLaw::new(m)?.density(x)
}
