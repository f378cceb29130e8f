//! Frequency-side operators, orbit trees, the tree walk norm and
//! discrete-torus diagnostics.

pub mod discrete;
pub mod frequency;
pub mod kesten;
pub mod orbit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use discrete::{discrete_torus_norm, discrete_trend, parseval_discrepancy, DiscreteNormReport};
pub use frequency::{
    apply_q, contraction_bound_sq, contraction_check, detection_count, frequency_step, FrequencyVector,
    SparseFrequencyFunction,
};
pub use kesten::kesten_tree_norm;
pub use orbit::{orbit_bfs, tree_ball_size, OrbitReport};

use crate::error::Result;
use crate::maps::ExpansionFamily;
use crate::rng::stream;

/// Outcome of a batch of contraction checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionBatch {
    pub generator_hash: String,
    pub d: usize,
    pub depth: usize,
    pub trials: usize,
    pub max_ratio: f64,
    pub bound: f64,
}

/// Runs [`contraction_check`] on `trials` random frequency functions with
/// `n` components, support up to `max_support` and entries up to `max_entry`.
pub fn contraction_battery(
    family: &ExpansionFamily,
    generator_hash: &str,
    n: usize,
    trials: usize,
    max_support: usize,
    max_entry: i64,
    seed: u64,
) -> Result<ContractionBatch> {
    let d = family.space.dim();
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let h = SparseFrequencyFunction::random(d, n, max_support, max_entry, &mut rng);
            contraction_check(family, &h).map(|r| r.ratio)
        })
        .collect::<Result<_>>()?;
    Ok(ContractionBatch {
        generator_hash: generator_hash.to_string(),
        d,
        depth: 1,
        trials,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        bound: contraction_bound_sq(d).sqrt(),
    })
}
