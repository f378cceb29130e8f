use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::frequency::FrequencyVector;
use crate::error::{Error, Result};
use crate::maps::{ExpansionFamily, UnimodularMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub depth: usize,
    pub vertices: usize,
    pub is_tree: bool,
    /// Non-backtracking steps that landed on an already visited frequency.
    pub collisions: usize,
}

/// Breadth-first search of the frequency orbit of `v` under the family's
/// transposed steps, to the given depth, without immediate backtracking.
pub fn orbit_bfs(family: &ExpansionFamily, v: &FrequencyVector, depth: usize) -> Result<OrbitReport> {
    let mats = family
        .torus_matrices()
        .ok_or_else(|| Error::usage("orbit search needs a torus-linear family"))?;
    let steps: Vec<UnimodularMatrix> = mats.iter().map(|a| a.transpose()).collect();
    let mut seen: HashSet<FrequencyVector> = HashSet::new();
    seen.insert(v.clone());
    let mut frontier: Vec<(FrequencyVector, Option<usize>)> = vec![(v.clone(), None)];
    let mut collisions = 0;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for (u, came_by) in &frontier {
            for (i, s) in steps.iter().enumerate() {
                if came_by.is_some_and(|c| family.inverse_index[c] == Some(i)) {
                    continue;
                }
                let w = u.transform(s)?;
                if seen.insert(w.clone()) {
                    next.push((w, Some(i)));
                } else {
                    collisions += 1;
                }
            }
        }
        frontier = next;
    }
    Ok(OrbitReport { depth, vertices: seen.len(), is_tree: collisions == 0, collisions })
}

/// Vertex count of a radius-`t` ball in the 4-regular tree.
pub fn tree_ball_size(t: usize) -> usize {
    2 * 3usize.pow(t as u32) - 1
}
