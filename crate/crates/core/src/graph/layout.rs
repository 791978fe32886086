//! Force-directed 2-D layout in the spirit of the continuous
//! attraction/repulsion algorithms used for social graphs: attraction along
//! edges grows with distance, repulsion is degree-weighted, gravity pulls
//! toward the origin, and a cooling step cap keeps every coordinate finite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FriendshipGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub iterations: usize,
    /// Repulsion strength multiplier.
    pub scaling: f64,
    /// Pull toward the origin.
    pub gravity: f64,
    pub seed: u64,
    /// Logarithmic attraction variant.
    #[serde(default)]
    pub lin_log: bool,
    /// Node radius for overlap-avoiding repulsion; off by default.
    #[serde(default)]
    pub prevent_overlap: Option<f64>,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            iterations: 100,
            scaling: 2.0,
            gravity: 1.0,
            seed: 0,
            lin_log: false,
            prevent_overlap: None,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("layout needs at least one iteration"));
        }
        if !(self.scaling > 0.0) {
            return Err(Error::config("layout scaling must be positive"));
        }
        if !(self.gravity >= 0.0) {
            return Err(Error::config("layout gravity must be non-negative"));
        }
        Ok(())
    }
}

const MIN_DIST: f64 = 1e-9;

/// Run the force model for `iterations` steps from seeded random positions.
/// Deterministic for a fixed seed; errors if any coordinate leaves the
/// finite range (unreachable for sane parameters thanks to the step cap).
pub fn layout_force(graph: &FriendshipGraph, params: &LayoutParams) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let mut pos: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mass: Vec<f64> = (0..n).map(|i| (graph.degree(i) + 1) as f64).collect();

    let mut forces: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    for step in 0..params.iterations {
        // degree-weighted pairwise repulsion, accumulated per node so the
        // sum order is fixed regardless of thread scheduling
        forces
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, f)| {
                let (xi, yi) = pos[i];
                let mut fx = 0.0;
                let mut fy = 0.0;
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let dx = xi - pos[j].0;
                    let dy = yi - pos[j].1;
                    let dist = (dx * dx + dy * dy).sqrt().max(MIN_DIST);
                    let strength = match params.prevent_overlap {
                        Some(size) => {
                            let gap = dist - 2.0 * size;
                            if gap > MIN_DIST {
                                params.scaling * mass[i] * mass[j] / gap
                            } else {
                                100.0 * params.scaling * mass[i] * mass[j]
                            }
                        }
                        None => params.scaling * mass[i] * mass[j] / dist,
                    };
                    fx += strength * dx / dist;
                    fy += strength * dy / dist;
                }
                // gravity toward the origin
                let norm = (xi * xi + yi * yi).sqrt();
                if norm > MIN_DIST && params.gravity > 0.0 {
                    let g = params.gravity * mass[i];
                    fx -= g * xi / norm;
                    fy -= g * yi / norm;
                }
                *f = (fx, fy);
            });

        // attraction along edges, proportional to distance
        for &(a, b) in graph.edges() {
            let dx = pos[b].0 - pos[a].0;
            let dy = pos[b].1 - pos[a].1;
            let dist = (dx * dx + dy * dy).sqrt().max(MIN_DIST);
            let pull = if params.lin_log {
                dist.ln_1p() / dist
            } else {
                1.0
            };
            let fx = pull * dx;
            let fy = pull * dy;
            forces[a].0 += fx;
            forces[a].1 += fy;
            forces[b].0 -= fx;
            forces[b].1 -= fy;
        }

        // cooled, capped displacement
        let temp = 0.5 * (1.0 - step as f64 / params.iterations as f64) + 0.02;
        for i in 0..n {
            let (fx, fy) = forces[i];
            let norm = (fx * fx + fy * fy).sqrt();
            if norm > MIN_DIST {
                let capped = (norm * 0.05).min(temp);
                pos[i].0 += fx / norm * capped;
                pos[i].1 += fy / norm * capped;
            }
        }
    }

    if pos.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::numeric("layout produced non-finite coordinates"));
    }
    Ok(pos)
}
