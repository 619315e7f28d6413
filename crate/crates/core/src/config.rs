use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances, truncation levels and grid sizes shared by the pipeline.
/// A fixed config and seed make every run deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Relative agreement required between successive polygon refinements.
    pub variation_rel_tol: f64,
    /// Dyadic refinement levels before variation is declared non-convergent.
    pub variation_max_levels: u32,
    /// Relative defect threshold of the image null test.
    pub null_tol: f64,
    /// Curvature values above this are treated as +∞.
    pub blowup: f64,
    /// Partial-sum growth per budget doubling that signals divergence.
    pub growth_threshold: f64,
    /// Largest fitted per-doubling ratio accepted as convergent.
    pub ratio_threshold: f64,
    /// Largest extrapolated tail, relative to the sum, accepted as convergent.
    pub tail_fraction: f64,
    /// Bisection steps when locating a greedy partition point.
    pub bisection_steps: u32,
    /// Cell cap per component for the greedy sweep.
    pub max_cells: usize,
    /// Distance to a component endpoint at which the sweep stops.
    pub end_tol: f64,
    /// Curvature samples per cell for sup estimates.
    pub sup_samples: usize,
    /// Grid size for variation profiles.
    pub profile_grid: usize,
    /// Grid size for singular-set detection.
    pub detection_grid: usize,
    /// Generations of Cantor-type constructions.
    pub cantor_depth: usize,
    /// Number of points of {1/n}-type constructions.
    pub harmonic_depth: usize,
    /// Randomized candidate systems per half-variation search.
    pub search_budget: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            variation_rel_tol: 1e-6,
            variation_max_levels: 22,
            null_tol: 1e-4,
            blowup: 1e12,
            growth_threshold: 0.05,
            ratio_threshold: 0.95,
            tail_fraction: 1.0,
            bisection_steps: 60,
            max_cells: 100_000,
            end_tol: 1e-9,
            sup_samples: 64,
            profile_grid: 1024,
            detection_grid: 512,
            cantor_depth: 12,
            harmonic_depth: 64,
            search_budget: 256,
            seed: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("variation_rel_tol", self.variation_rel_tol),
            ("null_tol", self.null_tol),
            ("blowup", self.blowup),
            ("growth_threshold", self.growth_threshold),
            ("ratio_threshold", self.ratio_threshold),
            ("tail_fraction", self.tail_fraction),
            ("end_tol", self.end_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.ratio_threshold >= 1.0 {
            return Err(Error::InvalidParameter("ratio_threshold must be below 1".into()));
        }
        if self.sup_samples < 2 || self.profile_grid < 2 || self.detection_grid < 2 || self.max_cells == 0 {
            return Err(Error::InvalidParameter("grid sizes must be at least 2".into()));
        }
        Ok(())
    }
}
