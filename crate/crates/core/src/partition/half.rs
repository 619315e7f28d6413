use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::curve_model::{CurveSource, IntervalSet};
use crate::error::Result;
use crate::variation::local_variation;

use super::curvature::CurvatureField;
use super::greedy::{greedy_with_threshold, Cell, GeneralizedPartition, GreedyOptions, StartPoint};

/// Share of a component's variation left as a tail by the search sweeps.
/// Measured in variation, so the cut commutes with reparametrization.
const SEARCH_TAIL: f64 = 1e-6;
/// Cells per search sweep. Cells are fixed by V and S alone, so the cap is
/// reparametrization invariant too.
const SEARCH_CELLS: usize = 1000;

/// Best Σ√V found over admissible interval systems, with the value of every
/// candidate family that was tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfVariation {
    pub best: f64,
    /// Σ√V(component) — always admissible since each component touches H.
    pub component_sum: f64,
    /// Σ over components of each candidate family's value.
    pub system_sums: Vec<f64>,
    pub per_component: Vec<f64>,
}

/// Σ√V of a system drawn from a partition: interior cells must satisfy
/// S·V ≥ δ (non-admissible ones are dropped), while cells and tails
/// reaching the component endpoints touch H and are unconstrained.
fn system_value(p: &GeneralizedPartition, delta: f64) -> f64 {
    let mut sum: f64 = p.left_tail.iter().chain(p.right_tail.iter()).map(|t| t.variation.sqrt()).sum();
    for (i, c) in p.cells.iter().enumerate() {
        if p.touches_boundary(i) || c.weight() >= delta {
            sum += c.variation.sqrt();
        }
    }
    sum
}

/// Merges consecutive cells into groups until each interior group reaches
/// S·V ≥ δ; a short group at either end is folded into the boundary.
fn merged_value(curve: &CurveSource, field: &CurvatureField, p: &GeneralizedPartition, delta: f64) -> f64 {
    let (a, b) = p.component;
    let mut groups: Vec<Cell> = Vec::new();
    let mut current: Option<Cell> = None;
    for c in &p.cells {
        let g = match current {
            None => *c,
            Some(g) => Cell::measure(curve, field, g.left, c.right),
        };
        if g.left > a && g.weight() >= delta {
            groups.push(g);
            current = None;
        } else {
            current = Some(g);
        }
    }
    let mut sum = 0.0;
    // boundary pieces: everything before the first interior group and after the last
    let lo = groups.first().map_or(b, |g| g.left);
    let hi = groups.last().map_or(b, |g| g.right);
    sum += local_variation(curve, a, lo).sqrt();
    if hi < b {
        sum += local_variation(curve, hi, b).sqrt();
    }
    sum + groups.iter().map(|g| g.variation.sqrt()).sum::<f64>()
}

/// Certified lower bound for W^δ(f, G). Candidate systems per component:
/// the component itself, the overshooting greedy sweep from the variation
/// midpoint, the merged undershooting sweep, and `search_budget`
/// overshooting sweeps with random start (in variation coordinates) and
/// random threshold in [δ, 4δ]. Sweeps stop once the variation left to
/// the component end is below a millionth of the component's, or after
/// `SEARCH_CELLS` cells, and the rest counts as a boundary piece.
pub fn half_variation_lower_bound(
    curve: &CurveSource,
    g: &IntervalSet,
    delta: f64,
    search_budget: usize,
    cfg: &Config,
) -> Result<HalfVariation> {
    let field = CurvatureField::new(curve, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws: Vec<(f64, f64)> =
        (0..search_budget).map(|_| (rng.gen_range(0.05..0.95), 1.0 + 3.0 * rng.gen::<f64>().powi(2))).collect();
    let base = GreedyOptions::from_config(cfg);
    let n_systems = 3 + draws.len();
    let mut system_sums = vec![0.0; n_systems];
    let mut per_component = Vec::with_capacity(g.len());
    let mut component_sum = 0.0;
    for &(a, b) in &g.intervals {
        let total = local_variation(curve, a, b);
        let whole = total.sqrt();
        component_sum += whole;
        let base =
            GreedyOptions { tail_variation: SEARCH_TAIL * total, max_cells: base.max_cells.min(SEARCH_CELLS), ..base };
        let mut values = Vec::with_capacity(n_systems);
        values.push(whole);
        let over = GreedyOptions { start: StartPoint::VariationMidpoint, overshoot: true, ..base };
        values.push(system_value(&greedy_with_threshold(curve, (a, b), delta, delta, cfg, over)?, delta));
        let under = GreedyOptions { start: StartPoint::VariationMidpoint, overshoot: false, ..base };
        let p = greedy_with_threshold(curve, (a, b), delta, delta, cfg, under)?;
        values.push(merged_value(curve, &field, &p, delta));
        for &(q, m) in &draws {
            let opts = GreedyOptions { start: StartPoint::VariationFraction(q), overshoot: true, ..base };
            let p = greedy_with_threshold(curve, (a, b), delta, delta * m, cfg, opts)?;
            values.push(system_value(&p, delta));
        }
        for (acc, v) in system_sums.iter_mut().zip(&values) {
            *acc += v;
        }
        per_component.push(values.iter().copied().fold(0.0, f64::max));
    }
    let best = per_component.iter().sum();
    Ok(HalfVariation { best, component_sum, system_sums, per_component })
}
