use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::curve_model::{CurveSource, IntervalSet, ScalarFunction};
use crate::error::Result;
use crate::geometry::from_slice;
use crate::partition::sqrt_variation_sum;
use crate::variation::image_null_test;

use super::report::{combine, AnalysisReport, Route, SingularSummary, SumSummary};
use super::singular::{EstimateSource, Mode};
use crate::variation::NullVerdict;

/// Maximal monotonicity and constancy intervals of a real function,
/// resolved on a uniform grid joined with geometric grids toward both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonePieces {
    /// Piece boundaries, starting at the left end and finishing at the right.
    pub boundaries: Vec<f64>,
    /// +1 increasing, −1 decreasing, 0 constant, per piece.
    pub signs: Vec<i8>,
    /// Oscillation |f(b) − f(a)| of each piece.
    pub oscillations: Vec<f64>,
    /// End regions where pieces keep accumulating below grid resolution.
    pub unresolved: Vec<(f64, f64)>,
}

impl MonotonePieces {
    /// Interior piece boundaries: points of varying monotonicity and ends
    /// of constancy intervals.
    pub fn singular_points(&self) -> Vec<f64> {
        let n = self.boundaries.len();
        if n <= 2 {
            return Vec::new();
        }
        self.boundaries[1..n - 1].to_vec()
    }

    pub fn monotone_oscillations(&self) -> Vec<f64> {
        self.oscillations.iter().zip(&self.signs).filter(|(_, s)| **s != 0).map(|(w, _)| *w).collect()
    }
}

const OCTAVE_POINTS: i32 = 16;
const OCTAVES: i32 = 50;
/// Octaves next to each end in which a turning point marks the end as
/// unresolved.
const UNRESOLVED_OCTAVES: i32 = 6;

fn sample_points(f: &ScalarFunction, grid: usize) -> Vec<f64> {
    let (lo, hi) = f.domain;
    let span = hi - lo;
    let mut ts: Vec<f64> = (0..=grid).map(|i| lo + span * i as f64 / grid as f64).collect();
    for k in OCTAVE_POINTS..=OCTAVES * OCTAVE_POINTS {
        let d = span * 2f64.powf(-(k as f64) / OCTAVE_POINTS as f64);
        ts.push(lo + d);
        ts.push(hi - d);
    }
    ts.extend(f.breakpoints.iter().copied().filter(|x| *x >= lo && *x <= hi));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Extremum of f on [a, b] by golden-section search (maximum if `max`).
fn refine_extremum(f: &ScalarFunction, a: f64, b: f64, max: bool) -> f64 {
    let g = |t: f64| if max { f.eval(t) } else { -f.eval(t) };
    let r = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..100 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        if g1 >= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        }
    }
    let cands = [a, b, x1, x2];
    cands.into_iter().fold(a, |best, t| if g(t) > g(best) { t } else { best })
}

pub fn monotone_pieces(f: &ScalarFunction, grid: usize) -> MonotonePieces {
    let (lo, hi) = f.domain;
    let ts = sample_points(f, grid.max(8));
    let ys: Vec<f64> = ts.iter().map(|t| f.eval(*t)).collect();
    let signs: Vec<i8> = ys
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d.abs() <= 4.0 * f64::EPSILON * w[0].abs().max(w[1].abs()) {
                0
            } else if d > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    // flat steps belong to the surrounding monotone run
    let first = signs.iter().copied().find(|s| *s != 0).unwrap_or(1);
    let mut prev = first;
    let filled: Vec<i8> = signs
        .iter()
        .map(|&s| {
            if s != 0 {
                prev = s;
            }
            prev
        })
        .collect();
    let mut merged: Vec<(i8, usize, usize)> = Vec::new();
    for (i, &s) in filled.iter().enumerate() {
        match merged.last_mut() {
            Some(r) if r.0 == s => r.2 = i + 1,
            _ => merged.push((s, i, i + 1)),
        }
    }
    let mut boundaries = vec![lo];
    let mut piece_signs = Vec::new();
    for (k, r) in merged.iter().enumerate() {
        piece_signs.push(r.0);
        if k + 1 == merged.len() {
            break;
        }
        let next = merged[k + 1];
        let j = r.2;
        let t = match (r.0, next.0) {
            (1, -1) | (-1, 1) => {
                let a = ts[j.saturating_sub(1)];
                let b = ts[(j + 1).min(ts.len() - 1)];
                refine_extremum(f, a, b, r.0 == 1)
            }
            _ => ts[j],
        };
        boundaries.push(t.max(*boundaries.last().expect("nonempty")));
    }
    boundaries.push(hi);
    let oscillations: Vec<f64> = boundaries.windows(2).map(|w| (f.eval(w[1]) - f.eval(w[0])).abs()).collect();
    let span = hi - lo;
    let edge = span * 2f64.powi(-(OCTAVES - UNRESOLVED_OCTAVES));
    let interior = &boundaries[1..boundaries.len() - 1];
    let mut unresolved = Vec::new();
    if let Some(first) = interior.first() {
        if *first - lo <= edge {
            unresolved.push((lo, *first));
        }
    }
    if let Some(last) = interior.last() {
        if hi - *last <= edge {
            unresolved.push((*last, hi));
        }
    }
    MonotonePieces { boundaries, signs: piece_signs, oscillations, unresolved }
}

/// Lebedev-type check for a real function: maximal monotone pieces I_α
/// with oscillations ω_α, the image-null estimate through the variation
/// defect, and convergence of Σ √ω_α.
pub fn lebedev_check(f: &ScalarFunction, cfg: &Config) -> Result<AnalysisReport> {
    let pieces = monotone_pieces(f, cfg.detection_grid.max(1024));
    let mut report = AnalysisReport::skeleton(Mode::C2, Route::Lebedev, 0.0, cfg);
    let curve = scalar_curve(f);
    let mut comps: Vec<(f64, f64)> = pieces
        .boundaries
        .windows(2)
        .zip(&pieces.signs)
        .filter(|(w, s)| **s != 0 && w[1] > w[0])
        .map(|(w, _)| (w[0], w[1]))
        .collect();
    comps.retain(|c| !pieces.unresolved.iter().any(|u| c.0 >= u.0 && c.1 <= u.1));
    let g = IntervalSet::new(comps)?.with_residual(pieces.unresolved.clone());
    let null = image_null_test(&curve, &g, cfg)?;
    let truncated = !pieces.unresolved.is_empty();
    let omegas: Vec<f64> = g.intervals.iter().map(|(a, b)| (f.eval(*b) - f.eval(*a)).abs()).collect();
    let sum = sqrt_variation_sum(&omegas, truncated.then_some(0.0), cfg);
    let null_ok = match null.verdict {
        NullVerdict::Null => Some(true),
        NullVerdict::NotNull => Some(false),
        NullVerdict::Inconclusive => None,
    };
    report.verdict = combine(null_ok, &[sum.verdict]);
    report.singular_set = Some(SingularSummary {
        source: EstimateSource::Detected,
        points: pieces.boundaries.len(),
        components: g.len(),
        residual_regions: g.residual.len(),
    });
    report.null_test = Some(null);
    report.component_sum = Some(SumSummary::from(&sum));
    report.truncation.cells_used = omegas.len();
    report.truncation.truncated = truncated;
    report.partial_sums = sum.partial_sums;
    Ok(report)
}

/// The real function as a one-dimensional curve.
pub fn scalar_curve(f: &ScalarFunction) -> CurveSource {
    let (e, d) = (f.clone(), f.clone());
    let mut c = CurveSource::new(1, move |t| from_slice(&[e.eval(t)]))
        .with_domain(f.domain.0, f.domain.1)
        .with_breakpoints(f.breakpoints.clone());
    if f.has_d1() {
        c = c.with_d1(move |t| from_slice(&[d.d1(t)]));
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPowerVariation {
    pub value: f64,
    pub points: usize,
}

/// Largest Σ |f(dᵢ) − f(cᵢ)|^{1/2} over non-overlapping intervals with
/// endpoints among the piece boundaries, found exactly by dynamic
/// programming over those points.
pub fn lp_half_variation(f: &ScalarFunction, cfg: &Config) -> HalfPowerVariation {
    let pieces = monotone_pieces(f, cfg.detection_grid.max(1024));
    let pts = &pieces.boundaries;
    let vals: Vec<f64> = pts.iter().map(|t| f.eval(*t)).collect();
    let m = pts.len();
    let mut best = vec![0.0f64; m];
    for j in 1..m {
        let mut b = best[j - 1];
        for i in 0..j {
            b = b.max(best[i] + (vals[j] - vals[i]).abs().sqrt());
        }
        best[j] = b;
    }
    HalfPowerVariation { value: best[m - 1], points: m }
}
