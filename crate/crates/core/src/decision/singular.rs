use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::curve_model::{CurveSource, IntervalSet, ScalarFunction};
use crate::error::Result;

use super::scalar::monotone_pieces;

/// Smoothness class under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// C² reparametrization; singular set D_f.
    C2,
    /// Bounded second derivative; singular set D̃_f.
    D2inf,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "c2" => Ok(Self::C2),
            "d2inf" => Ok(Self::D2inf),
            other => Err(format!("unknown mode {other:?}, expected c2 or d2inf")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    Analytic,
    Detected,
}

/// Closed singular set together with its open complement G.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSetEstimate {
    /// Points of the estimate (for truncated analytic sets: the boundary
    /// points of the resolved components).
    pub points: Vec<f64>,
    pub regular: IntervalSet,
    pub mode: Mode,
    pub source: EstimateSource,
}

fn complement(points: &[f64], lo: f64, hi: f64) -> IntervalSet {
    let mut pts: Vec<f64> = points.iter().copied().filter(|p| *p > lo && *p < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let ivs = pts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
    IntervalSet { intervals: ivs, residual: Vec::new() }
}

fn cluster(mut pts: Vec<f64>, gap: f64) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for p in pts {
        if out.last().is_none_or(|q| p - q > gap) {
            out.push(p);
        }
    }
    out
}

/// Oscillation and maximum of ‖F″‖ over `n` samples of [a, b].
fn window_stats(curve: &CurveSource, a: f64, b: f64, n: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let t = a + (b - a) * i as f64 / (n - 1) as f64;
        let k = curve.curvature(t);
        let k = if k.is_nan() { f64::INFINITY } else { k };
        lo = lo.min(k);
        hi = hi.max(k);
    }
    (hi - lo, hi)
}

/// Whether ‖F″‖ is singular at the declared breakpoint `p`: blow-up, or
/// (C² mode) an oscillation on [p−r, p+r] that does not decay as r → 0.
fn singular_at(curve: &CurveSource, p: f64, mode: Mode, cfg: &Config) -> bool {
    let (lo, hi) = curve.domain();
    let span = hi - lo;
    let window = |r: f64| window_stats(curve, (p - r).max(lo), (p + r).min(hi), 33);
    let (osc0, max0) = window(span * 2f64.powi(-10));
    let (osc1, max1) = window(span * 2f64.powi(-30));
    if max0.max(max1) > cfg.blowup {
        return true;
    }
    mode == Mode::C2 && osc1 > 0.25 * osc0 && osc1 > 1e-3 * (1.0 + max1.abs())
}

/// Singular-set estimate. Analytic sets carried by corpus curves take
/// precedence. Scalar curves use maximal monotone pieces. Otherwise the
/// declared breakpoints are tested directly, and each grid cell is bisected
/// toward its most irregular half down to width 1e-9; a point is flagged
/// when ‖F″‖ exceeds the blow-up threshold there, or (C² mode) when the
/// oscillation of ‖F″‖ fails to decay. Bisection hits are resolved to one
/// grid cell and dropped when a flagged breakpoint lies in that cell.
pub fn detect_singular_set(curve: &CurveSource, mode: Mode, grid: usize, cfg: &Config) -> Result<SingularSetEstimate> {
    let (lo, hi) = curve.domain();
    let analytic = match mode {
        Mode::C2 => curve.meta.regular_c2.as_ref(),
        Mode::D2inf => curve.meta.regular_d2inf.as_ref(),
    };
    if let Some(g) = analytic {
        let mut points = vec![lo, hi];
        points.extend(g.boundary_points());
        for (a, b) in &g.residual {
            points.push(*a);
            points.push(*b);
        }
        let points = cluster(points, 0.0);
        return Ok(SingularSetEstimate { points, regular: g.clone(), mode, source: EstimateSource::Analytic });
    }
    if curve.dim() == 1 {
        let c = curve.clone();
        let f = ScalarFunction::new((lo, hi), move |t| c.at(t)[0]).with_breakpoints(curve.meta.breakpoints.clone());
        let pieces = monotone_pieces(&f, grid.max(64));
        let mut points = pieces.singular_points();
        points.push(lo);
        points.push(hi);
        let points = cluster(points, 0.0);
        let mut regular = complement(&points, lo, hi);
        regular.residual = pieces.unresolved.clone();
        return Ok(SingularSetEstimate { points, regular, mode, source: EstimateSource::Detected });
    }
    let n = grid.max(2);
    let span = hi - lo;
    let floor = 1e-9 * span;
    let mut flagged = Vec::new();
    for i in 0..n {
        let (mut a, mut b) = (lo + span * i as f64 / n as f64, lo + span * (i + 1) as f64 / n as f64);
        let (osc0, max0) = window_stats(curve, a, b, 16);
        if osc0 <= 1e-6 * (1.0 + max0.abs()) && max0 <= cfg.blowup {
            continue;
        }
        let mut last = (osc0, max0);
        while b - a > floor {
            let m = 0.5 * (a + b);
            let l = window_stats(curve, a, m, 16);
            let r = window_stats(curve, m, b, 16);
            let pick_left = if l.1.is_infinite() || r.1.is_infinite() { l.1 >= r.1 } else { l.0 >= r.0 };
            if pick_left {
                b = m;
                last = l;
            } else {
                a = m;
                last = r;
            }
        }
        let centre = 0.5 * (a + b);
        let blowup = last.1 > cfg.blowup;
        let persistent = last.0 > 0.25 * osc0 && osc0 > 1e-3 * (1.0 + max0.abs());
        if blowup || (mode == Mode::C2 && persistent) {
            flagged.push(centre);
        }
    }
    let cell = span / n as f64;
    let interior = |p: &f64| *p - lo > 1e-6 * span && hi - *p > 1e-6 * span;
    let declared: Vec<f64> =
        curve.meta.breakpoints.iter().copied().filter(interior).filter(|p| singular_at(curve, *p, mode, cfg)).collect();
    let hits: Vec<f64> = cluster(flagged.into_iter().filter(interior).collect(), cell)
        .into_iter()
        .filter(|p| declared.iter().all(|q| (p - q).abs() > cell))
        .collect();
    let mut points = cluster(declared.into_iter().chain(hits).collect(), 0.0);
    points.insert(0, lo);
    points.push(hi);
    let regular = complement(&points, lo, hi);
    Ok(SingularSetEstimate { points, regular, mode, source: EstimateSource::Detected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_model::{harmonic_phase_curve, spiral_curve};
    use crate::geometry::from_slice;

    #[test]
    fn parabola_scalar() {
        let f = CurveSource::new(1, |t| from_slice(&[t * t]));
        let e = detect_singular_set(&f, Mode::C2, 256, &Config::default()).unwrap();
        assert_eq!(e.points, vec![0.0, 1.0]);
        assert_eq!(e.regular.intervals, vec![(0.0, 1.0)]);
    }

    #[test]
    fn harmonic_phase_detected() {
        let f = harmonic_phase_curve(12).unwrap().without_regular_sets();
        let cfg = Config::default();
        let d2 = detect_singular_set(&f, Mode::D2inf, 512, &cfg).unwrap();
        assert_eq!(d2.points, vec![0.0, 1.0]);
        let c2 = detect_singular_set(&f, Mode::C2, 512, &cfg).unwrap();
        for n in 2..=12 {
            let x = 1.0 / n as f64;
            assert!(c2.points.iter().any(|p| (p - x).abs() < 1e-6), "missing 1/{n}: {:?}", c2.points);
        }
        assert!(c2.points.len() <= 2 + 12);
    }

    #[test]
    fn spiral_only_endpoints() {
        let f = spiral_curve(3.0).unwrap().without_regular_sets();
        let e = detect_singular_set(&f, Mode::C2, 256, &Config::default()).unwrap();
        assert_eq!(e.points, vec![0.0, 1.0]);
    }
}
