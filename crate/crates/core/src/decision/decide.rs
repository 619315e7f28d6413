use crate::config::Config;
use crate::curve_model::{CurveSource, IntervalSet};
use crate::error::{Error, Result};
use crate::partition::{greedy_partition, sqrt_variation_sum, GeneralizedPartition, GreedyOptions};
use crate::quadrature::Convergence;
use crate::variation::{image_null_test, local_variation, total_variation, NullTest, NullVerdict};

use super::integral::sqrt_curvature_integral;
use super::report::{combine, AnalysisReport, MonotoneWindows, Route, SingularSummary, SumSummary, Verdict};
use super::singular::{detect_singular_set, Mode, SingularSetEstimate};

const SAMPLES_PER_OCTAVE: i32 = 8;
const DEEPEST_OCTAVE: i32 = 40;

/// Whether ‖F″‖ is monotone on the window of relative size 2^{−first}
/// next to the end `anchor`, sampled on a geometric grid toward it.
fn monotone_near(curve: &CurveSource, anchor: f64, dir: f64, span: f64, first: i32) -> bool {
    let ks: Vec<f64> = (first * SAMPLES_PER_OCTAVE..=DEEPEST_OCTAVE * SAMPLES_PER_OCTAVE)
        .map(|j| curve.curvature(anchor + dir * span * 2f64.powf(-(j as f64) / SAMPLES_PER_OCTAVE as f64)))
        .map(|k| if k.is_nan() { f64::INFINITY } else { k })
        .collect();
    let tol = |a: f64, b: f64| 1e-9 * a.abs().max(b.abs());
    let up = ks.windows(2).all(|w| w[1] >= w[0] - tol(w[0], w[1]) || w[0].is_infinite() && w[1].is_infinite());
    let down = ks.windows(2).all(|w| w[1] <= w[0] + tol(w[0], w[1]) || w[0].is_infinite() && w[1].is_infinite());
    up || down
}

/// End windows on which ‖F″‖ is monotone, trying successively smaller ones.
pub fn monotone_windows(curve: &CurveSource) -> Option<MonotoneWindows> {
    let (lo, hi) = curve.domain();
    let span = hi - lo;
    let find = |anchor: f64, dir: f64| [3, 6, 10, 14].into_iter().find(|&j| monotone_near(curve, anchor, dir, span, j));
    let l = find(lo, 1.0)?;
    let r = find(hi, -1.0)?;
    Some(MonotoneWindows { left: (lo, lo + span * 2f64.powi(-l)), right: (hi - span * 2f64.powi(-r), hi) })
}

fn summary(est: &SingularSetEstimate) -> SingularSummary {
    SingularSummary {
        source: est.source,
        points: est.points.len(),
        components: est.regular.len(),
        residual_regions: est.regular.residual.len(),
    }
}

fn null_flag(v: NullVerdict) -> Option<bool> {
    match v {
        NullVerdict::Null => Some(true),
        NullVerdict::NotNull => Some(false),
        NullVerdict::Inconclusive => None,
    }
}

/// Verdict from the √-curvature integral alone, valid when ‖F″‖ is
/// monotone near both ends of the curve.
pub fn monotone_tail_decide(curve: &CurveSource, mode: Mode, cfg: &Config) -> Result<AnalysisReport> {
    let windows = monotone_windows(curve).ok_or(Error::MonotonicityNotDetected)?;
    let (lo, hi) = curve.domain();
    let mut report = AnalysisReport::skeleton(mode, Route::Monotone, 0.0, cfg);
    report.monotone_windows = Some(windows);
    match total_variation(curve, lo, hi, cfg) {
        Err(Error::NonConvergent { .. }) => {
            report.verdict = Verdict::NotReparametrizable;
            report.notes.push("variation does not converge: the curve is not of bounded variation".into());
            return Ok(report);
        }
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    let integral = sqrt_curvature_integral(curve, &IntervalSet::whole(lo, hi));
    report.verdict = match integral.verdict {
        Convergence::Converges => Verdict::Reparametrizable,
        Convergence::Diverges => Verdict::NotReparametrizable,
        Convergence::Inconclusive => Verdict::Inconclusive,
    };
    report.curvature_integral = Some(integral);
    Ok(report)
}

/// Full decision pipeline: singular set, then either the monotone-end
/// route (when G = (0,1)) or the image null test, greedy partitions per
/// component, the pooled partition √-sum, the component √-sum and the
/// √-curvature integral. Numerical failures end in an inconclusive verdict.
pub fn decide(curve: &CurveSource, mode: Mode, delta: f64, cfg: &Config) -> AnalysisReport {
    let mut report = AnalysisReport::skeleton(mode, Route::Partition, delta, cfg);
    let est = match detect_singular_set(curve, mode, cfg.detection_grid, cfg) {
        Ok(e) => e,
        Err(e) => {
            report.notes.push(format!("singular set: {e}"));
            return report;
        }
    };
    let (lo, hi) = curve.domain();
    let whole = est.regular.residual.is_empty() && est.regular.intervals == vec![(lo, hi)];
    if whole {
        if let Ok(mut r) = monotone_tail_decide(curve, mode, cfg) {
            r.delta = delta;
            r.singular_set = Some(summary(&est));
            return r;
        }
    }
    report.singular_set = Some(summary(&est));
    partition_route(curve, &est, delta, cfg, &mut report);
    report
}

fn partition_route(
    curve: &CurveSource,
    est: &SingularSetEstimate,
    delta: f64,
    cfg: &Config,
    report: &mut AnalysisReport,
) {
    let g = &est.regular;
    let null = match image_null_test(curve, g, cfg) {
        Ok(n) => n,
        Err(Error::NonConvergent { .. }) => {
            report.verdict = Verdict::NotReparametrizable;
            report.notes.push("variation does not converge: the curve is not of bounded variation".into());
            return;
        }
        Err(e) => {
            report.notes.push(format!("null test: {e}"));
            return;
        }
    };
    let mut cells = Vec::new();
    let mut parts = Vec::with_capacity(g.len());
    let mut failed = false;
    for &(a, b) in &g.intervals {
        match greedy_partition(curve, (a, b), delta, cfg, GreedyOptions::from_config(cfg)) {
            Ok(p) => {
                cells.extend(p.variations());
                parts.push(Some(p));
            }
            Err(e) => {
                failed = true;
                parts.push(None);
                report.notes.push(format!("partition of ({a}, {b}): {e}"));
            }
        }
    }
    let truncated = !g.residual.is_empty() || parts.iter().flatten().any(|p| p.is_truncated());
    let partition = sqrt_variation_sum(&cells, truncated.then(|| cell_front(curve, g, &parts)), cfg);
    let components = sqrt_variation_sum(
        &null.component_variations,
        (!g.residual.is_empty()).then(|| component_front(curve, g, &null)),
        cfg,
    );
    let integral = sqrt_curvature_integral(curve, g);
    let mut verdicts = vec![partition.verdict, components.verdict, integral.verdict];
    if failed {
        verdicts.push(Convergence::Inconclusive);
    }
    report.verdict = combine(null_flag(null.verdict), &verdicts);
    report.truncation.cells_used = cells.len();
    report.truncation.truncated = truncated;
    report.partition_sum = Some(SumSummary::from(&partition));
    report.component_sum = Some(SumSummary::from(&components));
    report.curvature_integral = Some(integral);
    report.null_test = Some(null);
    report.partial_sums = partition.partial_sums;
}

/// Index of the component ending at `x` and of the one starting there.
fn neighbours(g: &IntervalSet, x: f64) -> (Option<usize>, Option<usize>) {
    let tol = 1e-12 * (1.0 + x.abs());
    let i = g.intervals.partition_point(|c| c.1 < x - tol);
    let left = g.intervals.get(i).filter(|c| (c.1 - x).abs() <= tol).map(|_| i);
    let j = g.intervals.partition_point(|c| c.0 < x - tol);
    let right = g.intervals.get(j).filter(|c| (c.0 - x).abs() <= tol).map(|_| j);
    (left, right)
}

/// Size below which a truncated family may miss cells. A missing cell
/// lies inside an unresolved region, so its V is at most the region's;
/// and as the construction refines toward the truncation it is assumed no
/// larger than the resolved cells bordering the region. The front is the
/// largest over all regions of the smaller of the two bounds.
fn truncation_front<'a>(regions: impl Iterator<Item = (f64, &'a [f64])>) -> f64 {
    regions.map(|(v, adjacent)| v.min(adjacent.iter().copied().fold(0.0, f64::max))).fold(0.0, f64::max)
}

fn cell_front(curve: &CurveSource, g: &IntervalSet, parts: &[Option<GeneralizedPartition>]) -> f64 {
    let first = |i: Option<usize>| i.and_then(|i| parts[i].as_ref()).and_then(|p| p.cells.first()).map(|c| c.variation);
    let last = |i: Option<usize>| i.and_then(|i| parts[i].as_ref()).and_then(|p| p.cells.last()).map(|c| c.variation);
    let mut regions: Vec<(f64, Vec<f64>)> = Vec::new();
    for &(r0, r1) in &g.residual {
        let adjacent = [last(neighbours(g, r0).0), first(neighbours(g, r1).1)].into_iter().flatten().collect();
        regions.push((local_variation(curve, r0, r1), adjacent));
    }
    for p in parts.iter().flatten() {
        if let (Some(t), Some(c)) = (p.left_tail, p.cells.first()) {
            regions.push((t.variation, vec![c.variation]));
        }
        if let (Some(t), Some(c)) = (p.right_tail, p.cells.last()) {
            regions.push((t.variation, vec![c.variation]));
        }
    }
    truncation_front(regions.iter().map(|(v, a)| (*v, a.as_slice())))
}

fn component_front(curve: &CurveSource, g: &IntervalSet, null: &NullTest) -> f64 {
    let v = |i: Option<usize>| i.and_then(|i| null.component_variations.get(i).copied());
    let regions: Vec<(f64, Vec<f64>)> = g
        .residual
        .iter()
        .map(|&(r0, r1)| {
            let adjacent = [v(neighbours(g, r0).0), v(neighbours(g, r1).1)].into_iter().flatten().collect();
            (local_variation(curve, r0, r1), adjacent)
        })
        .collect();
    truncation_front(regions.iter().map(|(v, a)| (*v, a.as_slice())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_model::{
        cantor_phase_curve, circle_arc, harmonic_phase_curve, peak_curvature_curve, spiral_curve,
    };

    #[test]
    fn spiral_verdicts() {
        let cfg = Config::default();
        let r = decide(&spiral_curve(3.0).unwrap(), Mode::C2, 1.0, &cfg);
        assert_eq!(r.verdict, Verdict::Reparametrizable);
        assert_eq!(r.route, Route::Monotone);
        let r = decide(&spiral_curve(1.5).unwrap(), Mode::C2, 1.0, &cfg);
        assert_eq!(r.verdict, Verdict::NotReparametrizable);
    }

    #[test]
    fn circle_is_monotone_case() {
        let r = monotone_tail_decide(&circle_arc(1.0, 2.0).unwrap(), Mode::C2, &Config::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Reparametrizable);
    }

    #[test]
    fn non_rectifiable_spiral() {
        let r = decide(&spiral_curve(0.5).unwrap(), Mode::C2, 1.0, &Config::default());
        assert_eq!(r.verdict, Verdict::NotReparametrizable);
    }

    #[test]
    fn harmonic_phase_separates_modes() {
        let cfg = Config::default();
        let f = harmonic_phase_curve(64).unwrap();
        let d2 = decide(&f, Mode::D2inf, 1.0, &cfg);
        assert_eq!(d2.verdict, Verdict::Reparametrizable, "{:?}", d2.notes);
        let c2 = decide(&f, Mode::C2, 1.0, &cfg);
        assert_eq!(c2.verdict, Verdict::NotReparametrizable, "{:?}", c2.notes);
        assert_eq!(c2.component_sum.unwrap().verdict, Convergence::Diverges);
    }

    #[test]
    fn cantor_phase_reparametrizable() {
        let f = cantor_phase_curve(0.6, 12).unwrap();
        let r = decide(&f, Mode::C2, 1.0, &Config::default());
        assert_eq!(r.verdict, Verdict::Reparametrizable, "{r:?}");
    }

    #[test]
    fn peak_profile_not_reparametrizable() {
        let (f, _) = peak_curvature_curve(64).unwrap();
        let r = decide(&f, Mode::C2, 1.0, &Config::default());
        assert_eq!(r.verdict, Verdict::NotReparametrizable, "{r:?}");
        assert_eq!(r.curvature_integral.unwrap().verdict, Convergence::Converges);
        assert_eq!(r.partition_sum.unwrap().verdict, Convergence::Diverges);
    }
}
