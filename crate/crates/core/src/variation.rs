//! Variation, the variation profile v_f, the arc-length associate F with
//! f = F∘v_f, and the image null test for the complement of an open set.

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::curve_model::{CurveSource, IntervalSet};
use crate::error::{Error, Result};
use crate::geometry::{distance, Vector};
use crate::quadrature::{integrate, integrate_with_shells, Convergence, QuadOptions, ShellOptions};

/// Quadrature settings for ∫‖f′‖ over subintervals away from singular ends.
pub const SPEED_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_panels: 200 };

const CROSS_CHECK_SEGMENTS: usize = 256;

/// Length of the inscribed polygon with `n` equal parameter steps.
pub fn polygon_length(curve: &CurveSource, a: f64, b: f64, n: usize) -> f64 {
    let mut prev = curve.at(a);
    let mut sum = 0.0;
    for i in 1..=n {
        let t = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
        let p = curve.at(t);
        sum += distance(&prev, &p);
        prev = p;
    }
    sum
}

/// ∫ₐᵇ ‖f′‖ by plain adaptive quadrature. Suitable where f′ is bounded.
pub fn speed_integral(curve: &CurveSource, a: f64, b: f64) -> f64 {
    integrate(&|t: f64| curve.speed(t), a, b, SPEED_QUAD).value
}

/// Variation of a subinterval without the polygon cross-check: shells
/// toward ends that touch the curve's domain, plain quadrature elsewhere.
pub fn local_variation(curve: &CurveSource, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if !curve.has_d1() {
        return polygon_refined(curve, a, b, 1e-9, 16).unwrap_or_else(|e| match e {
            Error::NonConvergent { last, .. } => last,
            _ => f64::NAN,
        });
    }
    let (lo, hi) = curve.domain();
    if a > lo && b < hi {
        let r = integrate(&|t: f64| curve.speed(t), a, b, SPEED_QUAD);
        if r.converged {
            return r.value;
        }
    }
    integrate_with_shells(&|t: f64| curve.speed(t), a, b, ShellOptions::default()).value
}

fn polygon_refined(curve: &CurveSource, a: f64, b: f64, rel_tol: f64, max_levels: u32) -> Result<f64> {
    let mut prev = polygon_length(curve, a, b, 8);
    for level in 4..=max_levels {
        let cur = polygon_length(curve, a, b, 1 << level);
        if (cur - prev).abs() <= rel_tol * cur.max(f64::MIN_POSITIVE) || cur == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergent { a, b, last: prev })
}

/// V(f,[a,b]). With an analytic derivative this is ∫‖f′‖ (with dyadic shells
/// at the ends, so integrable blow-ups of f′ are handled), checked against an
/// inscribed polygon, and the larger of the two is returned; the polygon is
/// always a lower bound. Without a derivative the polygon is refined
/// dyadically until two levels agree.
pub fn total_variation(curve: &CurveSource, a: f64, b: f64, cfg: &Config) -> Result<f64> {
    let (lo, hi) = curve.domain();
    for t in [a, b] {
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfDomain { t, lo, hi });
        }
    }
    if b <= a {
        return Ok(0.0);
    }
    if !curve.has_d1() {
        return polygon_refined(curve, a, b, cfg.variation_rel_tol, cfg.variation_max_levels);
    }
    // interior pieces with an integrable speed need neither shells nor the polygon check
    if a > lo && b < hi {
        let r = integrate(&|t: f64| curve.speed(t), a, b, SPEED_QUAD);
        if r.converged && r.value.is_finite() {
            return Ok(r.value);
        }
    }
    let sh = integrate_with_shells(&|t: f64| curve.speed(t), a, b, ShellOptions::default());
    if sh.verdict == Convergence::Diverges || !sh.value.is_finite() {
        return Err(Error::NonConvergent { a, b, last: sh.value });
    }
    let poly = polygon_length(curve, a, b, CROSS_CHECK_SEGMENTS);
    Ok(sh.value.max(poly))
}

/// Smallest t in [a, b] with V(f, [a, t]) ≥ target (up to rounding):
/// Newton steps on the speed inside a shrinking bracket, bisection when a
/// step leaves it or no derivative is available.
pub(crate) fn solve_in_cell(curve: &CurveSource, a: f64, b: f64, target: f64) -> f64 {
    let (mut l, mut r) = (a, b);
    let mut t = 0.5 * (a + b);
    for _ in 0..100 {
        let v = local_variation(curve, a, t);
        if v >= target {
            r = t;
        } else {
            l = t;
        }
        if r - l <= 4.0 * f64::EPSILON * r.abs().max(l.abs())
            || (v - target).abs() <= 1e-16 * target.max(f64::MIN_POSITIVE)
        {
            return if v >= target { t } else { r };
        }
        let newton = if curve.has_d1() { t - (v - target) / curve.speed(t) } else { f64::NAN };
        t = if newton.is_finite() && newton > l && newton < r { newton } else { 0.5 * (l + r) };
    }
    r
}

/// Monotone sampled v_f with inverse queries.
#[derive(Debug, Clone)]
pub struct VariationProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub total: f64,
    curve: CurveSource,
}

impl VariationProfile {
    /// Profile on a grid refined until every increment is at most
    /// total/grid_size.
    pub fn build(curve: &CurveSource, grid_size: usize, cfg: &Config) -> Result<Self> {
        let (lo, hi) = curve.domain();
        let m = grid_size.max(2);
        // confirm bounded variation first; this also surfaces NonConvergent
        let total_check = total_variation(curve, lo, hi, cfg)?;
        let mut cells: Vec<(f64, f64, f64)> = (0..m)
            .map(|i| {
                let a = lo + (hi - lo) * i as f64 / m as f64;
                let b = if i + 1 == m { hi } else { lo + (hi - lo) * (i + 1) as f64 / m as f64 };
                (a, b, local_variation(curve, a, b))
            })
            .collect();
        let total: f64 = cells.iter().map(|c| c.2).sum();
        let cap = total.max(total_check) / m as f64;
        let mut refined = Vec::with_capacity(cells.len());
        cells.reverse();
        while let Some((a, b, v)) = cells.pop() {
            let mid = 0.5 * (a + b);
            if v > cap * (1.0 + 1e-12) && mid > a && mid < b {
                cells.push((mid, b, local_variation(curve, mid, b)));
                cells.push((a, mid, local_variation(curve, a, mid)));
            } else {
                refined.push((a, b, v));
            }
        }
        let mut grid = Vec::with_capacity(refined.len() + 1);
        let mut values = Vec::with_capacity(refined.len() + 1);
        grid.push(lo);
        values.push(0.0);
        let mut acc = 0.0;
        for (_, b, v) in refined {
            acc += v;
            grid.push(b);
            values.push(acc);
        }
        Ok(Self { grid, values, total: acc, curve: curve.clone() })
    }

    /// v_f(t).
    pub fn value(&self, t: f64) -> f64 {
        let (lo, hi) = (self.grid[0], *self.grid.last().expect("nonempty"));
        let t = t.clamp(lo, hi);
        let i = self.grid.partition_point(|g| *g <= t).max(1) - 1;
        if self.grid[i] == t || i + 1 == self.grid.len() {
            return self.values[i];
        }
        (self.values[i] + local_variation(&self.curve, self.grid[i], t)).min(self.values[i + 1])
    }

    /// Left-continuous generalized inverse: inf{t : v_f(t) ≥ s}.
    pub fn inverse(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.grid[0];
        }
        if s >= self.total {
            let i = self.values.partition_point(|v| *v < self.total);
            return self.grid[i.min(self.grid.len() - 1)];
        }
        let i = self.values.partition_point(|v| *v < s);
        solve_in_cell(&self.curve, self.grid[i - 1], self.grid[i], s - self.values[i - 1])
    }

    pub fn curve(&self) -> &CurveSource {
        &self.curve
    }

    /// CSV with columns t, v.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,v\n");
        for (t, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{t:.17e},{v:.17e}\n"));
        }
        out
    }
}

/// F = f∘v_f⁻¹ on [0, ℓ].
#[derive(Debug, Clone)]
pub struct ArcLengthCurve {
    pub base: CurveSource,
    pub profile: VariationProfile,
}

impl ArcLengthCurve {
    pub fn length(&self) -> f64 {
        self.profile.total
    }

    pub fn eval(&self, s: f64) -> Vector {
        self.base.at(self.profile.inverse(s.clamp(0.0, self.length())))
    }

    /// ‖F″(s)‖.
    pub fn second_deriv_norm(&self, s: f64) -> f64 {
        self.base.curvature(self.profile.inverse(s.clamp(0.0, self.length())))
    }
}

pub fn arc_length_associate(curve: &CurveSource, cfg: &Config) -> Result<ArcLengthCurve> {
    Ok(ArcLengthCurve { base: curve.clone(), profile: VariationProfile::build(curve, cfg.profile_grid, cfg)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullVerdict {
    Null,
    NotNull,
    Inconclusive,
}

/// Outcome of the image null test on H = [0,1] ∖ G.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullTest {
    /// V(f,[0,1]) − Σ V(f, component).
    pub defect: f64,
    /// Variation carried by the unresolved residual regions of a truncated G.
    pub tail_bound: f64,
    pub total: f64,
    pub component_sum: f64,
    pub verdict: NullVerdict,
    /// V(f, component) for every component, in order.
    #[serde(skip)]
    pub component_variations: Vec<f64>,
}

/// Compares the total variation with the sum over the components of G.
/// The variation on the residual regions of a truncated construction is
/// reported as `tail_bound` and credited to the components the full
/// construction would add there.
pub fn image_null_test(curve: &CurveSource, g: &IntervalSet, cfg: &Config) -> Result<NullTest> {
    let (lo, hi) = curve.domain();
    let total = total_variation(curve, lo, hi, cfg)?;
    let mut component_variations = Vec::with_capacity(g.len());
    for &(a, b) in &g.intervals {
        component_variations.push(total_variation(curve, a.max(lo), b.min(hi), cfg)?);
    }
    let component_sum: f64 = component_variations.iter().sum();
    let mut tail_bound = 0.0;
    for &(a, b) in &g.residual {
        tail_bound += total_variation(curve, a.max(lo), b.min(hi), cfg)?;
    }
    let defect = (total - component_sum).max(0.0);
    let unexplained = (defect - tail_bound).max(0.0);
    let tol = cfg.null_tol * total.max(f64::MIN_POSITIVE);
    let verdict = if unexplained <= tol {
        NullVerdict::Null
    } else if unexplained >= 10.0 * tol {
        NullVerdict::NotNull
    } else {
        NullVerdict::Inconclusive
    };
    Ok(NullTest { defect, tail_bound, total, component_sum, verdict, component_variations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_model::{line_segment, phase_integral_curve, spiral_curve, ScalarFunction};
    use crate::geometry::from_slice;
    use rand::{Rng, SeedableRng};

    fn cfg() -> Config {
        Config::default()
    }

    /// Composite Simpson rule with many points, independent of the adaptive code.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn line_has_unit_length() {
        let v = total_variation(&line_segment(), 0.0, 1.0, &cfg()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let bare = line_segment().without_derivatives();
        assert!((total_variation(&bare, 0.0, 1.0, &cfg()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spiral_segment_matches_simpson() {
        let s = 3.0;
        let v = total_variation(&spiral_curve(s).unwrap(), 0.5, 1.0, &cfg()).unwrap();
        let oracle = simpson(|t| t.powf(s - 2.0) * (s * s * t * t + 1.0).sqrt(), 0.5, 1.0, 20_000);
        assert!((v - oracle).abs() < 1e-6);
    }

    #[test]
    fn spiral_without_bounded_variation() {
        let r = total_variation(&spiral_curve(0.5).unwrap(), 0.0, 1.0, &cfg());
        assert!(matches!(r, Err(Error::NonConvergent { .. })), "{r:?}");
    }

    #[test]
    fn phase_curve_profile_is_identity() {
        let f = phase_integral_curve(ScalarFunction::new((0.0, 1.0), |t| 3.0 * t * t).with_d1(|t| 6.0 * t)).unwrap();
        let p = VariationProfile::build(&f, 64, &cfg()).unwrap();
        for x in [0.0, 0.1, 0.37, 0.9, 1.0] {
            assert!((p.value(x) - x).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_curve_profile_is_zero() {
        let f = CurveSource::new(2, |_| from_slice(&[1.0, 2.0]));
        let p = VariationProfile::build(&f, 16, &cfg()).unwrap();
        assert!(p.values.iter().all(|v| *v == 0.0));
        assert_eq!(p.inverse(0.0), 0.0);
    }

    #[test]
    fn spiral_profile_total_and_additivity() {
        let f = spiral_curve(3.0).unwrap();
        let p = VariationProfile::build(&f, 256, &cfg()).unwrap();
        let total = total_variation(&f, 0.0, 1.0, &cfg()).unwrap();
        assert!((p.total - total).abs() < 1e-6 * total);
        for (i, &t) in p.grid.iter().enumerate().step_by(17) {
            let left = local_variation(&f, 0.0, t);
            let right = local_variation(&f, t, 1.0);
            assert!((left + right - p.total).abs() <= 1e-9 * p.total, "{i}");
        }
        for w in p.values.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn parabola_associate_is_straight() {
        let f = CurveSource::new(2, |t| from_slice(&[t * t, 0.0]))
            .with_d1(|t| from_slice(&[2.0 * t, 0.0]))
            .with_d2(|_| from_slice(&[2.0, 0.0]));
        let arc = arc_length_associate(&f, &cfg()).unwrap();
        assert!((arc.length() - 1.0).abs() < 1e-12);
        for s in [0.0, 0.04, 0.25, 0.5, 0.81, 1.0] {
            let p = arc.eval(s);
            assert!((p[0] - s).abs() < 1e-9 && p[1] == 0.0);
        }
        for (t, v) in arc.profile.grid.iter().zip(&arc.profile.values) {
            assert!(distance(&arc.eval(*v), &f.at(*t)) < 1e-6);
        }
    }

    #[test]
    fn spiral_associate_is_one_lipschitz() {
        let f = spiral_curve(3.0).unwrap();
        let arc = arc_length_associate(&f, &Config { profile_grid: 256, ..cfg() }).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let l = arc.length();
        for _ in 0..10_000 {
            let (s1, s2) = (rng.gen_range(0.0..l), rng.gen_range(0.0..l));
            assert!(distance(&arc.eval(s1), &arc.eval(s2)) <= (s2 - s1).abs() + 1e-9);
        }
        // unit speed where the curve is smooth
        let (s, h) = (0.5 * l, 1e-5);
        let d = distance(&arc.eval(s + h), &arc.eval(s - h)) / (2.0 * h);
        assert!((d - 1.0).abs() < 1e-4);
    }

    #[test]
    fn null_test_examples() {
        let f = line_segment();
        let whole = image_null_test(&f, &IntervalSet::whole(0.0, 1.0), &cfg()).unwrap();
        assert_eq!(whole.verdict, NullVerdict::Null);
        assert!(whole.defect.abs() < 1e-12);
        let g = IntervalSet::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).unwrap();
        let r = image_null_test(&f, &g, &cfg()).unwrap();
        assert_eq!(r.verdict, NullVerdict::NotNull);
        assert!((r.defect - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn variation_is_invariant_under_precomposition() {
        let f = spiral_curve(3.0).unwrap();
        let v = total_variation(&f, 0.0, 1.0, &cfg()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let w = crate::curve_model::random_homeomorphism(&mut rng);
            let g = f.compose(&w);
            let vg = total_variation(&g, 0.0, 1.0, &cfg()).unwrap();
            assert!((vg - v).abs() < 1e-5 * v);
            let pf = VariationProfile::build(&f, 64, &cfg()).unwrap();
            let pg = VariationProfile::build(&g, 64, &cfg()).unwrap();
            for t in [0.2, 0.5, 0.8] {
                assert!((pg.value(t) - pf.value(w.eval(t))).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lipschitz_constant_of_associate() {
        // ‖F″‖ ≤ 2·sup‖f″‖/i² on an interval where ‖f′‖ ≥ i > 0
        let f = spiral_curve(3.0).unwrap();
        let (a, b) = (0.3, 0.9);
        let n = 2000;
        let ts: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let i_min = ts.iter().map(|t| f.speed(*t)).fold(f64::INFINITY, f64::min);
        let m = ts.iter().map(|t| crate::geometry::norm(&f.d2_at(*t))).fold(0.0, f64::max);
        let arc = arc_length_associate(&f, &Config { profile_grid: 256, ..cfg() }).unwrap();
        let (sa, sb) = (arc.profile.value(a), arc.profile.value(b));
        let h = 1e-4;
        for k in 1..100 {
            let s = sa + (sb - sa) * k as f64 / 100.0;
            let p: Vec<Vector> = [-h, 0.0, h].iter().map(|d| arc.eval(s + d)).collect();
            let dd = crate::geometry::norm(&[p[0][0] - 2.0 * p[1][0] + p[2][0], p[0][1] - 2.0 * p[1][1] + p[2][1]])
                / (h * h);
            assert!(dd <= 2.0 * m / (i_min * i_min) + 1e-3);
        }
    }
}
