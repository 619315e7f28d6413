//! Generators for the reference curves: spirals, prescribed-curvature curves,
//! phase integrals with Volterra-type phases, and the sets that drive them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{from_slice, Vector};
use crate::ode;
use crate::quadrature::{integrate, QuadOptions};

use super::curve::{CurvatureLimit, CurveSource, IntervalSet, KnownClassification, ScalarFunction};

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Signed curvature det(f′, f″)/‖f′‖³ of the spiral t^s e^{i/t}.
pub fn spiral_oriented_curvature(s: f64, t: f64) -> f64 {
    (s * (1.0 - s) * t * t - 1.0) * t.powf(-s) / (1.0 + s * s * t * t).powf(1.5)
}

/// The spiral f(t) = t^s (cos 1/t, sin 1/t) with f(0) = 0.
pub fn spiral_curve(s: f64) -> Result<CurveSource> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("spiral exponent must be positive, got {s}")));
    }
    let rot = |t: f64| ((1.0 / t).cos(), (1.0 / t).sin());
    let eval = move |t: f64| {
        if t <= 0.0 {
            return from_slice(&[0.0, 0.0]);
        }
        let r = t.powf(s);
        let (c, si) = rot(t);
        from_slice(&[r * c, r * si])
    };
    let d1 = move |t: f64| {
        if t <= 0.0 {
            return from_slice(&[0.0, 0.0]);
        }
        let z = cmul(rot(t), (s * t, -1.0));
        let m = t.powf(s - 2.0);
        from_slice(&[m * z.0, m * z.1])
    };
    let d2 = move |t: f64| {
        if t <= 0.0 {
            return from_slice(&[0.0, 0.0]);
        }
        let z = cmul(rot(t), ((s * s - s) * t * t - 1.0, -(2.0 * s - 2.0) * t));
        let m = t.powf(s - 4.0);
        from_slice(&[m * z.0, m * z.1])
    };
    let known = KnownClassification { bv: s > 1.0, c2: s > 2.0, d2inf: s > 2.0, singular_set: None };
    Ok(CurveSource::new(2, eval)
        .with_d1(d1)
        .with_d2(d2)
        .with_curvature(move |t| if t <= 0.0 { f64::INFINITY } else { spiral_oriented_curvature(s, t).abs() })
        .with_kind(format!("spiral(s={s})"))
        .with_known(known)
        .with_regular_sets(Some(IntervalSet::whole(0.0, 1.0)), Some(IntervalSet::whole(0.0, 1.0))))
}

/// Straight segment f(t) = (t, 0).
pub fn line_segment() -> CurveSource {
    CurveSource::new(2, |t| from_slice(&[t, 0.0]))
        .with_d1(|_| from_slice(&[1.0, 0.0]))
        .with_d2(|_| from_slice(&[0.0, 0.0]))
        .with_kind("line")
        .with_known(KnownClassification { bv: true, c2: true, d2inf: true, singular_set: None })
        .with_regular_sets(Some(IntervalSet::whole(0.0, 1.0)), Some(IntervalSet::whole(0.0, 1.0)))
}

/// Circle arc of curvature `c` and arc length `length`, parametrized on [0,1]
/// with constant speed `length`.
pub fn circle_arc(c: f64, length: f64) -> Result<CurveSource> {
    if !(c > 0.0) || !(length > 0.0) {
        return Err(Error::InvalidParameter(format!("circle arc needs c > 0 and length > 0, got {c}, {length}")));
    }
    let w = c * length;
    Ok(CurveSource::new(2, move |t| from_slice(&[(w * t).sin() / c, (1.0 - (w * t).cos()) / c]))
        .with_d1(move |t| from_slice(&[length * (w * t).cos(), length * (w * t).sin()]))
        .with_d2(move |t| from_slice(&[-length * w * (w * t).sin(), length * w * (w * t).cos()]))
        .with_curvature(move |_| c)
        .with_kind(format!("circle(c={c},L={length})"))
        .with_known(KnownClassification { bv: true, c2: true, d2inf: true, singular_set: None })
        .with_regular_sets(Some(IntervalSet::whole(0.0, 1.0)), Some(IntervalSet::whole(0.0, 1.0))))
}

/// Trajectory of θ′ = k, x′ = cos θ, y′ = sin θ stored as accepted ODE nodes.
struct Trajectory {
    k: ScalarFunction,
    nodes: Vec<(f64, [f64; 3])>,
}

impl Trajectory {
    fn rhs(k: &ScalarFunction) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
        move |t, y| [k.eval(t), y[0].cos(), y[0].sin()]
    }

    fn state(&self, t: f64) -> [f64; 3] {
        let idx = self.nodes.partition_point(|(tn, _)| *tn <= t).max(1) - 1;
        let (t0, y0) = self.nodes[idx];
        if t == t0 {
            return y0;
        }
        ode::step(&Self::rhs(&self.k), t0, &y0, t - t0).0
    }
}

/// Plane curve parametrized by arc length whose curvature is `k`.
pub fn prescribed_curvature_curve(k: ScalarFunction) -> Result<CurveSource> {
    let (lo, hi) = k.domain;
    let mut knots: Vec<f64> = vec![lo, hi];
    knots.extend(k.breakpoints.iter().copied().filter(|x| *x > lo && *x < hi));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    for i in 0..=2000 {
        let t = lo + (hi - lo) * (i as f64 / 2000.0);
        let v = k.eval(t);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("curvature must be positive, k({t}) = {v}")));
        }
    }
    for &t in &knots {
        if !(k.eval(t) > 0.0) {
            return Err(Error::InvalidParameter(format!("curvature must be positive, k({t}) = {}", k.eval(t))));
        }
    }
    let mut nodes: Vec<(f64, [f64; 3])> = vec![(lo, [0.0; 3])];
    let rhs = Trajectory::rhs(&k);
    for w in knots.windows(2) {
        let y0 = nodes.last().expect("nonempty").1;
        let max_step = (w[1] - w[0]).min((hi - lo) / 128.0);
        let seg = ode::integrate_adaptive(&rhs, w[0], y0, w[1], 1e-10, max_step)?;
        nodes.extend(seg.into_iter().skip(1));
    }
    let traj = Arc::new(Trajectory { k: k.clone(), nodes });
    let (te, t1, t2) = (traj.clone(), traj.clone(), traj);
    let kk = k.clone();
    Ok(CurveSource::new(2, move |t| {
        let y = te.state(t);
        from_slice(&[y[1], y[2]])
    })
    .with_domain(lo, hi)
    .with_d1(move |t| {
        let th = t1.state(t)[0];
        from_slice(&[th.cos(), th.sin()])
    })
    .with_d2(move |t| {
        let th = t2.state(t)[0];
        let kv = t2.k.eval(t);
        from_slice(&[-kv * th.sin(), kv * th.cos()])
    })
    .with_curvature(move |t| kk.eval(t))
    .with_kind("prescribed_curvature")
    .with_breakpoints(k.breakpoints.clone())
    .with_regular_sets(Some(IntervalSet::whole(lo, hi)), Some(IntervalSet::whole(lo, hi))))
}

/// Accepted ODE node times of a prescribed-curvature construction, exposed for
/// diagnostics: the unit-speed check is made at these points.
pub fn ode_nodes(k: &ScalarFunction) -> Result<Vec<f64>> {
    let (lo, hi) = k.domain;
    let mut knots: Vec<f64> = vec![lo, hi];
    knots.extend(k.breakpoints.iter().copied().filter(|x| *x > lo && *x < hi));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let rhs = Trajectory::rhs(k);
    let mut out = vec![lo];
    let mut y0 = [0.0; 3];
    for w in knots.windows(2) {
        let seg = ode::integrate_adaptive(&rhs, w[0], y0, w[1], 1e-10, (w[1] - w[0]).min((hi - lo) / 128.0))?;
        y0 = seg.last().expect("nonempty").1;
        out.extend(seg.into_iter().skip(1).map(|(t, _)| t));
    }
    Ok(out)
}

/// Table of cumulative values of ∫ e^{iφ} at knots, for cheap evaluation.
struct PhaseTable {
    phi: ScalarFunction,
    knots: Vec<f64>,
    values: Vec<(f64, f64)>,
}

const PHASE_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_panels: 4000 };
const EVAL_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_panels: 200 };

impl PhaseTable {
    fn segment(phi: &ScalarFunction, a: f64, b: f64) -> Result<(f64, f64)> {
        if b <= a {
            return Ok((0.0, 0.0));
        }
        // cos φ − 1 keeps the integrand small where φ is near zero
        let c = integrate(&|t: f64| -2.0 * (0.5 * phi.eval(t)).sin().powi(2), a, b, PHASE_QUAD);
        let s = integrate(&|t: f64| phi.eval(t).sin(), a, b, PHASE_QUAD);
        if (!c.converged || !s.converged) && c.error.max(s.error) > 1e-9 * (b - a) + 1e-12 {
            return Err(Error::IntegrationFailure(format!(
                "phase integral on [{a}, {b}] did not converge (error {:e})",
                c.error.max(s.error)
            )));
        }
        Ok((c.value + (b - a), s.value))
    }

    /// Table value at the nearer knot plus the integral from it to x; the
    /// tolerance is looser than for the table itself, where errors would
    /// accumulate.
    fn at(&self, x: f64) -> (f64, f64) {
        let right = self.knots.partition_point(|k| *k <= x).clamp(1, self.knots.len() - 1);
        let idx = if self.knots[right] - x < x - self.knots[right - 1] { right } else { right - 1 };
        let (k, (c0, s0)) = (self.knots[idx], self.values[idx]);
        let (a, b, sign) = if x >= k { (k, x, 1.0) } else { (x, k, -1.0) };
        if b <= a {
            return (c0, s0);
        }
        let c = integrate(&|t: f64| -2.0 * (0.5 * self.phi.eval(t)).sin().powi(2), a, b, EVAL_QUAD).value + (b - a);
        let s = integrate(&|t: f64| self.phi.eval(t).sin(), a, b, EVAL_QUAD).value;
        (c0 + sign * c, s0 + sign * s)
    }
}

/// f(x) = ∫₀ˣ e^{iφ(t)} dt, an arc-length parametrized plane curve.
pub fn phase_integral_curve(phi: ScalarFunction) -> Result<CurveSource> {
    let (lo, hi) = phi.domain;
    let mut knots: Vec<f64> = (0..=256).map(|i| lo + (hi - lo) * i as f64 / 256.0).collect();
    knots.extend(phi.breakpoints.iter().copied().filter(|x| *x > lo && *x < hi));
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut values = Vec::with_capacity(knots.len());
    let mut acc = (0.0, 0.0);
    values.push(acc);
    for w in knots.windows(2) {
        let (c, s) = PhaseTable::segment(&phi, w[0], w[1])?;
        acc = (acc.0 + c, acc.1 + s);
        values.push(acc);
    }
    let table = Arc::new(PhaseTable { phi: phi.clone(), knots, values });
    let (p1, p2) = (phi.clone(), phi.clone());
    let has_d1 = phi.has_d1();
    let breakpoints = phi.breakpoints.clone();
    let mut curve = CurveSource::new(2, move |x| {
        let (c, s) = table.at(x);
        from_slice(&[c, s])
    })
    .with_domain(lo, hi)
    .with_d1(move |x| {
        let p = p1.eval(x);
        from_slice(&[p.cos(), p.sin()])
    })
    .with_kind("phase_integral")
    .with_breakpoints(breakpoints);
    if has_d1 {
        curve = curve
            .with_d2(move |x| {
                let p = p2.eval(x);
                let dp = p2.d1(x);
                from_slice(&[-dp * p.sin(), dp * p.cos()])
            })
            .with_curvature(move |x| phi.d1(x).abs());
    }
    Ok(curve)
}

/// Volterra-type bump c·p² sin(1/p), p = (x−a)(b−x), on (a,b), scaled so that
/// its derivative is bounded by 1 and oscillates with amplitude close to 1
/// at both ends.
fn bump(a: f64, b: f64, x: f64) -> (f64, f64) {
    let len = b - a;
    let c = 1.0 / (len * (1.0 + 0.5 * len * len));
    let p = (x - a) * (b - x);
    if p <= 0.0 {
        return (0.0, 0.0);
    }
    let dp = a + b - 2.0 * x;
    let (s, co) = (1.0 / p).sin_cos();
    (c * p * p * s, c * dp * (2.0 * p * s - co))
}

/// One-sided curvature limsups of a bump phase curve at the component ends,
/// where |φ′| oscillates with amplitude c·len = 1/(1 + len²/2).
fn bump_curvature_limits(g: &IntervalSet) -> Vec<CurvatureLimit> {
    let mut out: Vec<CurvatureLimit> = Vec::new();
    for &(a, b) in &g.intervals {
        let amp = 1.0 / (1.0 + 0.5 * (b - a) * (b - a));
        match out.last_mut() {
            Some(l) if l.point == a => l.right = amp,
            _ => out.push(CurvatureLimit { point: a, left: 0.0, right: amp }),
        }
        out.push(CurvatureLimit { point: b, left: amp, right: 0.0 });
    }
    out
}

/// φ with |φ′| ≤ 1 whose derivative is discontinuous exactly at the boundary
/// points of the components of `g` (the complement of the closed set C).
pub fn bounded_derivative_function(g: &IntervalSet) -> Result<ScalarFunction> {
    let checked = IntervalSet::new(g.intervals.clone())?;
    let set = Arc::new(checked.clone());
    let s2 = set.clone();
    Ok(ScalarFunction::new((0.0, 1.0), move |x| match set.locate(x) {
        Some(i) => bump(set.intervals[i].0, set.intervals[i].1, x).0,
        None => 0.0,
    })
    .with_d1(move |x| match s2.locate(x) {
        Some(i) => bump(s2.intervals[i].0, s2.intervals[i].1, x).1,
        None => 0.0,
    })
    .with_breakpoints(checked.boundary_points()))
}

/// Complement intervals of a symmetric Cantor-type set: each generation
/// removes the concentric open middle part of relative length `ratio`.
/// The closed intervals still present after `depth` generations form the
/// residual.
pub fn cantor_like_set(ratio: f64, depth: usize) -> Result<IntervalSet> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("delete ratio must lie in (0,1), got {ratio}")));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let mut remaining = vec![(0.0_f64, 1.0_f64)];
    let mut removed = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(remaining.len() * 2);
        for (a, b) in remaining {
            let len = b - a;
            let side = 0.5 * (1.0 - ratio) * len;
            removed.push((a + side, b - side));
            next.push((a, a + side));
            next.push((b - side, b));
        }
        remaining = next;
    }
    Ok(IntervalSet::new(removed)?.with_residual(remaining))
}

/// Components (1/(n+1), 1/n), n = 1..=depth, of the complement of
/// {0} ∪ {1/n}; the unresolved part [0, 1/(depth+1)] is the residual.
pub fn harmonic_set(depth: usize) -> Result<IntervalSet> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let ivs = (1..=depth).map(|n| (1.0 / (n as f64 + 1.0), 1.0 / n as f64)).collect();
    Ok(IntervalSet::new(ivs)?.with_residual(vec![(0.0, 1.0 / (depth as f64 + 1.0))]))
}

/// Phase-integral curve whose phase derivative jumps on the boundary of
/// the given set: the C² singular set is the closure of those points, while
/// the curvature stays bounded by 1.
pub fn bump_phase_curve(g: IntervalSet, kind: &str, known: KnownClassification) -> Result<CurveSource> {
    let phi = bounded_derivative_function(&g)?;
    Ok(phase_integral_curve(phi)?
        .with_kind(kind.to_string())
        .with_known(known)
        .with_curvature_limits(bump_curvature_limits(&g))
        .with_regular_sets(Some(g), Some(IntervalSet::whole(0.0, 1.0))))
}

/// Phase curve over a Cantor-type set. C²-reparametrizable iff the component
/// √-length series converges, which for the symmetric construction means
/// ratio > 1/2.
pub fn cantor_phase_curve(ratio: f64, depth: usize) -> Result<CurveSource> {
    let g = cantor_like_set(ratio, depth)?;
    let known = KnownClassification { bv: true, c2: ratio > 0.5, d2inf: true, singular_set: Some("cantor".into()) };
    bump_phase_curve(g, &format!("cantor_phase(ratio={ratio},depth={depth})"), known)
}

/// Phase curve over {1/n}: D^{2,∞}- but not C²-reparametrizable.
pub fn harmonic_phase_curve(depth: usize) -> Result<CurveSource> {
    let g = harmonic_set(depth)?;
    let known = KnownClassification { bv: true, c2: false, d2inf: true, singular_set: Some("harmonic".into()) };
    bump_phase_curve(g, &format!("harmonic_phase(depth={depth})"), known)
}

/// Smooth bump exp(1 − 1/(1−u²)) on |u| < 1, peak 1 at u = 0.
fn smooth_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// One cell of the curvature profile: I_n with its concentrated peak J_n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakCell {
    pub n: usize,
    pub cell: (f64, f64),
    pub peak: (f64, f64),
}

/// Curvature profile with peaks n⁴ on J_n ⊂ I_n, λ(I_n) = c/n², λ(J_n) = c/n⁴
/// and base level ½ elsewhere. The cells accumulate at both ends of [0,1]
/// symmetrically around ½, and c = 3/π² makes their lengths sum to 1.
#[derive(Debug, Clone)]
pub struct PeakProfile {
    pub c: f64,
    pub depth: usize,
    pub cells: Vec<PeakCell>,
    pub k: ScalarFunction,
}

pub const PEAK_BASE: f64 = 0.5;

impl PeakProfile {
    /// I_n for n = 1..=count on both sides, computed analytically (no
    /// truncation by the resolved depth).
    pub fn analytic_cells(&self, count: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * count);
        let mut h = 0.0;
        for n in 1..=count {
            let next = h + 1.0 / (n as f64 * n as f64);
            out.push((0.5 - self.c * next, 0.5 - self.c * h));
            out.push((0.5 + self.c * h, 0.5 + self.c * next));
            h = next;
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

pub fn peak_profile(depth: usize) -> Result<PeakProfile> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let c = 3.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let mut cells = Vec::with_capacity(2 * depth);
    let mut h = 0.0;
    for n in 1..=depth {
        let nf = n as f64;
        let next = h + 1.0 / (nf * nf);
        let half = 0.5 * c / nf.powi(4);
        for cell in [(0.5 - c * next, 0.5 - c * h), (0.5 + c * h, 0.5 + c * next)] {
            let mid = 0.5 * (cell.0 + cell.1);
            let peak = if n == 1 { cell } else { (mid - half, mid + half) };
            cells.push(PeakCell { n, cell, peak });
        }
        h = next;
    }
    cells.sort_by(|a, b| a.peak.0.total_cmp(&b.peak.0));
    let shared = Arc::new(cells.clone());
    let lookup = shared.clone();
    let k = ScalarFunction::new((0.0, 1.0), move |t| {
        let idx = lookup.partition_point(|pc| pc.peak.0 <= t);
        if idx == 0 {
            return PEAK_BASE;
        }
        let pc = lookup[idx - 1];
        let (a, b) = pc.peak;
        if t >= b {
            return PEAK_BASE;
        }
        let u = (2.0 * t - a - b) / (b - a);
        let top = (pc.n as f64).powi(4);
        PEAK_BASE + (top - PEAK_BASE) * smooth_bump(u)
    })
    .with_breakpoints(shared.iter().flat_map(|pc| [pc.peak.0, 0.5 * (pc.peak.0 + pc.peak.1), pc.peak.1]).collect());
    Ok(PeakProfile { c, depth, cells, k })
}

/// Prescribed-curvature curve for the peak profile: ∫√κ is finite while the
/// cells I_n form an admissible system with divergent Σ√λ(I_n).
pub fn peak_curvature_curve(depth: usize) -> Result<(CurveSource, PeakProfile)> {
    let profile = peak_profile(depth)?;
    // beyond the generated cells the peaks continue: those end pieces are unresolved
    let reach = profile
        .cells
        .iter()
        .map(|pc| (pc.cell.0, pc.cell.1))
        .fold((0.5f64, 0.5f64), |r, c| (r.0.min(c.0), r.1.max(c.1)));
    let g = IntervalSet::new(vec![reach])?.with_residual(vec![(0.0, reach.0), (reach.1, 1.0)]);
    let curve = prescribed_curvature_curve(profile.k.clone())?
        .with_kind(format!("peak_curvature(depth={depth})"))
        .with_known(KnownClassification { bv: true, c2: false, d2inf: false, singular_set: Some("endpoints".into()) })
        .with_regular_sets(Some(g.clone()), Some(g));
    Ok((curve, profile))
}

/// CSV samples of a curve: header `t,x_1,…,x_n`, `samples + 1` uniform rows.
pub fn sample_csv(curve: &CurveSource, samples: usize) -> String {
    let (lo, hi) = curve.domain();
    let mut out = String::from("t");
    for i in 1..=curve.dim() {
        out.push_str(&format!(",x_{i}"));
    }
    out.push('\n');
    let n = samples.max(1);
    for i in 0..=n {
        let t = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
        let p: Vector = curve.at(t);
        out.push_str(&format!("{t:.17e}"));
        for x in &p {
            out.push_str(&format!(",{x:.17e}"));
        }
        out.push('\n');
    }
    out
}
