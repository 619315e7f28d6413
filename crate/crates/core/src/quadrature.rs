//! Adaptive Gauss–Kronrod quadrature and an endpoint-shell integrator for
//! integrands that may blow up at the ends of the interval.

use serde::{Deserialize, Serialize};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Three-way verdict used for every asymptotic finiteness question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converges,
    Diverges,
    Inconclusive,
}

/// One 15-point Kronrod panel. Returns (kronrod estimate, |kronrod − gauss|).
pub fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * x;
        let s = f(c - dx) + f(c + dx);
        kron += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_panels: 400 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod: bisect the panel with the largest error
/// estimate until the summed estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true };
    }
    let (v, e) = gk15(f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut value = v;
    let mut error = e;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol || !value.is_finite() {
            return QuadResult { value, error, converged: value.is_finite() };
        }
        if panels.len() >= opts.max_panels {
            return QuadResult { value, error, converged: false };
        }
        let (idx, _) = panels.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("nonempty");
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // panel is at machine resolution; keep its estimate
            return QuadResult { value, error, converged: false };
        }
        let (lv, le) = gk15(f, pa, mid);
        let (rv, re) = gk15(f, mid, pb);
        value += lv + rv - pv;
        error += le + re - pe;
        panels.push((pa, mid, lv, le));
        panels.push((mid, pb, rv, re));
    }
}

/// Settings for [`integrate_with_shells`].
#[derive(Debug, Clone, Copy)]
pub struct ShellOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_shells: usize,
    /// Shells to compute before a non-decaying sequence is declared divergent.
    pub divergence_shells: usize,
    pub max_shells: usize,
    pub fit_window: usize,
    pub panel: QuadOptions,
}

impl Default for ShellOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            min_shells: 8,
            divergence_shells: 24,
            max_shells: 160,
            fit_window: 6,
            panel: QuadOptions { abs_tol: 1e-300, rel_tol: 1e-11, max_panels: 60 },
        }
    }
}

/// Dyadic shell contributions toward one endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndShells {
    /// Contribution of shell j, the j-th dyadic layer toward the endpoint.
    pub values: Vec<f64>,
    /// Fitted ratio between successive shells.
    pub ratio: f64,
    /// Fitted exponent q for an integrand behaving like dist^q at the endpoint.
    pub exponent: f64,
    pub tail: f64,
    pub verdict: Convergence,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellIntegral {
    pub value: f64,
    pub tail: f64,
    pub left: EndShells,
    pub right: EndShells,
    pub verdict: Convergence,
}

/// Least-squares slope of log2|c_j| against j over the trailing window,
/// returned as the ratio 2^slope. Exact zeros are skipped.
pub fn fitted_ratio(values: &[f64], window: usize) -> Option<f64> {
    let start = values.len().saturating_sub(window);
    let pts: Vec<(f64, f64)> = values[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(j, v)| (j as f64, v.abs().log2()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(2f64.powf(sxy / sxx))
}

fn end_shells<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    anchor: f64,
    direction: f64,
    len: f64,
    running: f64,
    opts: &ShellOptions,
) -> EndShells {
    let mut values = Vec::new();
    let mut total = 0.0;
    let mut verdict = Convergence::Inconclusive;
    let mut ratio = f64::NAN;
    let mut tail = f64::INFINITY;
    for j in 2..opts.max_shells + 2 {
        let outer = len * 0.5f64.powi(j as i32);
        let inner = 0.5 * outer;
        let (p, q) = (anchor + direction * inner, anchor + direction * outer);
        if p == anchor || p == q {
            // reached the floating-point resolution around the endpoint
            break;
        }
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        let r = integrate(f, lo, hi, opts.panel);
        values.push(r.value);
        total += r.value;
        if !total.is_finite() {
            verdict = Convergence::Diverges;
            tail = f64::INFINITY;
            break;
        }
        if values.len() < opts.min_shells {
            continue;
        }
        if values[values.len() - opts.fit_window.min(values.len())..].iter().all(|v| *v == 0.0) {
            ratio = 0.0;
            tail = 0.0;
            verdict = Convergence::Converges;
            break;
        }
        if let Some(rho) = fitted_ratio(&values, opts.fit_window) {
            ratio = rho;
            if rho < 1.0 {
                let last = values.last().copied().unwrap_or(0.0).abs();
                tail = last * rho / (1.0 - rho);
                let scale = (running + total).abs();
                if tail <= opts.abs_tol.max(opts.rel_tol * scale) {
                    verdict = Convergence::Converges;
                    break;
                }
            } else if values.len() >= opts.divergence_shells {
                tail = f64::INFINITY;
                verdict = Convergence::Diverges;
                break;
            }
        }
    }
    if verdict == Convergence::Inconclusive && ratio.is_finite() && ratio < 1.0 {
        // ran out of shells (or resolution) with a decaying sequence
        let last = values.last().copied().unwrap_or(0.0).abs();
        tail = last * ratio / (1.0 - ratio);
        let scale = (running + total).abs();
        if tail <= 1e-3 * scale.max(opts.abs_tol) {
            verdict = Convergence::Converges;
        }
    }
    let exponent = if ratio > 0.0 { -ratio.log2() - 1.0 } else { f64::NAN };
    EndShells { values, ratio, exponent, tail, verdict }
}

/// Integrate over [a, b] with dyadic shells toward both endpoints. The shell
/// sequence is extrapolated geometrically; a non-decaying sequence signals a
/// divergent integral.
pub fn integrate_with_shells<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, opts: ShellOptions) -> ShellIntegral {
    let len = b - a;
    let core = integrate(f, a + 0.25 * len, b - 0.25 * len, opts.panel).value;
    let left = end_shells(f, a, 1.0, len, core, &opts);
    let lsum: f64 = left.values.iter().sum();
    let right = end_shells(f, b, -1.0, len, core + lsum, &opts);
    let rsum: f64 = right.values.iter().sum();
    let value = core + lsum + rsum;
    let tail = left.tail + right.tail;
    let verdict = match (left.verdict, right.verdict) {
        (Convergence::Diverges, _) | (_, Convergence::Diverges) => Convergence::Diverges,
        (Convergence::Converges, Convergence::Converges) => Convergence::Converges,
        _ => Convergence::Inconclusive,
    };
    ShellIntegral { value: value + if tail.is_finite() { tail } else { 0.0 }, tail, left, right, verdict }
}
