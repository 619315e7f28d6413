use serde::Serialize;

use crate::curve_model::CurveSource;
use crate::decision::Mode;
use crate::geometry::{distance, norm, Vector};

use super::assemble::CompositeHomeomorphism;

/// Below this level second differences count as zero.
const SECOND_DIFF_FLOOR: f64 = 1e-6;
/// Accepted ratio band for the sup of second differences under refinement.
pub const RATIO_BAND: (f64, f64) = (0.8, 1.25);
/// Radii 2^{−k} of the local windows of the C² check.
const LOCAL_RADII: std::ops::RangeInclusive<i32> = 4..=20;
/// Relative accuracy assumed for curve evaluations; second differences of
/// step e carry noise up to NOISE·‖f‖/e².
const NOISE: f64 = 1e-14;
/// A radius is resolved while that noise stays below this share of the peak.
const NOISE_SHARE: f64 = 1e-2;
/// Largest number of H-points inspected.
const MAX_POINTS: usize = 20;

/// Increasing map of [0,1] onto the curve's domain.
pub trait Reparametrization {
    fn eval(&self, x: f64) -> f64;

    /// Points of h⁻¹(H) to inspect; by default the ends of [0,1].
    fn boundary_points(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

impl Reparametrization for CompositeHomeomorphism {
    fn eval(&self, x: f64) -> f64 {
        CompositeHomeomorphism::eval(self, x)
    }

    fn boundary_points(&self) -> Vec<f64> {
        CompositeHomeomorphism::boundary_points(self)
    }
}

/// Reparametrization given by a closure.
pub struct FnReparametrization<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> Reparametrization for FnReparametrization<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Oscillation sup |D_e(x) − D_e(z)| over |x − z| ≤ r around one point z
/// of h⁻¹(H), with D_e the second difference of step e = r/16, and its
/// running maximum over the nested windows inside r.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusRow {
    pub point: f64,
    pub radii: Vec<f64>,
    pub oscillation: Vec<f64>,
    pub modulus: Vec<f64>,
    /// Leading radii whose evaluation noise is small against the peak.
    pub resolved: usize,
    pub shrinking: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub grids: Vec<usize>,
    pub sup_second_diff: Vec<f64>,
    pub ratios: Vec<f64>,
    pub stabilized: bool,
    pub continuity_modulus_profile: Vec<ModulusRow>,
    pub pass: bool,
}

fn second_differences(values: &[Vector], stride: usize, n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (1..n)
        .map(|i| {
            let (a, b, c) = (&values[(i - 1) * stride], &values[i * stride], &values[(i + 1) * stride]);
            let norm: f64 = a.iter().zip(b).zip(c).map(|((a, b), c)| (a - 2.0 * b + c).powi(2)).sum::<f64>().sqrt();
            norm / (h * h)
        })
        .collect()
}

fn spread(points: Vec<f64>) -> Vec<f64> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let step = (points.len() - 1) as f64 / (MAX_POINTS - 1) as f64;
    (0..MAX_POINTS).map(|i| points[(i as f64 * step).round() as usize]).collect()
}

/// Central second differences of f∘h on the nested grids n, 2n, 4n.
/// Bounded-second-derivative mode passes when their sup stabilizes; C²
/// mode also needs the modulus of continuity of second differences at
/// every inspected point z of h⁻¹(H) to shrink: over windows of radius
/// 2⁻⁴ … 2⁻²⁰ with the step shrinking alongside, the oscillation within the
/// finest radius the evaluation noise resolves must be at most a quarter
/// of that within the widest.
pub fn verify_smoothness(curve: &CurveSource, h: &dyn Reparametrization, grid: usize, mode: Mode) -> SmoothnessReport {
    let n0 = grid.max(8);
    let grids = vec![n0, 2 * n0, 4 * n0];
    let finest = grids[2];
    let values: Vec<Vector> = (0..=finest).map(|i| curve.at(h.eval(i as f64 / finest as f64))).collect();
    let diffs: Vec<Vec<f64>> = grids.iter().map(|&n| second_differences(&values, finest / n, n)).collect();
    let sup_second_diff: Vec<f64> = diffs.iter().map(|d| d.iter().copied().fold(0.0, f64::max)).collect();
    let ratios: Vec<f64> =
        sup_second_diff.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::INFINITY }).collect();
    let stabilized = sup_second_diff.iter().all(|s| s.is_finite())
        && (sup_second_diff[2] <= SECOND_DIFF_FLOOR || ratios.iter().all(|r| *r >= RATIO_BAND.0 && *r <= RATIO_BAND.1));
    let mut profile = Vec::new();
    if mode == Mode::C2 {
        let floor = SECOND_DIFF_FLOOR.max(1e-6 * sup_second_diff[2]);
        let g = |x: f64| curve.at(h.eval(x.clamp(0.0, 1.0)));
        let second = |x: f64, e: f64| {
            let x = x.clamp(e, 1.0 - e);
            let (a, b, c) = (g(x - e), g(x), g(x + e));
            a.iter().zip(&b).zip(&c).map(|((a, b), c)| (a - 2.0 * b + c).powi(2)).sum::<f64>().sqrt() / (e * e)
        };
        for z in spread(h.boundary_points()) {
            let mut radii = Vec::new();
            let mut oscillation = Vec::new();
            let mut noise = Vec::new();
            for k in LOCAL_RADII {
                let r = 2f64.powi(-k);
                let e = r / 16.0;
                let reference = second(z, e);
                let osc = (-16..=16).map(|j| (second(z + j as f64 * e, e) - reference).abs()).fold(0.0, f64::max);
                let scale = [z - r, z, z + r].iter().map(|x| norm(&g(*x))).fold(0.0, f64::max);
                radii.push(r);
                oscillation.push(osc);
                noise.push(NOISE * scale / (e * e));
            }
            // windows nest, so the modulus at r is at least every oscillation inside it
            let mut modulus = oscillation.clone();
            for i in (0..modulus.len() - 1).rev() {
                modulus[i] = modulus[i].max(modulus[i + 1]);
            }
            let peak = modulus[0];
            let resolved = noise.iter().take_while(|n| **n <= NOISE_SHARE * peak).count();
            let shrinking = peak <= floor || (resolved >= 2 && modulus[resolved - 1] <= 0.25 * peak + floor);
            profile.push(ModulusRow { point: z, radii, oscillation, modulus, resolved, shrinking });
        }
    }
    let pass = stabilized && profile.iter().all(|r| r.shrinking);
    SmoothnessReport { grids, sup_second_diff, ratios, stabilized, continuity_modulus_profile: profile, pass }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryDerivative {
    pub point: f64,
    /// (step, ‖(f∘h)(z ± step) − (f∘h)(z)‖ / step), larger of the two sides.
    pub quotients: Vec<(f64, f64)>,
    pub derivative: f64,
    /// derivative / step at the finest step.
    pub slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub tol: f64,
    pub points: Vec<BoundaryDerivative>,
    pub pass: bool,
}

/// One-sided difference quotients of f∘h at the given points of h⁻¹(H)
/// for steps 2⁻⁶ … 2⁻²⁴; a point passes when the quotient at the finest
/// step is at most `tol`.
pub fn zero_derivative_at_boundary(
    curve: &CurveSource,
    h: &dyn Reparametrization,
    points: &[f64],
    tol: f64,
) -> BoundaryReport {
    let g = |x: f64| curve.at(h.eval(x.clamp(0.0, 1.0)));
    let rows: Vec<BoundaryDerivative> = spread(points.to_vec())
        .into_iter()
        .map(|z| {
            let gz = g(z);
            let quotients: Vec<(f64, f64)> = (6..=24)
                .map(|k| {
                    let e = 2f64.powi(-k);
                    let right = if z + e <= 1.0 { distance(&g(z + e), &gz) / e } else { 0.0 };
                    let left = if z - e >= 0.0 { distance(&g(z - e), &gz) / e } else { 0.0 };
                    (e, right.max(left))
                })
                .collect();
            let (step, derivative) = *quotients.last().expect("nonempty");
            BoundaryDerivative { point: z, derivative, slope: derivative / step, pass: derivative <= tol, quotients }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    BoundaryReport { tol, points: rows, pass }
}

/// ‖(f∘h)′(x)‖ by a central difference with step `step`.
pub fn derivative_norm(curve: &CurveSource, h: &dyn Reparametrization, x: f64, step: f64) -> f64 {
    let (a, b) = ((x - step).max(0.0), (x + step).min(1.0));
    distance(&curve.at(h.eval(b)), &curve.at(h.eval(a))) / (b - a)
}
