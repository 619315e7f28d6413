use serde::Serialize;

use crate::error::{Error, Result};

use super::cubic::PiecewiseCubic;

/// Upper bound on the end slopes relative to ξ·d.
pub const BRIDGE_SLOPE_LIMIT: f64 = 1e-9;

/// C² connector ω on [u, v] with ω(u) = ω(v) = 0, ω′ = c_l on the first
/// third, ω′ = c_r on the last third and max(|ω′|, |ω″|) ≤ ξ. Its second
/// derivative is piecewise linear: a negative hat of height ξ right after
/// u + d/3 brings ω′ down to −9·c_r, a positive hat brings it back up to
/// c_r, and the gap s₀ between them is chosen by bisection so that ω(v) = 0.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeMap {
    pub u: f64,
    pub d: f64,
    pub xi: f64,
    pub c_l: f64,
    pub c_r: f64,
    /// Knots x₀..x₇ of the unreflected construction on [0, d].
    pub knots: [f64; 8],
    pub s0: f64,
    /// Built for swapped slopes and reflected, when c_l > c_r.
    pub reflected: bool,
    #[serde(skip)]
    poly: Option<PiecewiseCubic>,
}

fn hats(d: f64, xi: f64, c_l: f64, c_r: f64, s: f64) -> ([f64; 8], PiecewiseCubic) {
    // p₁ = 2(9c_r + c_l)/ξ makes the first hat take ω′ from c_l to exactly −9c_r
    let p1 = 2.0 * (9.0 * c_r + c_l) / xi;
    let p2 = 20.0 * c_r / xi;
    let widths = [d / 3.0, p1 / 2.0, p1 / 2.0, s, p2 / 2.0, p2 / 2.0, d - d / 3.0 - p1 - s - p2];
    let acc = vec![0.0, 0.0, -xi, 0.0, 0.0, xi, 0.0, 0.0];
    let poly = PiecewiseCubic::from_widths(0.0, &widths, acc, 0.0, c_l);
    let mut knots = [0.0; 8];
    knots.copy_from_slice(poly.knots());
    (knots, poly)
}

pub fn bridge(interval: (f64, f64), xi: f64, c_l: f64, c_r: f64) -> Result<BridgeMap> {
    let (u, v) = interval;
    let d = v - u;
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::HypothesisViolated(format!("bridge needs 0 < d < 1, got d = {d}")));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::HypothesisViolated(format!("bridge needs ξ > 0, got {xi}")));
    }
    if !(c_l >= 0.0 && c_r >= 0.0) {
        return Err(Error::HypothesisViolated(format!("bridge slopes must be nonnegative, got {c_l}, {c_r}")));
    }
    let zero = BridgeMap { u, d, xi, c_l, c_r, knots: [0.0; 8], s0: 0.0, reflected: false, poly: None };
    if c_l == 0.0 && c_r == 0.0 {
        return Ok(zero);
    }
    if c_l.max(c_r) > BRIDGE_SLOPE_LIMIT * xi * d {
        return Err(Error::HypothesisViolated(format!(
            "bridge slopes max({c_l}, {c_r}) exceed {BRIDGE_SLOPE_LIMIT}·ξ·d = {}",
            BRIDGE_SLOPE_LIMIT * xi * d
        )));
    }
    let reflected = c_l > c_r;
    let (a, b) = if reflected { (c_r, c_l) } else { (c_l, c_r) };
    let s_max = d / 3.0 - 2.0 * (9.0 * b + a) / xi - 20.0 * b / xi;
    let g = |s: f64| hats(d, xi, a, b, s).1.eval(d).0;
    let (mut lo, mut hi) = (0.0, s_max);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::RootNotBracketed(format!("bridge gap: g(0) = {}, g({s_max}) = {}", g(lo), g(hi))));
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s0 = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let (knots, poly) = hats(d, xi, a, b, s0);
    Ok(BridgeMap { knots, s0, reflected, poly: Some(poly), ..zero })
}

impl BridgeMap {
    /// (ω, ω′, ω″) at x ∈ [u, u + d].
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let Some(poly) = &self.poly else {
            return (0.0, 0.0, 0.0);
        };
        let local = (x - self.u).clamp(0.0, self.d);
        if self.reflected {
            let (w, w1, w2) = poly.eval(self.d - local);
            (-w, w1, -w2)
        } else {
            poly.eval(local)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_none()
    }
}
