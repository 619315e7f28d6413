use serde::Serialize;

use crate::error::{Error, Result};

use super::bridge::{bridge, BridgeMap};
use super::cubic::PiecewiseCubic;

/// Upper bound on the end slopes relative to d²·η.
pub const RAMP_SLOPE_LIMIT: f64 = 1e-10;
/// Constant in the slope bound 19·√(ηV) and the curvature bound 19·η.
pub const RAMP_BOUND: f64 = 19.0;

/// Increasing C² bijection φ of I = [u, v] onto J = [j₀, j₀ + V] with
/// prescribed end slopes, vanishing end second derivatives and
/// 0 < φ′ ≤ 19√(ηV), |φ″| ≤ 19η. The base map Ψ is the scaled second
/// antiderivative τ of a two-hat profile π (height η at d/6, −η at 5d/6);
/// nonzero end slopes add a bridge with ξ = dη/7.
#[derive(Debug, Clone, Serialize)]
pub struct RampMap {
    pub u: f64,
    pub d: f64,
    pub j0: f64,
    pub v: f64,
    pub eta: f64,
    pub c_l: f64,
    pub c_r: f64,
    /// ηd²/τ(d), the factor turning τ into Ψ.
    pub scale: f64,
    #[serde(skip)]
    tau_total: f64,
    pub bridge: Option<BridgeMap>,
    #[serde(skip)]
    tau: PiecewiseCubic,
}

pub fn ramp(v: f64, interval: (f64, f64), j0: f64, eta: f64, c_l: f64, c_r: f64) -> Result<RampMap> {
    let (u, end) = interval;
    let len = end - u;
    if !(v > 0.0 && eta > 0.0 && v.is_finite() && eta.is_finite()) {
        return Err(Error::HypothesisViolated(format!("ramp needs V > 0 and η > 0, got V = {v}, η = {eta}")));
    }
    let d = (v / eta).sqrt();
    if !(d < 1.0) {
        return Err(Error::HypothesisViolated(format!("ramp needs d = √(V/η) < 1, got {d}")));
    }
    // representability of the endpoints bounds how well λ(I) can match d
    if !((len - d).abs() <= 1e-9 * d + 4.0 * f64::EPSILON * (u.abs() + end.abs())) {
        return Err(Error::HypothesisViolated(format!("source length {len} differs from d = {d}")));
    }
    if !(c_l >= 0.0 && c_r >= 0.0) || c_l.max(c_r) > RAMP_SLOPE_LIMIT * d * d * eta {
        return Err(Error::HypothesisViolated(format!(
            "ramp slopes ({c_l}, {c_r}) must lie in [0, {}]",
            RAMP_SLOPE_LIMIT * d * d * eta
        )));
    }
    let knots: Vec<f64> = (0..=6).map(|i| len * i as f64 / 6.0).collect();
    let pi = vec![0.0, eta, 0.0, 0.0, 0.0, -eta, 0.0];
    let tau = PiecewiseCubic::from_second_derivative(knots, pi, 0.0, 0.0);
    let tau_total = tau.eval(len).0;
    let scale = v / tau_total;
    let bridge = if c_l.max(c_r) > 0.0 { Some(bridge((u, end), len * eta / 7.0, c_l, c_r)?) } else { None };
    let map = RampMap { u, d: len, j0, v, eta, c_l, c_r, scale, tau_total, bridge, tau };
    for i in 1..2000 {
        let x = u + len * i as f64 / 2000.0;
        if !(map.eval(x).1 > 0.0) {
            return Err(Error::HypothesisViolated(format!("ramp derivative vanishes at {x}")));
        }
    }
    Ok(map)
}

impl RampMap {
    /// (φ, φ′, φ″) at x ∈ [u, u + d].
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let local = (x - self.u).clamp(0.0, self.d);
        // π is odd about d/2, so τ(x) = τ(d) − τ(d − x); this keeps Ψ′(d) = 0 exact
        let (t0, t1, t2) = if local <= 0.5 * self.d {
            self.tau.eval(local)
        } else {
            let (r0, r1, r2) = self.tau.eval(self.d - local);
            (self.tau_total - r0, r1, -r2)
        };
        let (w0, w1, w2) = self.bridge.as_ref().map_or((0.0, 0.0, 0.0), |b| b.eval(x));
        (self.j0 + self.scale * t0 + w0, self.scale * t1 + w1, self.scale * t2 + w2)
    }

    pub fn source(&self) -> (f64, f64) {
        (self.u, self.u + self.d)
    }

    pub fn target(&self) -> (f64, f64) {
        (self.j0, self.j0 + self.v)
    }

    /// φ⁻¹(s) by safeguarded Newton iteration.
    pub fn inverse(&self, s: f64) -> f64 {
        let (mut l, mut r) = self.source();
        if s <= self.j0 {
            return l;
        }
        if s >= self.j0 + self.v {
            return r;
        }
        let mut x = l + (r - l) * (s - self.j0) / self.v;
        for _ in 0..200 {
            let (p, dp, _) = self.eval(x);
            if p >= s {
                r = x;
            } else {
                l = x;
            }
            if p == s || r - l <= 2.0 * f64::EPSILON * r.abs().max(1.0) {
                break;
            }
            let next = x - (p - s) / dp;
            x = if next.is_finite() && next > l && next < r { next } else { 0.5 * (l + r) };
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn conclusions_hold(m: &RampMap) -> std::result::Result<(), String> {
        let (u, e) = m.source();
        let slope_cap = RAMP_BOUND * (m.eta * m.v).sqrt() * (1.0 + 1e-9);
        let curv_cap = RAMP_BOUND * m.eta * (1.0 + 1e-9);
        let (p0, d0, a0) = m.eval(u);
        let (p1, d1, a1) = m.eval(e);
        let tol = 1e-9;
        let ctol = tol * m.c_l.max(m.c_r);
        let room = tol * m.v + 4.0 * f64::EPSILON * m.j0.abs();
        if (p0 - m.j0).abs() > room || (p1 - m.j0 - m.v).abs() > room {
            return Err(format!("endpoint values {p0} {p1}"));
        }
        if (d0 - m.c_l).abs() > ctol || (d1 - m.c_r).abs() > ctol {
            return Err(format!("end slopes {d0} {d1} vs {} {}", m.c_l, m.c_r));
        }
        if a0.abs() > tol * curv_cap || a1.abs() > tol * curv_cap {
            return Err(format!("end second derivatives {a0} {a1}"));
        }
        let mut prev = p0;
        for i in 1..1000 {
            let x = u + m.d * i as f64 / 1000.0;
            let (p, dp, ddp) = m.eval(x);
            if !(dp > 0.0) || dp > slope_cap || ddp.abs() > curv_cap || p < prev {
                return Err(format!("interior at {x}: φ′ = {dp} (cap {slope_cap}), φ″ = {ddp} (cap {curv_cap})"));
            }
            prev = p;
        }
        Ok(())
    }

    #[test]
    fn zero_slopes_give_the_base_map() {
        let (v, eta) = (0.09, 1.0);
        let m = ramp(v, (0.0, 0.3), 0.0, eta, 0.0, 0.0).unwrap();
        assert!(m.bridge.is_none());
        assert_eq!(m.eval(0.0).1, 0.0);
        assert!(m.eval(0.3).1.abs() < 1e-15);
        assert!((m.eval(0.3).0 - eta * 0.09).abs() < 1e-15);
        conclusions_hold(&m).unwrap();
    }

    #[test]
    fn middle_third_floor() {
        let (v, eta) = (0.04f64, 0.25);
        let d = (v / eta).sqrt();
        let cap = RAMP_SLOPE_LIMIT * d * d * eta;
        let m = ramp(v, (1.0, 1.0 + d), 2.0, eta, cap, 0.5 * cap).unwrap();
        for i in 0..=100 {
            let x = 1.0 + d / 3.0 + d / 3.0 * i as f64 / 100.0;
            assert!(m.eval(x).1 >= d * eta / 6.0 - d * eta / 7.0);
        }
    }

    #[test]
    fn random_admissible_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..1000 {
            let v = 10f64.powf(rng.gen_range(-8.0..0.0));
            let d = rng.gen_range(1e-3..0.999);
            let eta = v / (d * d);
            let d = (v / eta).sqrt();
            let cap = RAMP_SLOPE_LIMIT * d * d * eta;
            let (c_l, c_r) = match trial % 4 {
                0 => (rng.gen_range(0.0..cap), rng.gen_range(0.0..cap)),
                1 => (0.0, 0.0),
                2 => (rng.gen_range(0.0..cap), 0.0),
                _ => (0.0, rng.gen_range(0.0..cap)),
            };
            let u = rng.gen_range(-2.0..2.0);
            let m = ramp(v, (u, u + d), rng.gen_range(-1.0..1.0), eta, c_l, c_r).unwrap();
            conclusions_hold(&m).unwrap_or_else(|e| panic!("trial {trial} (V={v}, η={eta}, c=({c_l},{c_r})): {e}"));
            let s = m.j0 + 0.37 * m.v;
            assert!((m.eval(m.inverse(s)).0 - s).abs() <= 1e-12 * m.v.max(m.j0.abs()));
        }
    }

    #[test]
    fn violations_are_rejected() {
        assert!(matches!(ramp(4.0, (0.0, 2.0), 0.0, 1.0, 0.0, 0.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(ramp(0.01, (0.0, 0.2), 0.0, 1.0, 0.0, 0.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(ramp(0.01, (0.0, 0.1), 0.0, 1.0, 1e-9, 0.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(ramp(-0.01, (0.0, 0.1), 0.0, 1.0, 0.0, 0.0), Err(Error::HypothesisViolated(_))));
    }
}
