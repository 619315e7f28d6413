use serde::Serialize;

use crate::error::{Error, Result};

/// Ψ: [0, d′] → [0, d] with Ψ⁻¹ = ω, ω(x) = ∫₀ˣ φ, where the density φ
/// equals μ_α/λ(I_α) on each I_α and 1 elsewhere. Ψ⁻¹(I_α) then has
/// length μ_α exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedHomeo {
    pub d: f64,
    pub d_prime: f64,
    pub intervals: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    /// ω at the interval endpoints: images[i] = (ω(I_i.0), ω(I_i.1)).
    pub images: Vec<(f64, f64)>,
}

pub fn density_homeomorphism(d: f64, intervals: &[(f64, f64)], weights: &[f64]) -> Result<WeightedHomeo> {
    if !(d > 0.0) || intervals.len() != weights.len() {
        return Err(Error::InvalidParameter("need d > 0 and one weight per interval".into()));
    }
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&i, &j| intervals[i].0.total_cmp(&intervals[j].0));
    let ivs: Vec<(f64, f64)> = order.iter().map(|&i| intervals[i]).collect();
    let ws: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
    for (k, &(a, b)) in ivs.iter().enumerate() {
        if !(a >= 0.0 && b <= d && a < b) {
            return Err(Error::InvalidParameter(format!(
                "interval [{a}, {b}] is not a proper subinterval of [0, {d}]"
            )));
        }
        if !(ws[k] > 0.0) || !ws[k].is_finite() {
            return Err(Error::InvalidParameter(format!("weight {} is not positive", ws[k])));
        }
        if k > 0 && ivs[k - 1].1 > a {
            return Err(Error::InvalidParameter(format!("intervals overlap at {a}")));
        }
    }
    let mut images = Vec::with_capacity(ivs.len());
    let (mut x, mut y) = (0.0, 0.0);
    for (k, &(a, b)) in ivs.iter().enumerate() {
        let start = y + (a - x);
        images.push((start, start + ws[k]));
        x = b;
        y = start + ws[k];
    }
    let d_prime = y + (d - x);
    Ok(WeightedHomeo { d, d_prime, intervals: ivs, weights: ws, images })
}

impl WeightedHomeo {
    /// ω = Ψ⁻¹: [0, d] → [0, d′].
    pub fn forward(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.d);
        let k = self.intervals.partition_point(|iv| iv.0 <= x);
        if k == 0 {
            return x;
        }
        let (a, b) = self.intervals[k - 1];
        let (p, q) = self.images[k - 1];
        if x <= b {
            p + (x - a) * (q - p) / (b - a)
        } else {
            q + (x - b)
        }
    }

    /// Ψ: [0, d′] → [0, d].
    pub fn psi(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.d_prime);
        let k = self.images.partition_point(|iv| iv.0 <= y);
        if k == 0 {
            return y;
        }
        let (a, b) = self.intervals[k - 1];
        let (p, q) = self.images[k - 1];
        if y <= q {
            a + (y - p) * (b - a) / (q - p)
        } else {
            b + (y - q)
        }
    }

    /// Density of Ψ⁻¹ at x (piecewise constant).
    pub fn density(&self, x: f64) -> f64 {
        let k = self.intervals.partition_point(|iv| iv.0 <= x);
        if k > 0 && x < self.intervals[k - 1].1 {
            self.weights[k - 1] / (self.intervals[k - 1].1 - self.intervals[k - 1].0)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_intervals_is_identity() {
        let h = density_homeomorphism(2.0, &[], &[]).unwrap();
        assert_eq!(h.d_prime, 2.0);
        assert_eq!(h.psi(0.7), 0.7);
    }

    #[test]
    fn single_interval_transport() {
        let h = density_homeomorphism(1.0, &[(0.0, 0.5)], &[0.25]).unwrap();
        assert!((h.d_prime - 0.75).abs() < 1e-15);
        assert!((h.forward(0.5) - 0.25).abs() < 1e-15);
        assert!((h.psi(0.25) - 0.5).abs() < 1e-15);
        assert!((h.psi(0.75) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_equal_lengths_is_identity() {
        let ivs = [(0.1, 0.2), (0.5, 0.9)];
        let h = density_homeomorphism(1.0, &ivs, &[0.1, 0.4]).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((h.psi(x) - x).abs() < 1e-15 && (h.forward(x) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn masses_and_inverse() {
        let ivs = [(0.3, 0.4), (0.0, 0.1), (0.6, 0.95)];
        let ws = [0.01, 2.0, 0.5];
        let h = density_homeomorphism(1.0, &ivs, &ws).unwrap();
        for (iv, w) in ivs.iter().zip(ws) {
            assert!((h.forward(iv.1) - h.forward(iv.0) - w).abs() < 1e-9);
        }
        for i in 0..=200 {
            let y = h.d_prime * i as f64 / 200.0;
            assert!((h.forward(h.psi(y)) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(density_homeomorphism(1.0, &[(0.0, 0.5), (0.4, 0.6)], &[1.0, 1.0]).is_err());
        assert!(density_homeomorphism(1.0, &[(0.0, 0.5)], &[0.0]).is_err());
    }
}
