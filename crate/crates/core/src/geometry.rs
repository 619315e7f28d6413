//! Small fixed-capacity vectors in ℝⁿ with the Euclidean norm.

use smallvec::SmallVec;

/// A point or tangent vector in ℝⁿ. Stays on the stack for n ≤ 4.
pub type Vector = SmallVec<[f64; 4]>;

pub fn zeros(dim: usize) -> Vector {
    smallvec::smallvec![0.0; dim]
}

pub fn from_slice(xs: &[f64]) -> Vector {
    SmallVec::from_slice(xs)
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    // hypot-style scaling keeps huge derivatives (spiral near 0) finite
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * u.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn sub(u: &[f64], v: &[f64]) -> Vector {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

pub fn add(u: &[f64], v: &[f64]) -> Vector {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

pub fn scale(u: &[f64], s: f64) -> Vector {
    u.iter().map(|a| a * s).collect()
}

pub fn distance(u: &[f64], v: &[f64]) -> f64 {
    norm(&sub(u, v))
}

/// Curvature of a regular curve from its first two derivatives, valid in any
/// dimension: ‖f″ − (f″·T)T‖ / ‖f′‖² with T the unit tangent. Equals ‖F″‖ of
/// the arc-length parametrization at the corresponding point.
pub fn curvature_from_derivatives(d1: &[f64], d2: &[f64]) -> f64 {
    let speed = norm(d1);
    if speed == 0.0 {
        return f64::INFINITY;
    }
    let tangent: Vector = d1.iter().map(|x| x / speed).collect();
    let along = dot(d2, &tangent);
    let normal: Vector = d2.iter().zip(&tangent).map(|(a, t)| a - along * t).collect();
    norm(&normal) / speed / speed
}
