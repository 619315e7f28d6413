//! Dormand–Prince 5(4) embedded Runge–Kutta stepping.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand–Prince step; returns the 5th-order solution and the error estimate.
pub fn step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + ?Sized,
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..N {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        err = err.max((h * (d5 - d4)).abs());
    }
    (y5, err)
}

/// Integrate from `t0` to `t1` with adaptive step control. Returns every
/// accepted node including both ends.
pub fn integrate_adaptive<const N: usize, F>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: f64,
    max_step: f64,
) -> Result<Vec<(f64, [f64; N])>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + ?Sized,
{
    let mut nodes = vec![(t0, y0)];
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(nodes);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = max_step.min(span);
    let mut rejects = 0usize;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let (y_new, err) = step(f, t, &y, h);
        if err <= tol || h <= 1e-15 * span.max(t.abs()) {
            if err > tol {
                return Err(Error::IntegrationFailure(format!("step size underflow at t = {t} (error {err:e})")));
            }
            t = if t + h >= t1 { t1 } else { t + h };
            y = y_new;
            nodes.push((t, y));
            rejects = 0;
        } else {
            rejects += 1;
            if rejects > 200 {
                return Err(Error::IntegrationFailure(format!("too many rejected steps at t = {t}")));
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(max_step);
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let nodes = integrate_adaptive(&|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, 1e-12, 0.1).unwrap();
        let (t, y) = nodes.last().unwrap();
        assert_eq!(*t, 1.0);
        assert!((y[0] - 1f64.exp()).abs() < 1e-10);
    }
}
