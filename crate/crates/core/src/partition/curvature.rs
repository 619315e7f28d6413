use crate::config::Config;
use crate::curve_model::CurveSource;
use crate::variation::VariationProfile;

/// Access to ‖F″‖ along a curve and its suprema S_I over parameter
/// intervals. Values above the blow-up threshold are reported as +∞.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub curve: CurveSource,
    pub blowup: f64,
    pub samples: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

impl CurvatureField {
    pub fn new(curve: &CurveSource, cfg: &Config) -> Self {
        Self { curve: curve.clone(), blowup: cfg.blowup, samples: cfg.sup_samples.max(2) }
    }

    /// ‖F″‖ at the arc-length image of t, with NaN and blow-up mapped to +∞.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.curve.curvature(t);
        if k.is_nan() || k > self.blowup {
            f64::INFINITY
        } else {
            k
        }
    }

    /// S_I for I = [a, b]: the largest of `samples` equispaced values and
    /// the curve's breakpoints in I, refined by golden-section search around
    /// the best of them, and of the curve's curvature limsups approached
    /// from inside I.
    pub fn sup(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return self.at(a);
        }
        let n = self.samples;
        let mut best = f64::NEG_INFINITY;
        let mut best_i = 0usize;
        for i in 0..n {
            let t = if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
            let k = self.at(t);
            if k == f64::INFINITY {
                return k;
            }
            if k > best {
                best = k;
                best_i = i;
            }
        }
        let step = (b - a) / (n - 1) as f64;
        let mut centre = a + step * best_i as f64;
        // narrow features sit between samples; their breakpoints are candidates too
        let bp = &self.curve.meta.breakpoints;
        let first = bp.partition_point(|x| *x < a);
        for &t in bp[first..].iter().take_while(|x| **x <= b) {
            let k = self.at(t);
            if k == f64::INFINITY {
                return k;
            }
            if k > best {
                best = k;
                centre = t;
            }
        }
        let mut lo = (centre - step).max(a);
        let mut hi = (centre + step).min(b);
        let mut x1 = hi - GOLDEN * (hi - lo);
        let mut x2 = lo + GOLDEN * (hi - lo);
        let (mut f1, mut f2) = (self.at(x1), self.at(x2));
        for _ in 0..40 {
            if f1.max(f2) == f64::INFINITY {
                return f64::INFINITY;
            }
            best = best.max(f1).max(f2);
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - GOLDEN * (hi - lo);
                f1 = self.at(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + GOLDEN * (hi - lo);
                f2 = self.at(x2);
            }
            if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                break;
            }
        }
        best.max(f1).max(f2).max(self.limits(a, b))
    }

    /// Largest recorded one-sided curvature limsup reachable from inside [a, b].
    fn limits(&self, a: f64, b: f64) -> f64 {
        let lim = &self.curve.meta.curvature_limits;
        let first = lim.partition_point(|l| l.point < a);
        let mut best: f64 = 0.0;
        for l in lim[first..].iter().take_while(|l| l.point <= b) {
            if l.point > a {
                best = best.max(l.left);
            }
            if l.point < b {
                best = best.max(l.right);
            }
        }
        best
    }

    /// S over the preimage of the arc-length interval [s1, s2].
    pub fn sup_arc(&self, profile: &VariationProfile, s1: f64, s2: f64) -> f64 {
        self.sup(profile.inverse(s1), profile.inverse(s2))
    }
}
