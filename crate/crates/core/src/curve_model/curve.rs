use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Vector};

pub type VecFn = Arc<dyn Fn(f64) -> Vector + Send + Sync>;
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ground truth a corpus generator knows about its curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnownClassification {
    pub bv: bool,
    pub c2: bool,
    pub d2inf: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_set: Option<String>,
}

/// Descriptive metadata carried alongside a curve.
#[derive(Debug, Clone, Default)]
pub struct CurveMeta {
    pub kind: String,
    pub known: Option<KnownClassification>,
    /// Analytic regularity set G = (0,1) ∖ D_f for the C² problem.
    pub regular_c2: Option<IntervalSet>,
    /// Analytic regularity set for the bounded-second-derivative problem.
    pub regular_d2inf: Option<IntervalSet>,
    /// Points where derivatives may be irregular; quadrature splits there.
    pub breakpoints: Vec<f64>,
    /// Curvature limsups at points where the curvature oscillates without
    /// a limit, sorted by point.
    pub curvature_limits: Vec<CurvatureLimit>,
}

/// One-sided upper limits of the curvature at a point. Curvature is
/// geometric, so these survive reparametrization unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureLimit {
    pub point: f64,
    pub left: f64,
    pub right: f64,
}

/// Finite ordered family of disjoint open subintervals of (0,1), plus the
/// closed regions a truncated construction left unresolved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
    /// Regions that the full (untruncated) construction would split into
    /// further components. Their variation is reported as a truncation tail.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in intervals.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::InvalidParameter(format!(
                    "intervals ({}, {}) and ({}, {}) overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        if let Some(bad) = intervals.iter().find(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter(format!("empty or non-finite interval ({}, {})", bad.0, bad.1)));
        }
        Ok(Self { intervals, residual: Vec::new() })
    }

    pub fn with_residual(mut self, mut residual: Vec<(f64, f64)>) -> Self {
        residual.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.residual = residual;
        self
    }

    /// G = (a, b) as a single component.
    pub fn whole(a: f64, b: f64) -> Self {
        Self { intervals: vec![(a, b)], residual: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn residual_measure(&self) -> f64 {
        self.residual.iter().map(|(a, b)| b - a).sum()
    }

    /// Index of the component containing `t`, if any.
    pub fn locate(&self, t: f64) -> Option<usize> {
        let idx = self.intervals.partition_point(|(a, _)| *a < t);
        if idx == 0 {
            return None;
        }
        let (a, b) = self.intervals[idx - 1];
        (t > a && t < b).then_some(idx - 1)
    }

    /// Sorted boundary points of the components, i.e. the points of the
    /// complement that touch G.
    pub fn boundary_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.intervals.iter().flat_map(|(a, b)| [*a, *b]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Image of the set under an increasing homeomorphism.
    pub fn map_increasing(&self, map: impl Fn(f64) -> f64) -> Self {
        Self {
            intervals: self.intervals.iter().map(|(a, b)| (map(*a), map(*b))).collect(),
            residual: self.residual.iter().map(|(a, b)| (map(*a), map(*b))).collect(),
        }
    }
}

/// Real function on a closed interval with optional analytic derivatives.
#[derive(Clone)]
pub struct ScalarFunction {
    pub domain: (f64, f64),
    eval: RealFn,
    d1: Option<RealFn>,
    d2: Option<RealFn>,
    /// Points where the function or its derivative may be irregular.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("domain", &self.domain)
            .field("has_d1", &self.d1.is_some())
            .field("breakpoints", &self.breakpoints.len())
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(domain: (f64, f64), eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { domain, eval: Arc::new(eval), d1: None, d2: None, breakpoints: Vec::new() }
    }

    pub fn with_d1(mut self, d1: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d1 = Some(Arc::new(d1));
        self
    }

    pub fn with_d2(mut self, d2: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn with_breakpoints(mut self, mut pts: Vec<f64>) -> Self {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.breakpoints = pts;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn has_d1(&self) -> bool {
        self.d1.is_some()
    }

    pub fn d1(&self, t: f64) -> f64 {
        match &self.d1 {
            Some(d) => d(t),
            None => {
                let (lo, hi) = self.domain;
                let h = 1e-6 * (hi - lo);
                let a = (t - h).max(lo);
                let b = (t + h).min(hi);
                (self.eval(b) - self.eval(a)) / (b - a)
            }
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match &self.d2 {
            Some(d) => d(t),
            None => {
                let (lo, hi) = self.domain;
                let h = 1e-5 * (hi - lo);
                let a = (t - h).max(lo);
                let b = (t + h).min(hi);
                (self.d1(b) - self.d1(a)) / (b - a)
            }
        }
    }

    /// Inverse of an increasing function by bisection.
    pub fn inverse_increasing(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = self.domain;
        if y <= self.eval(lo) {
            return lo;
        }
        if y >= self.eval(hi) {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Random increasing C² homeomorphism of [0,1]:
/// ω(t) = t + Σ a_k sin(kπt)/(kπ) with Σ|a_k| ≤ 0.8, so ω′ ≥ 0.2.
pub fn random_homeomorphism<R: Rng + ?Sized>(rng: &mut R) -> ScalarFunction {
    let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let total: f64 = raw.iter().map(|a| a.abs()).sum::<f64>().max(1e-12);
    let budget = rng.gen_range(0.2..0.8);
    let coeffs: Arc<Vec<f64>> = Arc::new(raw.iter().map(|a| a / total * budget).collect());
    let (c0, c1, c2) = (coeffs.clone(), coeffs.clone(), coeffs);
    let pi = std::f64::consts::PI;
    ScalarFunction::new((0.0, 1.0), move |t| {
        let mut v = t;
        for (k, a) in c0.iter().enumerate() {
            let w = (k + 1) as f64 * pi;
            v += a * (w * t).sin() / w;
        }
        v.clamp(0.0, 1.0)
    })
    .with_d1(move |t| 1.0 + c1.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * pi * t).cos()).sum::<f64>())
    .with_d2(move |t| {
        -c2.iter()
            .enumerate()
            .map(|(k, a)| {
                let w = (k + 1) as f64 * pi;
                a * w * (w * t).sin()
            })
            .sum::<f64>()
    })
}

/// An evaluable curve t ↦ f(t) ∈ ℝⁿ on a closed interval.
#[derive(Clone)]
pub struct CurveSource {
    domain: (f64, f64),
    dim: usize,
    eval: VecFn,
    d1: Option<VecFn>,
    d2: Option<VecFn>,
    curvature: Option<RealFn>,
    fd_step: f64,
    pub meta: CurveMeta,
}

impl fmt::Debug for CurveSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveSource")
            .field("kind", &self.meta.kind)
            .field("domain", &self.domain)
            .field("dim", &self.dim)
            .field("d1", &self.d1.is_some())
            .field("d2", &self.d2.is_some())
            .finish()
    }
}

impl CurveSource {
    pub fn new(dim: usize, eval: impl Fn(f64) -> Vector + Send + Sync + 'static) -> Self {
        Self {
            domain: (0.0, 1.0),
            dim,
            eval: Arc::new(eval),
            d1: None,
            d2: None,
            curvature: None,
            fd_step: 1e-5,
            meta: CurveMeta::default(),
        }
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self.fd_step = 1e-5 * (hi - lo);
        self
    }

    pub fn with_d1(mut self, d1: impl Fn(f64) -> Vector + Send + Sync + 'static) -> Self {
        self.d1 = Some(Arc::new(d1));
        self
    }

    pub fn with_d2(mut self, d2: impl Fn(f64) -> Vector + Send + Sync + 'static) -> Self {
        self.d2 = Some(Arc::new(d2));
        self
    }

    /// Analytic ‖F″(v_f(t))‖ as a function of the original parameter.
    pub fn with_curvature(mut self, k: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.curvature = Some(Arc::new(k));
        self
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.meta.kind = kind.into();
        self
    }

    pub fn with_known(mut self, known: KnownClassification) -> Self {
        self.meta.known = Some(known);
        self
    }

    pub fn with_regular_sets(mut self, c2: Option<IntervalSet>, d2inf: Option<IntervalSet>) -> Self {
        self.meta.regular_c2 = c2;
        self.meta.regular_d2inf = d2inf;
        self
    }

    pub fn with_breakpoints(mut self, mut pts: Vec<f64>) -> Self {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.meta.breakpoints = pts;
        self
    }

    pub fn with_curvature_limits(mut self, mut limits: Vec<CurvatureLimit>) -> Self {
        limits.sort_by(|a, b| a.point.total_cmp(&b.point));
        self.meta.curvature_limits = limits;
        self
    }

    /// Drop analytic derivative information, leaving finite differences.
    pub fn without_derivatives(mut self) -> Self {
        self.d1 = None;
        self.d2 = None;
        self.curvature = None;
        self
    }

    pub fn without_regular_sets(mut self) -> Self {
        self.meta.regular_c2 = None;
        self.meta.regular_d2inf = None;
        self
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn has_d1(&self) -> bool {
        self.d1.is_some()
    }

    pub fn has_analytic_curvature(&self) -> bool {
        self.curvature.is_some() || self.d2.is_some()
    }

    /// f(t); the caller guarantees t lies in the domain.
    pub fn at(&self, t: f64) -> Vector {
        (self.eval)(t)
    }

    pub fn eval(&self, t: f64) -> Result<Vector> {
        self.check(t)?;
        Ok(self.at(t))
    }

    fn check(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        if t < lo || t > hi || t.is_nan() {
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        Ok(())
    }

    /// Derivative of order 1 or 2: analytic when available, otherwise
    /// central differences with one-sided stencils at the endpoints.
    pub fn derivative(&self, t: f64, order: u8) -> Result<Vector> {
        self.check(t)?;
        match order {
            1 => Ok(self.d1_at(t)),
            2 => Ok(self.d2_at(t)),
            _ => Err(Error::InvalidParameter(format!("derivative order {order} not in {{1, 2}}"))),
        }
    }

    pub fn d1_at(&self, t: f64) -> Vector {
        match &self.d1 {
            Some(d) => d(t),
            None => first_difference(&*self.eval, t, self.fd_step, self.domain),
        }
    }

    pub fn d2_at(&self, t: f64) -> Vector {
        match (&self.d2, &self.d1) {
            (Some(d), _) => d(t),
            (None, Some(d1)) => first_difference(&**d1, t, self.fd_step, self.domain),
            (None, None) => second_difference(&*self.eval, t, 10.0 * self.fd_step, self.domain),
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        geometry::norm(&self.d1_at(t))
    }

    /// ‖F″‖ at the arc-length point v_f(t), where F is the arc-length
    /// parametrization. Infinite where f′ vanishes.
    pub fn curvature(&self, t: f64) -> f64 {
        if let Some(k) = &self.curvature {
            return k(t);
        }
        geometry::curvature_from_derivatives(&self.d1_at(t), &self.d2_at(t))
    }

    /// The precomposition f∘ω by an increasing homeomorphism of the domain.
    pub fn compose(&self, omega: &ScalarFunction) -> CurveSource {
        let w0 = omega.clone();
        let base = self.eval.clone();
        let eval = move |t: f64| base(w0.eval(t));
        let mut out = CurveSource::new(self.dim, eval).with_domain(omega.domain.0, omega.domain.1);
        if let Some(d1) = self.d1.clone() {
            let w = omega.clone();
            out = out.with_d1(move |t| geometry::scale(&d1(w.eval(t)), w.d1(t)));
        }
        if let (Some(d1), Some(d2)) = (self.d1.clone(), self.d2.clone()) {
            let w = omega.clone();
            out = out.with_d2(move |t| {
                let s = w.eval(t);
                let a = w.d1(t);
                geometry::add(&geometry::scale(&d2(s), a * a), &geometry::scale(&d1(s), w.d2(t)))
            });
        }
        if let Some(k) = self.curvature.clone() {
            let w = omega.clone();
            out = out.with_curvature(move |t| k(w.eval(t)));
        }
        let inv = |x: f64| omega.inverse_increasing(x);
        out.meta = CurveMeta {
            kind: format!("{}∘ω", self.meta.kind),
            known: self.meta.known.clone(),
            regular_c2: self.meta.regular_c2.as_ref().map(|g| g.map_increasing(inv)),
            regular_d2inf: self.meta.regular_d2inf.as_ref().map(|g| g.map_increasing(inv)),
            breakpoints: self.meta.breakpoints.iter().map(|x| inv(*x)).collect(),
            curvature_limits: self
                .meta
                .curvature_limits
                .iter()
                .map(|l| CurvatureLimit { point: inv(l.point), ..*l })
                .collect(),
        };
        out
    }
}

fn first_difference(f: &(dyn Fn(f64) -> Vector + Send + Sync), t: f64, h: f64, (lo, hi): (f64, f64)) -> Vector {
    if t - h < lo {
        let (a, b, c) = (f(t), f(t + h), f(t + 2.0 * h));
        a.iter().zip(&b).zip(&c).map(|((a, b), c)| (-3.0 * a + 4.0 * b - c) / (2.0 * h)).collect()
    } else if t + h > hi {
        let (a, b, c) = (f(t), f(t - h), f(t - 2.0 * h));
        a.iter().zip(&b).zip(&c).map(|((a, b), c)| (3.0 * a - 4.0 * b + c) / (2.0 * h)).collect()
    } else {
        let (a, b) = (f(t - h), f(t + h));
        a.iter().zip(&b).map(|(a, b)| (b - a) / (2.0 * h)).collect()
    }
}

fn second_difference(f: &(dyn Fn(f64) -> Vector + Send + Sync), t: f64, h: f64, (lo, hi): (f64, f64)) -> Vector {
    let h2 = h * h;
    if t - h < lo || t + h > hi {
        let s = if t - h < lo { 1.0 } else { -1.0 };
        let p: Vec<Vector> = (0..4).map(|k| f(t + s * k as f64 * h)).collect();
        (0..p[0].len()).map(|i| (2.0 * p[0][i] - 5.0 * p[1][i] + 4.0 * p[2][i] - p[3][i]) / h2).collect()
    } else {
        let (a, b, c) = (f(t - h), f(t), f(t + h));
        a.iter().zip(&b).zip(&c).map(|((a, b), c)| (a - 2.0 * b + c) / h2).collect()
    }
}
