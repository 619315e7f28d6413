use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::curve_model::CurveSource;
use crate::error::{Error, Result};
use crate::variation::local_variation;

use super::curvature::CurvatureField;

/// S·V with the convention 0·∞ = 0 for cells that carry no variation.
pub fn weight(variation: f64, sup: f64) -> f64 {
    if variation == 0.0 {
        0.0
    } else {
        variation * sup
    }
}

/// A compact cell [left, right] with V(f, cell) and S_cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub left: f64,
    pub right: f64,
    pub variation: f64,
    pub sup: f64,
}

impl Cell {
    pub fn measure(curve: &CurveSource, field: &CurvatureField, left: f64, right: f64) -> Self {
        Self { left, right, variation: local_variation(curve, left, right), sup: field.sup(left, right) }
    }

    pub fn weight(&self) -> f64 {
        weight(self.variation, self.sup)
    }
}

/// Unresolved end of a component left after truncating an infinite sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub interval: (f64, f64),
    pub variation: f64,
}

/// Cells covering a component (a,b) up to the recorded tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedPartition {
    pub component: (f64, f64),
    pub delta: f64,
    pub cells: Vec<Cell>,
    pub left_tail: Option<Tail>,
    pub right_tail: Option<Tail>,
}

/// Row of the partition export.
#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub left: f64,
    pub right: f64,
    #[serde(rename = "V")]
    pub variation: f64,
    #[serde(rename = "S")]
    pub sup: f64,
    pub admissible: bool,
}

impl GeneralizedPartition {
    pub fn is_truncated(&self) -> bool {
        self.left_tail.is_some() || self.right_tail.is_some()
    }

    pub fn tail_variation(&self) -> f64 {
        self.left_tail.map_or(0.0, |t| t.variation) + self.right_tail.map_or(0.0, |t| t.variation)
    }

    pub fn variations(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.variation).collect()
    }

    /// Whether the cell reaches an endpoint of the component, where the
    /// lower bound on S·V is not required.
    pub fn touches_boundary(&self, i: usize) -> bool {
        let c = &self.cells[i];
        c.left <= self.component.0 || c.right >= self.component.1
    }

    pub fn records(&self) -> Vec<CellRecord> {
        self.cells
            .iter()
            .map(|c| CellRecord {
                left: c.left,
                right: c.right,
                variation: c.variation,
                sup: c.sup,
                admissible: c.weight() >= self.delta,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartPoint {
    /// x₀ = (a+b)/2.
    Midpoint,
    /// The point splitting V(f,[a,b]) in half; commutes with reparametrization.
    VariationMidpoint,
    /// Fraction of V(f,[a,b]) to the left of x₀.
    VariationFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    pub start: StartPoint,
    /// End each cell at the last point below the threshold (the default,
    /// giving S·V ≤ δ) or at the first point reaching it (S·V ≥ δ).
    pub overshoot: bool,
    pub max_cells: usize,
    pub bisection_steps: u32,
    pub end_tol: f64,
    /// Stop once the variation left to the endpoint is at most this;
    /// the remainder becomes a tail.
    pub tail_variation: f64,
}

impl GreedyOptions {
    pub fn from_config(cfg: &Config) -> Self {
        Self {
            start: StartPoint::Midpoint,
            overshoot: false,
            max_cells: cfg.max_cells,
            bisection_steps: cfg.bisection_steps,
            end_tol: cfg.end_tol,
            tail_variation: 0.0,
        }
    }
}

/// Point splitting V(f,[a,b]) at the given fraction.
pub fn variation_quantile(curve: &CurveSource, a: f64, b: f64, fraction: f64) -> f64 {
    let total = local_variation(curve, a, b);
    let target = fraction * total;
    let (mut lo, mut hi) = (a, b);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if local_variation(curve, a, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Sweep<'a> {
    curve: &'a CurveSource,
    field: &'a CurvatureField,
    threshold: f64,
    opts: GreedyOptions,
}

impl Sweep<'_> {
    fn weight(&self, x: f64, t: f64) -> f64 {
        let (lo, hi) = if x < t { (x, t) } else { (t, x) };
        weight(local_variation(self.curve, lo, hi), self.field.sup(lo, hi))
    }

    fn cell(&self, x: f64, t: f64) -> Cell {
        let (lo, hi) = if x < t { (x, t) } else { (t, x) };
        Cell::measure(self.curve, self.field, lo, hi)
    }

    fn tail(&self, x: f64, end: f64) -> Tail {
        let (lo, hi) = if x < end { (x, end) } else { (end, x) };
        Tail { interval: (lo, hi), variation: local_variation(self.curve, lo, hi) }
    }

    /// Cells from x₀ toward `end`, each ending at inf{t : V·S ≥ threshold}.
    fn run(&self, x0: f64, end: f64, end_tol: f64) -> Result<(Vec<Cell>, Option<Tail>)> {
        let dir = if end > x0 { 1.0 } else { -1.0 };
        let mut cells = Vec::new();
        let mut x = x0;
        let mut width = (end - x0).abs() / 64.0;
        loop {
            let remaining = (end - x).abs();
            if self.opts.tail_variation > 0.0 {
                let tail = self.tail(x, end);
                if tail.variation <= self.opts.tail_variation {
                    return Ok((cells, Some(tail)));
                }
            }
            if self.weight(x, end) < self.threshold {
                cells.push(self.cell(x, end));
                return Ok((cells, None));
            }
            if remaining <= end_tol || cells.len() >= self.opts.max_cells {
                return Ok((cells, Some(self.tail(x, end))));
            }
            let mut lo = x;
            let mut hi = end;
            let mut w = width.min(remaining);
            loop {
                let t = x + dir * w;
                if (t - x).abs() >= remaining {
                    break;
                }
                if self.weight(x, t) >= self.threshold {
                    hi = t;
                    break;
                }
                lo = t;
                w *= 2.0;
            }
            for _ in 0..self.opts.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if self.weight(x, mid) >= self.threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let y = if self.opts.overshoot { hi } else { lo };
            if y == x {
                // curvature past the blow-up threshold cannot be resolved further
                if self.weight(x, hi) == f64::INFINITY {
                    return Ok((cells, Some(self.tail(x, end))));
                }
                return Err(Error::StallDetected { at: x });
            }
            cells.push(self.cell(x, y));
            width = (y - x).abs();
            x = y;
        }
    }
}

/// Bidirectional greedy sweep over the component (a,b): every cell has
/// S·V ≤ δ, and interior cells reach δ wherever ‖F″‖ is continuous.
pub fn greedy_partition(
    curve: &CurveSource,
    component: (f64, f64),
    delta: f64,
    cfg: &Config,
    opts: GreedyOptions,
) -> Result<GeneralizedPartition> {
    greedy_with_threshold(curve, component, delta, delta, cfg, opts)
}

/// Greedy sweep with cells cut at `threshold`, reported against `delta`.
pub fn greedy_with_threshold(
    curve: &CurveSource,
    (a, b): (f64, f64),
    delta: f64,
    threshold: f64,
    cfg: &Config,
    opts: GreedyOptions,
) -> Result<GeneralizedPartition> {
    if !(delta > 0.0) || !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let mid = 0.5 * (a + b);
    if !(mid > a && mid < b) {
        return Err(Error::DegenerateComponent { a, b });
    }
    let field = CurvatureField::new(curve, cfg);
    let sweep = Sweep { curve, field: &field, threshold, opts };
    let whole = Cell::measure(curve, &field, a, b);
    if whole.weight() < threshold {
        return Ok(GeneralizedPartition {
            component: (a, b),
            delta,
            cells: vec![whole],
            left_tail: None,
            right_tail: None,
        });
    }
    let x0 = match opts.start {
        StartPoint::Midpoint => mid,
        StartPoint::VariationMidpoint => variation_quantile(curve, a, b, 0.5),
        StartPoint::VariationFraction(q) => variation_quantile(curve, a, b, q.clamp(1e-6, 1.0 - 1e-6)),
    };
    let end_tol = opts.end_tol * (b - a);
    let (mut left, left_tail) = sweep.run(x0, a, end_tol)?;
    let (right, right_tail) = sweep.run(x0, b, end_tol)?;
    left.reverse();
    left.extend(right);
    Ok(GeneralizedPartition { component: (a, b), delta, cells: left, left_tail, right_tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    /// Per-cell lower bound S·V ≥ δ.
    Round,
    /// Lower bound for some overlapping pair of cells.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    /// S_I < ∞ and S_I·V(f,I) ≤ K.
    pub upper: bool,
    /// The lower bound for this kind.
    pub lower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub kind: PartitionKind,
    pub delta: f64,
    pub k: f64,
    pub checks: Vec<CellCheck>,
}

impl PartitionCertificate {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.upper && c.lower)
    }
}

const CERT_TOL: f64 = 1e-6;

/// Re-evaluates S and V of every cell and checks the (a) upper bound and
/// the lower bound of the requested kind. Cells reaching a component
/// endpoint are exempt from the lower bound.
pub fn verify_partition(
    partition: &GeneralizedPartition,
    kind: PartitionKind,
    delta: f64,
    k: f64,
    field: &CurvatureField,
) -> Result<PartitionCertificate> {
    let curve = &field.curve;
    let fresh: Vec<Cell> = partition.cells.iter().map(|c| Cell::measure(curve, field, c.left, c.right)).collect();
    let n = fresh.len();
    let mut checks = Vec::with_capacity(n);
    let mut bad = Vec::new();
    for (i, c) in fresh.iter().enumerate() {
        let w = c.weight();
        let upper = c.sup.is_finite() && w <= k * (1.0 + CERT_TOL);
        let own = w >= delta * (1.0 - CERT_TOL);
        let lower = partition.touches_boundary(i)
            || own
            || (kind == PartitionKind::Square && {
                let pair = |j: usize| {
                    let d = &fresh[j];
                    let (lo, hi) = (c.left.min(d.left), c.right.max(d.right));
                    Cell::measure(curve, field, lo, hi).weight() >= delta * (1.0 - CERT_TOL)
                };
                (i > 0 && fresh[i - 1].right >= c.left && pair(i - 1))
                    || (i + 1 < n && fresh[i + 1].left <= c.right && pair(i + 1))
            });
        if !(upper && lower) {
            bad.push(i);
        }
        checks.push(CellCheck { upper, lower });
    }
    if !bad.is_empty() {
        return Err(Error::CertificateFailure { cells: bad });
    }
    Ok(PartitionCertificate { kind, delta, k, checks })
}
