use serde::Serialize;

use crate::config::Config;
use crate::curve_model::{CurveSource, IntervalSet};
use crate::decision::detect_singular_set;
use crate::decision::Mode;
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::partition::{greedy_partition, weight, GeneralizedPartition, GreedyOptions};
use crate::variation::{image_null_test, local_variation, solve_in_cell, NullVerdict, VariationProfile};

use super::density::{density_homeomorphism, WeightedHomeo};
use super::ramp::{ramp, RampMap, RAMP_SLOPE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    /// Cell of a certified partition.
    Cell,
    /// Uncovered end of a truncated partition.
    Tail,
    /// Unresolved region of G's complement estimate.
    Residual,
}

/// One piece of [0,1] with its images under v* and Ψ⁻¹ and its ramp data.
#[derive(Debug, Clone, Serialize)]
pub struct StageCell {
    pub kind: PieceKind,
    /// Parameter interval I.
    pub source: (f64, f64),
    /// J = v*(I) ⊂ [0, d₁].
    pub arc: (f64, f64),
    /// Ψ⁻¹(J) ⊂ [0, d₂].
    pub image: (f64, f64),
    /// λ(J).
    pub length: f64,
    pub eta: f64,
    pub d: f64,
    pub c_left: f64,
    pub c_right: f64,
    /// S_I of partition cells.
    pub sup: Option<f64>,
    #[serde(skip)]
    ramp: RampMap,
}

/// v*(t) = v_f(t) + λ([0,t] ∩ U), U the union of profile cells on which
/// f does not move.
#[derive(Debug, Clone)]
struct StarProfile {
    profile: VariationProfile,
    flat: Vec<bool>,
    values: Vec<f64>,
}

impl StarProfile {
    fn new(profile: VariationProfile) -> Self {
        let floor = 1e-15 * profile.total.max(f64::MIN_POSITIVE);
        let n = profile.grid.len();
        let mut flat = Vec::with_capacity(n - 1);
        let mut values = Vec::with_capacity(n);
        values.push(0.0);
        for i in 0..n - 1 {
            let inc = profile.values[i + 1] - profile.values[i];
            let is_flat = inc <= floor;
            flat.push(is_flat);
            let step = if is_flat { profile.grid[i + 1] - profile.grid[i] } else { inc };
            values.push(values[i] + step);
        }
        Self { profile, flat, values }
    }

    fn total(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }

    fn flat_measure(&self) -> f64 {
        self.flat
            .iter()
            .enumerate()
            .filter(|(_, f)| **f)
            .map(|(i, _)| self.profile.grid[i + 1] - self.profile.grid[i])
            .sum()
    }

    fn value(&self, t: f64) -> f64 {
        let g = &self.profile.grid;
        let t = t.clamp(g[0], *g.last().expect("nonempty"));
        let i = g.partition_point(|x| *x <= t).clamp(1, g.len() - 1) - 1;
        if t == g[i] {
            return self.values[i];
        }
        if t >= g[i + 1] {
            return self.values[i + 1];
        }
        let inc = if self.flat[i] { t - g[i] } else { local_variation(self.profile_curve(), g[i], t) };
        (self.values[i] + inc).min(self.values[i + 1])
    }

    fn inverse(&self, s: f64) -> f64 {
        let g = &self.profile.grid;
        if s <= 0.0 {
            return g[0];
        }
        let i = self.values.partition_point(|v| *v < s);
        if i >= self.values.len() {
            return *g.last().expect("nonempty");
        }
        let (a, b) = (g[i - 1], g[i]);
        let target = s - self.values[i - 1];
        if self.flat[i - 1] {
            (a + target).min(b)
        } else {
            solve_in_cell(self.profile_curve(), a, b, target)
        }
    }

    fn profile_curve(&self) -> &CurveSource {
        self.profile.curve()
    }
}

/// h = ξ∘φ∘π on [0,1]: π(x) = d₂x, φ: [0, d₂] → [0, d₁] built from ramps
/// on the cells and Ψ elsewhere, ξ = (v*)⁻¹.
#[derive(Debug, Clone)]
pub struct CompositeHomeomorphism {
    pub mode: Mode,
    pub k: f64,
    pub d1: f64,
    pub d2: f64,
    pub cells: Vec<StageCell>,
    pub psi: WeightedHomeo,
    /// Points of H recorded as piece ends: component and residual ends.
    pub h_points: Vec<f64>,
    curve: CurveSource,
    star: StarProfile,
}

/// Per-stage metadata for export.
#[derive(Debug, Clone, Serialize)]
pub struct StageManifest<'a> {
    pub mode: Mode,
    pub k: f64,
    pub d1: f64,
    pub d2: f64,
    /// λ of the locally constant set U.
    pub flat_measure: f64,
    /// Upper bound on λ(h⁻¹(H)): the share of [0,1] not covered by
    /// certified cells.
    pub uncovered_fraction: f64,
    pub cells: &'a [StageCell],
}

struct Piece {
    kind: PieceKind,
    a: f64,
    b: f64,
    sup: Option<f64>,
    shared_left: bool,
    shared_right: bool,
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()))
}

fn pieces(g: &IntervalSet, partitions: &[GeneralizedPartition], k: f64) -> Result<Vec<Piece>> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    let mut index = 0;
    for &(a, b) in &g.intervals {
        let p = partitions
            .iter()
            .find(|p| close(p.component.0, a) && close(p.component.1, b))
            .ok_or_else(|| Error::InvalidParameter(format!("no partition for component ({a}, {b})")))?;
        let mut list = Vec::new();
        if let Some(t) = &p.left_tail {
            list.push((PieceKind::Tail, t.interval.0, t.interval.1, None));
        }
        for c in &p.cells {
            if !(weight(c.variation, c.sup) <= k * (1.0 + 1e-6)) {
                bad.push(index);
            }
            index += 1;
            list.push((PieceKind::Cell, c.left, c.right, Some(c.sup)));
        }
        if let Some(t) = &p.right_tail {
            list.push((PieceKind::Tail, t.interval.0, t.interval.1, None));
        }
        if list.is_empty() || !close(list[0].1, a) || !close(list[list.len() - 1].2, b) {
            return Err(Error::InvalidParameter(format!("partition does not cover ({a}, {b})")));
        }
        for w in list.windows(2) {
            if !close(w[0].2, w[1].1) {
                return Err(Error::InvalidParameter(format!("partition of ({a}, {b}) has a gap at {}", w[0].2)));
            }
        }
        let n = list.len();
        for (i, (kind, l, r, sup)) in list.into_iter().enumerate() {
            let l = if i == 0 { a } else { l };
            let r = if i + 1 == n { b } else { r };
            out.push(Piece { kind, a: l, b: r, sup, shared_left: i > 0, shared_right: i + 1 < n });
        }
    }
    if !bad.is_empty() {
        return Err(Error::CertificateFailure { cells: bad });
    }
    for &(a, b) in &g.residual {
        out.push(Piece { kind: PieceKind::Residual, a, b, sup: None, shared_left: false, shared_right: false });
    }
    out.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(out)
}

/// η_J = max(r_J, 2λ(J)), r_J the sum of √λ over the cells ranked at or
/// after J by decreasing length.
fn etas(lengths: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&i, &j| lengths[j].total_cmp(&lengths[i]));
    let mut eta = vec![0.0; lengths.len()];
    let mut tail = 0.0;
    for &i in order.iter().rev() {
        tail += lengths[i].sqrt();
        eta[i] = tail.max(2.0 * lengths[i]);
    }
    eta
}

/// Smoothing homeomorphism for `curve` from certified partitions of the
/// components of `g` (cells with S_I·V ≤ K); tails and residual regions
/// are carried as extra pieces with zero end slopes.
pub fn assemble(
    curve: &CurveSource,
    g: &IntervalSet,
    partitions: &[GeneralizedPartition],
    k: f64,
    mode: Mode,
    cfg: &Config,
) -> Result<CompositeHomeomorphism> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("K must be positive, got {k}")));
    }
    let null = image_null_test(curve, g, cfg)?;
    if null.verdict != NullVerdict::Null {
        return Err(Error::PreconditionFailure(format!(
            "image of the complement is not null (defect {}, tail bound {})",
            null.defect, null.tail_bound
        )));
    }
    let all = pieces(g, partitions, k)?;
    let star = StarProfile::new(VariationProfile::build(curve, cfg.profile_grid, cfg)?);
    let d1 = star.total();
    let (lo, hi) = curve.domain();
    let mut h_points = vec![lo, hi];
    for p in &all {
        if !p.shared_left {
            h_points.push(p.a);
        }
        if !p.shared_right {
            h_points.push(p.b);
        }
    }
    h_points.sort_by(f64::total_cmp);
    h_points.dedup();
    // pieces on which f moves get a ramp; the others stay with Ψ
    let arcs: Vec<(f64, f64)> = all.iter().map(|p| (star.value(p.a), star.value(p.b))).collect();
    let keep: Vec<usize> = (0..all.len()).filter(|&i| arcs[i].1 > arcs[i].0).collect();
    let lengths: Vec<f64> = keep.iter().map(|&i| arcs[i].1 - arcs[i].0).collect();
    let eta = etas(&lengths);
    let d: Vec<f64> = lengths.iter().zip(&eta).map(|(l, e)| (l / e).sqrt()).collect();
    let slope_cap: Vec<f64> = d.iter().zip(&eta).map(|(d, e)| RAMP_SLOPE_LIMIT * d * d * e).collect();
    let psi = density_homeomorphism(d1.max(f64::MIN_POSITIVE), &keep.iter().map(|&i| arcs[i]).collect::<Vec<_>>(), &d)?;
    let mut cells = Vec::with_capacity(keep.len());
    for (n, &i) in keep.iter().enumerate() {
        let p = &all[i];
        // slopes are shared by both cells at a common endpoint inside G
        let c_left =
            if p.shared_left && n > 0 && keep[n - 1] + 1 == i { slope_cap[n].min(slope_cap[n - 1]) } else { 0.0 };
        let c_right = if p.shared_right && n + 1 < keep.len() && keep[n + 1] == i + 1 {
            slope_cap[n].min(slope_cap[n + 1])
        } else {
            0.0
        };
        let image = psi.images[n];
        let r = ramp(lengths[n], (image.0, image.0 + d[n]), arcs[i].0, eta[n], c_left, c_right)?;
        cells.push(StageCell {
            kind: p.kind,
            source: (p.a, p.b),
            arc: arcs[i],
            image,
            length: lengths[n],
            eta: eta[n],
            d: d[n],
            c_left,
            c_right,
            sup: p.sup,
            ramp: r,
        });
    }
    Ok(CompositeHomeomorphism { mode, k, d1, d2: psi.d_prime, cells, psi, h_points, curve: curve.clone(), star })
}

impl CompositeHomeomorphism {
    /// π(x) = d₂x.
    pub fn pi(&self, x: f64) -> f64 {
        self.d2 * x
    }

    /// (φ, φ′, φ″) at y ∈ [0, d₂].
    pub fn phi(&self, y: f64) -> (f64, f64, f64) {
        let y = y.clamp(0.0, self.d2);
        let k = self.cells.partition_point(|c| c.image.0 <= y);
        if k > 0 {
            let c = &self.cells[k - 1];
            if y <= c.image.1 {
                return c.ramp.eval(y);
            }
        }
        (self.psi.psi(y), 1.0 / self.psi.density(self.psi.psi(y)), 0.0)
    }

    /// ξ(s) = (v*)⁻¹(s).
    pub fn xi(&self, s: f64) -> f64 {
        self.star.inverse(s.clamp(0.0, self.d1))
    }

    /// h(x); h(0) and h(1) are the domain ends exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.curve.domain();
        if x <= 0.0 {
            return lo;
        }
        if x >= 1.0 {
            return hi;
        }
        self.xi(self.phi(self.pi(x)).0)
    }

    /// h⁻¹(t).
    pub fn inverse(&self, t: f64) -> f64 {
        let (lo, hi) = self.curve.domain();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let s = self.star.value(t);
        let k = self.cells.partition_point(|c| c.arc.0 <= s);
        let y = match k.checked_sub(1).map(|k| &self.cells[k]) {
            Some(c) if s <= c.arc.1 => c.ramp.inverse(s),
            _ => self.psi.forward(s),
        };
        (y / self.d2).clamp(0.0, 1.0)
    }

    /// (f∘h)(x).
    pub fn compose(&self, x: f64) -> Vector {
        self.curve.at(self.eval(x))
    }

    pub fn curve(&self) -> &CurveSource {
        &self.curve
    }

    /// h⁻¹ of the recorded points of H.
    pub fn boundary_points(&self) -> Vec<f64> {
        self.h_points.iter().map(|t| self.inverse(*t)).collect()
    }

    pub fn manifest(&self) -> StageManifest<'_> {
        let covered: f64 = self.cells.iter().filter(|c| c.kind == PieceKind::Cell).map(|c| c.d).sum();
        StageManifest {
            mode: self.mode,
            k: self.k,
            d1: self.d1,
            d2: self.d2,
            flat_measure: self.star.flat_measure(),
            uncovered_fraction: ((self.d2 - covered) / self.d2).max(0.0),
            cells: &self.cells,
        }
    }

    /// CSV with columns x, h(x), h′(x) (central differences).
    pub fn to_csv(&self, samples: usize) -> String {
        let n = samples.max(2);
        let step = 1.0 / n as f64;
        let mut out = String::from("x,h,dh\n");
        for i in 0..=n {
            let x = i as f64 * step;
            let (a, b) = ((x - 0.5 * step).max(0.0), (x + 0.5 * step).min(1.0));
            let dh = (self.eval(b) - self.eval(a)) / (b - a);
            out.push_str(&format!("{x:.17e},{:.17e},{dh:.17e}\n", self.eval(x)));
        }
        out
    }
}

/// Greedy (f,δ,δ)-partitions of every component of `g`.
pub fn greedy_partitions(
    curve: &CurveSource,
    g: &IntervalSet,
    delta: f64,
    cfg: &Config,
) -> Result<Vec<GeneralizedPartition>> {
    g.intervals.iter().map(|&c| greedy_partition(curve, c, delta, cfg, GreedyOptions::from_config(cfg))).collect()
}

/// Singular set, greedy partitions with δ = K and assembly of h.
pub fn reparametrize(curve: &CurveSource, mode: Mode, k: f64, cfg: &Config) -> Result<CompositeHomeomorphism> {
    let est = detect_singular_set(curve, mode, cfg.detection_grid, cfg)?;
    let parts = greedy_partitions(curve, &est.regular, k, cfg)?;
    assemble(curve, &est.regular, &parts, k, mode, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_model::{cantor_phase_curve, circle_arc, harmonic_phase_curve, line_segment};
    use crate::reparam::{verify_smoothness, zero_derivative_at_boundary};

    fn strictly_increasing(h: &CompositeHomeomorphism, n: usize) {
        let (lo, hi) = h.curve().domain();
        assert_eq!(h.eval(0.0), lo);
        assert_eq!(h.eval(1.0), hi);
        let mut prev = lo;
        for i in 1..=n {
            let t = h.eval(i as f64 / n as f64);
            assert!(t > prev || (t == prev && t == hi), "not increasing at {i}: {prev} {t}");
            prev = t;
        }
    }

    #[test]
    fn regular_curve_single_component() {
        let cfg = Config::default();
        for f in [line_segment(), circle_arc(1.0, 2.0).unwrap()] {
            let h = reparametrize(&f, Mode::C2, 1.0, &cfg).unwrap();
            strictly_increasing(&h, 10_000);
            let r = verify_smoothness(&f, &h, 1000, Mode::C2);
            assert!(r.pass, "{r:?}");
            let z = zero_derivative_at_boundary(&f, &h, &[0.0, 1.0], 1e-3);
            assert!(z.pass, "{z:?}");
            // h′ is tiny at shared cell ends, so the round trip is checked in t
            for x in [0.1, 0.5, 0.9] {
                let t = h.eval(x);
                assert!((h.eval(h.inverse(t)) - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cantor_phase_c2() {
        let cfg = Config::default();
        let f = cantor_phase_curve(0.6, 6).unwrap();
        let h = reparametrize(&f, Mode::C2, 1.0, &cfg).unwrap();
        strictly_increasing(&h, 20_000);
        let r = verify_smoothness(&f, &h, 1000, Mode::C2);
        assert!(
            r.pass,
            "{:?} {:?}",
            r.sup_second_diff,
            r.continuity_modulus_profile.iter().filter(|m| !m.shrinking).collect::<Vec<_>>()
        );
        let z = zero_derivative_at_boundary(&f, &h, &h.boundary_points(), 1e-3);
        assert!(z.pass, "{:?}", z.points.iter().filter(|p| !p.pass).collect::<Vec<_>>());
    }

    #[test]
    fn harmonic_phase_bounded_second_derivative() {
        let cfg = Config::default();
        let f = harmonic_phase_curve(16).unwrap();
        let h = reparametrize(&f, Mode::D2inf, 1.0, &cfg).unwrap();
        let r = verify_smoothness(&f, &h, 1000, Mode::D2inf);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn bound_chain_on_ramp_cells() {
        let cfg = Config::default();
        let f = cantor_phase_curve(0.6, 4).unwrap();
        let h = reparametrize(&f, Mode::C2, 1.0, &cfg).unwrap();
        for c in h.cells.iter().filter(|c| c.kind == PieceKind::Cell) {
            let bound2 = c.eta * (19.0 * 19.0 * h.k + 19.0) * 1.05;
            let bound1 = 19.0 * (c.eta * c.length).sqrt() * 1.05;
            let (a, b) = (c.image.0, c.image.0 + c.d);
            let e = (b - a) / 400.0;
            let g = |y: f64| {
                let t = h.xi(h.phi(y).0);
                h.curve().at(t)
            };
            for i in 1..400 {
                let y = a + (b - a) * i as f64 / 400.0;
                let (p, m, q) = (g(y + e), g(y), g(y - e));
                let d2: f64 = p
                    .iter()
                    .zip(&m)
                    .zip(&q)
                    .map(|((p, m), q)| ((p - 2.0 * m + q) / (e * e)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let d1: f64 = p.iter().zip(&q).map(|(p, q)| ((p - q) / (2.0 * e)).powi(2)).sum::<f64>().sqrt();
                assert!(d2 <= bound2, "second derivative {d2} > {bound2}");
                assert!(d1 <= bound1, "first derivative {d1} > {bound1}");
            }
        }
    }

    #[test]
    fn rejects_uncertified_partition() {
        let cfg = Config::default();
        let f = circle_arc(4.0, 2.0).unwrap();
        let g = IntervalSet::whole(0.0, 1.0);
        let parts = greedy_partitions(&f, &g, 1.0, &cfg).unwrap();
        assert!(matches!(assemble(&f, &g, &parts, 0.5, Mode::C2, &cfg), Err(Error::CertificateFailure { .. })));
    }

    #[test]
    fn eta_selection_properties() {
        let lengths: Vec<f64> = (1..=500).map(|n| 1.0 / (n * n) as f64).collect();
        let eta = etas(&lengths);
        let d: Vec<f64> = lengths.iter().zip(&eta).map(|(l, e)| (l / e).sqrt()).collect();
        assert!(d.iter().all(|d| *d < 1.0));
        let total: f64 = d.iter().sum();
        let bound = 2.0 * lengths.iter().map(|l| l.sqrt()).sum::<f64>().sqrt() + 1.0;
        assert!(total.is_finite() && total <= 2.0 * bound, "{total}");
        assert!(eta.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
}
