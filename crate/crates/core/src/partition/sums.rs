use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::quadrature::Convergence;

/// Partial sums of √V over cells ordered by decreasing V, with the
/// budget-doubling diagnostics behind the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtSum {
    pub partial_sums: Vec<f64>,
    pub sum: f64,
    /// Extrapolated remainder beyond the truncation; 0 for complete families.
    pub tail_estimate: f64,
    /// Partial sums at budgets N/8, N/4, N/2, N.
    pub budget_sums: Vec<(usize, f64)>,
    /// Fitted ratio of successive budget-doubling increments.
    pub doubling_ratio: Option<f64>,
    pub truncated: bool,
    pub verdict: Convergence,
}

const MIN_CELLS_FOR_FIT: usize = 16;

/// Σ√V with a convergence verdict. `front` is `None` for a complete
/// family, which is a finite sum and converges. A truncated family passes
/// the size of the cells at its truncation front: cells at least that
/// large are all present, smaller ones may be missing, so only the former
/// enter the fit. Their partial-sum increments over the last three budget
/// doublings are fitted by a geometric law with ratio ρ:
/// * ρ ≥ 1 diverges;
/// * ρ ≤ `ratio_threshold` converges when the extrapolated tail is at most
///   `tail_fraction`·sum, and is inconclusive otherwise;
/// * otherwise growth above `growth_threshold` on both of the last two
///   doublings diverges, and anything else is inconclusive.
pub fn sqrt_variation_sum(variations: &[f64], front: Option<f64>, cfg: &Config) -> SqrtSum {
    let mut v: Vec<f64> = variations.iter().map(|x| x.max(0.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let mut partial_sums = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for x in &v {
        acc += x.sqrt();
        partial_sums.push(acc);
    }
    let truncated = front.is_some();
    let n = front.map_or(v.len(), |f| v.partition_point(|x| *x >= f));
    let at = |k: usize| if k == 0 { 0.0 } else { partial_sums[k - 1] };
    let budgets: Vec<usize> = [n / 8, n / 4, n / 2, n].to_vec();
    let budget_sums: Vec<(usize, f64)> = budgets.iter().map(|&k| (k, at(k))).collect();
    if !truncated {
        return SqrtSum {
            partial_sums,
            sum: acc,
            tail_estimate: 0.0,
            budget_sums,
            doubling_ratio: None,
            truncated,
            verdict: Convergence::Converges,
        };
    }
    if n < MIN_CELLS_FOR_FIT {
        return SqrtSum {
            partial_sums,
            sum: acc,
            tail_estimate: f64::INFINITY,
            budget_sums,
            doubling_ratio: None,
            truncated,
            verdict: Convergence::Inconclusive,
        };
    }
    let s: Vec<f64> = budget_sums.iter().map(|p| p.1).collect();
    let d1 = s[1] - s[0];
    let d2 = s[2] - s[1];
    let d3 = s[3] - s[2];
    let rho = if d1 > 0.0 {
        (d3 / d1).sqrt()
    } else if d3 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let tail = if rho < 1.0 { d3 * rho / (1.0 - rho) } else { f64::INFINITY };
    let growth1 = if s[2] > 0.0 { d2 / s[2] } else { 0.0 };
    let growth2 = if s[3] > 0.0 { d3 / s[3] } else { 0.0 };
    let verdict = if rho >= 1.0 {
        Convergence::Diverges
    } else if rho <= cfg.ratio_threshold {
        // geometric decay: too short a family is unresolved, not divergent
        if tail <= cfg.tail_fraction * acc {
            Convergence::Converges
        } else {
            Convergence::Inconclusive
        }
    } else if growth1 > cfg.growth_threshold && growth2 > cfg.growth_threshold {
        Convergence::Diverges
    } else {
        Convergence::Inconclusive
    };
    SqrtSum { partial_sums, sum: acc, tail_estimate: tail, budget_sums, doubling_ratio: Some(rho), truncated, verdict }
}

impl SqrtSum {
    /// CSV trace (cell_index, partial_sum).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_index,partial_sum\n");
        for (i, s) in self.partial_sums.iter().enumerate() {
            out.push_str(&format!("{},{s:.17e}\n", i + 1));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn harmonic_cells_diverge() {
        let v: Vec<f64> = (2..=4096).map(|n| 1.0 / (n as f64 * (n as f64 + 1.0))).collect();
        let r = sqrt_variation_sum(&v, Some(0.0), &Config::default());
        assert_eq!(r.verdict, Convergence::Diverges);
    }

    #[test]
    fn cantor_components_converge() {
        let mut v = Vec::new();
        for n in 1..=12 {
            for _ in 0..1usize << (n - 1) {
                v.push(0.6 * 0.2f64.powi(n - 1));
            }
        }
        let r = sqrt_variation_sum(&v, Some(0.0), &Config::default());
        assert_eq!(r.verdict, Convergence::Converges);
        let q = 2.0 * 0.2f64.sqrt();
        let exact: f64 = (0..12).map(|k| 0.6f64.sqrt() * q.powi(k)).sum();
        assert!((r.sum - exact).abs() < 1e-9);
        let limit = 0.6f64.sqrt() / (1.0 - 2.0 / 5f64.sqrt());
        assert!((limit - 7.337).abs() < 1e-3);
        assert!((r.sum + r.tail_estimate - limit).abs() < 0.05 * limit);
    }

    #[test]
    fn shallow_geometric_family_is_not_divergent() {
        // six Cantor generations: clearly geometric, but the tail still outweighs the sum
        let mut v = Vec::new();
        for n in 1..=6 {
            for _ in 0..1usize << (n - 1) {
                v.push(0.6 * 0.2f64.powi(n - 1));
            }
        }
        let r = sqrt_variation_sum(&v, Some(0.0), &Config::default());
        assert!(r.doubling_ratio.unwrap() < 0.95);
        assert!(r.tail_estimate > r.sum);
        assert_eq!(r.verdict, Convergence::Inconclusive);
    }

    #[test]
    fn fit_stops_at_the_truncation_front() {
        // √-harmonic cells resolved down to n = 64 plus summable cells far below them
        let c = 0.3f64;
        let mut v: Vec<f64> = (1..=64).map(|n| c / (n * n) as f64).collect();
        v.extend((2..=64).map(|n| 1.0 / (n as f64).powi(4)));
        let front = c / (64.0 * 64.0);
        assert_eq!(sqrt_variation_sum(&v, Some(front), &Config::default()).verdict, Convergence::Diverges);
        assert_ne!(sqrt_variation_sum(&v, Some(0.0), &Config::default()).verdict, Convergence::Diverges);
    }

    #[test]
    fn single_cell() {
        let r = sqrt_variation_sum(&[0.25], None, &Config::default());
        assert_eq!(r.verdict, Convergence::Converges);
        assert_eq!(r.sum, 0.5);
    }

    proptest! {
        #[test]
        fn sqrt_of_sum_below_sum_of_sqrt(xs in proptest::collection::vec(0.0f64..10.0, 1..50)) {
            let lhs = xs.iter().sum::<f64>().sqrt();
            let rhs: f64 = xs.iter().map(|x| x.sqrt()).sum();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
