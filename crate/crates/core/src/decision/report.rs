use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::partition::SqrtSum;
use crate::quadrature::Convergence;
use crate::variation::NullTest;

use super::integral::CurvatureIntegral;
use super::singular::{EstimateSource, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Reparametrizable,
    NotReparametrizable,
    Inconclusive,
}

/// Which characterization produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Null test plus partition and component √-sums.
    Partition,
    /// Curvature monotone near both ends: the √-curvature integral decides.
    Monotone,
    /// Real-valued functions: monotone pieces and their oscillations.
    Lebedev,
}

/// Compact view of a √-sum for reports; full partial sums stay in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumSummary {
    pub terms: usize,
    pub sum: f64,
    pub tail_estimate: f64,
    pub budget_sums: Vec<(usize, f64)>,
    pub doubling_ratio: Option<f64>,
    pub truncated: bool,
    pub verdict: Convergence,
}

impl From<&SqrtSum> for SumSummary {
    fn from(s: &SqrtSum) -> Self {
        Self {
            terms: s.partial_sums.len(),
            sum: s.sum,
            tail_estimate: s.tail_estimate,
            budget_sums: s.budget_sums.clone(),
            doubling_ratio: s.doubling_ratio,
            truncated: s.truncated,
            verdict: s.verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSummary {
    pub source: EstimateSource,
    pub points: usize,
    pub components: usize,
    pub residual_regions: usize,
}

/// End windows on which ‖F″‖ was found monotone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneWindows {
    pub left: (f64, f64),
    pub right: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub null_tol: f64,
    pub growth_threshold: f64,
    pub ratio_threshold: f64,
    pub tail_fraction: f64,
    pub blowup: f64,
    pub end_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub max_cells: usize,
    pub cantor_depth: usize,
    pub harmonic_depth: usize,
    pub cells_used: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub mode: Mode,
    pub route: Route,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_set: Option<SingularSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_test: Option<NullTest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_sum: Option<SumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_sum: Option<SumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature_integral: Option<CurvatureIntegral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone_windows: Option<MonotoneWindows>,
    pub tolerances: Tolerances,
    pub truncation: Truncation,
    pub notes: Vec<String>,
    /// Partial sums of the pooled partition, ordered by decreasing V.
    #[serde(skip)]
    pub partial_sums: Vec<f64>,
}

impl AnalysisReport {
    pub(crate) fn skeleton(mode: Mode, route: Route, delta: f64, cfg: &Config) -> Self {
        Self {
            verdict: Verdict::Inconclusive,
            mode,
            route,
            delta,
            singular_set: None,
            null_test: None,
            partition_sum: None,
            component_sum: None,
            curvature_integral: None,
            monotone_windows: None,
            tolerances: Tolerances {
                null_tol: cfg.null_tol,
                growth_threshold: cfg.growth_threshold,
                ratio_threshold: cfg.ratio_threshold,
                tail_fraction: cfg.tail_fraction,
                blowup: cfg.blowup,
                end_tol: cfg.end_tol,
            },
            truncation: Truncation {
                max_cells: cfg.max_cells,
                cantor_depth: cfg.cantor_depth,
                harmonic_depth: cfg.harmonic_depth,
                cells_used: 0,
                truncated: false,
            },
            notes: Vec::new(),
            partial_sums: Vec::new(),
        }
    }

    /// CSV trace (cell_index, partial_sum) of the pooled partition sum.
    pub fn partial_sums_csv(&self) -> String {
        let mut out = String::from("cell_index,partial_sum\n");
        for (i, s) in self.partial_sums.iter().enumerate() {
            out.push_str(&format!("{},{s:.17e}\n", i + 1));
        }
        out
    }
}

/// Combines the evidence: reparametrizable needs every test to pass, and a
/// single failed necessary condition is enough for the negative verdict.
pub fn combine(null_ok: Option<bool>, verdicts: &[Convergence]) -> Verdict {
    if null_ok == Some(false) || verdicts.contains(&Convergence::Diverges) {
        Verdict::NotReparametrizable
    } else if null_ok == Some(true) && verdicts.iter().all(|v| *v == Convergence::Converges) {
        Verdict::Reparametrizable
    } else {
        Verdict::Inconclusive
    }
}
