use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::corpus;
use super::curve::{CurveSource, IntervalSet, KnownClassification, ScalarFunction};

/// Curvature profile accepted by the `prescribed_curvature` descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurvatureSpec {
    Constant { c: f64 },
    Peaks { depth: usize },
}

/// Phase accepted by the `phase_integral` descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhaseSpec {
    Constant {
        value: f64,
    },
    Linear {
        slope: f64,
    },
    /// Volterra bumps on the components (1/(n+1), 1/n), n ≤ depth.
    Harmonic {
        depth: usize,
    },
    /// Volterra bumps on the listed open intervals.
    Bumps {
        intervals: Vec<(f64, f64)>,
    },
}

/// JSON descriptor for the curve corpus, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveDescriptor {
    Spiral { s: f64 },
    PrescribedCurvature { profile: CurvatureSpec },
    PhaseIntegral { phase: PhaseSpec },
    CantorPhase { ratio: f64, depth: usize },
    Circle { c: f64, length: f64 },
    Line,
}

impl CurveDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidDescriptor(e.to_string()))
    }

    pub fn build(&self) -> Result<CurveSource> {
        let curve = match self {
            Self::Spiral { s } => corpus::spiral_curve(*s)?,
            Self::PrescribedCurvature { profile: CurvatureSpec::Constant { c } } => {
                let c = *c;
                corpus::prescribed_curvature_curve(ScalarFunction::new((0.0, 1.0), move |_| c).with_d1(|_| 0.0))?
                    .with_kind(format!("prescribed_curvature(c={c})"))
                    .with_known(KnownClassification { bv: true, c2: true, d2inf: true, singular_set: None })
            }
            Self::PrescribedCurvature { profile: CurvatureSpec::Peaks { depth } } => {
                corpus::peak_curvature_curve(*depth)?.0
            }
            Self::PhaseIntegral { phase } => match phase {
                PhaseSpec::Constant { value } => {
                    let v = *value;
                    corpus::phase_integral_curve(ScalarFunction::new((0.0, 1.0), move |_| v).with_d1(|_| 0.0))?
                        .with_known(KnownClassification { bv: true, c2: true, d2inf: true, singular_set: None })
                        .with_regular_sets(Some(IntervalSet::whole(0.0, 1.0)), Some(IntervalSet::whole(0.0, 1.0)))
                }
                PhaseSpec::Linear { slope } => {
                    let k = *slope;
                    corpus::phase_integral_curve(ScalarFunction::new((0.0, 1.0), move |t| k * t).with_d1(move |_| k))?
                        .with_known(KnownClassification { bv: true, c2: true, d2inf: true, singular_set: None })
                        .with_regular_sets(Some(IntervalSet::whole(0.0, 1.0)), Some(IntervalSet::whole(0.0, 1.0)))
                }
                PhaseSpec::Harmonic { depth } => corpus::harmonic_phase_curve(*depth)?,
                PhaseSpec::Bumps { intervals } => {
                    let g = IntervalSet::new(intervals.clone())?;
                    let known =
                        KnownClassification { bv: true, c2: true, d2inf: true, singular_set: Some("finite".into()) };
                    corpus::bump_phase_curve(g, "phase_integral(bumps)", known)?
                }
            },
            Self::CantorPhase { ratio, depth } => corpus::cantor_phase_curve(*ratio, *depth)?,
            Self::Circle { c, length } => corpus::circle_arc(*c, *length)?,
            Self::Line => corpus::line_segment(),
        };
        Ok(curve)
    }

    /// Truncation level of the construction, when it has one.
    pub fn truncation_depth(&self) -> Option<usize> {
        match self {
            Self::CantorPhase { depth, .. }
            | Self::PrescribedCurvature { profile: CurvatureSpec::Peaks { depth } }
            | Self::PhaseIntegral { phase: PhaseSpec::Harmonic { depth } } => Some(*depth),
            _ => None,
        }
    }
}
