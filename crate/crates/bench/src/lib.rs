//! Fixtures shared by the pipeline benchmarks in `benches/`.

use curvesmith::curve_model::{cantor_phase_curve, circle_arc, harmonic_phase_curve, spiral_curve};
use curvesmith::CurveSource;

/// Benchmark curves: smooth, endpoint-singular, and Cantor- and {1/n}-type
/// singular sets at moderate truncation depth.
pub fn fixtures() -> Vec<(&'static str, CurveSource)> {
    vec![
        ("circle", circle_arc(2.0, 3.0).expect("valid circle")),
        ("spiral_3", spiral_curve(3.0).expect("valid spiral")),
        ("cantor_8", cantor_phase_curve(0.6, 8).expect("valid cantor set")),
        ("harmonic_32", harmonic_phase_curve(32).expect("valid harmonic set")),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        let names: Vec<_> = super::fixtures().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["circle", "spiral_3", "cantor_8", "harmonic_32"]);
    }
}
