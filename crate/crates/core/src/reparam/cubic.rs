/// C² function on [knots₀, knots_last] whose second derivative is the
/// continuous piecewise-linear interpolant of `acc`; value and slope at
/// every knot are accumulated exactly, so evaluation is closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCubic {
    knots: Vec<f64>,
    acc: Vec<f64>,
    slope: Vec<f64>,
    value: Vec<f64>,
}

impl PiecewiseCubic {
    /// `knots` nondecreasing; zero-length pieces are allowed and skipped.
    pub fn from_second_derivative(knots: Vec<f64>, acc: Vec<f64>, value0: f64, slope0: f64) -> Self {
        let widths: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        Self::build(knots, &widths, acc, value0, slope0)
    }

    /// Pieces given by their widths from `start`. The widths enter the
    /// integration directly, so narrow pieces next to large knot values keep
    /// full relative accuracy.
    pub fn from_widths(start: f64, widths: &[f64], acc: Vec<f64>, value0: f64, slope0: f64) -> Self {
        let mut knots = Vec::with_capacity(widths.len() + 1);
        knots.push(start);
        for w in widths {
            knots.push(knots[knots.len() - 1] + w);
        }
        Self::build(knots, widths, acc, value0, slope0)
    }

    fn build(knots: Vec<f64>, widths: &[f64], acc: Vec<f64>, value0: f64, slope0: f64) -> Self {
        debug_assert_eq!(knots.len(), acc.len());
        let n = knots.len();
        let mut slope = Vec::with_capacity(n);
        let mut value = Vec::with_capacity(n);
        slope.push(slope0);
        value.push(value0);
        for i in 0..n - 1 {
            let h = widths[i];
            let (m0, m1) = (acc[i], acc[i + 1]);
            slope.push(slope[i] + h * (m0 + m1) / 2.0);
            value.push(value[i] + slope[i] * h + h * h * (2.0 * m0 + m1) / 6.0);
        }
        Self { knots, acc, slope, value }
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().expect("nonempty")
    }

    /// (f, f′, f″) at x, clamped to the knot range.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let x = x.clamp(self.start(), self.end());
        let i = self.knots.partition_point(|k| *k <= x).clamp(1, self.knots.len() - 1) - 1;
        let h = x - self.knots[i];
        let len = self.knots[i + 1] - self.knots[i];
        let (m0, m1) = (self.acc[i], self.acc[i + 1]);
        let k = if len > 0.0 { (m1 - m0) / len } else { 0.0 };
        let f2 = m0 + k * h;
        let f1 = self.slope[i] + m0 * h + k * h * h / 2.0;
        let f0 = self.value[i] + self.slope[i] * h + m0 * h * h / 2.0 + k * h * h * h / 6.0;
        (f0, f1, f2)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
}
