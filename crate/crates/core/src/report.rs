use serde::{Deserialize, Serialize};

/// Max/mean magnitude of a named identity over a grid of sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub max: f64,
    pub mean: f64,
    pub grid: Vec<usize>,
    pub step: f64,
}

impl ResidualReport {
    pub fn from_values(identity: impl Into<String>, values: &[f64], grid: Vec<usize>, step: f64) -> Self {
        let max = values
            .iter()
            .fold(0.0f64, |a, &v| if a.is_nan() || v.is_nan() { f64::NAN } else { a.max(v) });
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        ResidualReport {
            identity: identity.into(),
            max,
            mean,
            grid,
            step,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max.is_finite() && self.max <= tol
    }

    /// `log2(self.max / finer.max)`: the empirical order when `finer` used half the step.
    pub fn order_against(&self, finer: &ResidualReport) -> f64 {
        (self.max / finer.max).log2()
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["schema"] = 1.into();
        serde_json::to_string(&v).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_json() {
        let r = ResidualReport::from_values("epd", &[1e-12, 3e-12], vec![2, 1], 0.1);
        assert_eq!(r.max, 3e-12);
        assert!((r.mean - 2e-12).abs() < 1e-25);
        assert!(r.passes(1e-11));
        assert!(!r.passes(1e-12));
        let j = r.to_json();
        assert!(j.contains("\"schema\":1"));
        assert!(j.contains("\"identity\":\"epd\""));
    }

    #[test]
    fn nan_fails() {
        let r = ResidualReport::from_values("x", &[f64::NAN], vec![1], 0.1);
        assert!(!r.passes(1.0));
    }
}
