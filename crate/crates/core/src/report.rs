use serde::{Deserialize, Serialize};

/// One named pass/fail check with the numeric margin that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity (residual, ratio spread, singular-value margin, ...).
    pub margin: f64,
    /// Threshold the margin was compared against.
    pub threshold: f64,
    /// Seconds spent producing the check; zero when not timed.
    #[serde(default)]
    pub wall_time_s: f64,
    /// Checks that are recorded but do not fail a run when noise is injected.
    #[serde(default)]
    pub noise_exempt: bool,
}

impl Check {
    /// Check that passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            margin: value,
            threshold,
            wall_time_s: 0.0,
            noise_exempt: false,
        }
    }

    /// Check that passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value > threshold,
            margin: value,
            threshold,
            wall_time_s: 0.0,
            noise_exempt: false,
        }
    }

    /// Check that passes when `value == expected`.
    pub fn equals(name: impl Into<String>, value: usize, expected: usize) -> Self {
        Self {
            name: name.into(),
            passed: value == expected,
            margin: value as f64,
            threshold: expected as f64,
            wall_time_s: 0.0,
            noise_exempt: false,
        }
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.wall_time_s = seconds;
        self
    }

    pub fn exempt(mut self, exempt: bool) -> Self {
        self.noise_exempt = exempt;
        self
    }

    /// Whether this check counts against the run.
    pub fn blocking_failure(&self) -> bool {
        !self.passed && !self.noise_exempt
    }
}
