//! Verification reports.

use serde::Serialize;

/// Accepted band for measured convergence orders of O(dx²) checks.
pub const ORDER_BAND: (f64, f64) = (1.7, 2.3);

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    /// The identity being checked.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_order: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Passes iff the residual is finite and strictly below the tolerance.
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            convergence_order: None,
            pass: residual.is_finite() && residual < tolerance,
        }
    }

    /// Also requires the order to fall in [`ORDER_BAND`].
    pub fn with_order(mut self, order: f64) -> Self {
        self.convergence_order = Some(order);
        self.pass &= order >= ORDER_BAND.0 && order <= ORDER_BAND.1;
        self
    }

    /// A check that could not be evaluated: fails and keeps the reason.
    pub fn failed(name: impl Into<String>, anchor: impl Into<String>, why: impl std::fmt::Display) -> Self {
        let mut c = Check::new(name, format!("{} [error: {why}]", anchor.into()), f64::NAN, 0.0);
        c.pass = false;
        c
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    /// Sorts the checks by name; passes iff every check passes.
    pub fn new(suite: impl Into<String>, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), pass, checks }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// log₂ of the residual ratio between two levels of halved spacing.
pub fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
