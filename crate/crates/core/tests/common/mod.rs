//! Checks shared by the integration tests and the acceptance report.
#![allow(dead_code)]

pub mod deconv;
pub mod estimators;
pub mod marginal;
pub mod quad;
pub mod table;
pub mod transforms;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }

    /// Panics with the detail when the check failed.
    pub fn assert(&self) {
        assert!(self.pass, "{}", self.line());
    }
}
