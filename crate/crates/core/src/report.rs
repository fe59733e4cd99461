//! Structured check records and reports.
//!
//! Every numeric claim carries its measured value, the expected value or
//! bound, and the tolerance in force. Failed checks always carry a witness.
//! Reports are deterministic given (config, seed, precision): no timestamps
//! or timings are stored.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported for information only; never affects the exit code.
    Info,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub measured: String,
    pub expected: String,
    pub tolerance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckRecord {
    pub fn pass(name: impl Into<String>, measured: impl Into<String>, expected: impl Into<String>, tolerance: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Pass,
            measured: measured.into(),
            expected: expected.into(),
            tolerance: tolerance.into(),
            witness: None,
        }
    }

    pub fn fail(
        name: impl Into<String>,
        measured: impl Into<String>,
        expected: impl Into<String>,
        tolerance: impl Into<String>,
        witness: impl Into<String>,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Fail,
            measured: measured.into(),
            expected: expected.into(),
            tolerance: tolerance.into(),
            witness: Some(witness.into()),
        }
    }

    pub fn info(name: impl Into<String>, measured: impl Into<String>, expected: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            status: Status::Info,
            measured: measured.into(),
            expected: expected.into(),
            tolerance: String::new(),
            witness: None,
        }
    }

    /// Pass/fail on a boolean with a witness on failure.
    pub fn assert(
        name: impl Into<String>,
        ok: bool,
        measured: impl Into<String>,
        expected: impl Into<String>,
        tolerance: impl Into<String>,
        witness: impl Into<String>,
    ) -> Self {
        if ok {
            Self::pass(name, measured, expected, tolerance)
        } else {
            Self::fail(name, measured, expected, tolerance, witness)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvBlock {
    pub precision: u32,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub env: EnvBlock,
    /// "ok", "failed", or "nothing-run".
    pub status: String,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(precision: u32, seed: u64, checks: Vec<CheckRecord>) -> Self {
        let status = if checks.is_empty() {
            "nothing-run".to_string()
        } else if checks.iter().any(|c| c.status == Status::Fail) {
            "failed".to_string()
        } else {
            "ok".to_string()
        };
        Report {
            env: EnvBlock {
                precision,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            status,
            checks,
        }
    }

    pub fn all_passed(&self) -> bool {
        !self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn count_failed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }
}
