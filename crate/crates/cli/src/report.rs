//! JSON report types. Every document carries `"schema": 1`.

use num_complex::Complex64;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    /// `None` when the check aborted with a numerical error.
    pub max_error: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub lattice: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub overall: Status,
}

impl VerificationReport {
    pub fn new(suite: &str, lattice: &str, seed: u64, checks: Vec<CheckResult>) -> Self {
        let overall = Status::from_bool(checks.iter().all(|c| c.status == Status::Pass));
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.to_string(),
            lattice: lattice.to_string(),
            seed,
            checks,
            overall,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub schema: u32,
    pub lattice: String,
    pub seed: u64,
    pub alpha: [i64; 4],
    pub labels: Vec<String>,
    pub entries: Vec<Vec<[f64; 2]>>,
    pub fit_residual: f64,
    pub holdout_residual: f64,
    pub condition: f64,
    pub tolerance: f64,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub schema: u32,
    pub what: String,
    pub order: u32,
    pub denom: u32,
    /// `[exponent numerator, re, im]`; the exponent is `numerator / denom`.
    pub terms: Vec<[serde_json::Value; 3]>,
}

pub fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Integral values are written as JSON integers, everything else as floats.
pub fn number(x: f64) -> serde_json::Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        serde_json::Value::from(x as i64)
    } else {
        serde_json::Value::from(x)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
