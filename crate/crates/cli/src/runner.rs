//! Runs a list of checks, optionally on several threads, and returns the
//! results in the order the checks were declared.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{is_numerical, CliError, Result};
use crate::report::{CheckResult, Status};

/// What a check measured.
#[derive(Clone, Debug)]
pub struct Measure {
    pub max_error: f64,
    pub detail: Option<String>,
}

impl Measure {
    pub fn error(max_error: f64) -> Self {
        Self { max_error, detail: None }
    }

    /// An exact check: the error is the number of mismatches.
    pub fn mismatches(count: usize, detail: impl Into<String>) -> Self {
        Self {
            max_error: count as f64,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

type CheckFn = Box<dyn Fn() -> thetavoa::Result<Measure> + Send + Sync>;

pub struct Check {
    pub name: String,
    /// Zero for exact checks.
    pub tolerance: f64,
    pub run: CheckFn,
}

impl Check {
    pub fn new<F>(name: impl Into<String>, tolerance: f64, run: F) -> Self
    where
        F: Fn() -> thetavoa::Result<Measure> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            tolerance,
            run: Box::new(run),
        }
    }
}

fn passes(max_error: f64, tolerance: f64) -> bool {
    if tolerance == 0.0 {
        max_error == 0.0
    } else {
        max_error < tolerance
    }
}

fn run_one(check: &Check, timings: bool) -> Result<CheckResult> {
    let start = Instant::now();
    let outcome = (check.run)();
    let runtime_ms = timings.then(|| start.elapsed().as_millis() as u64);
    match outcome {
        Ok(m) => Ok(CheckResult {
            name: check.name.clone(),
            status: Status::from_bool(passes(m.max_error, check.tolerance)),
            max_error: Some(m.max_error),
            tolerance: check.tolerance,
            detail: m.detail,
            runtime_ms,
        }),
        Err(e) if is_numerical(&e) => Ok(CheckResult {
            name: check.name.clone(),
            status: Status::Fail,
            max_error: None,
            tolerance: check.tolerance,
            detail: Some(e.to_string()),
            runtime_ms,
        }),
        Err(e) => Err(CliError::Input(e)),
    }
}

pub fn run_checks(checks: &[Check], jobs: usize, timings: bool) -> Result<Vec<CheckResult>> {
    if jobs <= 1 || checks.len() <= 1 {
        return checks.iter().map(|c| run_one(c, timings)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<CheckResult>>>> = Mutex::new((0..checks.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(checks.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= checks.len() {
                    break;
                }
                let r = run_one(&checks[i], timings);
                slots.lock().expect("no thread panicked holding the lock")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no thread panicked holding the lock")
        .into_iter()
        .map(|r| r.expect("every slot was filled"))
        .collect()
}
