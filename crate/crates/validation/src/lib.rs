//! Report runner for the acceptance criteria.
//!
//! Each criterion is a function returning [`Outcome`]. [`run_all`] runs them
//! in order, catches panics, prints one line per criterion and returns a
//! failing exit code if any criterion failed.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub budget: Duration,
    pub run: fn() -> Outcome,
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

/// Runs every criterion and prints `criterion <id> PASS|FAIL ...` lines.
pub fn run_all(criteria: &[Criterion]) -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    println!("running {} acceptance criteria", criteria.len());
    for c in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| Outcome::new(false, format!("panicked: {}", panic_message(&*p))));
        let elapsed = start.elapsed();
        let over = if elapsed > c.budget {
            " OVER BUDGET"
        } else {
            ""
        };
        println!(
            "criterion {:>3} {} {} [{:.2?} / {:?}{}]: {}",
            c.id,
            if outcome.pass { "PASS" } else { "FAIL" },
            c.title,
            elapsed,
            c.budget,
            over,
            outcome.detail
        );
        if !outcome.pass {
            failed.push(c.id);
        }
    }
    let _ = panic::take_hook();
    println!(
        "acceptance: {} passed, {} failed{}",
        criteria.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
