//! Acceptance suite for the `egr` library: fourteen criteria, each checked
//! against an independent oracle (closed forms, brute-force grids,
//! goodness-of-fit tests) under a runtime budget.

use std::time::{Duration, Instant};

mod criteria;
pub mod oracles;
pub mod stats;

pub use criteria::CRITERIA;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Accumulates the measurements of one criterion.
#[derive(Debug, Default)]
pub struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    /// Requires `value ≤ limit`; NaN fails.
    pub fn at_most(&mut self, label: &str, value: f64, limit: f64) {
        let line = format!("{label} = {value:.3e} (<= {limit:.0e})");
        if value <= limit {
            self.notes.push(line);
        } else {
            self.failures.push(line);
        }
    }

    /// Requires `value ≥ limit`; NaN fails.
    pub fn at_least(&mut self, label: &str, value: f64, limit: f64) {
        let line = format!("{label} = {value:.3e} (>= {limit:.0e})");
        if value >= limit {
            self.notes.push(line);
        } else {
            self.failures.push(line);
        }
    }

    pub fn holds(&mut self, label: &str, ok: bool) {
        if ok {
            self.notes.push(label.to_string());
        } else {
            self.failures.push(format!("violated: {label}"));
        }
    }

    /// Records a library error as a failure and hands back the value.
    pub fn ok<T>(&mut self, label: &str, r: egr::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(format!("{label}: {e}"));
                None
            }
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One acceptance criterion.
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub budget: Duration,
    pub run: fn(u64) -> Check,
}

#[derive(Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub elapsed: Duration,
    pub budget: Duration,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl Outcome {
    /// `PASS [ 7] title (0.41s, budget 10s): first finding`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let detail = if self.passed {
            self.notes.first().cloned().unwrap_or_default()
        } else {
            self.failures.join("; ")
        };
        format!(
            "{status} [{:>2}] {} ({:.2}s, budget {}s): {detail}",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

pub fn run(c: &Criterion, seed: u64) -> Outcome {
    let start = Instant::now();
    let mut check = (c.run)(seed.wrapping_add(c.id as u64));
    let elapsed = start.elapsed();
    if elapsed > c.budget {
        check.failures.push(format!(
            "runtime {:.2}s exceeds {}s",
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        ));
    }
    Outcome {
        id: c.id,
        title: c.title,
        passed: check.passed(),
        elapsed,
        budget: c.budget,
        failures: check.failures,
        notes: check.notes,
    }
}

/// Budget for the whole suite.
pub const SUITE_BUDGET: Duration = Duration::from_secs(300);

/// Runs every criterion in order, calling `report` after each.
pub fn run_all(seed: u64, mut report: impl FnMut(&Outcome)) -> (Vec<Outcome>, Duration) {
    let start = Instant::now();
    let outcomes = CRITERIA
        .iter()
        .map(|c| {
            let o = run(c, seed);
            report(&o);
            o
        })
        .collect();
    (outcomes, start.elapsed())
}
