use std::fmt;
use std::time::Instant;

/// One named check inside a suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Outcome of a verification suite; it passes iff every check passes.
#[derive(Clone, Debug)]
pub struct TestReport {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    pub seconds: f64,
    started: Instant,
}

impl TestReport {
    pub fn new(suite: impl Into<String>) -> Self {
        Self {
            suite: suite.into(),
            checks: Vec::new(),
            notes: Vec::new(),
            seconds: 0.0,
            started: Instant::now(),
        }
    }

    /// Records a check that passes when `statistic <= threshold`.
    pub fn at_most(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) {
        let passed = statistic <= threshold;
        self.push(name, statistic, threshold, samples, passed);
    }

    /// Records a check that passes when `statistic >= threshold`.
    pub fn at_least(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) {
        let passed = statistic >= threshold;
        self.push(name, statistic, threshold, samples, passed);
    }

    /// Records a check that passes when `statistic < threshold` (strict).
    pub fn below(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) {
        let passed = statistic < threshold;
        self.push(name, statistic, threshold, samples, passed);
    }

    pub fn push(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, samples: usize, passed: bool) {
        self.checks.push(CheckRecord {
            name: name.into(),
            statistic,
            threshold,
            samples,
            passed,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn absorb(&mut self, other: TestReport) {
        let prefix = other.suite.clone();
        for mut c in other.checks {
            c.name = format!("{prefix}/{}", c.name);
            self.checks.push(c);
        }
        self.notes.extend(other.notes);
    }

    pub fn finish(mut self) -> Self {
        self.seconds = self.started.elapsed().as_secs_f64();
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "suite {}: {} ({} checks, {:.2}s)",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.seconds
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {} statistic={:.6e} threshold={:.6e} n={}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.statistic,
                c.threshold,
                c.samples
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}
