//! Verdict records shared by every condition checker.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsWithWitness,
    FailsWithCounterexample,
    Inconclusive,
}

/// Outcome of checking one condition or inequality on a finite window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    /// Stable name of the checked statement.
    pub statement: String,
    pub verdict: Verdict,
    pub witnesses: Vec<(String, f64)>,
    pub counterexample: Option<f64>,
    pub tested_range: String,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(condition: impl Into<String>, statement: impl Into<String>) -> Self {
        ConditionReport {
            condition: condition.into(),
            statement: statement.into(),
            verdict: Verdict::Inconclusive,
            witnesses: Vec::new(),
            counterexample: None,
            tested_range: String::new(),
            notes: Vec::new(),
        }
    }

    pub fn holds(mut self, witnesses: Vec<(&str, f64)>) -> Self {
        self.verdict = Verdict::HoldsWithWitness;
        self.witnesses
            .extend(witnesses.into_iter().map(|(k, v)| (k.to_string(), v)));
        if self.witnesses.is_empty() {
            self.witnesses.push(("checked".into(), 1.0));
        }
        self
    }

    pub fn fails(mut self, at: f64) -> Self {
        self.verdict = Verdict::FailsWithCounterexample;
        self.counterexample = Some(at);
        self
    }

    pub fn inconclusive(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Inconclusive;
        self.notes.push(why.into());
        self
    }

    pub fn range(mut self, r: impl Into<String>) -> Self {
        self.tested_range = r.into();
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn witness(mut self, k: &str, v: f64) -> Self {
        self.witnesses.push((k.to_string(), v));
        self
    }

    pub fn is_holds(&self) -> bool {
        self.verdict == Verdict::HoldsWithWitness
    }

    pub fn is_fails(&self) -> bool {
        self.verdict == Verdict::FailsWithCounterexample
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.witnesses.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// A verdict placed in a run: which suite produced it, on what subject, and
/// which verdict the suite expects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub subject: String,
    pub expected: Verdict,
    /// `true` unless the verdict is decided and differs from `expected`.
    pub ok: bool,
    #[serde(flatten)]
    pub report: ConditionReport,
}

impl Record {
    pub fn expect_holds(suite: &str, subject: impl Into<String>, report: ConditionReport) -> Self {
        Self::new(suite, subject, Verdict::HoldsWithWitness, report)
    }

    /// A negative control: the condition must fail on this subject.
    pub fn expect_fails(suite: &str, subject: impl Into<String>, report: ConditionReport) -> Self {
        Self::new(suite, subject, Verdict::FailsWithCounterexample, report)
    }

    fn new(suite: &str, subject: impl Into<String>, expected: Verdict, report: ConditionReport) -> Self {
        let ok = report.verdict == Verdict::Inconclusive || report.verdict == expected;
        Record {
            suite: suite.to_string(),
            subject: subject.into(),
            expected,
            ok,
            report,
        }
    }

    pub fn is_decided_as_expected(&self) -> bool {
        self.report.verdict == self.expected
    }
}

/// Counts over a list of records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub as_expected: usize,
    pub unexpected: usize,
    pub inconclusive: usize,
}

impl Summary {
    pub fn of(records: &[Record]) -> Self {
        let mut s = Summary { total: records.len(), ..Summary::default() };
        for r in records {
            if r.report.verdict == Verdict::Inconclusive {
                s.inconclusive += 1;
            } else if r.ok {
                s.as_expected += 1;
            } else {
                s.unexpected += 1;
            }
        }
        s
    }
}
