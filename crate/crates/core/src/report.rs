//! Structured pass/fail records for identity checks.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use crate::algebra::{ExpSum, SparseMatrix};

const SAMPLE_LIMIT: usize = 5;

/// One offending residual value, tagged with the sub-identity it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualSample {
    pub context: String,
    pub row: usize,
    pub col: usize,
    pub value: ExpSum,
}

/// Outcome of one identity check.
///
/// `residual_support` holds the sorted matrix coordinates at which some
/// residual was nonzero; the check passes exactly when it is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub name: String,
    pub pass: bool,
    pub residual_support: Vec<(usize, usize)>,
    pub residual_sample: Vec<ResidualSample>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn failures(&self) -> usize {
        self.residual_support.len()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} ({:.1} ms)",
            self.name,
            self.elapsed.as_secs_f64() * 1e3
        )?;
        if !self.pass {
            write!(f, ", {} residual positions", self.residual_support.len())?;
            for s in &self.residual_sample {
                write!(
                    f,
                    "\n    {} at ({}, {}): {}",
                    s.context, s.row, s.col, s.value
                )?;
            }
        }
        for n in &self.notes {
            write!(f, "\n    note: {n}")?;
        }
        Ok(())
    }
}

/// Accumulates residuals while a check runs.
#[derive(Debug)]
pub struct ReportBuilder {
    name: String,
    start: Instant,
    support: BTreeSet<(usize, usize)>,
    samples: Vec<ResidualSample>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ReportBuilder {
            name: name.into(),
            start: Instant::now(),
            support: BTreeSet::new(),
            samples: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records every nonzero entry of `residual`.
    pub fn residual(&mut self, context: &str, residual: &SparseMatrix) -> &mut Self {
        for (i, j, v) in residual.entries() {
            self.position(context, i, j, v.clone());
        }
        self
    }

    /// Records `lhs − rhs`.
    pub fn compare(&mut self, context: &str, lhs: &SparseMatrix, rhs: &SparseMatrix) -> &mut Self {
        self.residual(context, &(lhs - rhs))
    }

    pub fn position(&mut self, context: &str, row: usize, col: usize, value: ExpSum) -> &mut Self {
        self.support.insert((row, col));
        if self.samples.len() < SAMPLE_LIMIT {
            self.samples.push(ResidualSample {
                context: context.to_string(),
                row,
                col,
                value,
            });
        }
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn finish(&mut self) -> VerificationReport {
        VerificationReport {
            name: std::mem::take(&mut self.name),
            pass: self.support.is_empty(),
            residual_support: std::mem::take(&mut self.support).into_iter().collect(),
            residual_sample: std::mem::take(&mut self.samples),
            notes: std::mem::take(&mut self.notes),
            elapsed: self.start.elapsed(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Scalar;

    #[test]
    fn pass_iff_support_empty() {
        let i = SparseMatrix::identity(3, 0);
        let ok = ReportBuilder::new("same").compare("I-I", &i, &i).finish();
        assert!(ok.pass && ok.residual_support.is_empty());

        let two = i.scale(&Scalar::from_int(2));
        let bad = ReportBuilder::new("diff")
            .compare("2I-I", &two, &i)
            .finish();
        assert!(!bad.pass);
        assert_eq!(bad.residual_support, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(bad.residual_sample.len(), 3);
    }

    #[test]
    fn samples_are_capped() {
        let i = SparseMatrix::identity(9, 0);
        let z = SparseMatrix::zeros(9, 9, 0);
        let r = ReportBuilder::new("cap").compare("I", &i, &z).finish();
        assert_eq!(r.residual_support.len(), 9);
        assert_eq!(r.residual_sample.len(), SAMPLE_LIMIT);
    }
}
