use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Location-annotated failure from the polynomial or matrix text parsers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseDiagnostic {
    pub(crate) fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseDiagnostic {
            offset,
            line,
            column,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub(crate) fn expecting<I, S>(mut self, expected: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.expected = expected.into_iter().map(Into::into).collect();
        self
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseDiagnostic {}

/// Broad failure category, used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Parse,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("index ({row}, {col}) out of range for a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is numerically singular: pivot {pivot:e} below threshold {threshold:e}")]
    NumericallySingular { pivot: f64, threshold: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("polynomials use incompatible variable sets {left} and {right}")]
    IncompatibleVariables { left: String, right: String },
    #[error("assignment does not cover variable '{0}'")]
    IncompleteAssignment(char),
    #[error("parse error at {0}")]
    Parse(#[from] ParseDiagnostic),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("invalid gauge: {0}")]
    InvalidGauge(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_) | Error::InvalidCertificate(_) => ErrorClass::Parse,
            Error::Singular
            | Error::NumericallySingular { .. }
            | Error::NotPositiveDefinite
            | Error::DivisionByZero
            | Error::NotDoublyStochastic(_)
            | Error::InvalidGauge(_)
            | Error::Domain(_) => ErrorClass::Numeric,
            Error::DimensionMismatch(_)
            | Error::NotSquare { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NotSymmetric(_)
            | Error::IncompatibleVariables { .. }
            | Error::IncompleteAssignment(_)
            | Error::Precondition(_)
            | Error::Unsupported(_) => ErrorClass::Usage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostic_reports_line_and_column() {
        let text = "a + b\n  c ?";
        let d = ParseDiagnostic::at(text, 10, "bad");
        assert_eq!((d.line, d.column), (2, 5));
        assert_eq!(d.offset, 10);
    }
}
