//! Exact and floating-point tooling for inverse relative gain arrays,
//! sum-of-squares certificates, majorization and spectral/diagonal pairs.

pub mod algebra;
pub mod error;
pub mod io;
pub mod irga;
pub mod majorization;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod search;
pub mod sos;
pub mod spdd;

pub use algebra::{Coefficient, Field, QuadExt3, Rational, Ring};
pub use error::{Error, ErrorClass, ParseDiagnostic, Result};
pub use matrix::DenseMatrix;
pub use poly::{Monomial, Polynomial, VariableSet};
