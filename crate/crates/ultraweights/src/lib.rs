//! Weight calculus for ultradifferentiable and ultraholomorphic classes.
//!
//! Weight sequences, weight functions, Legendre conjugates, associated weight
//! matrices, the growth index, sectorial flat functions, Borel jets and the
//! weight-surgery construction, all evaluated in log domain.

// negated comparisons are how inputs reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numeric;
pub mod report;
pub mod sequence;
pub mod quad;
pub mod weight;
pub mod conjugate;
pub mod matrix;
pub mod surgery;
pub mod gamma;
pub mod flat;
pub mod jets;
pub mod descriptor;
pub mod verify;

pub use error::{Error, Result};
pub use report::{ConditionReport, Record, Summary, Verdict};
