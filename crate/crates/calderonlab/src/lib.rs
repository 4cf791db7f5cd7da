//! Decreasing rearrangements, generalized Calderón operators, and
//! weight-class constants, plus an empirical verification harness for
//! pointwise rearrangement bounds.

pub mod admissible;
pub mod calderon;
pub mod cli;
pub mod error;
pub mod grid;
pub mod harness;
pub mod operators;
pub mod quad;
pub mod stepfn;
pub mod weights;

pub use admissible::AdmissibleFunction;
pub use calderon::CalderonParams;
pub use error::{Error, Result};
pub use stepfn::{GridFunction, RunningAverage, StepFunction};
pub use weights::Weight;
