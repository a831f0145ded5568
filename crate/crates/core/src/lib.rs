//! Exact-arithmetic workbench for degenerate Whittaker spaces of strongly
//! cuspidal representations of GL4 over a length-two local ring.
//!
//! Everything is computed at small odd prime powers q by exhaustive exact
//! arithmetic: finite fields and length-two local rings are table driven,
//! character values live in cyclotomic fields represented by complex numbers
//! with strict integrality rounding, and every closed-form quantity is
//! checked against an independent brute-force computation.

pub mod classfn;
pub mod cosets;
pub mod error;
pub mod field;
pub mod gl2table;
pub mod groups;
pub mod num;
pub mod oracle;
pub mod tower;
pub mod verifier;
pub mod whittaker;

pub use error::{Error, Result};
