//! Permuted Kernel Problem cryptanalysis over prime fields.
//!
//! The crate contains two PKP solvers sharing one meet-in-the-middle core:
//!
//! - [`baseline`]: split-list collision search on `l` rows of the
//!   systematic form, followed by reconstruction of the full vector.
//! - [`filtered`]: the same search, but the candidates for a block of `w`
//!   coordinates are first filtered through a small-support subcode of the
//!   dual code, found with information set decoding ([`isd`]).
//!
//! [`estimator`] evaluates the closed-form running times of both solvers
//! and searches their parameter spaces; [`instance`] generates planted
//! instances and holds the brute-force oracle.
//!
//! See `examples/` for one runnable program per capability.

pub mod baseline;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod field;
pub mod filtered;
pub mod instance;
pub mod isd;
pub mod list;
pub mod logmath;
pub mod matrix;
pub mod solve;

pub use error::{PkpError, Result};
pub use field::{Elem, PrimeField};
pub use instance::{extend, generate_instance, verify, ExtendedSystem, Permutation, PkpInstance};
pub use matrix::Matrix;
