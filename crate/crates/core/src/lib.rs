//! Classical simulation of a polynomial-space quantum algorithm for the
//! hidden shift problem over `Z_{2^t}^n`.
//!
//! The crate is split along the line a real experiment would draw:
//!
//! - [`oracle`] holds the secret shift and simulates every quantum step
//!   exactly (phase states are single qubits with residue phases);
//! - [`sieve`] and [`solver`] see only labels, combination signs and
//!   measurement bits, and recover the shift from them;
//! - [`validate`] holds independent oracles and statistical harnesses.

pub mod error;
pub mod gf2;
pub mod group;
pub mod instance_file;
pub mod oracle;
pub mod seed;
pub mod sieve;
pub mod solver;
pub mod stats;
pub mod suite;
pub mod validate;

pub use error::{GroupError, Gf2Error, InstanceFileError, OracleError, SieveError, SolveError, ValidateError};
pub use gf2::{BitRow, CoefficientVector, Gf2System};
pub use group::{GroupVector, Sign};
pub use oracle::{CosetToken, HiddenShiftInstance, Oracle, Outcome, Params, PhaseToken, SieveReport, WrappedOracle};
