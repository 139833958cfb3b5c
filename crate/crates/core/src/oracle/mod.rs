//! Oracle side: the hidden shift instance and the simulated quantum device.

mod device;
mod encoding;
mod instance;

#[cfg(any(test, feature = "inspect"))]
pub use device::Inspector;
pub use device::{CosetToken, Oracle, Outcome, PhaseToken, SieveReport, WrappedOracle};
pub use encoding::Codeword;
pub(crate) use encoding::mix64;
pub use instance::{HiddenShiftInstance, Params};

#[cfg(test)]
mod tests;
