//! Numerical toolkit for comparing the SARG04 and BB84 quantum key
//! distribution protocols: tolerable error rates under two-way key
//! distillation, minimum error rates reachable by intercept-resend
//! attacks, and secret-key rates over lossy channels with weak coherent
//! pulses and decoy states.
//!
//! The crate is organised bottom-up:
//!
//! * [`entropy`] - binary entropy, Bell-diagonal channel states, one-way rates
//! * [`sarg`] - SARG04 state geometry and single/two-photon error bounds
//! * [`distill`] - two-way B/P step recursions and tolerable-error search
//! * [`linalg`] - small dense Hermitian eigensolver used by the attack module
//! * [`attack`] - intercept-resend strategies and their induced error rates
//! * [`decoy`] - detector/channel model, gain and QBER, decoy-state rates

pub mod attack;
pub mod decoy;
pub mod distill;
pub mod entropy;
pub mod linalg;
mod opt;
pub mod sarg;
mod xf;

pub use entropy::BellDiag;
pub use num_complex::Complex64;

/// Source model under analysis: single-photon or two-photon SARG04
/// signals, or single-photon BB84 as the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Bb84,
    Sarg1,
    Sarg2,
}

/// Unified error type for the whole crate.
///
/// `Domain` means the caller handed in arguments outside a function's
/// contract. `Degenerate` means the computation is well posed but collapses
/// (zero survival probability, zero gain, all-zero operators). Neither is a
/// bug; both must be distinguishable by exit code in the CLI.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no secure region: {0}")]
    NoSecureRegion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Domain(_) => 2,
            Error::Degenerate(_) => 3,
            Error::NoSecureRegion(_) => 4,
        }
    }
}
