//! One-hot-coded unsourced random access (URA) with on-off keying and
//! RF-fingerprint-based message authentication.
//!
//! The crate is split along the signal path:
//!
//! - [`codec`]: B-bit messages to one-hot channel-use indices and back.
//! - [`rf_frontend`]: memoryless power-amplifier nonlinearity per device.
//! - [`channel`]: channel-use occupancy and matched-filter observations in AWGN.
//! - [`receiver`]: threshold demodulation, authentication and list assembly.
//! - [`analytics`]: closed-form per-channel-use probabilities, PUPE, spoofing
//!   probability and the minimum-Eb/N0 solver.
//! - [`simkit`]: seeded, parallel Monte Carlo estimation.
//! - [`cli`]: the `ohc-ura` command-line front end.

pub mod analytics;
pub mod channel;
pub mod cli;
pub mod codec;
pub mod error;
pub mod receiver;
pub mod rf_frontend;
pub mod simkit;

pub use error::{Error, Result};
