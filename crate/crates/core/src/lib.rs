//! Numerical laboratory for compound wiretap channels.
//!
//! The crate evaluates secrecy-capacity expressions of compound classical,
//! classical-quantum and fully quantum wiretap channels, and builds the
//! objects their achievability arguments rely on at desk scale: typical
//! projectors with checked inequalities, random binning codes, channel nets
//! and the two-phase state-information protocol.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod codes;
pub mod error;
pub mod info;
pub mod linalg;
pub mod nets;
pub mod policy;
pub mod protocol;
pub mod report;
pub mod rng;
pub mod random;
pub mod typicality;

pub use error::{Error, Result};
