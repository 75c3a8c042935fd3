//! Multiport antenna Q-factors, total active reflection coefficient (TARC)
//! and single-frequency bandwidth prediction.
//!
//! The crate is organized bottom-up:
//!
//! * [`netparam`] – frequency-sampled S/Z/Y network data and Touchstone I/O.
//! * [`momwire`] – a thin-wire method-of-moments solver for arrays of
//!   parallel dipoles with delta-gap ports.
//! * [`portreduce`] – reduction of basis-level matrices to port level.
//! * [`matching`] – line impedances, shunt tuning elements, power waves, TARC.
//! * [`qcore`] – the Q-factor and bandwidth formulas.
//! * [`scenario`] – end-to-end pipelines used by the command-line tool.

pub mod error;
pub mod linalg;
pub mod matching;
pub mod momwire;
pub mod netparam;
pub mod portreduce;
pub mod qcore;
pub mod scenario;

pub use error::{Error, Result};
