//! Simulation toolkit for OFDM-based integrated sensing and communication
//! (ISAC) waveforms passed through a clipping power amplifier.
//!
//! The crate covers the whole chain: constellation draws and signaling bases,
//! a soft-envelope-limiter amplifier with Bussgang statistics, empirical and
//! closed-form ambiguity functions, a delay/Doppler target channel, the
//! monostatic division-filter receiver with its 2-D periodogram, and SO-CFAR
//! detection experiments. The [`experiments`] module wires these into named,
//! reproducible scenarios that emit CSV files.
//!
//! All library quantities are linear; dB conversion happens at the CLI and
//! CSV boundary only.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod ambiguity;
pub mod analytic;
pub mod channel;
pub mod detect;
pub mod dsp;
pub mod error;
pub mod experiments;
pub mod pa;
pub mod parallel;
pub mod radar;
pub mod seed;
pub mod signaling;

pub use error::{Error, Result};
pub use num_complex::Complex64;
