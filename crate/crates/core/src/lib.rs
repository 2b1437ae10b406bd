//! Random duty-cycle (RDC) poling errors in quasi-phase-matched crystals:
//! dispersion and QPM design, grating realizations and their SFG spectra,
//! closed-form pedestal and noise models, and scan analysis that bounds σ̄
//! from a measured efficiency roll-off.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod analysis;
pub mod cli;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod grating;
pub mod noise;
pub mod plot;
pub mod spectrum;

pub use error::{Error, Result};
