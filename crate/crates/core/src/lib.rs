//! Transient probe response of a four-level N-type EIT medium after the
//! signal field is switched on.
//!
//! The crate solves the reduced amplitude equations exactly through an
//! eigen-decomposition built on the closed-form roots of the characteristic
//! cubic ([`cubic`], [`transient`]), provides the weak- and strong-signal
//! limiting solutions ([`asymptotic`]), converts amplitudes to probe
//! susceptibility ([`response`]) and carries an independent RK4 /
//! inverse-iteration oracle ([`oracle`]) used to cross-check all of it.

// NaN must fail the guards, so negated comparisons are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotic;
pub mod cli;
pub mod cubic;
pub mod error;
pub mod exec;
mod linalg;
pub mod model;
pub mod oracle;
pub mod response;
pub mod transient;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{Amplitudes, DecayRates, MediumConstants, RabiFields, Regime, SystemMatrix};
