//! Large-system analysis of joint user selection and vector precoding (US-VP)
//! on the MIMO broadcast channel.
//!
//! * [`special`]: scalar numerics and the seeded Gaussian stream.
//! * [`charfn`]: law of the per-user energy of the solvable problem.
//! * [`replica`]: RS, 1RSB and T → ∞ fixed points, energy penalties.
//! * [`selection`]: selection probabilities and selected-symbol laws.
//! * [`rates`]: mutual information and sum-rate bounds.
//! * [`sim`]: finite-size Monte-Carlo ground truth.
//! * [`sweep`]: configuration, sweeps and CSV output behind the `usvp` binary.
//! * [`validation`]: the oracle suites run by `usvp validate`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charfn;
pub mod error;
pub mod replica;
pub mod rates;
pub mod selection;
pub mod sim;
pub mod sweep;
pub mod validation;
pub mod special;

pub use charfn::{asymptotic_selected_mean, charfn_slot, EnergyCdf, OrderStatSummary, SchemeSpec};
pub use error::{Error, Result};
pub use special::{Quadrature, RngStream};
