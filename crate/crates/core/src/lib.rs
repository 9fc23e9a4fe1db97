//! # gfib-core
//!
//! Exact arithmetic for k-order generalized Fibonacci sequences
//! (F_n = F_{n-1} + ... + F_{n-k}) and the 2-adic orders of their terms.
//!
//! The crate is built around a single trust chain:
//!
//! * [`engine`] generates terms by the recurrence in exact big-integer
//!   arithmetic and is the ground truth for everything else;
//! * [`closed_form`] evaluates terms as finite alternating binomial sums,
//!   contractually equal to the engine;
//! * [`padic`] supplies digit-sum based valuation arithmetic that never
//!   materializes large products;
//! * [`valuation`] predicts 2-adic orders from index arithmetic alone --
//!   sound by contract, explicit about the indices it cannot classify --
//!   and checks the structural congruences behind those predictions;
//! * [`verify`] sweeps all of the above against the engine over explicit
//!   ranges, in parallel when the `parallel` feature (default) is enabled.

pub mod closed_form;
pub mod engine;
mod error;
pub mod padic;
pub mod valuation;
pub mod verify;

pub use engine::{IndexDecomp, SequenceSpec, SequenceWindow};
pub use error::{Error, Result};
pub use padic::Valuation;
pub use valuation::{Prediction, Rule};
