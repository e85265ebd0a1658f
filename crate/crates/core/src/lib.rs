// SPDX-License-Identifier: Apache-2.0

//! String constraint solving with symbolic automata and transducers.
//!
//! Variable domains are regular languages over Unicode code points,
//! represented as symbolic automata whose labels are interval lists.
//! Replacement operations are modelled as symbolic transducers, and the
//! image of a domain under a transducer is computed with a product
//! construction.

pub mod automata;
pub mod error;
pub mod interval;
pub mod product;
pub mod replace;
pub mod smtlib;
pub mod solver;
pub mod transducer;

#[cfg(test)]
mod testing;

pub use automata::{EpsilonSfa, Limits, Regex, Sfa, StateId, Transition, Word};
pub use error::{Error, Result};
pub use interval::{CodePoint, Interval, IntervalList};
pub use transducer::{FnIndex, OutputFn, Sft, SftTransition, Trace, TraceStep};
