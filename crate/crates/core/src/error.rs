// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the automata, transducer and solver layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed interval ({lo}, {hi}): lower bound exceeds upper bound")]
    MalformedInterval { lo: u32, hi: u32 },

    #[error("value {0:#x} is outside the code point range [0, 0x10ffff]")]
    CodePointOutOfRange(i64),

    #[error("shifting {interval} by {delta} leaves the code point range")]
    ShiftOutOfRange { interval: String, delta: i64 },

    #[error("state ceiling of {limit} exceeded while building {what}")]
    StateLimit { limit: usize, what: &'static str },

    #[error("label spans {span} code points, more than the enumeration limit of {limit}")]
    SpanTooLarge { span: u64, limit: u64 },

    #[error("output function lifted over an empty label")]
    EmptyLift,

    #[error("replacement pattern accepts the empty word")]
    EmptyMatchPattern,

    #[error("invalid automaton: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
