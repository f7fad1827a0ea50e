//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed tree / forest / element / rational text input.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Requested size is above the configured enumeration bound
    /// (`HOPFCK_NMAX`, default 10).
    #[error("size {n} exceeds the enumeration bound {max}")]
    BoundExceeded { n: usize, max: usize },

    /// A sequence constructor produced a zero generator in its window.
    #[error("generator t_{degree} is zero")]
    ZeroGenerator { degree: usize },

    /// A tensor block that should be a multiple of t_j (x) t_i is not.
    #[error("tensor block of bidegree ({j}, {i}) in Delta(t_{}) is not proportional to t_{j} (x) t_{i}", i + j)]
    NotProportional { i: usize, j: usize },

    /// Parameters outside the family's domain (a+b = 0, b = 0, ...).
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// A coproduct left the algebra generated by the sequence.
    #[error("sequence is not sub-Hopf: {0}")]
    NotSubHopf(String),

    /// A family formula has a vanishing denominator inside the window.
    #[error("zero denominator in family formula at diagonal j = {j}")]
    ZeroDenominator { j: usize },

    /// An index or degree falls outside the data the value was built for.
    #[error("window exceeded: requested {requested}, window holds {window}")]
    Window { requested: usize, window: usize },

    /// A stated precondition does not hold for the given arguments.
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
