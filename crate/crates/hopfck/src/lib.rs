//! Exact-arithmetic engine for the Connes-Kreimer Hopf algebra of rooted
//! trees.
//!
//! The crate builds canonical rooted trees and forests, the Hopf structure
//! on their linear span (coproduct by admissible cuts, antipode, the
//! add-a-root cocycle, the grafting pre-Lie product), generator sequences
//! (Dyson-Schwinger solutions and the named families), the structure-constant
//! arrays in bijection with them, classifiers for the families with
//! renormalization-group equations of each order, and tree Feynman rules
//! with the induced Green functions and order analysis.
//!
//! All coefficients are arbitrary-precision rationals; nothing here touches
//! floating point. Values are immutable and operations pure; the internal
//! memo tables are synchronized, so everything can be used from multiple
//! threads.

pub mod classify;
pub mod elem;
pub mod error;
pub mod hopf;
pub mod lambda;
mod linalg;
pub mod rational;
pub mod rge;
pub mod seq;
pub mod tree;

pub use elem::{Elem, Series, TensorElem};
pub use error::{Error, Result};
pub use lambda::{DiagonalOrder, LambdaArray, OrderReport};
pub use rational::Q;
pub use seq::{PowerSeries, Seq};
pub use tree::{Cut, Forest, Tree};
