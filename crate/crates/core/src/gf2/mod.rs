//! Linear algebra over GF(2): the pairwise-independent hash family
//! `h(x) = Ax + b mod 2`, elimination, and XOR propagation.

mod bitvec;
mod echelon;
mod parity;

pub use bitvec::{BitVec, PartialAssignment};
pub use echelon::{EchelonForm, Propagation};
pub use parity::{sample_parity, ParitySystem};
