//! Bit strings, GF(2) matrices and binary extension fields.

mod bitvec;
pub mod field;
mod matrix;

pub use bitvec::BitVec;
pub use field::{field_mul, FieldElem, Gf2n};
pub use matrix::{AffineSolution, Gf2Matrix, MatrixKind, XorBasis};
