//! Lossy catalytic space: a small-workspace BCH codec over GF(2^r), the
//! Hamming-syndrome block encoding, and catalytic Turing-machine simulations
//! built on them.

pub mod bch;
pub mod chessboard;
pub mod gf2r;
pub mod linalg;
pub mod machine;
pub mod meter;
