//! Environment-assisted channel simulation and PSD-rank certification.
//!
//! The crate builds channels as isometry dilations into receiver ⊗
//! environment, simulates decoding strategies where both sides measure
//! locally and merge outcomes classically, and certifies the resulting
//! channel matrices by their positive-semidefinite rank, the smallest
//! quantum dimension able to reproduce them without assistance. Scalar
//! figures of merit (capacity, transmission fidelity) and a verification
//! suite with pinned tolerances sit on top.

#![forbid(unsafe_code)]

pub mod channel;
pub mod constructions;
pub mod info;
pub mod protocol;
pub mod psdrank;
pub mod sampling;
pub mod suite;
pub mod tensor;
