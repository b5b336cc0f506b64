//! End-to-end toolkit for turning small C-style contracts into publicly
//! checkable computations.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`frontend`] preprocesses and flattens a C subset into a list of
//!    primitive expressions over fixed-width integers.
//! 2. [`circuit`] lowers the flat program to an arithmetic circuit over a
//!    prime field, with logic gadgets for comparisons, bit operations and
//!    multiplexers; [`minimizer`] shrinks the pure-logic regions of that
//!    circuit with Quine-McCluskey / Petrick two-level minimization.
//! 3. [`qap`] converts the circuit to a quadratic arithmetic program and
//!    [`crypto`] builds evaluation/verification keys and pairing-checked
//!    proofs on top of a pluggable bilinear-group backend.
//! 4. [`chain`] embeds the verification key and proof into pay-to-script-hash
//!    style transactions with a custom proof-checking opcode.

pub mod chain;
pub mod circuit;
pub mod crypto;
pub mod field;
pub mod frontend;
pub mod minimizer;
pub mod qap;
pub mod twos;
