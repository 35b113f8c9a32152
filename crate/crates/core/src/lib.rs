//! Interpreter and verifier for a qudit extension of the CQP quantum process
//! calculus.
//!
//! * [`qudit`]: dense state vectors over named qudits and the generalized
//!   Pauli, Hadamard and shift-CNOT gates.
//! * [`syntax`]: the `.cqp` grammar, AST, pretty-printer and typechecker.
//! * [`semantics`]: the labelled transition system over pure, mixed and
//!   probabilistic configurations.
//! * [`harness`]: scheduled execution, interleaving enumeration and the
//!   teleportation / superdense-coding verifiers.

pub mod harness;
pub mod qudit;
pub mod semantics;
pub mod syntax;
