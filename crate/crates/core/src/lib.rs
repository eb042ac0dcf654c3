//! Gate-level simulation of quantum RAM addressing.
//!
//! Addressing `2^n` memory cells takes a binary routing tree of `2^n - 1`
//! switching elements, but the architectures differ sharply in how many of
//! those elements a single call touches. This crate simulates:
//!
//! * the three classical architectures at the switching-element level —
//!   conventional fanout (`2^n - 1` transistors activated per call),
//!   a modified fanout (`2n + 1`), and the bucket brigade (`n` trits);
//! * the two quantum protocols on a sparse basis-state simulator — fanout
//!   routing via binary-to-unary translation and uncomputation, and the
//!   bucket brigade with sequential qutrit loading and unloading;
//! * an independent brute-force memory-call oracle every protocol is tested
//!   against;
//! * stochastic per-switch error injection with Monte Carlo failure-rate
//!   estimation, reproducing the error-scaling gap between the
//!   architectures.
//!
//! States are sparse maps from register configurations to amplitudes; all
//! protocol gates on classical memory are basis permutations, so simulation
//! cost tracks the superposition support, not `2^n`.

pub mod bucket;
pub mod classical;
pub mod error;
pub mod event;
pub mod fanout;
pub mod noise;
pub mod oracle;
pub mod qstate;
pub mod tree;

pub use error::{Result, SimError};
pub use oracle::{ideal_qram_oracle, AccessMode, MemoryArray};
pub use qstate::{
    fidelity, make_address_state, make_basis_state, make_quantum_memory_state, schmidt_rank,
    Configuration, MemoryMode, QuantumState, Register, Trit,
};
