//! Quantum encryption of classical messages with certified deletion.
//!
//! The sender encodes random bits into single-qubit Wiesner states, hides the
//! message behind a privacy-amplification hash of the computational-basis
//! positions and ships an encrypted error syndrome plus an error-check hash so
//! the receiver can decrypt through a noisy channel. The receiver can instead
//! measure everything in the Hadamard basis and return the classical outcome
//! as a deletion certificate, which the sender checks on the Hadamard-basis
//! positions.
//!
//! Modules:
//!
//! - [`bitvec`]: packed GF(2) strings and index sets.
//! - [`qsim`]: symbolic BB84 qubits plus a small dense state-vector oracle.
//! - [`hashcode`]: Toeplitz universal hashing and blockwise syndrome decoding.
//! - [`scheme`]: key generation, encryption, decryption, deletion, verification
//!   and the on-disk formats.
//! - [`bounds`]: closed-form security bounds and a parameter planner.
//! - [`games`]: the certified-deletion game, adversary strategies, the exact
//!   entanglement-based oracle and classical entropy checks.
//! - [`cli`]: the `certdel` command-line front end.

pub mod bitvec;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod games;
pub mod hashcode;
pub mod qsim;
pub mod scheme;

pub use error::{Error, Result};

/// Deterministic generator used for every randomized operation.
pub type SimRng = rand_chacha::ChaCha12Rng;
