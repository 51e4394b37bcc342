//! Photon-by-photon quantum state engineering on truncated Fock spaces.
//!
//! The crate builds multimode Fock-basis states, applies the heralded
//! operations of conditional state engineering (photon addition and
//! subtraction, their superpositions, sequences and delocalized variants)
//! both as ideal operators and as explicit ancilla/detector schemes, and
//! analyses the results through quadrature statistics, Wigner functions,
//! photon-number statistics, entanglement and homodyne tomography.

pub mod error;
pub mod fock;
pub mod herald;
pub mod oracle;
pub mod analysis;
pub mod plan;
pub mod rng;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{C64, DensityOperator, Ket, ModeSpace, OperatorMatrix, QuantumState};
