//! Heralded operations in two forms.
//!
//! Ideal operations apply a (non-unitary) operator and renormalize; they
//! report the squared norm of the unnormalized branch as a relative weight.
//! Physical operations add an ancilla, couple it, detect it and condition;
//! they report an absolute herald probability.

mod detector;
mod ideal;
mod physical;

pub use detector::{DetectorModel, Outcome};
pub use ideal::{
    add_ideal, affine_number_op, apply_ideal, apply_linear, apply_sequence, cv_qubit,
    kerr_emulate, kerr_target, orthogonalize, subtract_ideal, superpose_sequences, KerrConfig,
    KerrEmulation, OperatorSuperposition, OrthoOperator, Step, Term, TermKind, ZERO_NORM,
};
pub use physical::{
    add_physical, condition_on_quadrature, herald, herald_fock, herald_physical,
    outcome_probabilities, subtract_physical, Coupling, PROBABILITY_FLOOR, WINDOW_CELL_MASS,
};

use crate::fock::QuantumState;

/// Success measure of a heralded operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Likelihood {
    /// Absolute herald probability of a physical scheme.
    Probability(f64),
    /// Squared norm of the unnormalized branch of an ideal operation.
    RelativeWeight(f64),
}

impl Likelihood {
    pub fn value(&self) -> f64 {
        match *self {
            Likelihood::Probability(p) | Likelihood::RelativeWeight(p) => p,
        }
    }
}

/// Normalized conditioned state with its probability or weight.
#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    pub state: QuantumState,
    pub likelihood: Likelihood,
}

impl HeraldOutcome {
    pub fn probability(&self) -> Option<f64> {
        match self.likelihood {
            Likelihood::Probability(p) => Some(p),
            Likelihood::RelativeWeight(_) => None,
        }
    }

    pub fn weight(&self) -> Option<f64> {
        match self.likelihood {
            Likelihood::RelativeWeight(w) => Some(w),
            Likelihood::Probability(_) => None,
        }
    }
}
