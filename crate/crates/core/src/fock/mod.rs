//! Dense linear algebra over truncated multimode Fock spaces.
//!
//! Basis vectors are indexed by the multi-index `(n_0, ..., n_{M-1})` with
//! mode 0 varying slowest, i.e. `index = sum_m n_m * (cutoff+1)^(M-1-m)`.

mod channel;
pub mod io;
mod operator;
mod state;
mod unitary;

pub use channel::{
    fidelity, partial_trace, project_fock, pure_loss, trace_distance, measure_mode,
};
pub(crate) use channel::{binomial, split_indices};
pub use operator::{embed, ladder, LadderKind, LocalOperator, OperatorMatrix};
pub use state::{DensityOperator, Ket, QuantumState};
pub use unitary::{
    beam_splitter, beam_splitter_local, displacement, displacement_local, exp_anti_hermitian,
    phase_rotation, phase_rotation_local, single_mode_squeeze, single_mode_squeeze_local,
    two_mode_squeeze, two_mode_squeeze_local,
};

use crate::error::{Error, Result};

/// Eigenvalues (ascending) of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: &nalgebra::DMatrix<C64>) -> Vec<f64> {
    state::hermitian_eigen(m).0
}
use num_complex::Complex64;

pub type C64 = Complex64;

/// Tolerance for Hermiticity and trace checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Floor below which a negative eigenvalue counts as a positivity violation.
pub const POSITIVITY_FLOOR: f64 = -1e-8;
/// Population allowed in the two highest retained levels before warning.
pub const EDGE_POPULATION_WARN: f64 = 1e-8;

const MAX_DIMENSION: usize = 1 << 22;

/// Shape of a truncated Fock space: `num_modes` modes with photon numbers
/// `0..=cutoff` each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSpace {
    num_modes: usize,
    cutoff: usize,
}

impl ModeSpace {
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::invalid("a mode space needs at least one mode"));
        }
        if cutoff == 0 {
            return Err(Error::invalid("cutoff must be at least 1"));
        }
        let mut dim: usize = 1;
        for _ in 0..num_modes {
            dim = dim
                .checked_mul(cutoff + 1)
                .filter(|d| *d <= MAX_DIMENSION)
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "space with {num_modes} modes at cutoff {cutoff} exceeds {MAX_DIMENSION} basis states"
                    ))
                })?;
        }
        Ok(Self { num_modes, cutoff })
    }

    pub fn single(cutoff: usize) -> Result<Self> {
        Self::new(1, cutoff)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of retained levels per mode, `cutoff + 1`.
    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dimension(&self) -> usize {
        self.levels().pow(self.num_modes as u32)
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.levels().pow((self.num_modes - 1 - mode) as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            return Err(Error::invalid(format!(
                "mode {mode} out of range for a {}-mode space",
                self.num_modes
            )));
        }
        Ok(())
    }

    pub fn index_of(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.num_modes {
            return Err(Error::mismatch(format!(
                "occupation has {} entries, space has {} modes",
                occupation.len(),
                self.num_modes
            )));
        }
        let mut index = 0;
        for &n in occupation {
            if n > self.cutoff {
                return Err(Error::InsufficientCutoff(format!(
                    "photon number {n} above cutoff {}",
                    self.cutoff
                )));
            }
            index = index * self.levels() + n;
        }
        Ok(index)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.num_modes];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = rest % self.levels();
            rest /= self.levels();
        }
        out
    }

    /// Photon number of `mode` in basis state `index`.
    pub fn digit(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.levels()
    }

    /// The space left after removing `mode`.
    pub fn without_mode(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        Self::new(self.num_modes - 1, self.cutoff)
    }

    pub fn with_modes(&self, num_modes: usize) -> Result<Self> {
        Self::new(num_modes, self.cutoff)
    }

    pub(crate) fn ensure_same(&self, other: &ModeSpace) -> Result<()> {
        if self != other {
            return Err(Error::mismatch(format!(
                "{}-mode cutoff-{} vs {}-mode cutoff-{}",
                self.num_modes, self.cutoff, other.num_modes, other.cutoff
            )));
        }
        Ok(())
    }
}

/// Probability mass of a coherent state with amplitude `|alpha|` beyond
/// photon number `cutoff`.
pub fn coherent_tail_mass(alpha_abs: f64, cutoff: usize) -> f64 {
    let mean = alpha_abs * alpha_abs;
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut ln_term = -mean;
    for n in 1..=cutoff {
        ln_term += ln_mean - (n as f64).ln();
    }
    let mut tail = 0.0;
    let mut n = cutoff;
    loop {
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
        let term = ln_term.exp();
        tail += term;
        if n as f64 > mean && (term <= 1e-18 * tail || term < 1e-300) {
            return tail;
        }
    }
}

/// Smallest cutoff for which a coherent state of amplitude `|alpha|`
/// leaves less than `tol` probability above it.
pub fn coherent_cutoff(alpha_abs: f64, tol: f64) -> usize {
    let mut n = 1;
    while coherent_tail_mass(alpha_abs, n) >= tol {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_mode_zero_slowest() {
        let space = ModeSpace::new(3, 2).unwrap();
        assert_eq!(space.dimension(), 27);
        assert_eq!(space.index_of(&[1, 0, 0]).unwrap(), 9);
        assert_eq!(space.index_of(&[0, 0, 1]).unwrap(), 1);
        for i in 0..space.dimension() {
            assert_eq!(space.index_of(&space.occupation(i)).unwrap(), i);
        }
        assert_eq!(space.digit(14, 1), 1);
    }

    #[test]
    fn rejects_degenerate_spaces() {
        assert!(ModeSpace::new(0, 3).is_err());
        assert!(ModeSpace::new(2, 0).is_err());
        assert!(ModeSpace::new(40, 10).is_err());
    }

    #[test]
    fn coherent_tail_matches_direct_sum() {
        let alpha: f64 = 1.5;
        let mean = alpha * alpha;
        let direct: f64 = (11..200)
            .map(|n| {
                let ln = -mean + n as f64 * mean.ln() - ln_factorial(n);
                ln.exp()
            })
            .sum();
        let tail = coherent_tail_mass(alpha, 10);
        assert!((tail - direct).abs() < 1e-15 + 1e-9 * direct);
        let n = coherent_cutoff(2.0, 1e-12);
        assert!(coherent_tail_mass(2.0, n) < 1e-12);
        assert!(coherent_tail_mass(2.0, n - 1) >= 1e-12);
    }

    fn ln_factorial(n: usize) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }
}
