use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, ModeSpace, QuantumState, C64};

/// Threshold separating "zero" from "present" photon-number probabilities
/// in the discorrelation check.
pub const DISCORRELATION_TOL: f64 = 1e-9;

/// Joint photon-number distribution over all modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    space: ModeSpace,
    joint: Vec<f64>,
}

impl PhotonStatistics {
    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    /// Probabilities indexed like the basis of the space.
    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn total(&self) -> f64 {
        self.joint.iter().sum()
    }

    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>> {
        self.space.check_mode(mode)?;
        let mut out = vec![0.0; self.space.levels()];
        for (i, p) in self.joint.iter().enumerate() {
            out[self.space.digit(i, mode)] += p;
        }
        Ok(out)
    }

    /// `P(n1, n2)` for two distinct modes, other modes summed over.
    pub fn pair(&self, first: usize, second: usize) -> Result<DMatrix<f64>> {
        self.space.check_mode(first)?;
        self.space.check_mode(second)?;
        if first == second {
            return Err(Error::invalid("pair distribution needs two distinct modes"));
        }
        let levels = self.space.levels();
        let mut out = DMatrix::zeros(levels, levels);
        for (i, p) in self.joint.iter().enumerate() {
            out[(self.space.digit(i, first), self.space.digit(i, second))] += p;
        }
        Ok(out)
    }
}

pub fn photon_statistics(state: &QuantumState) -> PhotonStatistics {
    let joint = match state {
        QuantumState::Pure(k) => k.amplitudes().iter().map(|z| z.norm_sqr()).collect(),
        QuantumState::Mixed(r) => r.probabilities(),
    };
    PhotonStatistics { space: *state.space(), joint }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discorrelation {
    pub passed: bool,
    /// `max_n P(n, n)`.
    pub max_diagonal: f64,
    /// Smallest marginal probability over the inspected levels of both modes.
    pub min_marginal: f64,
}

/// Checks that `P(n, n)` vanishes for every `n` while both marginals are
/// populated on levels `0..marginal_levels`.
pub fn discorrelation_check(
    state: &QuantumState,
    modes: (usize, usize),
    marginal_levels: usize,
) -> Result<Discorrelation> {
    let stats = photon_statistics(state);
    let pair = stats.pair(modes.0, modes.1)?;
    let max_diagonal = (0..pair.nrows()).map(|n| pair[(n, n)]).fold(0.0, f64::max);
    let levels = marginal_levels.min(stats.space().levels());
    let m1 = stats.marginal(modes.0)?;
    let m2 = stats.marginal(modes.1)?;
    let min_marginal = (0..levels).map(|n| m1[n].min(m2[n])).fold(f64::INFINITY, f64::min);
    Ok(Discorrelation {
        passed: max_diagonal <= DISCORRELATION_TOL && min_marginal > DISCORRELATION_TOL,
        max_diagonal,
        min_marginal,
    })
}

pub(crate) fn mean_photon_of(rho: &DensityOperator) -> f64 {
    rho.probabilities().iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / rho.trace()
}

pub fn mean_photon(state: &QuantumState, mode: usize) -> Result<f64> {
    let stats = photon_statistics(state);
    let marginal = stats.marginal(mode)?;
    Ok(marginal.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / stats.total())
}

/// Base-2 logarithmic negativity between the modes in `part` and the rest.
///
/// Pure states use the Schmidt coefficients (`2 log2 sum s_i`), mixed states
/// the eigenvalues of the partial transpose.
pub fn log_negativity(state: &QuantumState, part: &[usize]) -> Result<f64> {
    let space = *state.space();
    let mut part = part.to_vec();
    part.sort_unstable();
    part.dedup();
    for &m in &part {
        space.check_mode(m)?;
    }
    if part.is_empty() || part.len() == space.num_modes() {
        return Err(Error::invalid("bipartition needs modes on both sides"));
    }
    let (map, da, db) = crate::fock::split_indices(&space, &part)?;
    let value = match state {
        QuantumState::Pure(ket) => {
            let mut psi = DMatrix::<C64>::zeros(da, db);
            for (i, &(a, b)) in map.iter().enumerate() {
                psi[(a, b)] = ket.amplitudes()[i];
            }
            let norm = ket.norm_sqr();
            let s: f64 = psi.singular_values().iter().sum();
            2.0 * (s / norm.sqrt()).log2()
        }
        QuantumState::Mixed(rho) => {
            let m = rho.matrix();
            let dim = space.dimension();
            let mut pt = DMatrix::<C64>::zeros(dim, dim);
            let pos = |a: usize, b: usize| a * db + b;
            for (i, &(a1, b1)) in map.iter().enumerate() {
                for (j, &(a2, b2)) in map.iter().enumerate() {
                    pt[(pos(a1, b2), pos(a2, b1))] = m[(i, j)];
                }
            }
            let vals = crate::fock::hermitian_eigenvalues(&pt);
            let trace_norm: f64 = vals.iter().map(|v| v.abs()).sum();
            (trace_norm / rho.trace()).log2()
        }
    };
    Ok(value.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Ket;

    #[test]
    fn bell_state_has_unit_log_negativity() {
        let s = ModeSpace::new(2, 2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let k = Ket::fock(s, &[1, 0]).unwrap().scale(C64::new(h, 0.0))
            .add(&Ket::fock(s, &[0, 1]).unwrap().scale(C64::new(h, 0.0)))
            .unwrap();
        let pure = log_negativity(&QuantumState::Pure(k.clone()), &[0]).unwrap();
        let mixed = log_negativity(&QuantumState::Mixed(k.to_density()), &[0]).unwrap();
        assert!((pure - 1.0).abs() < 1e-12);
        assert!((mixed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_zero_log_negativity() {
        let s = ModeSpace::new(2, 3).unwrap();
        let k = Ket::fock(s, &[2, 1]).unwrap();
        assert!(log_negativity(&QuantumState::Pure(k.clone()), &[1]).unwrap().abs() < 1e-12);
        assert!(log_negativity(&QuantumState::Mixed(k.to_density()), &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn marginals_and_pairs() {
        let s = ModeSpace::new(3, 2).unwrap();
        let k = Ket::fock(s, &[2, 0, 1]).unwrap();
        let st = photon_statistics(&QuantumState::Pure(k));
        assert_eq!(st.marginal(0).unwrap(), vec![0.0, 0.0, 1.0]);
        assert_eq!(st.pair(2, 0).unwrap()[(1, 2)], 1.0);
        assert!(st.pair(1, 1).is_err());
    }
}
