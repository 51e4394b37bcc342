use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};

use super::{DetectorModel, HeraldOutcome, Likelihood, Outcome};
use crate::analysis::{reduced, window_element};
use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_local, measure_mode, DensityOperator, two_mode_squeeze_local, Ket, ModeSpace, QuantumState, C64,
};
use crate::states::{make_state, StateSpec};

/// Herald probabilities at or below this value count as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-18;

/// Largest probability mass per cell when discretizing a quadrature window.
pub const WINDOW_CELL_MASS: f64 = 1e-3;

/// Interaction between the signal mode and a vacuum ancilla.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Beam splitter with amplitude reflectivity `r` (`tau = asin r`); a
    /// photon in the ancilla heralds subtraction.
    BeamSplitter { reflectivity: f64 },
    /// Two-mode squeezer `exp[zeta (a^dagger b^dagger - a b)]`; a photon in
    /// the ancilla heralds addition.
    TwoModeSqueeze { zeta: f64 },
}

impl Coupling {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Coupling::BeamSplitter { reflectivity: r } if !(r > 0.0 && r < 1.0) => {
                Err(Error::invalid(format!("reflectivity {r} outside (0, 1)")))
            }
            Coupling::TwoModeSqueeze { zeta } if !(zeta > 0.0 && zeta < 1.0) => {
                Err(Error::invalid(format!("squeezing {zeta} outside (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

/// Ensemble of the input with a vacuum ancilla appended (as the last mode)
/// and the coupling applied between `mode` and the ancilla.
fn coupled_ensemble(state: &QuantumState, mode: usize, coupling: Coupling) -> Result<Vec<(f64, Ket)>> {
    coupling.validate()?;
    let space = *state.space();
    space.check_mode(mode)?;
    state.warn_if_truncated("physical herald input");
    let cutoff = space.cutoff();
    let op = match coupling {
        Coupling::BeamSplitter { reflectivity } => beam_splitter_local(reflectivity.asin(), cutoff)?,
        Coupling::TwoModeSqueeze { zeta } => two_mode_squeeze_local(zeta, cutoff)?,
    };
    let ancilla = space.num_modes();
    state
        .ensemble()
        .into_iter()
        .map(|(p, ket)| Ok((p, ket.append_vacuum(1)?.apply_local(&op, &[mode, ancilla])?)))
        .collect()
}

/// Conditions an ensemble on diagonal POVM elements of several modes and
/// traces those modes out. Returns the unnormalized conditioned state of
/// the remaining modes, kept pure when a single branch survives.
fn condition_ensemble(
    ensemble: &[(f64, Ket)],
    conditions: &[(usize, Vec<f64>)],
) -> Result<QuantumState> {
    let space = *ensemble
        .first()
        .ok_or_else(|| Error::invalid("empty ensemble"))?
        .1
        .space();
    let levels = space.levels();
    let mut measured: Vec<usize> = Vec::with_capacity(conditions.len());
    for (mode, element) in conditions {
        space.check_mode(*mode)?;
        if measured.contains(mode) {
            return Err(Error::invalid(format!("mode {mode} conditioned twice")));
        }
        if element.len() != levels {
            return Err(Error::mismatch("detector element does not match the cutoff"));
        }
        measured.push(*mode);
    }
    let kept: Vec<usize> = (0..space.num_modes()).filter(|m| !measured.contains(m)).collect();
    if kept.is_empty() {
        return Err(Error::invalid("conditioning every mode leaves no state behind"));
    }
    let reduced_space = space.with_modes(kept.len())?;
    let rdim = reduced_space.dimension();
    let keys = levels.pow(measured.len() as u32);

    // Key weight = product of the element entries for the measured digits.
    let weights: Vec<f64> = (0..keys)
        .map(|t| {
            let mut rest = t;
            let mut w = 1.0;
            for (_, element) in conditions.iter().rev() {
                w *= element[rest % levels];
                rest /= levels;
            }
            w
        })
        .collect();
    let split = |i: usize| -> (usize, usize) {
        let t = measured.iter().fold(0, |acc, &m| acc * levels + space.digit(i, m));
        let r = kept.iter().fold(0, |acc, &m| acc * levels + space.digit(i, m));
        (t, r)
    };
    let index: Vec<(usize, usize)> = (0..space.dimension()).map(split).collect();

    let mut branches: Vec<DVector<C64>> = Vec::new();
    for (p, ket) in ensemble {
        let mut groups = vec![DVector::<C64>::zeros(0); keys];
        for (i, z) in ket.amplitudes().iter().enumerate() {
            let (t, r) = index[i];
            if weights[t] == 0.0 || *z == C64::new(0.0, 0.0) {
                continue;
            }
            if groups[t].is_empty() {
                groups[t] = DVector::zeros(rdim);
            }
            groups[t][r] = *z;
        }
        for (t, v) in groups.into_iter().enumerate() {
            if !v.is_empty() {
                branches.push(v * C64::new((p * weights[t]).sqrt(), 0.0));
            }
        }
    }
    if branches.len() == 1 {
        let v = branches.pop().unwrap();
        return Ok(QuantumState::Pure(Ket::new(reduced_space, v)?));
    }
    let mut rho = DMatrix::<C64>::zeros(rdim, rdim);
    for v in &branches {
        rho.gerc(C64::new(1.0, 0.0), v, v, C64::new(1.0, 0.0));
    }
    Ok(QuantumState::Mixed(DensityOperator::from_hermitian_unchecked(reduced_space, rho)))
}

fn finish(conditioned: QuantumState, what: &str) -> Result<HeraldOutcome> {
    let p = conditioned.trace();
    if !(p > PROBABILITY_FLOOR) {
        return Err(Error::impossible(format!("{what} has zero probability")));
    }
    let state = match conditioned {
        QuantumState::Pure(k) => QuantumState::Pure(k.normalize()?.0),
        QuantumState::Mixed(r) => QuantumState::Mixed(r.normalize()?.0),
    };
    Ok(HeraldOutcome { state, likelihood: Likelihood::Probability(p.min(1.0)) })
}

/// Measures each listed mode with its detector, conditions on the given
/// outcomes and traces the measured modes out.
pub fn herald(state: &QuantumState, conditions: &[(usize, DetectorModel, Outcome)]) -> Result<HeraldOutcome> {
    if conditions.is_empty() {
        return Err(Error::invalid("herald needs at least one detector"));
    }
    let cutoff = state.space().cutoff();
    let elements = conditions
        .iter()
        .map(|(m, det, o)| Ok((*m, det.element(*o, cutoff)?)))
        .collect::<Result<Vec<_>>>()?;
    let ensemble = state.ensemble();
    finish(condition_ensemble(&ensemble, &elements)?, "herald outcome")
}

/// Couples `mode` to a vacuum ancilla, detects the ancilla and conditions on
/// `outcome`. Probability is the trace of the conditioned branch.
pub fn herald_physical(
    state: &QuantumState,
    mode: usize,
    coupling: Coupling,
    det: DetectorModel,
    outcome: Outcome,
) -> Result<HeraldOutcome> {
    let ensemble = coupled_ensemble(state, mode, coupling)?;
    let ancilla = state.space().num_modes();
    let element = det.element(outcome, state.space().cutoff())?;
    finish(condition_ensemble(&ensemble, &[(ancilla, element)])?, "herald outcome")
}

/// Probabilities of every outcome of `det` on the ancilla.
pub fn outcome_probabilities(
    state: &QuantumState,
    mode: usize,
    coupling: Coupling,
    det: DetectorModel,
) -> Result<Vec<(Outcome, f64)>> {
    let ensemble = coupled_ensemble(state, mode, coupling)?;
    let ancilla = state.space().num_modes();
    det.povm(state.space().cutoff())?
        .into_iter()
        .map(|(o, e)| Ok((o, condition_ensemble(&ensemble, &[(ancilla, e)])?.trace())))
        .collect()
}

/// Photon subtraction by a beam-splitter tap of reflectivity `r` heralded
/// by `det`'s single-photon outcome.
pub fn subtract_physical(state: &QuantumState, mode: usize, r: f64, det: DetectorModel) -> Result<HeraldOutcome> {
    herald_physical(state, mode, Coupling::BeamSplitter { reflectivity: r }, det, det.single_photon_herald())
}

/// Photon addition by weak two-mode squeezing with a vacuum idler heralded
/// by `det`'s single-photon outcome.
pub fn add_physical(state: &QuantumState, mode: usize, zeta: f64, det: DetectorModel) -> Result<HeraldOutcome> {
    herald_physical(state, mode, Coupling::TwoModeSqueeze { zeta }, det, det.single_photon_herald())
}

/// Leaves of a balanced beam-splitter tree of `depth` levels rooted at
/// mode 1 of a `1 + 2^depth` mode space.
fn tree_leaves(depth: usize) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut splits = Vec::new();
    let mut leaves = vec![1];
    let mut next = 2;
    for _ in 0..depth {
        let mut grown = Vec::with_capacity(leaves.len() * 2);
        for &m in &leaves {
            splits.push((m, next));
            grown.push(m);
            grown.push(next);
            next += 1;
        }
        leaves = grown;
    }
    (splits, leaves)
}

/// Heralded `k`-photon Fock state from an EPR pair of parameter `lambda`:
/// the idler is split over `2^depth` detectors and `k` of them must fire.
pub fn herald_fock(k: usize, lambda: f64, det: DetectorModel, depth: usize, cutoff: usize) -> Result<HeraldOutcome> {
    let leaves = 1usize << depth;
    let clicking: Vec<usize> = (0..k.min(leaves)).collect();
    herald_fock_on(k, lambda, det, depth, cutoff, &clicking)
}

pub(crate) fn herald_fock_on(
    k: usize,
    lambda: f64,
    det: DetectorModel,
    depth: usize,
    cutoff: usize,
    clicking: &[usize],
) -> Result<HeraldOutcome> {
    det.validate()?;
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k > cutoff {
        return Err(Error::InsufficientCutoff(format!("k = {k} exceeds cutoff {cutoff}")));
    }
    let epr = make_state(&StateSpec::Epr { lambda }, &ModeSpace::new(2, cutoff)?)?;
    let (splits, leaves) = tree_leaves(depth);
    let outcomes: Vec<Outcome> = if depth == 0 {
        let o = match det {
            DetectorModel::OnOff { .. } if k >= 2 => {
                return Err(Error::invalid(format!(
                    "a single on/off detector cannot resolve {k} photons; use a detector tree"
                )))
            }
            DetectorModel::OnOff { .. } => Outcome::Click,
            _ => Outcome::Count(k),
        };
        vec![o]
    } else {
        if k > leaves.len() {
            return Err(Error::invalid(format!(
                "{k} clicks need more than the {} detectors of a depth-{depth} tree",
                leaves.len()
            )));
        }
        if clicking.len() != k || clicking.iter().any(|&c| c >= leaves.len()) {
            return Err(Error::invalid("clicking leaves must name k distinct detectors"));
        }
        (0..leaves.len())
            .map(|l| if clicking.contains(&l) { det.single_photon_herald() } else { det.no_photon_outcome() })
            .collect()
    };
    let mut ket = epr.as_ket().expect("EPR state is pure").append_vacuum(leaves.len() - 1)?;
    let bs = beam_splitter_local(FRAC_PI_4, cutoff)?;
    for (a, b) in splits {
        ket = ket.apply_local(&bs, &[a, b])?;
    }
    let conditions = leaves
        .iter()
        .zip(&outcomes)
        .map(|(&m, &o)| Ok((m, det.element(o, cutoff)?)))
        .collect::<Result<Vec<_>>>()?;
    finish(condition_ensemble(&[(1.0, ket)], &conditions)?, "Fock herald")
}

/// Conditions on the quadrature `x_theta` of `mode` falling inside
/// `window` (ends may be infinite) and traces the mode out.
pub fn condition_on_quadrature(
    state: &QuantumState,
    mode: usize,
    theta: f64,
    window: (f64, f64),
) -> Result<HeraldOutcome> {
    let reference = reduced(state, mode)?;
    let element = window_element(&reference, theta, window, WINDOW_CELL_MASS)?;
    let conditioned = measure_mode(state, mode, &element)?;
    finish(QuantumState::Mixed(conditioned), "quadrature window")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_layout() {
        let (splits, leaves) = tree_leaves(2);
        assert_eq!(splits, vec![(1, 2), (1, 3), (2, 4)]);
        assert_eq!(leaves, vec![1, 3, 2, 4]);
        assert_eq!(tree_leaves(0).1, vec![1]);
    }

    #[test]
    fn single_photon_herald_is_exact() {
        let out = herald_fock(1, 0.05, DetectorModel::Projective { n: 1 }, 0, 6).unwrap();
        let one = Ket::fock(ModeSpace::single(6).unwrap(), &[1]).unwrap();
        let got = out.state.as_ket().unwrap();
        assert!((got.inner(&one).unwrap().norm_sqr() - 1.0).abs() < 1e-14);
        let p = out.probability().unwrap();
        assert!((p - (1.0 - 0.0025) * 0.0025).abs() < 1e-15);
    }

    #[test]
    fn clicking_leaf_choice_is_irrelevant() {
        let det = DetectorModel::ideal_on_off();
        let a = herald_fock_on(2, 0.3, det, 2, 12, &[0, 1]).unwrap();
        let b = herald_fock_on(2, 0.3, det, 2, 12, &[1, 3]).unwrap();
        assert!(a.state.to_density().max_abs_diff(&b.state.to_density()) < 1e-12);
        assert!((a.probability().unwrap() - b.probability().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn too_many_clicks_rejected() {
        let det = DetectorModel::ideal_on_off();
        assert!(herald_fock(2, 0.2, det, 0, 6).is_err());
        assert!(herald_fock(3, 0.2, det, 1, 6).is_err());
    }
}
