//! Constructors for the named states of conditional state engineering, each
//! from its closed-form Fock amplitudes.
//!
//! Every constructor evaluates the analytic amplitudes inside the truncated
//! space, measures the probability mass lost above the cutoff, rejects the
//! space when that mass exceeds the tolerance and finally renormalizes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, Ket, ModeSpace, QuantumState, C64};

/// Largest probability mass allowed above the cutoff by [`make_state`].
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Parameters of a named state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Fock { n: usize },
    Coherent { alpha: C64 },
    /// Diagonal thermal state with mean photon number `mean`.
    Thermal { mean: f64 },
    /// `(1-l^2)^(1/4) sum sqrt((2n)!)/n! (-l/2)^n |2n>`.
    SqueezedVacuum { lambda: f64 },
    /// `(|alpha> +- |-alpha>)` with the exact normalization.
    Cat { alpha: C64, parity: Parity },
    /// `sqrt(1-l^2) sum l^n |n,n>`.
    Epr { lambda: f64 },
    /// `c1 |1,0> + e^{i phi} c2 |0,1>`.
    SpEntangled { c1: C64, c2: C64, phi: f64 },
    /// `(|1>|alpha> + e^{i phi} |0>|alpha'>)/sqrt 2`; `alpha_prime` defaults
    /// to the coherent amplitude that best matches the photon-added state.
    Hybrid { alpha: C64, alpha_prime: Option<C64>, phi: f64 },
    /// Balanced delocalized photon addition applied to `|alpha>|alpha>`.
    TwoModeAddedCoherent { alpha: C64, phi: f64 },
}

impl StateSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StateSpec::Vacuum => "vacuum",
            StateSpec::Fock { .. } => "fock",
            StateSpec::Coherent { .. } => "coherent",
            StateSpec::Thermal { .. } => "thermal",
            StateSpec::SqueezedVacuum { .. } => "squeezed_vacuum",
            StateSpec::Cat { .. } => "cat",
            StateSpec::Epr { .. } => "epr",
            StateSpec::SpEntangled { .. } => "sp_entangled",
            StateSpec::Hybrid { .. } => "hybrid",
            StateSpec::TwoModeAddedCoherent { .. } => "two_mode_added_coherent",
        }
    }

    pub fn num_modes(&self) -> usize {
        match self {
            StateSpec::Epr { .. }
            | StateSpec::SpEntangled { .. }
            | StateSpec::Hybrid { .. }
            | StateSpec::TwoModeAddedCoherent { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
        match *self {
            StateSpec::Vacuum | StateSpec::Fock { .. } => Ok(()),
            StateSpec::Coherent { alpha } | StateSpec::TwoModeAddedCoherent { alpha, .. } => {
                if finite(alpha) {
                    Ok(())
                } else {
                    Err(Error::invalid("coherent amplitude must be finite"))
                }
            }
            StateSpec::Thermal { mean } => {
                if mean >= 0.0 && mean.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("thermal mean {mean} must be >= 0")))
                }
            }
            StateSpec::SqueezedVacuum { lambda } | StateSpec::Epr { lambda } => {
                if lambda.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("lambda {lambda} must lie in (-1, 1)")))
                }
            }
            StateSpec::Cat { alpha, parity } => {
                if !finite(alpha) {
                    Err(Error::invalid("cat amplitude must be finite"))
                } else if parity == Parity::Odd && alpha.norm() == 0.0 {
                    Err(Error::invalid("odd cat with zero amplitude is the zero vector"))
                } else {
                    Ok(())
                }
            }
            StateSpec::SpEntangled { c1, c2, phi } => {
                let total = c1.norm_sqr() + c2.norm_sqr();
                if (total - 1.0).abs() > 1e-10 || !phi.is_finite() {
                    Err(Error::invalid(format!("|c1|^2 + |c2|^2 = {total}, expected 1")))
                } else {
                    Ok(())
                }
            }
            StateSpec::Hybrid { alpha, alpha_prime, phi } => {
                if !finite(alpha) || !phi.is_finite() || alpha_prime.is_some_and(|a| !finite(a)) {
                    Err(Error::invalid("hybrid parameters must be finite"))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Builds `spec` on `space`, rejecting spaces that drop more than
/// [`TAIL_TOLERANCE`] of the probability mass.
pub fn make_state(spec: &StateSpec, space: &ModeSpace) -> Result<QuantumState> {
    make_state_with_tolerance(spec, space, TAIL_TOLERANCE)
}

pub fn make_state_with_tolerance(
    spec: &StateSpec,
    space: &ModeSpace,
    tail_tolerance: f64,
) -> Result<QuantumState> {
    spec.validate()?;
    if space.num_modes() != spec.num_modes() {
        return Err(Error::mismatch(format!(
            "{} is a {}-mode state, space has {} modes",
            spec.name(),
            spec.num_modes(),
            space.num_modes()
        )));
    }
    let cutoff = space.cutoff();
    let state = match spec {
        StateSpec::Thermal { mean } => {
            let probs = thermal_probabilities(*mean, cutoff);
            let kept: f64 = probs.iter().sum();
            check_tail(spec, 1.0 - kept, tail_tolerance)?;
            let probs: Vec<f64> = probs.iter().map(|p| p / kept).collect();
            QuantumState::Mixed(DensityOperator::diagonal(*space, &probs)?)
        }
        _ => {
            let ket = analytic_ket(spec, space)?;
            check_tail(spec, 1.0 - ket.norm_sqr(), tail_tolerance)?;
            QuantumState::Pure(ket.normalize()?.0)
        }
    };
    Ok(state)
}

fn check_tail(spec: &StateSpec, tail: f64, tol: f64) -> Result<()> {
    if tail > tol {
        return Err(Error::InsufficientCutoff(format!(
            "{} loses {tail:.3e} probability above the cutoff (allowed {tol:.1e})",
            spec.name()
        )));
    }
    Ok(())
}

/// Smallest cutoff at which `spec` satisfies [`TAIL_TOLERANCE`].
pub fn required_cutoff(spec: &StateSpec) -> Result<usize> {
    spec.validate()?;
    for cutoff in 1..=400 {
        let space = ModeSpace::new(spec.num_modes(), cutoff)?;
        match make_state(spec, &space) {
            Ok(_) => return Ok(cutoff),
            Err(Error::InsufficientCutoff(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InsufficientCutoff(format!("{} needs a cutoff above 400", spec.name())))
}

/// Truncated coherent amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`, not
/// renormalized.
pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Thermal photon-number distribution `m^n / (1+m)^(n+1)`, not renormalized.
pub fn thermal_probabilities(mean: f64, cutoff: usize) -> Vec<f64> {
    let ratio = mean / (1.0 + mean);
    let mut p = 1.0 / (1.0 + mean);
    let mut out = Vec::with_capacity(cutoff + 1);
    for _ in 0..=cutoff {
        out.push(p);
        p *= ratio;
    }
    out
}

/// Amplitudes `<n|a^dagger|alpha>` = `sqrt(n) c_{n-1}`.
fn added_coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let c = coherent_amplitudes(alpha, cutoff);
    (0..=cutoff)
        .map(|n| if n == 0 { C64::new(0.0, 0.0) } else { c[n - 1] * (n as f64).sqrt() })
        .collect()
}

/// Amplitudes of the displaced single photon `D(alpha)|1>`:
/// `sqrt(n) c_{n-1} - alpha^* c_n`.
pub fn displaced_one_photon_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let c = coherent_amplitudes(alpha, cutoff);
    (0..=cutoff)
        .map(|n| {
            let up = if n == 0 { C64::new(0.0, 0.0) } else { c[n - 1] * (n as f64).sqrt() };
            up - alpha.conj() * c[n]
        })
        .collect()
}

fn single_mode(space: &ModeSpace, amps: Vec<C64>) -> Result<Ket> {
    Ket::new(*space, nalgebra::DVector::from_vec(amps))
}

fn product(space: &ModeSpace, a: &[C64], b: &[C64]) -> Ket {
    let levels = space.levels();
    Ket::from_fn(*space, |i| a[i / levels] * b[i % levels])
}

fn analytic_ket(spec: &StateSpec, space: &ModeSpace) -> Result<Ket> {
    let cutoff = space.cutoff();
    let levels = space.levels();
    let zero = C64::new(0.0, 0.0);
    let unit = |n: usize| {
        let mut v = vec![zero; levels];
        v[n] = C64::new(1.0, 0.0);
        v
    };
    match *spec {
        StateSpec::Vacuum => Ok(Ket::vacuum(*space)),
        StateSpec::Fock { n } => Ket::fock(*space, &[n]),
        StateSpec::Coherent { alpha } => single_mode(space, coherent_amplitudes(alpha, cutoff)),
        StateSpec::SqueezedVacuum { lambda } => {
            let mut amps = vec![zero; levels];
            let mut a = (1.0 - lambda * lambda).powf(0.25);
            amps[0] = C64::new(a, 0.0);
            let mut n = 1;
            while 2 * n <= cutoff {
                let m = 2 * n;
                a *= ((m * (m - 1)) as f64).sqrt() / n as f64 * (-lambda / 2.0);
                amps[m] = C64::new(a, 0.0);
                n += 1;
            }
            single_mode(space, amps)
        }
        StateSpec::Cat { alpha, parity } => {
            let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
            let norm = (2.0 * (1.0 + sign * (-2.0 * alpha.norm_sqr()).exp())).sqrt();
            let amps = coherent_amplitudes(alpha, cutoff)
                .iter()
                .enumerate()
                .map(|(n, c)| {
                    let parity_factor = if n % 2 == 0 { 1.0 + sign } else { 1.0 - sign };
                    c * parity_factor / norm
                })
                .collect();
            single_mode(space, amps)
        }
        StateSpec::Epr { lambda } => {
            let pref = (1.0 - lambda * lambda).sqrt();
            Ok(Ket::from_fn(*space, |i| {
                let (a, b) = (i / levels, i % levels);
                if a == b {
                    C64::new(pref * lambda.powi(a as i32), 0.0)
                } else {
                    zero
                }
            }))
        }
        StateSpec::SpEntangled { c1, c2, phi } => {
            let mut k = product(space, &unit(1), &unit(0)).scale(c1);
            let other = product(space, &unit(0), &unit(1)).scale(c2 * C64::from_polar(1.0, phi));
            k = k.add(&other)?;
            Ok(k)
        }
        StateSpec::Hybrid { alpha, alpha_prime, phi } => {
            let alpha_prime = match alpha_prime {
                Some(a) => a,
                None => best_coherent_match(alpha),
            };
            let first = product(space, &unit(1), &coherent_amplitudes(alpha, cutoff));
            let second = product(space, &unit(0), &coherent_amplitudes(alpha_prime, cutoff))
                .scale(C64::from_polar(1.0, phi));
            Ok(first.add(&second)?.scale(C64::new(1.0 / 2f64.sqrt(), 0.0)))
        }
        StateSpec::TwoModeAddedCoherent { alpha, phi } => {
            let unnorm = two_mode_added_coherent_unnormalized(alpha, phi, space)?;
            let n = two_mode_added_coherent_norm(alpha, phi);
            Ok(unnorm.scale(C64::new(1.0 / n.sqrt(), 0.0)))
        }
        StateSpec::Thermal { .. } => Err(Error::invalid("thermal states are mixed")),
    }
}

/// `2 [1 + |alpha|^2 (1 + cos phi)]`.
pub fn two_mode_added_coherent_norm(alpha: C64, phi: f64) -> f64 {
    2.0 * (1.0 + alpha.norm_sqr() * (1.0 + phi.cos()))
}

/// `D1(a)D2(a)(|1,0> + e^{i phi}|0,1>) + a^*(1 + e^{i phi})|a,a>` before
/// division by the square root of [`two_mode_added_coherent_norm`].
pub fn two_mode_added_coherent_unnormalized(alpha: C64, phi: f64, space: &ModeSpace) -> Result<Ket> {
    if space.num_modes() != 2 {
        return Err(Error::mismatch("two_mode_added_coherent needs a two-mode space"));
    }
    let cutoff = space.cutoff();
    let coh = coherent_amplitudes(alpha, cutoff);
    let disp = displaced_one_photon_amplitudes(alpha, cutoff);
    let e = C64::from_polar(1.0, phi);
    let entangled = product(space, &disp, &coh).add(&product(space, &coh, &disp).scale(e))?;
    let separable = product(space, &coh, &coh).scale(alpha.conj() * (C64::new(1.0, 0.0) + e));
    entangled.add(&separable)
}

/// Builds the balanced two-mode photon-added coherent state; equal to
/// [`make_state`] with [`StateSpec::TwoModeAddedCoherent`].
pub fn make_two_mode_added_coherent(alpha: C64, phi: f64, space: &ModeSpace) -> Result<Ket> {
    match make_state(&StateSpec::TwoModeAddedCoherent { alpha, phi }, space)? {
        QuantumState::Pure(k) => Ok(k),
        QuantumState::Mixed(_) => unreachable!("pure constructor"),
    }
}

/// Coherent amplitude `alpha'` (along the direction of `alpha`) maximizing
/// the fidelity between the photon-added coherent state `a^dagger|alpha>`
/// and `|alpha'>`, found by golden-section search on the overlap.
pub fn best_coherent_match(alpha: C64) -> C64 {
    let r = alpha.norm();
    let dir = if r > 0.0 { alpha / r } else { C64::new(1.0, 0.0) };
    let cutoff = crate::fock::coherent_cutoff(r + 3.0, 1e-16) + 5;
    let added = added_coherent_amplitudes(alpha, cutoff);
    let added_norm: f64 = added.iter().map(|z| z.norm_sqr()).sum();
    let overlap = |s: f64| -> f64 {
        let c = coherent_amplitudes(dir * s, cutoff);
        let ip: C64 = c.iter().zip(&added).map(|(x, y)| x.conj() * y).sum();
        ip.norm_sqr() / added_norm
    };
    let (mut lo, mut hi) = (r, r + 2.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (overlap(x1), overlap(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = overlap(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = overlap(x1);
        }
    }
    dir * (0.5 * (lo + hi))
}

/// Recovers `lambda` of the squeezed-vacuum form from the `|0>` and `|2>`
/// amplitudes of a single-mode ket, using `c2/c0 = -lambda/sqrt(2)`.
pub fn fit_squeezing_lambda(ket: &Ket) -> Result<f64> {
    if ket.space().num_modes() != 1 || ket.space().cutoff() < 2 {
        return Err(Error::invalid("lambda fit needs a single mode with cutoff >= 2"));
    }
    let c0 = ket.amplitudes()[0];
    let c2 = ket.amplitudes()[2];
    if c0.norm() == 0.0 {
        return Err(Error::invalid("vacuum amplitude is zero"));
    }
    let ratio = c2 / c0;
    Ok(-(2f64.sqrt()) * ratio.re)
}

/// Mean photon number of a thermal state, used by constructors and tests.
pub fn thermal_mean(probabilities: &[f64]) -> f64 {
    probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

#[allow(dead_code)]
fn wrap_phase(phi: f64) -> f64 {
    phi.rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure(spec: StateSpec, modes: usize, cutoff: usize) -> Ket {
        let space = ModeSpace::new(modes, cutoff).unwrap();
        make_state(&spec, &space).unwrap().as_ket().unwrap().clone()
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let k = pure(StateSpec::Coherent { alpha: C64::new(0.0, 0.0) }, 1, 5);
        assert!(k.distance(&Ket::vacuum(*k.space())) < 1e-15);
    }

    #[test]
    fn odd_cat_has_no_even_terms() {
        let k = pure(StateSpec::Cat { alpha: C64::new(1.2, 0.4), parity: Parity::Odd }, 1, 30);
        for n in (0..=30).step_by(2) {
            assert_eq!(k.amplitudes()[n].norm(), 0.0);
        }
        assert!(k.is_normalized());
    }

    #[test]
    fn epr_amplitudes() {
        let k = pure(StateSpec::Epr { lambda: 0.5 }, 2, 30);
        for n in 0..6 {
            let expect = (0.75f64).sqrt() * 0.5f64.powi(n as i32);
            assert!((k.amplitude(&[n, n]).unwrap().re - expect).abs() < 1e-12);
        }
        assert_eq!(k.amplitude(&[1, 2]).unwrap().norm(), 0.0);
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        let lambda: f64 = 0.3;
        let k = pure(StateSpec::SqueezedVacuum { lambda }, 1, 40);
        let fact = |m: usize| (1..=m).map(|x| x as f64).product::<f64>();
        for n in 0..8usize {
            let expect = (1.0 - lambda * lambda).powf(0.25) * fact(2 * n).sqrt() / fact(n)
                * (-lambda / 2.0).powi(n as i32);
            assert!((k.amplitudes()[2 * n].re - expect).abs() < 1e-12, "n={n}");
            assert_eq!(k.amplitudes()[2 * n + 1].norm(), 0.0);
        }
        assert!((fit_squeezing_lambda(&k).unwrap() - lambda).abs() < 1e-12);
    }

    #[test]
    fn thermal_is_diagonal_geometric() {
        let space = ModeSpace::single(80).unwrap();
        let rho = make_state(&StateSpec::Thermal { mean: 1.5 }, &space).unwrap().to_density();
        let p = rho.probabilities();
        assert!((thermal_mean(&p) - 1.5).abs() < 1e-9);
        assert!((p[1] - 1.5 / 2.5f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn insufficient_cutoff_rejected() {
        let space = ModeSpace::single(5).unwrap();
        let err = make_state(&StateSpec::Coherent { alpha: C64::new(2.0, 0.0) }, &space).unwrap_err();
        assert!(matches!(err, Error::InsufficientCutoff(_)));
        let n = required_cutoff(&StateSpec::Coherent { alpha: C64::new(2.0, 0.0) }).unwrap();
        assert!(make_state(&StateSpec::Coherent { alpha: C64::new(2.0, 0.0) }, &ModeSpace::single(n).unwrap()).is_ok());
    }

    #[test]
    fn parameter_ranges_enforced() {
        let space = ModeSpace::new(2, 4).unwrap();
        let bad = StateSpec::SpEntangled { c1: C64::new(1.0, 0.0), c2: C64::new(1.0, 0.0), phi: 0.0 };
        assert!(make_state(&bad, &space).is_err());
        assert!(StateSpec::Epr { lambda: 1.0 }.validate().is_err());
        assert!(StateSpec::Thermal { mean: -0.1 }.validate().is_err());
        assert!(make_state(&StateSpec::Vacuum, &space).is_err());
    }

    #[test]
    fn best_match_follows_closed_form() {
        // Maximizing s^2 exp(-(s-r)^2) gives s(s - r) = 1.
        for r in [0.0, 0.5, 1.0, 2.0] {
            let s = best_coherent_match(C64::new(r, 0.0)).re;
            let expect = 0.5 * (r + (r * r + 4.0).sqrt());
            assert!((s - expect).abs() < 1e-6, "r={r}: {s} vs {expect}");
        }
    }
}
