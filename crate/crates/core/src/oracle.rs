//! Reference values computed without the engine's operator machinery.
//!
//! Every oracle works from closed forms, explicit Fock expansions, dense
//! Taylor exponentials or brute-force scans, so tests can compare the
//! engine against numbers it did not produce. `run` exposes them by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::C64;

/// Names accepted by [`run`].
pub const NAMES: &[&str] = &[
    "epr",
    "thermal-subtraction",
    "odd-cat",
    "noiseless-amplifier",
    "fock-herald",
    "kerr",
    "scissors",
    "wigner-anchors",
    "log-negativity",
];

/// Reference numbers of oracle `name` as `(key, value)` pairs.
pub fn run(name: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    let mut put = |k: String, v: f64| out.push((k, v));
    match name {
        "epr" => {
            for (n, a) in epr_amplitudes(0.2f64.tanh(), 5).iter().enumerate() {
                put(format!("zeta0.2.amp{n}"), *a);
            }
        }
        "thermal-subtraction" => {
            for nbar in [0.5, 1.0, 2.0] {
                put(format!("nbar{nbar}.ideal"), 2.0 * nbar);
                put(format!("nbar{nbar}.r0.05"), thermal_subtracted_mean(nbar, 0.05));
            }
        }
        "odd-cat" => {
            for lambda in [0.2, 0.4, 0.6] {
                let (alpha, f) = odd_cat_match(lambda);
                put(format!("lambda{lambda}.alpha_im"), alpha.im);
                put(format!("lambda{lambda}.fidelity"), f);
            }
        }
        "noiseless-amplifier" => {
            for alpha in [0.1, 0.3, 0.6, 1.0] {
                put(format!("alpha{alpha}.fidelity"), noiseless_amplifier_fidelity(alpha, 20));
            }
        }
        "fock-herald" => {
            for lambda in [0.1, 0.3, 0.5] {
                put(format!("lambda{lambda}.two_leaf_fidelity"), two_leaf_fock2_fidelity(lambda));
            }
        }
        "kerr" => {
            for alpha in [0.2, 0.5] {
                let (f, c1, c2) = kerr_grid_search(alpha, PI, 12);
                put(format!("alpha{alpha}.fidelity"), f);
                put(format!("alpha{alpha}.c1"), c1.re);
                put(format!("alpha{alpha}.c2_re"), c2.re);
                put(format!("alpha{alpha}.c2_im"), c2.im);
            }
        }
        "scissors" => {
            for alpha in [0.3, 0.6] {
                let (out, p) = scissors_output(C64::new(alpha, 0.0), 12);
                let target = [C64::new(1.0, 0.0), C64::new(alpha, 0.0)];
                let norm = (1.0 + alpha * alpha).sqrt();
                let f = (out[0] * target[0] + out[1] * target[1]).norm_sqr() / (norm * norm);
                put(format!("alpha{alpha}.probability"), p);
                put(format!("alpha{alpha}.fidelity"), f);
            }
        }
        "wigner-anchors" => {
            let vac = fock_density(0, 6);
            let one = fock_density(1, 6);
            put("vacuum.origin".into(), wigner_dense(&vac, 0.0, 0.0, 30));
            put("one.origin".into(), wigner_dense(&one, 0.0, 0.0, 30));
            put("one.x1".into(), wigner_dense(&one, 1.0, 0.0, 30));
        }
        "log-negativity" => {
            for lambda in [0.2f64, 0.5] {
                put(format!("epr{lambda}"), ((1.0 + lambda) / (1.0 - lambda)).log2());
            }
            put("singlet".into(), 1.0);
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown oracle '{other}', expected one of: {}",
                NAMES.join(", ")
            )))
        }
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm_taylor(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm: f64 = (0..n)
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let a = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &a / C64::new(k as f64, 0.0);
        result += &term;
        if term.iter().all(|z| z.norm() < 1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Annihilation operator on `0..=cutoff`, built entry by entry.
pub fn annihilation(cutoff: usize) -> DMatrix<C64> {
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Kronecker product, first factor varying slowest.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Dense `exp[zeta (a^dag b^dag - a b)]` on two modes.
pub fn two_mode_squeeze_dense(zeta: f64, cutoff: usize) -> DMatrix<C64> {
    let a = annihilation(cutoff);
    let id = DMatrix::<C64>::identity(cutoff + 1, cutoff + 1);
    let a1 = kron(&a, &id);
    let a2 = kron(&id, &a);
    let pair = &a1 * &a2;
    let g = (pair.adjoint() - pair) * C64::new(zeta, 0.0);
    expm_taylor(&g)
}

/// Dense `exp[tau (a b^dag - a^dag b)]` on two modes.
pub fn beam_splitter_dense(tau: f64, cutoff: usize) -> DMatrix<C64> {
    let a = annihilation(cutoff);
    let id = DMatrix::<C64>::identity(cutoff + 1, cutoff + 1);
    let a1 = kron(&a, &id);
    let a2 = kron(&id, &a);
    let hop = &a1 * a2.adjoint();
    let g = (&hop - hop.adjoint()) * C64::new(tau, 0.0);
    expm_taylor(&g)
}

/// Dense `exp(alpha a^dag - alpha^* a)` on one mode.
pub fn displacement_dense(alpha: C64, cutoff: usize) -> DMatrix<C64> {
    let a = annihilation(cutoff);
    let g = a.adjoint() * alpha - &a * alpha.conj();
    expm_taylor(&g)
}

/// `sqrt(1 - l^2) l^n` for `n = 0..=cutoff`.
pub fn epr_amplitudes(lambda: f64, cutoff: usize) -> Vec<f64> {
    let norm = (1.0 - lambda * lambda).sqrt();
    (0..=cutoff).map(|n| norm * lambda.powi(n as i32)).collect()
}

/// Coherent amplitudes by the recursion `c_{n+1} = c_n alpha / sqrt(n+1)`.
pub fn coherent_expansion(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut c = vec![C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0)];
    for n in 0..cutoff {
        let next = c[n] * alpha / ((n + 1) as f64).sqrt();
        c.push(next);
    }
    c
}

/// Mean photon number of a thermal state after a beam-splitter tap of
/// reflectivity `r` heralded by an ideal on/off click.
///
/// With the Glauber P function of the thermal state, `|beta>|0>` maps to
/// `|t beta>|r beta>`, a click has weight `1 - exp(-r^2 |beta|^2)` and
/// `|beta|^2` is exponential with mean `nbar`, which gives
/// `t^2 nbar (2 + r^2 nbar) / (1 + r^2 nbar)`.
pub fn thermal_subtracted_mean(nbar: f64, r: f64) -> f64 {
    let s = r * r;
    (1.0 - s) * nbar * (2.0 + s * nbar) / (1.0 + s * nbar)
}

/// Best odd cat `|i a> - |-i a>` for the subtracted squeezed vacuum with
/// parameter `lambda > 0`, by scanning `a` on a grid of step `1e-4`.
///
/// Returns the best amplitude and fidelity.
pub fn odd_cat_match(lambda: f64) -> (C64, f64) {
    let cutoff = 80;
    // a S|0>: amplitude sqrt(2n) c_{2n} on |2n-1>.
    let mut subtracted = vec![0.0; cutoff + 1];
    let mut c = (1.0 - lambda * lambda).powf(0.25);
    for n in 0..=cutoff / 2 {
        if n > 0 {
            // c_{2n} / c_{2n-2} = sqrt((2n)(2n-1)) / n * (-l/2)
            c *= ((2 * n) as f64 * (2 * n - 1) as f64).sqrt() / n as f64 * (-lambda / 2.0);
            subtracted[2 * n - 1] = ((2 * n) as f64).sqrt() * c;
        }
    }
    let s_norm: f64 = subtracted.iter().map(|x| x * x).sum::<f64>().sqrt();
    let overlap = |a: f64| -> f64 {
        // Odd cat of amplitude i a: coefficients proportional to
        // (i a)^{2k+1}/sqrt((2k+1)!) = i (-1)^k a^{2k+1}/sqrt((2k+1)!).
        let mut cat = vec![0.0; cutoff + 1];
        let mut term = a;
        let mut sign = 1.0;
        for k in 0..cutoff / 2 {
            let n = 2 * k + 1;
            if k > 0 {
                term *= a * a / ((n * (n - 1)) as f64).sqrt();
            }
            cat[n] = sign * term;
            sign = -sign;
        }
        let c_norm: f64 = cat.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = cat.iter().zip(&subtracted).map(|(x, y)| x * y).sum();
        (dot / (c_norm * s_norm)).powi(2)
    };
    let mut best = (0.0, 0.0);
    let mut a = 1e-4;
    while a < 4.0 {
        let f = overlap(a);
        if f > best.1 {
            best = (a, f);
        }
        a += 1e-4;
    }
    (C64::new(0.0, best.0), best.1)
}

/// Fidelity of normalized `a a^dag |alpha>` with `|2 alpha>`, both expanded
/// exactly in the Fock basis up to `cutoff`.
pub fn noiseless_amplifier_fidelity(alpha: f64, cutoff: usize) -> f64 {
    let coh = coherent_expansion(C64::new(alpha, 0.0), cutoff);
    let amplified = coherent_expansion(C64::new(2.0 * alpha, 0.0), cutoff);
    let out: Vec<C64> = coh.iter().enumerate().map(|(n, c)| c * (n + 1) as f64).collect();
    let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let target_norm: f64 = amplified.iter().map(|z| z.norm_sqr()).sum();
    let dot: C64 = amplified.iter().zip(&out).map(|(t, o)| t.conj() * o).sum();
    dot.norm_sqr() / (norm * target_norm)
}

/// Fidelity with `|2>` of an EPR arm heralded by two ideal on/off clicks
/// after a balanced split of the other arm.
///
/// `n` photons on a balanced splitter make both detectors click with
/// probability `1 - 2^(1-n)`, so `P(n)` is proportional to
/// `l^(2n) (1 - 2^(1-n))`.
pub fn two_leaf_fock2_fidelity(lambda: f64) -> f64 {
    let x = lambda * lambda;
    let total = x / (1.0 - x) - x / (1.0 - x / 2.0);
    (x * x / 2.0) / total
}

/// Brute-force optimum of `c1 a a^dag + c2 a^dag a` against the Kerr target
/// on `|alpha>`: coarse grid over the unit sphere (`c1 >= 0` real), then a
/// local grid of resolution `1e-3`.
///
/// Returns `(fidelity, c1, c2)`.
pub fn kerr_grid_search(alpha: f64, phase: f64, cutoff: usize) -> (f64, C64, C64) {
    let psi = coherent_expansion(C64::new(alpha, 0.0), cutoff);
    let psi_norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let shift = C64::from_polar(1.0, phase);
    let target: Vec<C64> = psi
        .iter()
        .enumerate()
        .map(|(n, z)| if n == 2 { z * shift } else { *z })
        .collect();
    let eval = |theta: f64, chi: f64| -> f64 {
        let c1 = C64::new(theta.cos(), 0.0);
        let c2 = C64::from_polar(theta.sin(), chi);
        let mut dot = C64::new(0.0, 0.0);
        let mut norm = 0.0;
        for n in 0..=cutoff {
            let o = psi[n] * (c1 * (n + 1) as f64 + c2 * n as f64);
            dot += target[n].conj() * o;
            norm += o.norm_sqr();
        }
        if norm == 0.0 {
            0.0
        } else {
            dot.norm_sqr() / (norm * psi_norm)
        }
    };
    let mut best = (0.0, 0.0, f64::MIN);
    let coarse = 0.01;
    for i in 0..=(PI / coarse) as usize {
        for j in 0..(2.0 * PI / coarse) as usize {
            let (t, c) = (i as f64 * coarse, j as f64 * coarse);
            let f = eval(t, c);
            if f > best.2 {
                best = (t, c, f);
            }
        }
    }
    let (t0, c0) = (best.0, best.1);
    for i in -20..=20 {
        for j in -20..=20 {
            let (t, c) = (t0 + i as f64 * 1e-3, c0 + j as f64 * 1e-3);
            let f = eval(t, c);
            if f > best.2 {
                best = (t, c, f);
            }
        }
    }
    (best.2, C64::new(best.0.cos(), 0.0), C64::from_polar(best.0.sin(), best.1))
}

type Occupation = Vec<usize>;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Applies the passive transformation `a_i^dag -> sum_j u[(j, i)] a_j^dag`
/// to a state given as occupation -> amplitude, by expanding monomials.
fn transform_passive(state: &BTreeMap<Occupation, C64>, u: &DMatrix<C64>) -> BTreeMap<Occupation, C64> {
    let modes = u.nrows();
    let mut out: BTreeMap<Occupation, C64> = BTreeMap::new();
    for (occ, amp) in state {
        // Polynomial in creation operators: exponent vector -> coefficient.
        let mut poly: BTreeMap<Occupation, C64> = BTreeMap::new();
        poly.insert(vec![0; modes], *amp / occ.iter().map(|&n| factorial(n).sqrt()).product::<f64>());
        for (i, &n) in occ.iter().enumerate() {
            for _ in 0..n {
                let mut next: BTreeMap<Occupation, C64> = BTreeMap::new();
                for (mono, coeff) in &poly {
                    for j in 0..modes {
                        let w = u[(j, i)];
                        if w == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut m = mono.clone();
                        m[j] += 1;
                        *next.entry(m).or_insert(C64::new(0.0, 0.0)) += coeff * w;
                    }
                }
                poly = next;
            }
        }
        for (mono, coeff) in poly {
            let scale: f64 = mono.iter().map(|&n| factorial(n).sqrt()).product();
            *out.entry(mono).or_insert(C64::new(0.0, 0.0)) += coeff * scale;
        }
    }
    out
}

/// Mode matrix of `exp[tau (a_p a_q^dag - a_p^dag a_q)]` acting on creation
/// operators: `a_p^dag -> cos a_p^dag + sin a_q^dag`,
/// `a_q^dag -> cos a_q^dag - sin a_p^dag`.
fn splitter_modes(modes: usize, p: usize, q: usize, tau: f64) -> DMatrix<C64> {
    let mut u = DMatrix::<C64>::identity(modes, modes);
    let (c, s) = (tau.cos(), tau.sin());
    u[(p, p)] = C64::new(c, 0.0);
    u[(q, p)] = C64::new(s, 0.0);
    u[(q, q)] = C64::new(c, 0.0);
    u[(p, q)] = C64::new(-s, 0.0);
    u
}

/// Scissors output by explicit creation-operator expansion: `|alpha>` in
/// mode 0, `|1>` in mode 1, vacuum in mode 2; balanced splitters on (1, 2)
/// then (0, 1); herald 0 photons in mode 0 and 1 photon in mode 1.
///
/// Returns the normalized mode-2 amplitudes on `|0>, |1>` and the herald
/// probability.
pub fn scissors_output(alpha: C64, cutoff: usize) -> ([C64; 2], f64) {
    let coh = coherent_expansion(alpha, cutoff);
    let mut state: BTreeMap<Occupation, C64> = BTreeMap::new();
    for (n, c) in coh.iter().enumerate() {
        state.insert(vec![n, 1, 0], *c);
    }
    let state = transform_passive(&state, &splitter_modes(3, 1, 2, PI / 4.0));
    let state = transform_passive(&state, &splitter_modes(3, 0, 1, PI / 4.0));
    let mut out = [C64::new(0.0, 0.0); 2];
    let mut p = 0.0;
    for (occ, amp) in &state {
        if occ[0] == 0 && occ[1] == 1 {
            p += amp.norm_sqr();
            if occ[2] < 2 {
                out[occ[2]] += amp;
            }
        }
    }
    let norm = p.sqrt();
    ([out[0] / norm, out[1] / norm], p)
}

/// `|n><n|` on `0..=cutoff`.
pub fn fock_density(n: usize, cutoff: usize) -> DMatrix<C64> {
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |r, c| {
        if r == n && c == n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Wigner function in `x, p` units from the displaced parity
/// `W = Tr[rho D(b) P D(b)^dag] / pi`, `b = (x + i p)/sqrt 2`, with the
/// displacement exponentiated densely at `cutoff + pad`.
pub fn wigner_dense(rho: &DMatrix<C64>, x: f64, p: f64, pad: usize) -> f64 {
    let small = rho.nrows();
    let big = small - 1 + pad;
    let mut embedded = DMatrix::<C64>::zeros(big + 1, big + 1);
    embedded.view_mut((0, 0), (small, small)).copy_from(rho);
    let beta = C64::new(x, p) / 2f64.sqrt();
    let d = displacement_dense(beta, big);
    let parity = DMatrix::from_fn(big + 1, big + 1, |r, c| {
        if r == c {
            C64::new(if r % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let op = &d * parity * d.adjoint();
    (op * embedded).trace().re / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_exponential_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, 1.0),
            C64::new(-3.0, 0.0),
        ]));
        let e = expm_taylor(&m);
        assert!((e[(0, 0)] - C64::from_polar(1.0, 1.0)).norm() < 1e-14);
        assert!((e[(1, 1)].re - (-3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dense_squeezer_matches_epr_closed_form() {
        let zeta = 0.2;
        let cutoff = 12;
        let u = two_mode_squeeze_dense(zeta, cutoff);
        let amps = epr_amplitudes(zeta.tanh(), 6);
        for (n, a) in amps.iter().enumerate() {
            let idx = n * (cutoff + 1) + n;
            assert!((u[(idx, 0)].re - a).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn thermal_mean_limits() {
        assert!((thermal_subtracted_mean(1.0, 1e-6) - 2.0).abs() < 1e-9);
        assert!((thermal_subtracted_mean(2.0, 0.05) - 4.0).abs() / 4.0 < 0.02);
    }

    #[test]
    fn scissors_truncates_coherent_state() {
        let alpha = C64::new(0.3, 0.0);
        let (out, p) = scissors_output(alpha, 10);
        assert!((out[1] / out[0] - alpha).norm() < 1e-12);
        // p = |c0|^2 (1 + |alpha|^2) / 4
        let expect = (-0.09f64).exp() * 1.09 / 4.0;
        assert!((p - expect).abs() < 1e-12);
    }

    #[test]
    fn two_leaf_fidelity_approaches_one_for_weak_pumping() {
        assert!(two_leaf_fock2_fidelity(0.05) > 0.99);
        assert!(two_leaf_fock2_fidelity(0.5) < two_leaf_fock2_fidelity(0.1));
    }

    #[test]
    fn wigner_anchors() {
        assert!((wigner_dense(&fock_density(0, 4), 0.0, 0.0, 20) - 1.0 / PI).abs() < 1e-12);
        assert!((wigner_dense(&fock_density(1, 4), 0.0, 0.0, 20) + 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn unknown_oracle_rejected() {
        assert!(run("nope").is_err());
        for name in NAMES {
            if *name != "kerr" && *name != "odd-cat" {
                assert!(!run(name).unwrap().is_empty());
            }
        }
    }
}
