use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{partial_trace, DensityOperator, ModeSpace, OperatorMatrix, QuantumState, C64};

/// One homodyne outcome: local-oscillator phase and quadrature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSample {
    pub theta: f64,
    pub x: f64,
}

/// `x_theta = (a^dagger e^{i theta} + a e^{-i theta}) / sqrt 2`.
pub fn quadrature_operator(theta: f64, cutoff: usize) -> Result<OperatorMatrix> {
    let space = ModeSpace::single(cutoff)?;
    let levels = space.levels();
    let mut m = DMatrix::<C64>::zeros(levels, levels);
    for n in 1..levels {
        let amp = (n as f64 / 2.0).sqrt();
        m[(n, n - 1)] = C64::from_polar(amp, theta);
        m[(n - 1, n)] = C64::from_polar(amp, -theta);
    }
    OperatorMatrix::new(space, m)
}

/// Wavefunctions `<x|n>` for `n = 0..=cutoff`, normalized so the vacuum
/// quadrature variance is 1/2.
pub fn hermite_functions(x: f64, cutoff: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let psi0 = PI.powf(-0.25) * (-x * x / 2.0).exp();
    out.push(psi0);
    if cutoff >= 1 {
        out.push(2f64.sqrt() * x * psi0);
    }
    for n in 1..cutoff {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Half-width beyond which every wavefunction up to `cutoff` is negligible.
pub fn quadrature_extent(cutoff: usize) -> f64 {
    (2.0 * cutoff as f64 + 1.0).sqrt() + 10.0
}

/// Single-mode density operator of `mode`.
pub(crate) fn reduced(state: &QuantumState, mode: usize) -> Result<DensityOperator> {
    state.space().check_mode(mode)?;
    if state.space().num_modes() == 1 {
        Ok(state.to_density())
    } else {
        partial_trace(state, &[mode])
    }
}

/// `u_n = <n|x_theta> = e^{i n theta} psi_n(x)`.
fn rotated(x: f64, theta: f64, cutoff: usize) -> DVector<C64> {
    let psi = hermite_functions(x, cutoff);
    DVector::from_iterator(
        cutoff + 1,
        psi.iter().enumerate().map(|(n, p)| C64::from_polar(*p, theta * n as f64)),
    )
}

fn pdf_single(rho: &DMatrix<C64>, theta: f64, x: f64, cutoff: usize) -> f64 {
    let u = rotated(x, theta, cutoff);
    u.dotc(&(rho * &u)).re.max(0.0)
}

/// Probability density of `x_theta` on `mode` at each point of `xs`.
pub fn quadrature_pdf(state: &QuantumState, mode: usize, theta: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let rho = reduced(state, mode)?;
    let cutoff = rho.space().cutoff();
    let m = rho.matrix();
    Ok(xs.par_iter().map(|&x| pdf_single(m, theta, x, cutoff)).collect())
}

/// Gauss-Legendre rule used for all quadrature-window integrals.
pub(crate) fn gauss_rule() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(16).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Real matrix `K_mn = int_lo^hi psi_m(x) psi_n(x) dx`, integrated on cells
/// no wider than `max_width`.
pub(crate) fn overlap_integrals(lo: f64, hi: f64, cutoff: usize, max_width: f64) -> DMatrix<f64> {
    let levels = cutoff + 1;
    let mut k = DMatrix::<f64>::zeros(levels, levels);
    if hi <= lo {
        return k;
    }
    let cells = ((hi - lo) / max_width).ceil().max(1.0) as usize;
    let h = (hi - lo) / cells as f64;
    for c in 0..cells {
        let a = lo + c as f64 * h;
        accumulate_cell(&mut k, a, a + h, cutoff, 1.0);
    }
    k
}

fn accumulate_cell(k: &mut DMatrix<f64>, a: f64, b: f64, cutoff: usize, scale: f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for &(node, weight) in gauss_rule() {
        let psi = hermite_functions(mid + half * node, cutoff);
        let w = weight * half * scale;
        for m in 0..=cutoff {
            let pm = psi[m] * w;
            for n in 0..=cutoff {
                k[(m, n)] += pm * psi[n];
            }
        }
    }
}

/// Quadrature-window measurement operator
/// `E_mn = e^{i (m-n) theta} int_window psi_m psi_n dx` on one mode.
///
/// Infinite window ends are clamped to [`quadrature_extent`]. Cells are
/// split until each carries at most `max_cell_mass` of the reference
/// state's probability.
pub fn window_element(
    reference: &DensityOperator,
    theta: f64,
    window: (f64, f64),
    max_cell_mass: f64,
) -> Result<DMatrix<C64>> {
    let (lo, hi) = window;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::invalid(format!("quadrature window [{lo}, {hi}] is empty")));
    }
    if reference.space().num_modes() != 1 {
        return Err(Error::invalid("window element needs a single-mode reference state"));
    }
    let cutoff = reference.space().cutoff();
    let ext = quadrature_extent(cutoff);
    let (lo, hi) = (lo.max(-ext), hi.min(ext));
    let levels = cutoff + 1;
    if lo >= hi {
        return Ok(DMatrix::zeros(levels, levels));
    }
    let rho = reference.matrix();
    let mut k = DMatrix::<f64>::zeros(levels, levels);
    let base = ((hi - lo) / 0.05).ceil().max(1.0) as usize;
    let h = (hi - lo) / base as f64;
    let mut stack: Vec<(f64, f64)> = (0..base).rev().map(|c| (lo + c as f64 * h, lo + (c + 1) as f64 * h)).collect();
    while let Some((a, b)) = stack.pop() {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mass: f64 = gauss_rule()
            .iter()
            .map(|&(node, w)| w * half * pdf_single(rho, theta, mid + half * node, cutoff))
            .sum();
        if mass > max_cell_mass && b - a > 1e-9 {
            stack.push((mid, b));
            stack.push((a, mid));
            continue;
        }
        accumulate_cell(&mut k, a, b, cutoff, 1.0);
    }
    Ok(DMatrix::from_fn(levels, levels, |m, n| {
        C64::from_polar(k[(m, n)], theta * (m as f64 - n as f64))
    }))
}

/// Homodyne samples drawn with the generator seeded by `seed` (stream 0).
pub fn sample_homodyne(
    state: &QuantumState,
    mode: usize,
    phases: &[f64],
    n_per_phase: usize,
    seed: u64,
) -> Result<Vec<QuadratureSample>> {
    let mut rng = crate::rng::stream(seed, 0);
    sample_homodyne_with(state, mode, phases, n_per_phase, &mut rng)
}

/// Inverse-CDF sampling of `x_theta` from a tabulated density on a fine grid
/// with linear interpolation of the cumulative distribution.
pub fn sample_homodyne_with<R: Rng + ?Sized>(
    state: &QuantumState,
    mode: usize,
    phases: &[f64],
    n_per_phase: usize,
    rng: &mut R,
) -> Result<Vec<QuadratureSample>> {
    if phases.is_empty() {
        return Err(Error::invalid("at least one phase is required"));
    }
    let rho = reduced(state, mode)?;
    let cutoff = rho.space().cutoff();
    let ext = (2.0 * cutoff as f64 + 1.0).sqrt() + 6.0;
    let points = ((2.0 * ext) / 2e-3).ceil() as usize + 1;
    let xs: Vec<f64> = (0..points).map(|i| -ext + 2.0 * ext * i as f64 / (points - 1) as f64).collect();
    let mut out = Vec::with_capacity(phases.len() * n_per_phase);
    for &theta in phases {
        let pdf: Vec<f64> = xs.par_iter().map(|&x| pdf_single(rho.matrix(), theta, x, cutoff)).collect();
        let mut cdf = vec![0.0; points];
        for i in 1..points {
            cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let total = cdf[points - 1];
        if total <= 0.0 {
            return Err(Error::invalid("quadrature distribution vanishes"));
        }
        for _ in 0..n_per_phase {
            let u: f64 = rng.random::<f64>() * total;
            let j = cdf.partition_point(|&c| c < u).clamp(1, points - 1);
            let (c0, c1) = (cdf[j - 1], cdf[j]);
            let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
            out.push(QuadratureSample { theta, x: xs[j - 1] + t * (xs[j] - xs[j - 1]) });
        }
    }
    Ok(out)
}

/// `n` phases equally spaced over `[0, pi)`.
pub fn equally_spaced_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * k as f64 / n as f64).collect()
}

pub fn samples_to_text(samples: &[QuadratureSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 48);
    for s in samples {
        out.push_str(&format!("{:.16e} {:.16e}\n", s.theta, s.x));
    }
    out
}

pub fn samples_from_text(text: &str) -> Result<Vec<QuadratureSample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut t = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("line {}: expected two finite numbers", i + 1)))
        };
        let theta = parse(t.next())?;
        let x = parse(t.next())?;
        if t.next().is_some() {
            return Err(Error::Format(format!("line {}: expected two columns", i + 1)));
        }
        out.push(QuadratureSample { theta, x });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Ket;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let k = overlap_integrals(-16.0, 16.0, 12, 0.1);
        for m in 0..=12 {
            for n in 0..=12 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((k[(m, n)] - expect).abs() < 1e-12, "({m},{n}) {}", k[(m, n)]);
            }
        }
    }

    #[test]
    fn quadrature_variances() {
        let x = quadrature_operator(0.7, 4).unwrap();
        let x2 = x.compose(&x).unwrap();
        let s = *x.space();
        let vac = Ket::vacuum(s);
        assert!((vac.expectation(&x2).unwrap().re - 0.5).abs() < 1e-14);
        let one = Ket::fock(s, &[1]).unwrap();
        assert!((one.expectation(&x2).unwrap().re - 1.5).abs() < 1e-14);
    }

    #[test]
    fn sample_text_round_trip() {
        let s = vec![QuadratureSample { theta: 0.25, x: -1.5e-3 }, QuadratureSample { theta: 3.0, x: 2.0 }];
        assert_eq!(samples_from_text(&samples_to_text(&s)).unwrap(), s);
        assert!(samples_from_text("0.1\n").is_err());
    }

    #[test]
    fn full_window_is_identity() {
        let s = ModeSpace::single(6).unwrap();
        let rho = Ket::fock(s, &[3]).unwrap().to_density();
        let e = window_element(&rho, 0.4, (f64::NEG_INFINITY, f64::INFINITY), 1e-3).unwrap();
        let id = DMatrix::<C64>::identity(7, 7);
        assert!((e - id).iter().all(|z| z.norm() < 1e-12));
    }
}
