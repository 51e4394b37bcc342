//! Maximum-likelihood homodyne tomography with a binned quadrature POVM.
//!
//! Each distinct phase defines a complete POVM of quadrature bins of width
//! `bin_width` over `[-range, range]`; the two outermost bins extend to
//! infinity. The estimator iterates `rho <- N[R rho R]` from the maximally
//! mixed state. When a full step would lower the likelihood, the diluted
//! step `(1 + eps R) rho (1 + eps R)` is used with `eps` halved until the
//! likelihood no longer drops, so the recorded trace is non-decreasing.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::analysis::{overlap_integrals, quadrature_extent, QuadratureSample};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, ModeSpace, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyConfig {
    pub cutoff: usize,
    pub bin_width: f64,
    pub max_iterations: usize,
    /// Stop once the relative change of the log-likelihood falls below this.
    pub likelihood_tol: f64,
    /// Half-width of the binned quadrature range.
    pub range: f64,
    /// Minimum number of distinct phases in `[0, pi)`.
    pub min_phases: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            cutoff: 10,
            bin_width: 0.1,
            max_iterations: 500,
            likelihood_tol: 1e-9,
            range: 6.0,
            min_phases: 8,
        }
    }
}

impl TomographyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::invalid("tomography cutoff must be positive"));
        }
        if !(self.bin_width > 0.0) || !(self.range > 0.0) || 2.0 * self.range / self.bin_width < 20.0 {
            return Err(Error::invalid("bins must be positive and at least 20 must cover the range"));
        }
        if self.max_iterations == 0 || !(self.likelihood_tol > 0.0) {
            return Err(Error::invalid("iterations and tolerance must be positive"));
        }
        Ok(())
    }

    fn bins(&self) -> usize {
        (2.0 * self.range / self.bin_width).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub state: DensityOperator,
    /// Log-likelihood of the initial state and of every iterate.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Observation {
    frequency: f64,
    projector: DMatrix<C64>,
}

fn group_phases(samples: &[QuadratureSample]) -> Vec<(f64, Vec<f64>)> {
    let mut sorted: Vec<&QuadratureSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for s in sorted {
        match groups.last_mut() {
            Some((theta, xs)) if (s.theta - *theta).abs() <= 1e-9 => xs.push(s.x),
            _ => groups.push((s.theta, vec![s.x])),
        }
    }
    groups
}

// Per-observation terms run in parallel; sums stay sequential so results are
// bit-for-bit reproducible.
fn log_likelihood(obs: &[Observation], rho: &DMatrix<C64>) -> f64 {
    let terms: Vec<f64> = obs
        .par_iter()
        .map(|o| o.frequency * probability(&o.projector, rho).ln())
        .collect();
    terms.iter().sum()
}

fn probability(projector: &DMatrix<C64>, rho: &DMatrix<C64>) -> f64 {
    // Tr(P rho) with both Hermitian.
    let p: C64 = projector.iter().zip(rho.transpose().iter()).map(|(a, b)| a * b).sum();
    p.re.max(1e-300)
}

fn r_operator(obs: &[Observation], rho: &DMatrix<C64>, levels: usize) -> DMatrix<C64> {
    let weights: Vec<f64> = obs
        .par_iter()
        .map(|o| o.frequency / probability(&o.projector, rho))
        .collect();
    let mut r = DMatrix::<C64>::zeros(levels, levels);
    for (o, w) in obs.iter().zip(weights) {
        r += &o.projector * C64::new(w, 0.0);
    }
    r
}

fn normalized(m: DMatrix<C64>) -> DMatrix<C64> {
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = h.trace().re;
    h / C64::new(tr, 0.0)
}

/// Reconstructs a single-mode density operator from homodyne samples.
pub fn maxlik_reconstruct(samples: &[QuadratureSample], config: &TomographyConfig) -> Result<Reconstruction> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::invalid("no homodyne samples"));
    }
    let groups = group_phases(samples);
    if groups.len() < config.min_phases {
        return Err(Error::invalid(format!(
            "samples cover {} distinct phases, at least {} required",
            groups.len(),
            config.min_phases
        )));
    }
    let cutoff = config.cutoff;
    let levels = cutoff + 1;
    let bins = config.bins();
    let ext = quadrature_extent(cutoff).max(config.range + 1.0);
    let edges: Vec<f64> = (0..=bins)
        .map(|j| match j {
            0 => -ext,
            j if j == bins => ext,
            j => -config.range + j as f64 * config.bin_width,
        })
        .collect();
    let kernels: Vec<DMatrix<f64>> = (0..bins)
        .into_par_iter()
        .map(|j| overlap_integrals(edges[j], edges[j + 1], cutoff, 0.05))
        .collect();

    let total = samples.len() as f64;
    let mut obs = Vec::new();
    for (theta, xs) in &groups {
        let mut counts = vec![0usize; bins];
        for &x in xs {
            let j = ((x + config.range) / config.bin_width).floor();
            counts[(j.max(0.0) as usize).min(bins - 1)] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let k = &kernels[j];
            let projector = DMatrix::from_fn(levels, levels, |m, n| {
                C64::from_polar(k[(m, n)], theta * (m as f64 - n as f64))
            });
            obs.push(Observation { frequency: c as f64 / total, projector });
        }
    }

    let eye = DMatrix::<C64>::identity(levels, levels);
    let mut rho = eye.clone() / C64::new(levels as f64, 0.0);
    let mut ll = log_likelihood(&obs, &rho);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let r = r_operator(&obs, &rho, levels);
        let mut next = normalized(&r * &rho * &r);
        let mut next_ll = log_likelihood(&obs, &next);
        let mut eps = 1.0;
        while next_ll < ll {
            eps *= 0.5;
            if eps < 1e-12 {
                next = rho.clone();
                next_ll = ll;
                break;
            }
            let step = &eye + &r * C64::new(eps, 0.0);
            next = normalized(&step * &rho * &step);
            next_ll = log_likelihood(&obs, &next);
        }
        let change = (next_ll - ll).abs() / ll.abs().max(1e-300);
        rho = next;
        ll = next_ll;
        trace.push(ll);
        if change < config.likelihood_tol {
            converged = true;
            break;
        }
    }
    let space = ModeSpace::single(cutoff)?;
    Ok(Reconstruction {
        state: DensityOperator::new(space, rho)?,
        log_likelihood: trace,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(TomographyConfig::default().validate().is_ok());
        let coarse = TomographyConfig { bin_width: 1.0, ..Default::default() };
        assert!(coarse.validate().is_err());
    }

    #[test]
    fn rejects_too_few_phases() {
        let samples: Vec<QuadratureSample> =
            (0..4).map(|k| QuadratureSample { theta: k as f64 * 0.5, x: 0.1 }).collect();
        assert!(maxlik_reconstruct(&samples, &TomographyConfig::default()).is_err());
        assert!(maxlik_reconstruct(&[], &TomographyConfig::default()).is_err());
    }

    #[test]
    fn bin_projectors_sum_to_identity() {
        let cfg = TomographyConfig { cutoff: 6, ..Default::default() };
        let ext = quadrature_extent(6);
        let bins = cfg.bins();
        let mut total = DMatrix::<f64>::zeros(7, 7);
        for j in 0..bins {
            let lo = if j == 0 { -ext } else { -cfg.range + j as f64 * cfg.bin_width };
            let hi = if j + 1 == bins { ext } else { -cfg.range + (j + 1) as f64 * cfg.bin_width };
            total += overlap_integrals(lo, hi, 6, 0.05);
        }
        assert!((total - DMatrix::<f64>::identity(7, 7)).abs().max() < 1e-12);
    }
}
