use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::quadrature::reduced;
use super::stats::mean_photon_of;
use crate::error::{Error, Result};
use crate::fock::{QuantumState, C64};

/// Uniform phase-space grid in quadrature units `(x, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
    pub nx: usize,
    pub np: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 201;
    pub const DEFAULT_HALF_WIDTH: f64 = 6.0;

    pub fn square(half_width: f64, points: usize) -> Self {
        Self { x_range: (-half_width, half_width), p_range: (-half_width, half_width), nx: points, np: points }
    }

    /// 201 x 201 over `[-6, 6]^2`, widened for states whose mean photon
    /// number pushes the distribution towards the edge.
    pub fn default_for(mean_photon: f64) -> Self {
        let half = Self::DEFAULT_HALF_WIDTH.max((2.0 * mean_photon + 1.0).sqrt() + 4.0);
        Self::square(half, Self::DEFAULT_POINTS)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
        if self.nx < 2 || self.np < 2 || !ok(self.x_range) || !ok(self.p_range) {
            return Err(Error::invalid("grid needs at least 2 points and increasing finite ranges"));
        }
        Ok(())
    }

    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_range, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        Self::axis(self.p_range, self.np)
    }
}

/// Wigner function sampled on a grid; `values[(i, j)] = W(xs[i], ps[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    pub fn cell_area(&self) -> f64 {
        (self.xs[1] - self.xs[0]) * (self.ps[1] - self.ps[0])
    }

    /// Riemann sum of `W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Integral of the negative part, `int max(-W, 0) dx dp`.
    pub fn negative_volume(&self) -> f64 {
        self.values.iter().map(|w| (-w).max(0.0)).sum::<f64>() * self.cell_area()
    }

    /// Marginal over `p` at every `x`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = self.ps[1] - self.ps[0];
        (0..self.xs.len()).map(|i| self.values.row(i).sum() * dp).collect()
    }

    /// Marginal over `x` at every `p`.
    pub fn p_marginal(&self) -> Vec<f64> {
        let dx = self.xs[1] - self.xs[0];
        (0..self.ps.len()).map(|j| self.values.column(j).sum() * dx).collect()
    }

    /// Three columns `x p W`, one row per grid point, `x` varying slowest.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.xs.len() * self.ps.len() * 72);
        for (i, x) in self.xs.iter().enumerate() {
            for (j, p) in self.ps.iter().enumerate() {
                let _ = writeln!(out, "{x:.16e} {p:.16e} {:.16e}", self.values[(i, j)]);
            }
        }
        out
    }
}

/// Table of `<m|D(gamma)|n>` for `m, n <= cutoff` from the closed form in
/// associated Laguerre polynomials, evaluated with log-scaled prefactors.
pub fn displacement_elements(gamma: C64, cutoff: usize) -> DMatrix<C64> {
    let levels = cutoff + 1;
    let t = gamma.norm_sqr();
    let mut d = DMatrix::<C64>::zeros(levels, levels);
    if t == 0.0 {
        for n in 0..levels {
            d[(n, n)] = C64::new(1.0, 0.0);
        }
        return d;
    }
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..levels).scan(0.0, |acc, n| {
            *acc += (n as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_abs = 0.5 * t.ln();
    let arg = gamma.arg();
    for k in 0..levels {
        let kf = k as f64;
        // L_j^{(k)}(t) for j = 0..levels-k.
        let mut prev = 0.0;
        let mut cur = 1.0;
        for j in 0..levels - k {
            if j > 0 {
                let jf = (j - 1) as f64;
                let next = ((2.0 * jf + 1.0 + kf - t) * cur - (jf + kf) * prev) / (jf + 1.0);
                prev = cur;
                cur = next;
            }
            let (n, m) = (j, j + k);
            let ln_pref = 0.5 * (ln_fact[n] - ln_fact[m]) + kf * ln_abs - 0.5 * t;
            let mag = cur * ln_pref.exp();
            d[(m, n)] = C64::from_polar(mag, kf * arg);
            if k > 0 {
                // <n|D|m> = sqrt(n!/m!) (-gamma^*)^k e^{-t/2} L_n^{(k)}(t)
                d[(n, m)] = C64::from_polar(mag, kf * (PI - arg));
            }
        }
    }
    d
}

fn point_value(rho: &DMatrix<C64>, cutoff: usize, x: f64, p: f64) -> f64 {
    let gamma = C64::new(x, p) * 2f64.sqrt();
    let d = displacement_elements(gamma, cutoff);
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..=cutoff {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut col = C64::new(0.0, 0.0);
        for m in 0..=cutoff {
            col += rho[(n, m)] * d[(m, n)];
        }
        acc += col * sign;
    }
    acc.re / PI
}

/// `W(x, p) = (1/pi) Tr[rho D(2 beta) Pi]` with `beta = (x + i p)/sqrt 2`,
/// the displaced-parity form normalized so that `int W dx dp = 1`.
pub fn wigner_at(state: &QuantumState, mode: usize, x: f64, p: f64) -> Result<f64> {
    let rho = reduced(state, mode)?;
    Ok(point_value(rho.matrix(), rho.space().cutoff(), x, p))
}

/// Wigner function of `mode` (reduced if the state has several modes).
pub fn wigner(state: &QuantumState, mode: usize, grid: &GridSpec) -> Result<WignerGrid> {
    grid.validate()?;
    let rho = reduced(state, mode)?;
    let cutoff = rho.space().cutoff();
    let xs = grid.xs();
    let ps = grid.ps();
    let m = rho.matrix();
    let flat: Vec<f64> = (0..xs.len() * ps.len())
        .into_par_iter()
        .map(|k| point_value(m, cutoff, xs[k / ps.len()], ps[k % ps.len()]))
        .collect();
    let values = DMatrix::from_fn(xs.len(), ps.len(), |i, j| flat[i * ps.len() + j]);
    Ok(WignerGrid { xs, ps, values })
}

/// `int max(-W, 0) dx dp` on the default grid for the state.
pub fn wigner_negativity_volume(state: &QuantumState, mode: usize) -> Result<f64> {
    let rho = reduced(state, mode)?;
    let grid = GridSpec::default_for(mean_photon_of(&rho));
    Ok(wigner(&QuantumState::Mixed(rho), 0, &grid)?.negative_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{displacement, Ket, ModeSpace};

    #[test]
    fn elements_match_exponentiated_generator() {
        // Low-index elements of a truncated exponential converge quickly
        // with the truncation, so a large cutoff serves as reference.
        let gamma = C64::new(0.7, -0.4);
        let big = ModeSpace::single(60).unwrap();
        let dense = displacement(gamma, 0, &big).unwrap();
        let table = displacement_elements(gamma, 8);
        for m in 0..=8 {
            for n in 0..=8 {
                assert!((table[(m, n)] - dense.matrix()[(m, n)]).norm() < 1e-12, "({m},{n})");
            }
        }
    }

    #[test]
    fn vacuum_and_single_photon_anchors() {
        let s = ModeSpace::single(10).unwrap();
        let vac = QuantumState::Pure(Ket::vacuum(s));
        let one = QuantumState::Pure(Ket::fock(s, &[1]).unwrap());
        assert!((wigner_at(&vac, 0, 0.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!((wigner_at(&one, 0, 0.0, 0.0).unwrap() + 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn text_export_has_one_row_per_point() {
        let s = ModeSpace::single(3).unwrap();
        let g = wigner(&QuantumState::Pure(Ket::vacuum(s)), 0, &GridSpec::square(2.0, 5)).unwrap();
        let text = g.to_text();
        assert_eq!(text.lines().count(), 25);
        assert_eq!(text.lines().next().unwrap().split_whitespace().count(), 3);
    }

    #[test]
    fn negativity_volume_of_added_coherent_states_decreases() {
        let s = ModeSpace::single(30).unwrap();
        let vac = QuantumState::Pure(Ket::vacuum(s));
        assert!(wigner_negativity_volume(&vac, 0).unwrap() < 1e-12);
        let mut last = f64::INFINITY;
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let coherent = crate::states::coherent_amplitudes(C64::new(alpha, 0.0), 30);
            let added = Ket::from_fn(s, |n| if n == 0 { C64::new(0.0, 0.0) } else { coherent[n - 1] * (n as f64).sqrt() });
            let added = QuantumState::Pure(added.normalize().unwrap().0);
            let v = wigner_negativity_volume(&added, 0).unwrap();
            assert!(v > 0.0 && v < last, "alpha {alpha}: {v}");
            last = v;
        }
    }
}
