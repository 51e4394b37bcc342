use nalgebra::DMatrix;

use super::state::hermitian_eigen;
use super::{DensityOperator, Ket, LocalOperator, ModeSpace, QuantumState, C64};
use crate::error::{Error, Result};

/// Splits every basis index into (kept-modes index, traced-modes index).
pub(crate) fn split_indices(space: &ModeSpace, keep: &[usize]) -> Result<(Vec<(usize, usize)>, usize, usize)> {
    for w in keep.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::invalid("kept modes must be strictly increasing"));
        }
    }
    for &m in keep {
        space.check_mode(m)?;
    }
    let levels = space.levels();
    let traced: Vec<usize> = (0..space.num_modes()).filter(|m| !keep.contains(m)).collect();
    let map = (0..space.dimension())
        .map(|i| {
            let k = keep.iter().fold(0, |acc, &m| acc * levels + space.digit(i, m));
            let t = traced.iter().fold(0, |acc, &m| acc * levels + space.digit(i, m));
            (k, t)
        })
        .collect();
    Ok((
        map,
        levels.pow(keep.len() as u32),
        levels.pow(traced.len() as u32),
    ))
}

/// Reduced state on `keep` (strictly increasing mode list).
pub fn partial_trace(state: &QuantumState, keep: &[usize]) -> Result<DensityOperator> {
    let space = *state.space();
    if keep.is_empty() {
        return Err(Error::invalid("partial trace must keep at least one mode"));
    }
    let (map, dk, dt) = split_indices(&space, keep)?;
    let reduced = space.with_modes(keep.len())?;
    let matrix = match state {
        QuantumState::Pure(ket) => {
            let mut psi = DMatrix::<C64>::zeros(dk, dt);
            for (i, &(k, t)) in map.iter().enumerate() {
                psi[(k, t)] = ket.amplitudes()[i];
            }
            &psi * psi.adjoint()
        }
        QuantumState::Mixed(rho) => {
            // Group full indices by traced index, ordered by kept index.
            let mut table = vec![vec![0usize; dk]; dt];
            for (i, &(k, t)) in map.iter().enumerate() {
                table[t][k] = i;
            }
            let m = rho.matrix();
            let mut out = DMatrix::<C64>::zeros(dk, dk);
            for row in &table {
                for a in 0..dk {
                    for b in 0..dk {
                        out[(a, b)] += m[(row[a], row[b])];
                    }
                }
            }
            out
        }
    };
    Ok(DensityOperator::from_hermitian_unchecked(reduced, matrix))
}

/// Applies a positive operator `element` (local to `mode`) and traces the
/// mode out. The result is the unnormalized conditioned state of the other
/// modes; its trace is the outcome probability.
pub fn measure_mode(state: &QuantumState, mode: usize, element: &DMatrix<C64>) -> Result<DensityOperator> {
    let space = *state.space();
    space.check_mode(mode)?;
    let levels = space.levels();
    if element.nrows() != levels || element.ncols() != levels {
        return Err(Error::mismatch("measurement element does not match the mode cutoff"));
    }
    if space.num_modes() < 2 {
        return Err(Error::invalid("measuring the only mode leaves no state behind"));
    }
    let keep: Vec<usize> = (0..space.num_modes()).filter(|&m| m != mode).collect();
    let (map, dk, _) = split_indices(&space, &keep)?;
    let reduced = space.without_mode(mode)?;
    let matrix = match state {
        QuantumState::Pure(ket) => {
            let mut psi = DMatrix::<C64>::zeros(dk, levels);
            for (i, &(k, t)) in map.iter().enumerate() {
                psi[(k, t)] = ket.amplitudes()[i];
            }
            &psi * element.transpose() * psi.adjoint()
        }
        QuantumState::Mixed(rho) => {
            let mut table = vec![vec![0usize; dk]; levels];
            for (i, &(k, t)) in map.iter().enumerate() {
                table[t][k] = i;
            }
            let m = rho.matrix();
            let mut out = DMatrix::<C64>::zeros(dk, dk);
            for s in 0..levels {
                for t in 0..levels {
                    let e = element[(t, s)];
                    if e == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..dk {
                        let row = table[s][a];
                        for b in 0..dk {
                            out[(a, b)] += e * m[(row, table[t][b])];
                        }
                    }
                }
            }
            out
        }
    };
    Ok(DensityOperator::from_hermitian_unchecked(reduced, matrix))
}

/// Projects `mode` onto `|n>` and removes it. Returns the normalized
/// conditioned ket and the branch probability.
pub fn project_fock(ket: &Ket, mode: usize, n: usize) -> Result<(Ket, f64)> {
    let space = *ket.space();
    space.check_mode(mode)?;
    if n > space.cutoff() {
        return Err(Error::InsufficientCutoff(format!(
            "cannot project onto |{n}> with cutoff {}",
            space.cutoff()
        )));
    }
    let reduced = space.without_mode(mode)?;
    let amps: Vec<C64> = (0..space.dimension())
        .filter(|&i| space.digit(i, mode) == n)
        .map(|i| ket.amplitudes()[i])
        .collect();
    let branch = Ket::new(reduced, nalgebra::DVector::from_vec(amps))?;
    let p = branch.norm_sqr();
    let (normed, _) = branch
        .normalize()
        .map_err(|_| Error::impossible(format!("projection of mode {mode} onto |{n}> has zero probability")))?;
    Ok((normed, p))
}

/// Pure-loss channel of intensity transmission `eta` on `mode`.
pub fn pure_loss(rho: &DensityOperator, mode: usize, eta: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("transmission {eta} outside [0, 1]")));
    }
    let space = *rho.space();
    space.check_mode(mode)?;
    let levels = space.levels();
    let mut out = DMatrix::<C64>::zeros(space.dimension(), space.dimension());
    for k in 0..levels {
        let mut kraus = DMatrix::<C64>::zeros(levels, levels);
        for n in k..levels {
            let amp = binomial(n, k).sqrt()
                * eta.powf((n - k) as f64 / 2.0)
                * (1.0 - eta).powf(k as f64 / 2.0);
            kraus[(n - k, n)] = C64::new(amp, 0.0);
        }
        if kraus.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        let op = LocalOperator::dense(1, kraus)?;
        out += rho.conjugate_local(&op, &[mode])?.into_matrix();
    }
    Ok(DensityOperator::from_hermitian_unchecked(space, out))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn sqrt_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = hermitian_eigen(m);
    let d = DMatrix::from_fn(vals.len(), vals.len(), |r, c| {
        if r == c {
            C64::new(vals[r].max(0.0).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &vecs * d * vecs.adjoint()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, which equals
/// `|<a|b>|^2` for pure states. Insensitive to global phase.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.space().ensure_same(b.space())?;
    let f = match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => {
            x.inner(y)?.norm_sqr() / (x.norm_sqr() * y.norm_sqr())
        }
        (QuantumState::Pure(x), QuantumState::Mixed(r)) | (QuantumState::Mixed(r), QuantumState::Pure(x)) => {
            let v = x.amplitudes();
            v.dotc(&(r.matrix() * v)).re / (x.norm_sqr() * r.trace())
        }
        (QuantumState::Mixed(r), QuantumState::Mixed(s)) => {
            let sr = sqrt_psd(r.matrix());
            let inner = &sr * s.matrix() * &sr;
            let (vals, _) = hermitian_eigen(&inner);
            let t: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
            t * t / (r.trace() * s.trace())
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Half the trace norm of the difference of the two density operators.
pub fn trace_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.space().ensure_same(b.space())?;
    let diff = a.to_density().into_matrix() - b.to_density().into_matrix();
    let (vals, _) = hermitian_eigen(&diff);
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_basics() {
        let s = ModeSpace::single(3).unwrap();
        let z = QuantumState::Pure(Ket::fock(s, &[0]).unwrap());
        let o = QuantumState::Pure(Ket::fock(s, &[1]).unwrap());
        assert_eq!(fidelity(&z, &o).unwrap(), 0.0);
        let phased = QuantumState::Pure(Ket::fock(s, &[1]).unwrap().scale(C64::new(0.0, 1.0)));
        assert!((fidelity(&o, &phased).unwrap() - 1.0).abs() < 1e-15);
        let mixed = QuantumState::Mixed(DensityOperator::diagonal(s, &[0.5, 0.5, 0.0, 0.0]).unwrap());
        assert!((fidelity(&mixed, &o).unwrap() - 0.5).abs() < 1e-14);
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_examples() {
        let s = ModeSpace::single(2).unwrap();
        let one = Ket::fock(s, &[1]).unwrap().to_density();
        let same = pure_loss(&one, 0, 1.0).unwrap();
        assert!(same.max_abs_diff(&one) < 1e-15);
        let gone = pure_loss(&one, 0, 0.0).unwrap();
        assert!(gone.max_abs_diff(&Ket::vacuum(s).to_density()) < 1e-15);
        let half = pure_loss(&one, 0, 0.5).unwrap();
        let expect = DensityOperator::diagonal(s, &[0.5, 0.5, 0.0]).unwrap();
        assert!(half.max_abs_diff(&expect) < 1e-15);
        assert!(pure_loss(&one, 0, 1.5).is_err());
    }

    #[test]
    fn project_rejects_above_cutoff() {
        let s = ModeSpace::new(2, 2).unwrap();
        let k = Ket::vacuum(s);
        assert!(project_fock(&k, 1, 3).is_err());
        assert!(project_fock(&k, 1, 1).unwrap_err().to_string().contains("herald impossible"));
    }

    #[test]
    fn diagonal_measurement_matches_projection() {
        let s = ModeSpace::new(2, 3).unwrap();
        let k = Ket::from_fn(s, |i| C64::new(1.0 + i as f64, 0.5)).normalize().unwrap().0;
        let mut e = DMatrix::<C64>::zeros(4, 4);
        e[(2, 2)] = C64::new(1.0, 0.0);
        let pure = measure_mode(&QuantumState::Pure(k.clone()), 0, &e).unwrap();
        let mixed = measure_mode(&QuantumState::Mixed(k.to_density()), 0, &e).unwrap();
        let (proj, p) = project_fock(&k, 0, 2).unwrap();
        assert!((pure.trace() - p).abs() < 1e-14);
        assert!(pure.max_abs_diff(&mixed) < 1e-14);
        let normed = pure.normalize().unwrap().0;
        assert!(normed.max_abs_diff(&proj.to_density()) < 1e-14);
    }
}
