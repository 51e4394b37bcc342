//! Unitaries generated by the beam-splitter, two-mode squeezing,
//! single-mode squeezing and displacement Hamiltonians.
//!
//! Each exponential is computed from the eigendecomposition of the Hermitian
//! matrix `i * G` of the anti-Hermitian generator `G`. The generators
//! conserve simple photon-number combinations, so the local basis is first
//! split into the connected components of `G` and every block is
//! diagonalized on its own.

use nalgebra::DMatrix;

use super::operator::ladder_matrix;
use super::state::{hermitian_eigen, hermiticity_defect};
use super::{LadderKind, LocalOperator, ModeSpace, OperatorMatrix, C64};
use crate::error::{Error, Result};

/// `exp(G)` for an anti-Hermitian local generator acting on `arity` modes.
pub fn exp_anti_hermitian(generator: &DMatrix<C64>, arity: usize) -> Result<LocalOperator> {
    let dim = generator.nrows();
    if generator.ncols() != dim {
        return Err(Error::invalid("generator must be square"));
    }
    let levels = (dim as f64).powf(1.0 / arity as f64).round() as usize;
    if levels.pow(arity as u32) != dim {
        return Err(Error::invalid("generator dimension is not levels^arity"));
    }
    let hermitian = generator.map(|z| z * C64::new(0.0, 1.0));
    let scale = generator.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    if hermiticity_defect(&hermitian) > 1e-12 * scale {
        return Err(Error::invalid("generator is not anti-Hermitian"));
    }
    Ok(exp_sparse(levels, arity, &sparse(generator)))
}

type Entries = Vec<(usize, usize, C64)>;

fn sparse(m: &DMatrix<C64>) -> Entries {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let z = m[(r, c)];
            if z != C64::new(0.0, 0.0) {
                out.push((r, c, z));
            }
        }
    }
    out
}

/// Entries of `sum_k c_k (A_k kron B_k)` for sparse single-mode factors.
fn sparse_kron_sum(levels: usize, terms: &[(C64, &Entries, &Entries)]) -> Entries {
    let mut out = Vec::new();
    for (c, a, b) in terms {
        for &(ra, ca, za) in a.iter() {
            for &(rb, cb, zb) in b.iter() {
                out.push((ra * levels + rb, ca * levels + cb, *c * za * zb));
            }
        }
    }
    out
}

/// `exp(G)` from the nonzero entries of an anti-Hermitian generator on a
/// `levels^arity` local space. Duplicate entries are summed.
fn exp_sparse(levels: usize, arity: usize, entries: &[(usize, usize, C64)]) -> LocalOperator {
    let dim = levels.pow(arity as u32);
    let blocks = connected_components(dim, entries);
    let mut position = vec![(0usize, 0usize); dim];
    for (b, indices) in blocks.iter().enumerate() {
        for (k, &i) in indices.iter().enumerate() {
            position[i] = (b, k);
        }
    }
    let mut subs: Vec<DMatrix<C64>> = blocks.iter().map(|ix| DMatrix::zeros(ix.len(), ix.len())).collect();
    for &(r, c, z) in entries {
        let (b, kr) = position[r];
        let (_, kc) = position[c];
        subs[b][(kr, kc)] += z * C64::new(0.0, 1.0);
    }
    let blocks = blocks
        .into_iter()
        .zip(subs)
        .map(|(indices, sub)| {
            let exp = if indices.len() == 1 {
                DMatrix::from_element(1, 1, (-C64::new(0.0, 1.0) * sub[(0, 0)]).exp())
            } else {
                let (vals, vecs) = hermitian_eigen(&sub);
                let phases = DMatrix::from_fn(vals.len(), vals.len(), |r, c| {
                    if r == c {
                        C64::new(0.0, -vals[r]).exp()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                &vecs * phases * vecs.adjoint()
            };
            (indices, exp)
        })
        .collect();
    LocalOperator::from_blocks(levels, arity, blocks)
}

fn connected_components(n: usize, entries: &[(usize, usize, C64)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j, _) in entries {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn ladders(cutoff: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be at least 1"));
    }
    let levels = cutoff + 1;
    Ok((
        ladder_matrix(LadderKind::Annihilate, levels),
        ladder_matrix(LadderKind::Create, levels),
    ))
}

/// `exp[tau (a b^dagger - a^dagger b)]` on a mode pair `(a, b)`; amplitude
/// transmittivity `cos tau`, reflectivity `sin tau`.
pub fn beam_splitter_local(tau: f64, cutoff: usize) -> Result<LocalOperator> {
    let (a, ad) = ladders(cutoff)?;
    let (a, ad) = (sparse(&a), sparse(&ad));
    let t = C64::new(tau, 0.0);
    Ok(exp_sparse(cutoff + 1, 2, &sparse_kron_sum(cutoff + 1, &[(t, &a, &ad), (-t, &ad, &a)])))
}

/// `exp[zeta (a^dagger b^dagger - a b)]`.
pub fn two_mode_squeeze_local(zeta: f64, cutoff: usize) -> Result<LocalOperator> {
    let (a, ad) = ladders(cutoff)?;
    let (a, ad) = (sparse(&a), sparse(&ad));
    let z = C64::new(zeta, 0.0);
    Ok(exp_sparse(cutoff + 1, 2, &sparse_kron_sum(cutoff + 1, &[(z, &ad, &ad), (-z, &a, &a)])))
}

/// `exp[zeta (a^dagger^2 - a^2)]`, without the conventional factor 1/2.
pub fn single_mode_squeeze_local(zeta: f64, cutoff: usize) -> Result<LocalOperator> {
    let (a, ad) = ladders(cutoff)?;
    let g = (&ad * &ad - &a * &a) * C64::new(zeta, 0.0);
    exp_anti_hermitian(&g, 1)
}

/// `exp(alpha a^dagger - alpha^* a)`.
pub fn displacement_local(alpha: C64, cutoff: usize) -> Result<LocalOperator> {
    let (a, ad) = ladders(cutoff)?;
    let g = ad * alpha - a * alpha.conj();
    exp_anti_hermitian(&g, 1)
}

/// Diagonal `exp(i theta n)`.
pub fn phase_rotation_local(theta: f64, cutoff: usize) -> Result<LocalOperator> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be at least 1"));
    }
    let blocks = (0..=cutoff)
        .map(|n| {
            (vec![n], DMatrix::from_element(1, 1, C64::new(0.0, theta * n as f64).exp()))
        })
        .collect();
    Ok(LocalOperator::from_blocks(cutoff + 1, 1, blocks))
}

fn check_pair(space: &ModeSpace, modes: (usize, usize)) -> Result<()> {
    space.check_mode(modes.0)?;
    space.check_mode(modes.1)?;
    if modes.0 == modes.1 {
        return Err(Error::invalid("two-mode operation needs distinct modes"));
    }
    Ok(())
}

/// Full-space beam splitter with `modes.0` playing the role of `a`.
pub fn beam_splitter(tau: f64, modes: (usize, usize), space: &ModeSpace) -> Result<OperatorMatrix> {
    check_pair(space, modes)?;
    beam_splitter_local(tau, space.cutoff())?.embed(&[modes.0, modes.1], space)
}

pub fn two_mode_squeeze(zeta: f64, modes: (usize, usize), space: &ModeSpace) -> Result<OperatorMatrix> {
    check_pair(space, modes)?;
    two_mode_squeeze_local(zeta, space.cutoff())?.embed(&[modes.0, modes.1], space)
}

pub fn single_mode_squeeze(zeta: f64, mode: usize, space: &ModeSpace) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    single_mode_squeeze_local(zeta, space.cutoff())?.embed(&[mode], space)
}

pub fn displacement(alpha: C64, mode: usize, space: &ModeSpace) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    displacement_local(alpha, space.cutoff())?.embed(&[mode], space)
}

pub fn phase_rotation(theta: f64, mode: usize, space: &ModeSpace) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    phase_rotation_local(theta, space.cutoff())?.embed(&[mode], space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Ket;

    #[test]
    fn zero_parameters_give_identity() {
        let space = ModeSpace::new(2, 4).unwrap();
        let id = OperatorMatrix::identity(space);
        assert!(beam_splitter(0.0, (0, 1), &space).unwrap().max_abs_diff(&id) < 1e-14);
        assert!(two_mode_squeeze(0.0, (0, 1), &space).unwrap().max_abs_diff(&id) < 1e-14);
        assert!(single_mode_squeeze(0.0, 1, &space).unwrap().max_abs_diff(&id) < 1e-14);
        assert!(displacement(C64::new(0.0, 0.0), 0, &space).unwrap().max_abs_diff(&id) < 1e-14);
        assert!(phase_rotation(0.0, 0, &space).unwrap().max_abs_diff(&id) < 1e-14);
    }

    #[test]
    fn invalid_mode_pairs_rejected() {
        let space = ModeSpace::new(2, 3).unwrap();
        assert!(beam_splitter(0.1, (0, 0), &space).is_err());
        assert!(beam_splitter(0.1, (0, 2), &space).is_err());
        assert!(displacement(C64::new(1.0, 0.0), 3, &space).is_err());
    }

    #[test]
    fn phase_rotation_flips_single_photon() {
        let space = ModeSpace::single(3).unwrap();
        let out = phase_rotation(std::f64::consts::PI, 0, &space)
            .unwrap()
            .apply(&Ket::fock(space, &[1]).unwrap())
            .unwrap();
        assert!((out.amplitude(&[1]).unwrap() + C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn beam_splitter_blocks_follow_total_photon_number() {
        let g = {
            let (a, ad) = ladders(3).unwrap();
            a.kronecker(&ad) - ad.kronecker(&a)
        };
        let comps = connected_components(16, &sparse(&g));
        // 16 states with totals 0..=6; states with a single neighbour still
        // form one component per total photon number.
        assert_eq!(comps.len(), 7);
    }

    #[test]
    fn sparse_two_mode_generators_match_dense_exponential() {
        let (a, ad) = ladders(4).unwrap();
        let t = C64::new(0.37, 0.0);
        let bs = exp_anti_hermitian(&((a.kronecker(&ad) - ad.kronecker(&a)) * t), 2).unwrap();
        let tms = exp_anti_hermitian(&((ad.kronecker(&ad) - a.kronecker(&a)) * t), 2).unwrap();
        let diff = |x: &LocalOperator, y: &LocalOperator| (x.to_dense() - y.to_dense()).camax();
        assert!(diff(&bs, &beam_splitter_local(0.37, 4).unwrap()) < 1e-14);
        assert!(diff(&tms, &two_mode_squeeze_local(0.37, 4).unwrap()) < 1e-14);
    }

    #[test]
    fn non_anti_hermitian_generator_rejected() {
        let g = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(exp_anti_hermitian(&g, 1).is_err());
    }
}
