use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{LocalOperator, ModeSpace, OperatorMatrix, C64, HERMITIAN_TOL, POSITIVITY_FLOOR};
use crate::error::{Error, Result};

/// Pure state as a complex amplitude vector over a [`ModeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    space: ModeSpace,
    amps: DVector<C64>,
}

impl Ket {
    pub fn new(space: ModeSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.dimension() {
            return Err(Error::mismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dimension()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("ket has non-finite amplitudes"));
        }
        Ok(Self { space, amps })
    }

    pub fn from_fn(space: ModeSpace, f: impl Fn(usize) -> C64) -> Self {
        let amps = DVector::from_iterator(space.dimension(), (0..space.dimension()).map(f));
        Self { space, amps }
    }

    pub fn zero(space: ModeSpace) -> Self {
        Self { space, amps: DVector::zeros(space.dimension()) }
    }

    pub fn vacuum(space: ModeSpace) -> Self {
        let mut k = Self::zero(space);
        k.amps[0] = C64::new(1.0, 0.0);
        k
    }

    pub fn fock(space: ModeSpace, occupation: &[usize]) -> Result<Self> {
        let idx = space.index_of(occupation)?;
        let mut k = Self::zero(space);
        k.amps[idx] = C64::new(1.0, 0.0);
        Ok(k)
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Result<C64> {
        Ok(self.amps[self.space.index_of(occupation)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Returns the normalized ket together with the original norm.
    pub fn normalize(&self) -> Result<(Ket, f64)> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::impossible("cannot normalize a zero vector"));
        }
        let amps = self.amps.map(|z| z / norm);
        Ok((Ket { space: self.space, amps }, norm))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= HERMITIAN_TOL
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        self.space.ensure_same(&other.space)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scale(&self, factor: C64) -> Ket {
        Ket { space: self.space, amps: self.amps.map(|z| z * factor) }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        self.space.ensure_same(&other.space)?;
        Ok(Ket { space: self.space, amps: &self.amps + &other.amps })
    }

    /// Euclidean distance between amplitude vectors (no phase alignment).
    pub fn distance(&self, other: &Ket) -> f64 {
        (&self.amps - &other.amps).norm()
    }

    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        (&self.amps - &other.amps).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        if self.space.cutoff() != other.space.cutoff() {
            return Err(Error::mismatch("tensor factors need a common cutoff"));
        }
        let space = ModeSpace::new(
            self.space.num_modes() + other.space.num_modes(),
            self.space.cutoff(),
        )?;
        let d2 = other.amps.len();
        let amps = DVector::from_iterator(
            space.dimension(),
            (0..space.dimension()).map(|i| self.amps[i / d2] * other.amps[i % d2]),
        );
        Ok(Ket { space, amps })
    }

    /// Tensor product of a list of kets, first entry on mode 0.
    pub fn tensor_all(kets: &[Ket]) -> Result<Ket> {
        let (first, rest) = kets
            .split_first()
            .ok_or_else(|| Error::invalid("tensor of an empty list"))?;
        rest.iter().try_fold(first.clone(), |acc, k| acc.tensor(k))
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            space: self.space,
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    pub fn apply_local(&self, op: &LocalOperator, modes: &[usize]) -> Result<Ket> {
        op.apply_ket(self, modes)
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        self.space.ensure_same(op.space())?;
        Ok(self.amps.dotc(&(op.matrix() * &self.amps)))
    }

    /// Population carried by the top `levels` Fock levels of `mode`.
    pub fn edge_population(&self, mode: usize, levels: usize) -> f64 {
        let cut = self.space.cutoff();
        (0..self.space.dimension())
            .filter(|&i| self.space.digit(i, mode) + levels > cut)
            .map(|i| self.amps[i].norm_sqr())
            .sum()
    }

    /// Embed this ket into a larger space with extra vacuum modes appended.
    pub fn append_vacuum(&self, extra: usize) -> Result<Ket> {
        let space = self.space.with_modes(self.space.num_modes() + extra)?;
        let factor = space.levels().pow(extra as u32);
        let mut amps = DVector::zeros(space.dimension());
        for (i, z) in self.amps.iter().enumerate() {
            amps[i * factor] = *z;
        }
        Ok(Ket { space, amps })
    }
}

/// Mixed state as a Hermitian density matrix over a [`ModeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: ModeSpace,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Checks shape, finiteness and Hermiticity; trace is not constrained so
    /// unnormalized conditioned branches can be represented.
    pub fn new(space: ModeSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = space.dimension();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::mismatch(format!(
                "density matrix is {}x{}, space dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("density matrix has non-finite entries"));
        }
        let scale = matrix.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::invalid(format!("density matrix not Hermitian (defect {defect:e})")));
        }
        Ok(Self { space, matrix })
    }

    /// Builds without the Hermiticity check and symmetrizes rounding noise.
    pub(crate) fn from_hermitian_unchecked(space: ModeSpace, matrix: DMatrix<C64>) -> Self {
        let sym = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Self { space, matrix: sym }
    }

    /// Diagonal state with the given Fock-basis probabilities.
    pub fn diagonal(space: ModeSpace, probabilities: &[f64]) -> Result<Self> {
        if probabilities.len() != space.dimension() {
            return Err(Error::mismatch("diagonal length does not match dimension"));
        }
        let diag = DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| C64::new(p, 0.0)),
        );
        Self::new(space, DMatrix::from_diagonal(&diag))
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= HERMITIAN_TOL
    }

    pub fn normalize(&self) -> Result<(DensityOperator, f64)> {
        let tr = self.trace();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::impossible("density operator has zero trace"));
        }
        Ok((
            DensityOperator { space: self.space, matrix: self.matrix.map(|z| z / tr) },
            tr,
        ))
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        self.space.ensure_same(op.space())?;
        let m = op.matrix();
        let dim = self.space.dimension();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += self.matrix[(i, j)] * m[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Eigenvalues in ascending order together with eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        hermitian_eigen(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().0.first().copied().unwrap_or(0.0)
    }

    /// Checks the positivity floor.
    pub fn check_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < POSITIVITY_FLOOR {
            return Err(Error::invalid(format!("density operator has eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        (&self.matrix - &other.matrix).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        if self.space.cutoff() != other.space.cutoff() {
            return Err(Error::mismatch("tensor factors need a common cutoff"));
        }
        let space = ModeSpace::new(
            self.space.num_modes() + other.space.num_modes(),
            self.space.cutoff(),
        )?;
        Ok(DensityOperator { space, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// `A rho A^dagger` with `A` acting on `modes`.
    pub fn conjugate_local(&self, op: &LocalOperator, modes: &[usize]) -> Result<DensityOperator> {
        let mut m = self.matrix.clone();
        op.apply_columns(&mut m, &self.space, modes)?;
        let mut m = m.adjoint();
        op.apply_columns(&mut m, &self.space, modes)?;
        Ok(DensityOperator::from_hermitian_unchecked(self.space, m.adjoint()))
    }

    /// `O rho O^dagger` for an arbitrary linear map `O` given on kets.
    pub fn conjugate_with(
        &self,
        map: impl Fn(&Ket) -> Result<Ket>,
    ) -> Result<DensityOperator> {
        let dim = self.space.dimension();
        let apply_cols = |m: &DMatrix<C64>| -> Result<DMatrix<C64>> {
            let mut out = DMatrix::zeros(dim, dim);
            for j in 0..dim {
                let col = Ket::new(self.space, m.column(j).into_owned())?;
                out.set_column(j, map(&col)?.amplitudes());
            }
            Ok(out)
        };
        let half = apply_cols(&self.matrix)?;
        let full = apply_cols(&half.adjoint())?;
        Ok(DensityOperator::from_hermitian_unchecked(self.space, full.adjoint()))
    }

    /// Spectral decomposition into weighted pure states, dropping weights
    /// at or below `floor`.
    pub fn ensemble(&self, floor: f64) -> Vec<(f64, Ket)> {
        let (vals, vecs) = self.eigen();
        vals.iter()
            .enumerate()
            .filter(|(_, &p)| p > floor)
            .map(|(k, &p)| {
                let ket = Ket { space: self.space, amps: vecs.column(k).into_owned() };
                (p, ket)
            })
            .collect()
    }

    pub fn edge_population(&self, mode: usize, levels: usize) -> f64 {
        let cut = self.space.cutoff();
        (0..self.space.dimension())
            .filter(|&i| self.space.digit(i, mode) + levels > cut)
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), order.len(), |i, c| eig.eigenvectors[(i, order[c])]);
    (vals, vecs)
}

/// A state that is either pure or mixed.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(Ket),
    Mixed(DensityOperator),
}

impl QuantumState {
    pub fn space(&self) -> &ModeSpace {
        match self {
            QuantumState::Pure(k) => k.space(),
            QuantumState::Mixed(r) => r.space(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            QuantumState::Pure(k) => k.to_density(),
            QuantumState::Mixed(r) => r.clone(),
        }
    }

    pub fn as_ket(&self) -> Option<&Ket> {
        match self {
            QuantumState::Pure(k) => Some(k),
            QuantumState::Mixed(_) => None,
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            QuantumState::Pure(k) => k.norm_sqr(),
            QuantumState::Mixed(r) => r.trace(),
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure(k) => k.norm_sqr().powi(2),
            QuantumState::Mixed(r) => r.purity(),
        }
    }

    /// Weighted pure components (a single entry for pure states).
    pub fn ensemble(&self) -> Vec<(f64, Ket)> {
        match self {
            QuantumState::Pure(k) => vec![(1.0, k.clone())],
            QuantumState::Mixed(r) => r.ensemble(1e-15 * r.trace().abs().max(1e-300)),
        }
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        match self {
            QuantumState::Pure(k) => k.expectation(op),
            QuantumState::Mixed(r) => r.expectation(op),
        }
    }

    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        match (self, other) {
            (QuantumState::Pure(a), QuantumState::Pure(b)) => Ok(QuantumState::Pure(a.tensor(b)?)),
            _ => Ok(QuantumState::Mixed(self.to_density().tensor(&other.to_density())?)),
        }
    }

    pub fn apply_local(&self, op: &LocalOperator, modes: &[usize]) -> Result<QuantumState> {
        match self {
            QuantumState::Pure(k) => Ok(QuantumState::Pure(k.apply_local(op, modes)?)),
            QuantumState::Mixed(r) => Ok(QuantumState::Mixed(r.conjugate_local(op, modes)?)),
        }
    }

    pub fn edge_population(&self, mode: usize, levels: usize) -> f64 {
        match self {
            QuantumState::Pure(k) => k.edge_population(mode, levels),
            QuantumState::Mixed(r) => r.edge_population(mode, levels),
        }
    }

    /// Logs a warning when the top two levels of any mode carry more than
    /// [`super::EDGE_POPULATION_WARN`] population.
    pub fn warn_if_truncated(&self, context: &str) {
        for mode in 0..self.space().num_modes() {
            let edge = self.edge_population(mode, 2);
            if edge > super::EDGE_POPULATION_WARN * self.trace().max(1e-300) {
                log::warn!(
                    "{context}: mode {mode} has {edge:.3e} population in its top two levels; raise the cutoff"
                );
            }
        }
    }
}

impl From<Ket> for QuantumState {
    fn from(k: Ket) -> Self {
        QuantumState::Pure(k)
    }
}

impl From<DensityOperator> for QuantumState {
    fn from(r: DensityOperator) -> Self {
        QuantumState::Mixed(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_of_vacua_is_joint_vacuum() {
        let s = ModeSpace::single(3).unwrap();
        let t = Ket::tensor_all(&[Ket::vacuum(s), Ket::vacuum(s)]).unwrap();
        assert_eq!(t.amplitude(&[0, 0]).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(t.space().num_modes(), 2);
    }

    #[test]
    fn tensor_ordering_puts_first_factor_slowest() {
        let s = ModeSpace::single(2).unwrap();
        let t = Ket::fock(s, &[1]).unwrap().tensor(&Ket::fock(s, &[2]).unwrap()).unwrap();
        assert_eq!(t.amplitude(&[1, 2]).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(t.amplitudes()[5], C64::new(1.0, 0.0));
    }

    #[test]
    fn normalize_reports_norm() {
        let s = ModeSpace::single(2).unwrap();
        let k = Ket::fock(s, &[1]).unwrap().scale(C64::new(0.0, 3.0));
        let (n, norm) = k.normalize().unwrap();
        assert!((norm - 3.0).abs() < 1e-15);
        assert!(n.is_normalized());
        assert!(Ket::zero(s).normalize().is_err());
    }

    #[test]
    fn density_rejects_non_hermitian() {
        let s = ModeSpace::single(1).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[
            C64::new(0.5, 0.0), C64::new(0.1, 0.0),
            C64::new(0.2, 0.0), C64::new(0.5, 0.0),
        ]);
        assert!(DensityOperator::new(s, m).is_err());
    }

    #[test]
    fn ensemble_reconstructs_mixture() {
        let s = ModeSpace::single(3).unwrap();
        let rho = DensityOperator::diagonal(s, &[0.5, 0.3, 0.2, 0.0]).unwrap();
        let ens = rho.ensemble(1e-14);
        assert_eq!(ens.len(), 3);
        let mut back = DMatrix::<C64>::zeros(4, 4);
        for (p, k) in &ens {
            back += k.amplitudes() * k.amplitudes().adjoint() * C64::new(*p, 0.0);
        }
        assert!((back - rho.matrix()).norm() < 1e-12);
    }
}
