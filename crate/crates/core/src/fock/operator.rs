use nalgebra::{DMatrix, DVector};

use super::{Ket, ModeSpace, C64};
use crate::error::{Error, Result};

/// Dense complex operator on a [`ModeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: ModeSpace,
    matrix: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(space: ModeSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = space.dimension();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::mismatch(format!(
                "operator is {}x{}, space dimension is {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: ModeSpace) -> Self {
        let dim = space.dimension();
        Self { space, matrix: DMatrix::identity(dim, dim) }
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

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.adjoint() }
    }

    /// Operator product `self * rhs`.
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.space.ensure_same(&rhs.space)?;
        Ok(Self { space: self.space, matrix: &self.matrix * &rhs.matrix })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { space: self.space, matrix: self.matrix.map(|z| z * factor) }
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.space.ensure_same(&rhs.space)?;
        Ok(Self { space: self.space, matrix: &self.matrix + &rhs.matrix })
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        self.space.ensure_same(ket.space())?;
        Ket::new(self.space, &self.matrix * ket.amplitudes())
    }

    /// Largest entry of `U^dagger U - 1` restricted to basis states whose
    /// occupations all stay at least `margin` below the cutoff.
    pub fn unitarity_defect(&self, margin: usize) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let keep: Vec<usize> = (0..self.space.dimension())
            .filter(|&i| {
                self.space
                    .occupation(i)
                    .iter()
                    .all(|&n| n + margin <= self.space.cutoff())
            })
            .collect();
        let mut worst: f64 = 0.0;
        for &i in &keep {
            for &j in &keep {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        (&self.matrix - &other.matrix).iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// Which single-mode ladder operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
    Number,
}

pub(crate) fn ladder_matrix(kind: LadderKind, levels: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(levels, levels);
    for n in 0..levels {
        match kind {
            LadderKind::Annihilate if n > 0 => m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0),
            LadderKind::Create if n + 1 < levels => {
                m[(n + 1, n)] = C64::new(((n + 1) as f64).sqrt(), 0.0)
            }
            LadderKind::Number => m[(n, n)] = C64::new(n as f64, 0.0),
            _ => {}
        }
    }
    m
}

/// Single-mode creation, annihilation or number operator truncated at
/// `cutoff`. The creation operator maps `|cutoff>` to zero, so
/// `Number == Create * Annihilate` holds exactly.
pub fn ladder(kind: LadderKind, cutoff: usize) -> Result<OperatorMatrix> {
    let space = ModeSpace::single(cutoff)?;
    OperatorMatrix::new(space, ladder_matrix(kind, space.levels()))
}

/// Lift a single-mode operator onto `mode` of `space`.
pub fn embed(op: &OperatorMatrix, mode: usize, space: &ModeSpace) -> Result<OperatorMatrix> {
    if op.space().num_modes() != 1 {
        return Err(Error::invalid("embed expects a single-mode operator"));
    }
    if op.space().cutoff() != space.cutoff() {
        return Err(Error::mismatch(format!(
            "operator cutoff {} vs space cutoff {}",
            op.space().cutoff(),
            space.cutoff()
        )));
    }
    LocalOperator::dense(1, op.matrix().clone())?.embed(&[mode], space)
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    matrix: DMatrix<C64>,
}

#[derive(Debug, Clone)]
enum Repr {
    Dense(DMatrix<C64>),
    /// Block-diagonal after a permutation; blocks partition the local basis.
    Blocks(Vec<Block>),
}

/// Operator acting on `arity` modes, stored at the local dimension
/// `levels^arity` and applied to larger states without building the full
/// embedded matrix.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    levels: usize,
    arity: usize,
    repr: Repr,
}

impl LocalOperator {
    pub fn dense(arity: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let levels = local_levels(matrix.nrows(), arity)?;
        if matrix.ncols() != matrix.nrows() {
            return Err(Error::invalid("local operator must be square"));
        }
        Ok(Self { levels, arity, repr: Repr::Dense(matrix) })
    }

    pub(crate) fn from_blocks(
        levels: usize,
        arity: usize,
        blocks: Vec<(Vec<usize>, DMatrix<C64>)>,
    ) -> Self {
        let blocks = blocks
            .into_iter()
            .map(|(indices, matrix)| Block { indices, matrix })
            .collect();
        Self { levels, arity, repr: Repr::Blocks(blocks) }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn cutoff(&self) -> usize {
        self.levels - 1
    }

    pub fn local_dimension(&self) -> usize {
        self.levels.pow(self.arity as u32)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Blocks(blocks) => {
                let d = self.local_dimension();
                let mut out = DMatrix::zeros(d, d);
                for b in blocks {
                    for (r, &i) in b.indices.iter().enumerate() {
                        for (c, &j) in b.indices.iter().enumerate() {
                            out[(i, j)] = b.matrix[(r, c)];
                        }
                    }
                }
                out
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Blocks(blocks) => Repr::Blocks(
                blocks
                    .iter()
                    .map(|b| Block { indices: b.indices.clone(), matrix: b.matrix.adjoint() })
                    .collect(),
            ),
        };
        Self { levels: self.levels, arity: self.arity, repr }
    }

    /// Full-space matrix acting on `modes` (in the given order) and as the
    /// identity elsewhere.
    pub fn embed(&self, modes: &[usize], space: &ModeSpace) -> Result<OperatorMatrix> {
        let sel = ModeSelection::new(space, modes)?;
        self.check_selection(space, modes)?;
        let dim = space.dimension();
        let mut full = DMatrix::<C64>::identity(dim, dim);
        for col in full.as_mut_slice().chunks_mut(dim) {
            self.apply_slice(col, &sel);
        }
        OperatorMatrix::new(*space, full)
    }

    fn check_selection(&self, space: &ModeSpace, modes: &[usize]) -> Result<()> {
        if modes.len() != self.arity {
            return Err(Error::invalid(format!(
                "operator acts on {} modes, {} given",
                self.arity,
                modes.len()
            )));
        }
        if space.levels() != self.levels {
            return Err(Error::mismatch(format!(
                "operator cutoff {} vs space cutoff {}",
                self.levels - 1,
                space.cutoff()
            )));
        }
        Ok(())
    }

    pub(crate) fn apply_slice(&self, data: &mut [C64], sel: &ModeSelection) {
        match &self.repr {
            Repr::Dense(m) => {
                let d = sel.offsets.len();
                let mut local = DVector::<C64>::zeros(d);
                for &base in &sel.bases {
                    for (l, &off) in sel.offsets.iter().enumerate() {
                        local[l] = data[base + off];
                    }
                    let out = m * &local;
                    for (l, &off) in sel.offsets.iter().enumerate() {
                        data[base + off] = out[l];
                    }
                }
            }
            Repr::Blocks(blocks) => {
                for &base in &sel.bases {
                    for b in blocks {
                        if b.indices.len() == 1 {
                            let k = base + sel.offsets[b.indices[0]];
                            data[k] *= b.matrix[(0, 0)];
                            continue;
                        }
                        let local = DVector::<C64>::from_iterator(
                            b.indices.len(),
                            b.indices.iter().map(|&l| data[base + sel.offsets[l]]),
                        );
                        let out = &b.matrix * local;
                        for (r, &l) in b.indices.iter().enumerate() {
                            data[base + sel.offsets[l]] = out[r];
                        }
                    }
                }
            }
        }
    }

    /// Apply to `modes` of a ket.
    pub fn apply_ket(&self, ket: &Ket, modes: &[usize]) -> Result<Ket> {
        let space = *ket.space();
        self.check_selection(&space, modes)?;
        let sel = ModeSelection::new(&space, modes)?;
        let mut amps = ket.amplitudes().clone();
        self.apply_slice(amps.as_mut_slice(), &sel);
        Ket::new(space, amps)
    }

    /// Left-multiply every column of `matrix` (a full-space operator).
    pub(crate) fn apply_columns(
        &self,
        matrix: &mut DMatrix<C64>,
        space: &ModeSpace,
        modes: &[usize],
    ) -> Result<()> {
        self.check_selection(space, modes)?;
        let sel = ModeSelection::new(space, modes)?;
        let dim = space.dimension();
        let data = matrix.as_mut_slice();
        for col in data.chunks_mut(dim) {
            self.apply_slice(col, &sel);
        }
        Ok(())
    }
}

fn local_levels(dim: usize, arity: usize) -> Result<usize> {
    if arity == 0 {
        return Err(Error::invalid("local operator needs at least one mode"));
    }
    let levels = (dim as f64).powf(1.0 / arity as f64).round() as usize;
    if levels < 2 || levels.pow(arity as u32) != dim {
        return Err(Error::invalid(format!(
            "dimension {dim} is not a power {arity} of a level count"
        )));
    }
    Ok(levels)
}

/// Index bookkeeping for addressing a subset of modes inside a full space.
pub(crate) struct ModeSelection {
    /// Full indices whose occupations on the selected modes are all zero.
    pub bases: Vec<usize>,
    /// Offset of each local basis state relative to a base index.
    pub offsets: Vec<usize>,
}

impl ModeSelection {
    pub fn new(space: &ModeSpace, modes: &[usize]) -> Result<Self> {
        for (k, &m) in modes.iter().enumerate() {
            space.check_mode(m)?;
            if modes[..k].contains(&m) {
                return Err(Error::invalid(format!("mode {m} listed twice")));
            }
        }
        let levels = space.levels();
        let local_dim = levels.pow(modes.len() as u32);
        let offsets = (0..local_dim)
            .map(|l| {
                let mut rest = l;
                let mut off = 0;
                for &m in modes.iter().rev() {
                    off += (rest % levels) * space.stride(m);
                    rest /= levels;
                }
                off
            })
            .collect();
        let bases = (0..space.dimension())
            .filter(|&i| modes.iter().all(|&m| space.digit(i, m) == 0))
            .collect();
        Ok(Self { bases, offsets })
    }
}
