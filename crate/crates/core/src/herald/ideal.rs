use nalgebra::{DVector, Matrix2, Vector2};

use super::{HeraldOutcome, Likelihood};
use crate::error::{Error, Result};
use crate::fock::{Ket, QuantumState, C64};

/// Norm below which an ideal operation is treated as annihilating its input.
pub const ZERO_NORM: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Add,
    Subtract,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub mode: usize,
    pub kind: TermKind,
}

/// Linear combination `sum_k c_k O_k` of single-mode creation, annihilation
/// and identity operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSuperposition {
    terms: Vec<Term>,
}

impl OperatorSuperposition {
    /// Needs at least one add/subtract term, or exactly one identity term.
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("operator superposition has no terms"));
        }
        let ladder_terms = terms.iter().filter(|t| t.kind != TermKind::Identity).count();
        if ladder_terms == 0 && terms.len() != 1 {
            return Err(Error::invalid("identity-only superpositions must have a single term"));
        }
        if terms.iter().any(|t| !t.coeff.re.is_finite() || !t.coeff.im.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(Self { terms })
    }

    fn single(mode: usize, kind: TermKind) -> Self {
        Self { terms: vec![Term { coeff: C64::new(1.0, 0.0), mode, kind }] }
    }

    pub fn add(mode: usize) -> Self {
        Self::single(mode, TermKind::Add)
    }

    pub fn subtract(mode: usize) -> Self {
        Self::single(mode, TermKind::Subtract)
    }

    /// `a^dagger + gamma`.
    pub fn displaced_add(mode: usize, gamma: C64) -> Self {
        Self {
            terms: vec![
                Term { coeff: C64::new(1.0, 0.0), mode, kind: TermKind::Add },
                Term { coeff: gamma, mode, kind: TermKind::Identity },
            ],
        }
    }

    /// `a + gamma`.
    pub fn displaced_subtract(mode: usize, gamma: C64) -> Self {
        Self {
            terms: vec![
                Term { coeff: C64::new(1.0, 0.0), mode, kind: TermKind::Subtract },
                Term { coeff: gamma, mode, kind: TermKind::Identity },
            ],
        }
    }

    /// `c1 a1^dagger + c2 e^{i phi} a2^dagger`.
    pub fn delocalized_add(modes: (usize, usize), c1: C64, c2: C64, phi: f64) -> Self {
        Self::delocalized(modes, c1, c2, phi, TermKind::Add)
    }

    /// `c1 a1 + c2 e^{i phi} a2`.
    pub fn delocalized_subtract(modes: (usize, usize), c1: C64, c2: C64, phi: f64) -> Self {
        Self::delocalized(modes, c1, c2, phi, TermKind::Subtract)
    }

    fn delocalized(modes: (usize, usize), c1: C64, c2: C64, phi: f64, kind: TermKind) -> Self {
        Self {
            terms: vec![
                Term { coeff: c1, mode: modes.0, kind },
                Term { coeff: c2 * C64::from_polar(1.0, phi), mode: modes.1, kind },
            ],
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Unnormalized image of `ket`.
    pub fn apply_ket(&self, ket: &Ket) -> Result<Ket> {
        let space = *ket.space();
        let mut out = DVector::<C64>::zeros(space.dimension());
        for t in &self.terms {
            space.check_mode(t.mode)?;
            accumulate(ket, t.mode, t.kind, t.coeff, &mut out);
        }
        Ket::new(space, out)
    }
}

/// `out += coeff * O |ket>` for a single-mode ladder operator `O` on `mode`.
fn accumulate(ket: &Ket, mode: usize, kind: TermKind, coeff: C64, out: &mut DVector<C64>) {
    let space = ket.space();
    let stride = space.stride(mode);
    let cutoff = space.cutoff();
    let amps = ket.amplitudes();
    for (i, z) in amps.iter().enumerate() {
        if *z == C64::new(0.0, 0.0) {
            continue;
        }
        let n = space.digit(i, mode);
        match kind {
            TermKind::Identity => out[i] += coeff * z,
            TermKind::Add if n < cutoff => out[i + stride] += coeff * z * ((n + 1) as f64).sqrt(),
            TermKind::Subtract if n > 0 => out[i - stride] += coeff * z * (n as f64).sqrt(),
            _ => {}
        }
    }
}

fn ladder(ket: &Ket, mode: usize, kind: TermKind) -> Result<Ket> {
    ket.space().check_mode(mode)?;
    let mut out = DVector::<C64>::zeros(ket.space().dimension());
    accumulate(ket, mode, kind, C64::new(1.0, 0.0), &mut out);
    Ket::new(*ket.space(), out)
}

/// Applies a linear map given on kets (to the state, or by conjugation to a
/// density operator), normalizes, and reports the squared norm / trace as
/// relative weight.
pub fn apply_linear(
    state: &QuantumState,
    what: &str,
    map: impl Fn(&Ket) -> Result<Ket>,
) -> Result<HeraldOutcome> {
    let (state, weight) = match state {
        QuantumState::Pure(ket) => {
            let out = map(ket)?;
            let w = out.norm_sqr();
            if w.sqrt() <= ZERO_NORM {
                return Err(Error::impossible(format!("{what} annihilates the input state")));
            }
            (QuantumState::Pure(out.normalize()?.0), w)
        }
        QuantumState::Mixed(rho) => {
            let out = rho.conjugate_with(&map)?;
            let w = out.trace();
            if w.sqrt() <= ZERO_NORM {
                return Err(Error::impossible(format!("{what} annihilates the input state")));
            }
            (QuantumState::Mixed(out.normalize()?.0), w)
        }
    };
    state.warn_if_truncated(what);
    Ok(HeraldOutcome { state, likelihood: Likelihood::RelativeWeight(weight) })
}

/// Ideal heralded operation `sum_k c_k O_k` followed by renormalization.
pub fn apply_ideal(state: &QuantumState, sup: &OperatorSuperposition) -> Result<HeraldOutcome> {
    for t in sup.terms() {
        state.space().check_mode(t.mode)?;
    }
    apply_linear(state, "operator superposition", |k| sup.apply_ket(k))
}

pub fn add_ideal(state: &QuantumState, mode: usize) -> Result<HeraldOutcome> {
    apply_ideal(state, &OperatorSuperposition::add(mode))
}

pub fn subtract_ideal(state: &QuantumState, mode: usize) -> Result<HeraldOutcome> {
    apply_ideal(state, &OperatorSuperposition::subtract(mode))
}

/// Single step of an ideal operator sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Add(usize),
    Subtract(usize),
}

impl Step {
    fn apply(&self, ket: &Ket) -> Result<Ket> {
        match *self {
            Step::Add(m) => ladder(ket, m, TermKind::Add),
            Step::Subtract(m) => ladder(ket, m, TermKind::Subtract),
        }
    }
}

/// Applies `steps` in chronological order (the first step acts first), with
/// one normalization at the end. `[Add(m), Subtract(m)]` is `a a^dagger`.
pub fn apply_sequence(state: &QuantumState, steps: &[Step]) -> Result<HeraldOutcome> {
    if steps.is_empty() {
        return Err(Error::invalid("operator sequence is empty"));
    }
    apply_linear(state, "operator sequence", |k| {
        steps.iter().try_fold(k.clone(), |acc, s| s.apply(&acc))
    })
}

/// `c1 a a^dagger + c2 a^dagger a`, evaluated as the two literal sequences.
pub fn superpose_sequences(state: &QuantumState, mode: usize, c1: C64, c2: C64) -> Result<HeraldOutcome> {
    state.space().check_mode(mode)?;
    apply_linear(state, "sequence superposition", |k| {
        let first = ladder(&ladder(k, mode, TermKind::Add)?, mode, TermKind::Subtract)?;
        let second = ladder(&ladder(k, mode, TermKind::Subtract)?, mode, TermKind::Add)?;
        first.scale(c1).add(&second.scale(c2))
    })
}

fn number(ket: &Ket, mode: usize) -> Ket {
    let space = *ket.space();
    Ket::from_fn(space, |i| ket.amplitudes()[i] * space.digit(i, mode) as f64)
}

/// `a n + b`.
pub fn affine_number_op(state: &QuantumState, mode: usize, a: C64, b: C64) -> Result<HeraldOutcome> {
    state.space().check_mode(mode)?;
    apply_linear(state, "affine number operator", |k| number(k, mode).scale(a).add(&k.scale(b)))
}

/// Operator `C` of the orthogonalizer `C - <C>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrthoOperator {
    Creation,
    Number,
}

fn ortho_parts(state: &QuantumState, mode: usize, op: OrthoOperator) -> Result<(Ket, Ket, C64)> {
    let ket = match state {
        QuantumState::Pure(k) => k.normalize()?.0,
        QuantumState::Mixed(_) => {
            return Err(Error::invalid("orthogonalization is defined for pure states"));
        }
    };
    ket.space().check_mode(mode)?;
    let c_psi = match op {
        OrthoOperator::Creation => ladder(&ket, mode, TermKind::Add)?,
        OrthoOperator::Number => number(&ket, mode),
    };
    let mean = ket.inner(&c_psi)?;
    Ok((ket, c_psi, mean))
}

/// `(C - <C>)|psi>`, normalized; orthogonal to `|psi>`.
pub fn orthogonalize(state: &QuantumState, mode: usize, op: OrthoOperator) -> Result<HeraldOutcome> {
    let (ket, c_psi, mean) = ortho_parts(state, mode, op)?;
    let w = c_psi.add(&ket.scale(-mean))?;
    if w.norm_sqr().sqrt() <= ZERO_NORM {
        return Err(Error::impossible("input is an eigenstate of the orthogonalizer operator"));
    }
    apply_linear(&QuantumState::Pure(ket), "orthogonalizer", |_| Ok(w.clone()))
}

/// `(C - <C> + kappa)|psi>` with `kappa` chosen so that the normalized
/// output is proportional to `mu |psi> + nu |psi_perp>`.
pub fn cv_qubit(state: &QuantumState, mode: usize, op: OrthoOperator, mu: C64, nu: C64) -> Result<HeraldOutcome> {
    if nu.norm() == 0.0 {
        return Err(Error::invalid("nu must be nonzero"));
    }
    let (ket, c_psi, mean) = ortho_parts(state, mode, op)?;
    let w = c_psi.add(&ket.scale(-mean))?;
    let w_norm = w.norm_sqr().sqrt();
    if w_norm <= ZERO_NORM {
        return Err(Error::impossible("input is an eigenstate of the orthogonalizer operator"));
    }
    let kappa = mu * w_norm / nu;
    let out = c_psi.add(&ket.scale(kappa - mean))?;
    apply_linear(&QuantumState::Pure(ket), "cv qubit", |_| Ok(out.clone()))
}

/// Settings of [`kerr_emulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrConfig {
    /// Phase imprinted on the two-photon component by the target map.
    pub phase: f64,
    /// Highest level of the subspace the input must live in.
    pub subspace_max: usize,
    /// Required input population inside `0..=subspace_max`.
    pub min_support: f64,
}

impl Default for KerrConfig {
    fn default() -> Self {
        Self { phase: std::f64::consts::PI, subspace_max: 2, min_support: 0.999 }
    }
}

#[derive(Debug, Clone)]
pub struct KerrEmulation {
    pub outcome: HeraldOutcome,
    pub fidelity: f64,
    pub c1: C64,
    pub c2: C64,
}

/// Target of the emulated Kerr map: `|psi>` with `e^{i phase}` on the
/// two-photon component of `mode`.
pub fn kerr_target(ket: &Ket, mode: usize, phase: f64) -> Ket {
    let space = *ket.space();
    let shift = C64::from_polar(1.0, phase);
    Ket::from_fn(space, |i| {
        let z = ket.amplitudes()[i];
        if space.digit(i, mode) == 2 {
            z * shift
        } else {
            z
        }
    })
}

/// Best `c1 a a^dagger + c2 a^dagger a` approximation of the Kerr-type phase
/// map on a pure input.
///
/// The output is `u |psi> + v n|psi>` with `u = c1`, `v = c1 + c2`, so the
/// optimum is a 2x2 generalized Rayleigh quotient: with Gram matrix `G` of
/// `{psi, n psi}` and `g_i = <X_i|target>`, the best fidelity is
/// `g^H G^+ g` at `(u, v) = G^+ g`.
pub fn kerr_emulate(state: &QuantumState, mode: usize, config: KerrConfig) -> Result<KerrEmulation> {
    if config.subspace_max < 2 {
        return Err(Error::invalid("the Kerr target needs the two-photon level"));
    }
    let ket = match state {
        QuantumState::Pure(k) => k.normalize()?.0,
        QuantumState::Mixed(_) => return Err(Error::invalid("Kerr emulation expects a pure input")),
    };
    let space = *ket.space();
    space.check_mode(mode)?;
    let support: f64 = (0..space.dimension())
        .filter(|&i| space.digit(i, mode) <= config.subspace_max)
        .map(|i| ket.amplitudes()[i].norm_sqr())
        .sum();
    if support < config.min_support {
        return Err(Error::invalid(format!(
            "input population {support:.6} within 0..={} is below {}",
            config.subspace_max, config.min_support
        )));
    }
    let target = kerr_target(&ket, mode, config.phase);
    let n_psi = number(&ket, mode);
    let basis = [&ket, &n_psi];
    let gram = Matrix2::from_fn(|r, c| basis[r].inner(basis[c]).unwrap());
    let g = Vector2::from_fn(|r, _| basis[r].inner(&target).unwrap());
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.max();
    let mut pinv = Matrix2::<C64>::zeros();
    for k in 0..2 {
        let l = eig.eigenvalues[k];
        if l > 1e-12 * top {
            let v = eig.eigenvectors.column(k);
            pinv += v * v.adjoint() * C64::new(1.0 / l, 0.0);
        }
    }
    let x = pinv * g;
    let (u, v) = (x[0], x[1]);
    let (mut c1, mut c2) = (u, v - u);
    let scale = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
    let lead = if c1.norm() > 1e-12 { c1 } else { c2 };
    let phase = lead.conj() / lead.norm();
    c1 = c1 * phase / scale;
    c2 = c2 * phase / scale;
    let outcome = superpose_sequences(&QuantumState::Pure(ket), mode, c1, c2)?;
    let fidelity = match &outcome.state {
        QuantumState::Pure(out) => out.inner(&target)?.norm_sqr(),
        QuantumState::Mixed(_) => unreachable!("pure input gives pure output"),
    };
    Ok(KerrEmulation { outcome, fidelity, c1, c2 })
}
