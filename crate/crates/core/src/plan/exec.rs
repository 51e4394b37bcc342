use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{print_plan, CircuitPlan, FidelityTarget, MeasureKind, Measurement, Stage};
use crate::analysis::{
    discorrelation_check, equally_spaced_phases, log_negativity, mean_photon, photon_statistics,
    sample_homodyne_with, samples_to_text, wigner, wigner_at, wigner_negativity_volume, GridSpec,
};
use crate::error::{Error, Result};
use crate::fock::io::state_to_text;
use crate::fock::{
    beam_splitter_local, displacement_local, fidelity, measure_mode, partial_trace, phase_rotation_local,
    project_fock, pure_loss, single_mode_squeeze_local, two_mode_squeeze_local, DensityOperator, Ket, ModeSpace,
    QuantumState, C64,
};
use crate::herald::{
    add_ideal, add_physical, affine_number_op, apply_ideal, apply_sequence, condition_on_quadrature, cv_qubit,
    herald, herald_fock, kerr_emulate, orthogonalize, subtract_ideal, subtract_physical, superpose_sequences,
    HeraldOutcome, KerrConfig, Likelihood, OperatorSuperposition, Step,
};
use crate::rng::{stream, MEASURE_STREAM_BASE};
use crate::states::make_state;
use crate::tomography::{maxlik_reconstruct, TomographyConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub index: usize,
    pub op: &'static str,
    /// Herald probability or relative weight; `None` for deterministic stages.
    pub likelihood: Option<Likelihood>,
    /// Stage-specific scalars (for example the Kerr emulation fidelity).
    pub extra: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// File name relative to the output directory.
    pub file: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub name: String,
    pub kind: &'static str,
    pub metrics: Vec<(String, f64)>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub plan_echo: String,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    /// Labels of the modes of `final_state`, in order.
    pub final_modes: Vec<usize>,
    pub final_state: QuantumState,
    /// One entry per requested measurement, in plan order.
    pub measurements: Vec<MeasurementResult>,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

impl RunReport {
    /// All scalar results as flat keys: `stage.<i>.<key>` and
    /// `<measurement>.<key>`.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for s in &self.stages {
            match s.likelihood {
                Some(Likelihood::Probability(p)) => out.push((format!("stage.{}.probability", s.index), p)),
                Some(Likelihood::RelativeWeight(w)) => out.push((format!("stage.{}.weight", s.index), w)),
                None => {}
            }
            for (k, v) in &s.extra {
                out.push((format!("stage.{}.{k}", s.index), *v));
            }
        }
        for m in &self.measurements {
            for (k, v) in &m.metrics {
                out.push((format!("{}.{k}", m.name), *v));
            }
        }
        out
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics().into_iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn measurement(&self, name: &str) -> Option<&MeasurementResult> {
        self.measurements.iter().find(|m| m.name == name)
    }

    pub fn metrics_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metrics() {
            let _ = writeln!(out, "{k} = {}", num(v));
        }
        out
    }

    /// Flat `key = value` report followed by the plan echo.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let labels: Vec<String> = self.final_modes.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "final_modes = {}", labels.join(" "));
        let _ = writeln!(out, "final_state = {}", super::FINAL_STATE_FILE);
        for s in &self.stages {
            let _ = writeln!(out, "stage.{}.op = {}", s.index, s.op);
        }
        for m in &self.measurements {
            let _ = writeln!(out, "measure.{}.kind = {}", m.name, m.kind);
            for a in &m.artifacts {
                let _ = writeln!(out, "measure.{}.file = {}", m.name, a.file);
            }
        }
        out.push_str(&self.metrics_text());
        out.push_str("\n# plan\n");
        for line in self.plan_echo.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out
    }
}

fn live_position(live: &[usize], label: usize) -> Result<usize> {
    live.iter()
        .position(|&m| m == label)
        .ok_or_else(|| Error::invalid(format!("mode {label} is not available")))
}

/// Reorders modes: mode `i` of `state` moves to position `order[i]`.
fn permute(state: &QuantumState, order: &[usize]) -> Result<QuantumState> {
    let space = *state.space();
    let identity = order.iter().enumerate().all(|(i, &o)| i == o);
    if identity {
        return Ok(state.clone());
    }
    let map: Vec<usize> = (0..space.dimension())
        .map(|i| order.iter().enumerate().map(|(m, &o)| space.digit(i, m) * space.stride(o)).sum())
        .collect();
    Ok(match state {
        QuantumState::Pure(k) => {
            let mut v = DVector::<C64>::zeros(space.dimension());
            for (i, &j) in map.iter().enumerate() {
                v[j] = k.amplitudes()[i];
            }
            QuantumState::Pure(Ket::new(space, v)?)
        }
        QuantumState::Mixed(r) => {
            let m = r.matrix();
            let mut out = DMatrix::<C64>::zeros(space.dimension(), space.dimension());
            for (i, &a) in map.iter().enumerate() {
                for (j, &b) in map.iter().enumerate() {
                    out[(a, b)] = m[(i, j)];
                }
            }
            QuantumState::Mixed(DensityOperator::new(space, out)?)
        }
    })
}

fn assemble_inputs(plan: &CircuitPlan) -> Result<QuantumState> {
    let mut labels = Vec::new();
    let mut state: Option<QuantumState> = None;
    let mut push = |s: QuantumState, modes: &[usize]| -> Result<()> {
        labels.extend_from_slice(modes);
        state = Some(match state.take() {
            None => s,
            Some(acc) => acc.tensor(&s)?,
        });
        Ok(())
    };
    for input in &plan.inputs {
        let space = ModeSpace::new(input.modes.len(), plan.cutoff)?;
        push(make_state(&input.state, &space)?, &input.modes)?;
    }
    let single = ModeSpace::single(plan.cutoff)?;
    let assigned: Vec<usize> = plan.inputs.iter().flat_map(|i| i.modes.iter().copied()).collect();
    for m in (0..plan.modes).filter(|m| !assigned.contains(m)) {
        push(QuantumState::Pure(Ket::vacuum(single)), &[m])?;
    }
    let state = state.expect("plans have at least one mode");
    permute(&state, &labels)
}

fn unitary(state: &QuantumState, op: &crate::fock::LocalOperator, modes: &[usize]) -> Result<QuantumState> {
    state.apply_local(op, modes)
}

/// Swaps the vacuum in `pos` for the single-mode state `fresh`.
fn replace_vacuum(state: &QuantumState, pos: usize, fresh: QuantumState) -> Result<QuantumState> {
    let space = *state.space();
    let vacuum_weight: f64 = photon_statistics(state).marginal(pos)?[0] / state.trace();
    if vacuum_weight < 1.0 - 1e-12 {
        return Err(Error::invalid(format!(
            "herald_fock needs its mode in vacuum (vacuum population {vacuum_weight:.3e})"
        )));
    }
    if space.num_modes() == 1 {
        return Ok(fresh);
    }
    let rest = match state {
        QuantumState::Pure(k) => QuantumState::Pure(project_fock(k, pos, 0)?.0.normalize()?.0),
        QuantumState::Mixed(_) => {
            let mut vac = DMatrix::<C64>::zeros(space.levels(), space.levels());
            vac[(0, 0)] = C64::new(1.0, 0.0);
            QuantumState::Mixed(measure_mode(state, pos, &vac)?.normalize()?.0)
        }
    };
    let joined = rest.tensor(&fresh)?;
    // Modes of `rest` keep their order around the gap at `pos`.
    let n = space.num_modes();
    let order: Vec<usize> = (0..n - 1).map(|i| if i < pos { i } else { i + 1 }).chain([pos]).collect();
    permute(&joined, &order)
}

fn run_stage(state: &QuantumState, live: &mut Vec<usize>, stage: &Stage, cutoff: usize) -> Result<(QuantumState, Option<Likelihood>, Vec<(String, f64)>)> {
    let pos = |m: usize| live_position(live, m);
    let done = |o: HeraldOutcome| Ok((o.state, Some(o.likelihood), Vec::new()));
    match stage {
        Stage::BeamSplitter { modes, tau } => {
            let op = beam_splitter_local(*tau, cutoff)?;
            Ok((unitary(state, &op, &[pos(modes.0)?, pos(modes.1)?])?, None, Vec::new()))
        }
        Stage::TwoModeSqueeze { modes, zeta } => {
            let op = two_mode_squeeze_local(*zeta, cutoff)?;
            Ok((unitary(state, &op, &[pos(modes.0)?, pos(modes.1)?])?, None, Vec::new()))
        }
        Stage::Squeeze { mode, zeta } => {
            Ok((unitary(state, &single_mode_squeeze_local(*zeta, cutoff)?, &[pos(*mode)?])?, None, Vec::new()))
        }
        Stage::Displace { mode, alpha } => {
            Ok((unitary(state, &displacement_local(*alpha, cutoff)?, &[pos(*mode)?])?, None, Vec::new()))
        }
        Stage::Phase { mode, theta } => {
            Ok((unitary(state, &phase_rotation_local(*theta, cutoff)?, &[pos(*mode)?])?, None, Vec::new()))
        }
        Stage::Loss { mode, eta } => {
            let rho = pure_loss(&state.to_density(), pos(*mode)?, *eta)?;
            Ok((QuantumState::Mixed(rho), None, Vec::new()))
        }
        Stage::Add { mode } => done(add_ideal(state, pos(*mode)?)?),
        Stage::Subtract { mode } => done(subtract_ideal(state, pos(*mode)?)?),
        Stage::DisplacedAdd { mode, gamma } => {
            done(apply_ideal(state, &OperatorSuperposition::displaced_add(pos(*mode)?, *gamma))?)
        }
        Stage::DisplacedSubtract { mode, gamma } => {
            done(apply_ideal(state, &OperatorSuperposition::displaced_subtract(pos(*mode)?, *gamma))?)
        }
        Stage::DelocalizedAdd { modes, c1, c2, phi } => {
            let sup = OperatorSuperposition::delocalized_add((pos(modes.0)?, pos(modes.1)?), *c1, *c2, *phi);
            done(apply_ideal(state, &sup)?)
        }
        Stage::DelocalizedSubtract { modes, c1, c2, phi } => {
            let sup = OperatorSuperposition::delocalized_subtract((pos(modes.0)?, pos(modes.1)?), *c1, *c2, *phi);
            done(apply_ideal(state, &sup)?)
        }
        Stage::Sequence { steps } => {
            let mapped = steps
                .iter()
                .map(|s| match *s {
                    Step::Add(m) => Ok(Step::Add(pos(m)?)),
                    Step::Subtract(m) => Ok(Step::Subtract(pos(m)?)),
                })
                .collect::<Result<Vec<_>>>()?;
            done(apply_sequence(state, &mapped)?)
        }
        Stage::SuperposeSequences { mode, c1, c2 } => done(superpose_sequences(state, pos(*mode)?, *c1, *c2)?),
        Stage::AffineNumber { mode, a, b } => done(affine_number_op(state, pos(*mode)?, *a, *b)?),
        Stage::Orthogonalize { mode, operator } => done(orthogonalize(state, pos(*mode)?, *operator)?),
        Stage::CvQubit { mode, operator, mu, nu } => done(cv_qubit(state, pos(*mode)?, *operator, *mu, *nu)?),
        Stage::KerrEmulate { mode, phase, min_support } => {
            let config = KerrConfig { phase: *phase, min_support: *min_support, ..KerrConfig::default() };
            let k = kerr_emulate(state, pos(*mode)?, config)?;
            let extra = vec![
                ("fidelity".to_string(), k.fidelity),
                ("c1_re".to_string(), k.c1.re),
                ("c1_im".to_string(), k.c1.im),
                ("c2_re".to_string(), k.c2.re),
                ("c2_im".to_string(), k.c2.im),
            ];
            Ok((k.outcome.state, Some(k.outcome.likelihood), extra))
        }
        Stage::SubtractPhysical { mode, reflectivity, detector } => {
            done(subtract_physical(state, pos(*mode)?, *reflectivity, *detector)?)
        }
        Stage::AddPhysical { mode, zeta, detector } => done(add_physical(state, pos(*mode)?, *zeta, *detector)?),
        Stage::Herald { detections } => {
            let conditions = detections
                .iter()
                .map(|d| Ok((pos(d.mode)?, d.detector, d.outcome)))
                .collect::<Result<Vec<_>>>()?;
            let out = herald(state, &conditions)?;
            live.retain(|m| !detections.iter().any(|d| d.mode == *m));
            done(out)
        }
        Stage::HeraldFock { mode, k, lambda, detector, depth } => {
            let p = pos(*mode)?;
            let fresh = herald_fock(*k, *lambda, *detector, *depth, cutoff)?;
            let next = replace_vacuum(state, p, fresh.state)?;
            Ok((next, Some(fresh.likelihood), Vec::new()))
        }
        Stage::ConditionQuadrature { mode, theta, window } => {
            let out = condition_on_quadrature(state, pos(*mode)?, *theta, *window)?;
            live.retain(|m| m != mode);
            done(out)
        }
    }
}

/// Single-mode density operator resized to `cutoff` (padded or truncated
/// and renormalized).
fn resized(rho: &DensityOperator, cutoff: usize) -> Result<DensityOperator> {
    let levels = cutoff + 1;
    let m = rho.matrix();
    let n = m.nrows().min(levels);
    let mut out = DMatrix::<C64>::zeros(levels, levels);
    out.view_mut((0, 0), (n, n)).copy_from(&m.view((0, 0), (n, n)));
    Ok(DensityOperator::new(ModeSpace::single(cutoff)?, out)?.normalize()?.0)
}

fn reduced_to(state: &QuantumState, positions: &[usize]) -> Result<QuantumState> {
    if positions.is_empty() || positions.len() == state.space().num_modes() {
        return Ok(state.clone());
    }
    Ok(QuantumState::Mixed(partial_trace(state, positions)?))
}

fn measure(
    plan: &CircuitPlan,
    state: &QuantumState,
    live: &[usize],
    index: usize,
    m: &Measurement,
) -> Result<MeasurementResult> {
    let pos = |l: usize| live_position(live, l);
    let positions = |ls: &[usize]| ls.iter().map(|&l| pos(l)).collect::<Result<Vec<_>>>();
    let mut metrics: Vec<(String, f64)> = Vec::new();
    let mut artifacts = Vec::new();
    let mut put = |k: &str, v: f64| metrics.push((k.to_string(), v));
    match &m.kind {
        MeasureKind::State { modes } => {
            let s = reduced_to(state, &positions(modes)?)?;
            put("purity", s.purity());
            artifacts.push(Artifact { file: format!("{}.state.txt", m.name), contents: state_to_text(&s) });
        }
        MeasureKind::Fidelity { modes, target } => {
            let s = reduced_to(state, &positions(modes)?)?;
            let t = match target {
                FidelityTarget::State(spec) => make_state(spec, s.space())?,
                FidelityTarget::Amplitudes(a) => {
                    let dim = s.space().dimension();
                    if a.len() > dim {
                        return Err(Error::invalid(format!("{} amplitudes exceed dimension {dim}", a.len())));
                    }
                    let ket = Ket::from_fn(*s.space(), |i| a.get(i).copied().unwrap_or_default());
                    QuantumState::Pure(ket.normalize()?.0)
                }
            };
            put("fidelity", fidelity(&s, &t)?);
        }
        MeasureKind::MeanPhoton { mode } => put("mean_photon", mean_photon(state, pos(*mode)?)?),
        MeasureKind::PhotonStatistics { modes } => {
            let labels = if modes.is_empty() { live.to_vec() } else { modes.clone() };
            let stats = photon_statistics(state);
            for l in labels {
                let p = stats.marginal(pos(l)?)?;
                let total: f64 = p.iter().sum();
                for (n, x) in p.iter().enumerate() {
                    put(&format!("mode{l}.p{n}"), x / total);
                }
                put(&format!("mode{l}.mean"), mean_photon(state, pos(l)?)?);
            }
        }
        MeasureKind::Discorrelation { modes, levels } => {
            let d = discorrelation_check(state, (pos(modes.0)?, pos(modes.1)?), *levels)?;
            put("passed", if d.passed { 1.0 } else { 0.0 });
            put("max_diagonal", d.max_diagonal);
            put("min_marginal", d.min_marginal);
        }
        MeasureKind::LogNegativity { part } => put("log_negativity", log_negativity(state, &positions(part)?)?),
        MeasureKind::Purity { modes } => put("purity", reduced_to(state, &positions(modes)?)?.purity()),
        MeasureKind::Wigner { mode, half_width, points } => {
            let p = pos(*mode)?;
            let half = match half_width {
                Some(w) => *w,
                None => GridSpec::default_for(mean_photon(state, p)?).x_range.1,
            };
            let grid = wigner(state, p, &GridSpec::square(half, *points))?;
            put("min", grid.min());
            put("integral", grid.integral());
            put("negative_volume", grid.negative_volume());
            put("origin", wigner_at(state, p, 0.0, 0.0)?);
            artifacts.push(Artifact { file: format!("{}.wigner.txt", m.name), contents: grid.to_text() });
        }
        MeasureKind::NegativityVolume { mode } => {
            put("negativity_volume", wigner_negativity_volume(state, pos(*mode)?)?)
        }
        MeasureKind::Homodyne { mode, phases, samples } => {
            let mut rng = stream(plan.seed, MEASURE_STREAM_BASE + index as u64);
            let data = sample_homodyne_with(state, pos(*mode)?, &equally_spaced_phases(*phases), *samples, &mut rng)?;
            put("count", data.len() as f64);
            put("mean_x", data.iter().map(|s| s.x).sum::<f64>() / data.len() as f64);
            artifacts.push(Artifact { file: format!("{}.samples.txt", m.name), contents: samples_to_text(&data) });
        }
        MeasureKind::Tomography { mode, phases, samples, cutoff, max_iterations } => {
            let p = pos(*mode)?;
            let mut rng = stream(plan.seed, MEASURE_STREAM_BASE + index as u64);
            let data = sample_homodyne_with(state, p, &equally_spaced_phases(*phases), *samples, &mut rng)?;
            let config = TomographyConfig { cutoff: *cutoff, max_iterations: *max_iterations, ..Default::default() };
            let rec = maxlik_reconstruct(&data, &config)?;
            let truth = resized(&partial_trace(state, &[p])?, *cutoff)?;
            let estimate = QuantumState::Mixed(rec.state);
            put("fidelity", fidelity(&estimate, &QuantumState::Mixed(truth))?);
            put("iterations", rec.iterations as f64);
            put("converged", if rec.converged { 1.0 } else { 0.0 });
            put("log_likelihood", *rec.log_likelihood.last().expect("initial value is recorded"));
            artifacts.push(Artifact { file: format!("{}.state.txt", m.name), contents: state_to_text(&estimate) });
        }
    }
    Ok(MeasurementResult { name: m.name.clone(), kind: m.kind.name(), metrics, artifacts })
}

/// Runs the stages in order, then every measurement on the final state.
///
/// A failing stage is reported as [`Error::Stage`] with its index.
pub fn execute_plan(plan: &CircuitPlan) -> Result<RunReport> {
    let mut state = assemble_inputs(plan)?;
    let mut live: Vec<usize> = (0..plan.modes).collect();
    let mut stages = Vec::with_capacity(plan.stages.len());
    for (i, stage) in plan.stages.iter().enumerate() {
        let (next, likelihood, extra) = run_stage(&state, &mut live, stage, plan.cutoff).map_err(|e| Error::Stage {
            stage: i,
            op: stage.name().to_string(),
            source: Box::new(e),
        })?;
        log::debug!("stage {i} ({}) done", stage.name());
        next.warn_if_truncated(stage.name());
        state = next;
        stages.push(StageRecord { index: i, op: stage.name(), likelihood, extra });
    }
    let measurements = plan
        .measurements
        .iter()
        .enumerate()
        .map(|(j, m)| measure(plan, &state, &live, j, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        plan_echo: print_plan(plan),
        seed: plan.seed,
        stages,
        final_modes: live,
        final_state: state,
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_moves_modes() {
        let s = ModeSpace::new(3, 2).unwrap();
        let k = QuantumState::Pure(Ket::fock(s, &[2, 1, 0]).unwrap());
        let p = permute(&k, &[2, 0, 1]).unwrap();
        assert_eq!(p.as_ket().unwrap().amplitude(&[1, 0, 2]).unwrap(), C64::new(1.0, 0.0));
        let m = permute(&QuantumState::Mixed(k.to_density()), &[2, 0, 1]).unwrap();
        assert!(m.to_density().max_abs_diff(&p.to_density()) < 1e-15);
    }
}
