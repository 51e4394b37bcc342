//! Declarative circuit plans.
//!
//! A plan is a TOML document:
//!
//! ```toml
//! seed = 7
//!
//! [space]
//! modes = 3
//! cutoff = 12
//!
//! [[input]]
//! modes = [0]
//! state = "coherent"
//! alpha = 0.3
//!
//! [[stage]]
//! op = "beam_splitter"
//! modes = [1, 2]
//! tau = 0.7853981633974483
//!
//! [[measure]]
//! kind = "fidelity"
//! modes = [2]
//! target = { state = "coherent", alpha = 0.3 }
//! ```
//!
//! Modes keep their original labels for the whole plan. Stages that detect
//! a mode (`herald`, `condition_quadrature`) remove it, and later stages
//! or measurements may not refer to it. Modes without an input start in
//! vacuum. Complex parameters are a number or a `[re, im]` pair.

mod exec;
mod export;
mod parse;
mod print;

use thiserror::Error;

use crate::fock::C64;
use crate::herald::{DetectorModel, OrthoOperator, Outcome, Step};
use crate::states::StateSpec;

pub use exec::{execute_plan, Artifact, MeasurementResult, RunReport, StageRecord};
pub use export::{export_outputs, parse_metrics, FINAL_STATE_FILE, METRICS_FILE, PLAN_FILE, REPORT_FILE};
pub use parse::{parse_plan, MEASUREMENT_KINDS, STAGE_NAMES};
pub use print::print_plan;

/// Position-bearing diagnostic for a malformed plan.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct PlanError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    pub seed: u64,
    pub modes: usize,
    pub cutoff: usize,
    pub inputs: Vec<Input>,
    pub stages: Vec<Stage>,
    pub measurements: Vec<Measurement>,
}

/// A named state placed on `modes` (one label per mode of the state).
#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub modes: Vec<usize>,
    pub state: StateSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub mode: usize,
    pub detector: DetectorModel,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    BeamSplitter { modes: (usize, usize), tau: f64 },
    TwoModeSqueeze { modes: (usize, usize), zeta: f64 },
    Squeeze { mode: usize, zeta: f64 },
    Displace { mode: usize, alpha: C64 },
    Phase { mode: usize, theta: f64 },
    Loss { mode: usize, eta: f64 },
    Add { mode: usize },
    Subtract { mode: usize },
    DisplacedAdd { mode: usize, gamma: C64 },
    DisplacedSubtract { mode: usize, gamma: C64 },
    DelocalizedAdd { modes: (usize, usize), c1: C64, c2: C64, phi: f64 },
    DelocalizedSubtract { modes: (usize, usize), c1: C64, c2: C64, phi: f64 },
    Sequence { steps: Vec<Step> },
    SuperposeSequences { mode: usize, c1: C64, c2: C64 },
    AffineNumber { mode: usize, a: C64, b: C64 },
    Orthogonalize { mode: usize, operator: OrthoOperator },
    CvQubit { mode: usize, operator: OrthoOperator, mu: C64, nu: C64 },
    KerrEmulate { mode: usize, phase: f64, min_support: f64 },
    SubtractPhysical { mode: usize, reflectivity: f64, detector: DetectorModel },
    AddPhysical { mode: usize, zeta: f64, detector: DetectorModel },
    Herald { detections: Vec<Detection> },
    /// Replaces the vacuum in `mode` by a Fock state heralded from an EPR
    /// pair.
    HeraldFock { mode: usize, k: usize, lambda: f64, detector: DetectorModel, depth: usize },
    ConditionQuadrature { mode: usize, theta: f64, window: (f64, f64) },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::BeamSplitter { .. } => "beam_splitter",
            Stage::TwoModeSqueeze { .. } => "two_mode_squeeze",
            Stage::Squeeze { .. } => "squeeze",
            Stage::Displace { .. } => "displace",
            Stage::Phase { .. } => "phase",
            Stage::Loss { .. } => "loss",
            Stage::Add { .. } => "add",
            Stage::Subtract { .. } => "subtract",
            Stage::DisplacedAdd { .. } => "displaced_add",
            Stage::DisplacedSubtract { .. } => "displaced_subtract",
            Stage::DelocalizedAdd { .. } => "delocalized_add",
            Stage::DelocalizedSubtract { .. } => "delocalized_subtract",
            Stage::Sequence { .. } => "sequence",
            Stage::SuperposeSequences { .. } => "superpose_sequences",
            Stage::AffineNumber { .. } => "affine_number",
            Stage::Orthogonalize { .. } => "orthogonalize",
            Stage::CvQubit { .. } => "cv_qubit",
            Stage::KerrEmulate { .. } => "kerr_emulate",
            Stage::SubtractPhysical { .. } => "subtract_physical",
            Stage::AddPhysical { .. } => "add_physical",
            Stage::Herald { .. } => "herald",
            Stage::HeraldFock { .. } => "herald_fock",
            Stage::ConditionQuadrature { .. } => "condition_quadrature",
        }
    }

    /// Mode labels the stage acts on.
    pub fn modes(&self) -> Vec<usize> {
        match self {
            Stage::BeamSplitter { modes, .. }
            | Stage::TwoModeSqueeze { modes, .. }
            | Stage::DelocalizedAdd { modes, .. }
            | Stage::DelocalizedSubtract { modes, .. } => vec![modes.0, modes.1],
            Stage::Sequence { steps } => {
                let mut m: Vec<usize> = steps
                    .iter()
                    .map(|s| match *s {
                        Step::Add(m) | Step::Subtract(m) => m,
                    })
                    .collect();
                m.sort_unstable();
                m.dedup();
                m
            }
            Stage::Herald { detections } => detections.iter().map(|d| d.mode).collect(),
            Stage::Squeeze { mode, .. }
            | Stage::Displace { mode, .. }
            | Stage::Phase { mode, .. }
            | Stage::Loss { mode, .. }
            | Stage::Add { mode }
            | Stage::Subtract { mode }
            | Stage::DisplacedAdd { mode, .. }
            | Stage::DisplacedSubtract { mode, .. }
            | Stage::SuperposeSequences { mode, .. }
            | Stage::AffineNumber { mode, .. }
            | Stage::Orthogonalize { mode, .. }
            | Stage::CvQubit { mode, .. }
            | Stage::KerrEmulate { mode, .. }
            | Stage::SubtractPhysical { mode, .. }
            | Stage::AddPhysical { mode, .. }
            | Stage::HeraldFock { mode, .. }
            | Stage::ConditionQuadrature { mode, .. } => vec![*mode],
        }
    }

    /// Mode labels removed from the state by the stage.
    pub fn consumed(&self) -> Vec<usize> {
        match self {
            Stage::Herald { detections } => detections.iter().map(|d| d.mode).collect(),
            Stage::ConditionQuadrature { mode, .. } => vec![*mode],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Unique key prefix for metrics and artifact files.
    pub name: String,
    pub kind: MeasureKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    /// Exports the state of the listed modes (all live modes when empty).
    State { modes: Vec<usize> },
    Fidelity { modes: Vec<usize>, target: FidelityTarget },
    MeanPhoton { mode: usize },
    PhotonStatistics { modes: Vec<usize> },
    Discorrelation { modes: (usize, usize), levels: usize },
    LogNegativity { part: Vec<usize> },
    Purity { modes: Vec<usize> },
    Wigner { mode: usize, half_width: Option<f64>, points: usize },
    NegativityVolume { mode: usize },
    Homodyne { mode: usize, phases: usize, samples: usize },
    Tomography { mode: usize, phases: usize, samples: usize, cutoff: usize, max_iterations: usize },
}

/// Reference state of a fidelity measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum FidelityTarget {
    State(StateSpec),
    /// Fock amplitudes in basis order of the compared modes, zero-padded and
    /// normalized.
    Amplitudes(Vec<C64>),
}

impl MeasureKind {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::State { .. } => "state",
            MeasureKind::Fidelity { .. } => "fidelity",
            MeasureKind::MeanPhoton { .. } => "mean_photon",
            MeasureKind::PhotonStatistics { .. } => "photon_statistics",
            MeasureKind::Discorrelation { .. } => "discorrelation",
            MeasureKind::LogNegativity { .. } => "log_negativity",
            MeasureKind::Purity { .. } => "purity",
            MeasureKind::Wigner { .. } => "wigner",
            MeasureKind::NegativityVolume { .. } => "negativity_volume",
            MeasureKind::Homodyne { .. } => "homodyne",
            MeasureKind::Tomography { .. } => "tomography",
        }
    }

    pub fn modes(&self) -> Vec<usize> {
        match self {
            MeasureKind::State { modes }
            | MeasureKind::Fidelity { modes, .. }
            | MeasureKind::PhotonStatistics { modes }
            | MeasureKind::Purity { modes } => modes.clone(),
            MeasureKind::LogNegativity { part } => part.clone(),
            MeasureKind::Discorrelation { modes, .. } => vec![modes.0, modes.1],
            MeasureKind::MeanPhoton { mode }
            | MeasureKind::Wigner { mode, .. }
            | MeasureKind::NegativityVolume { mode }
            | MeasureKind::Homodyne { mode, .. }
            | MeasureKind::Tomography { mode, .. } => vec![*mode],
        }
    }
}

impl CircuitPlan {
    /// Mode labels still present after all stages.
    pub fn final_modes(&self) -> Vec<usize> {
        let mut live: Vec<usize> = (0..self.modes).collect();
        for s in &self.stages {
            let gone = s.consumed();
            live.retain(|m| !gone.contains(m));
        }
        live
    }
}
