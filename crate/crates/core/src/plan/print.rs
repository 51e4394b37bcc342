use std::fmt::Write;

use super::{CircuitPlan, FidelityTarget, MeasureKind, Stage};
use crate::fock::C64;
use crate::herald::{DetectorModel, OrthoOperator, Outcome, Step};
use crate::states::{Parity, StateSpec};

// `{:?}` prints the shortest representation that parses back to the same
// f64 and always marks floats as such (`2.0`, `1e-20`, `inf`).
fn float(x: f64) -> String {
    format!("{x:?}")
}

fn complex(z: C64) -> String {
    if z.im == 0.0 {
        float(z.re)
    } else {
        format!("[{}, {}]", float(z.re), float(z.im))
    }
}

fn modes(m: &[usize]) -> String {
    let items: Vec<String> = m.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn state_fields(s: &StateSpec) -> Vec<(&'static str, String)> {
    let mut f = vec![("state", format!("{:?}", s.name()))];
    match *s {
        StateSpec::Vacuum => {}
        StateSpec::Fock { n } => f.push(("n", n.to_string())),
        StateSpec::Coherent { alpha } => f.push(("alpha", complex(alpha))),
        StateSpec::Thermal { mean } => f.push(("mean", float(mean))),
        StateSpec::SqueezedVacuum { lambda } | StateSpec::Epr { lambda } => f.push(("lambda", float(lambda))),
        StateSpec::Cat { alpha, parity } => {
            f.push(("alpha", complex(alpha)));
            let p = if parity == Parity::Even { "even" } else { "odd" };
            f.push(("parity", format!("{p:?}")));
        }
        StateSpec::SpEntangled { c1, c2, phi } => {
            f.push(("c1", complex(c1)));
            f.push(("c2", complex(c2)));
            f.push(("phi", float(phi)));
        }
        StateSpec::Hybrid { alpha, alpha_prime, phi } => {
            f.push(("alpha", complex(alpha)));
            if let Some(a) = alpha_prime {
                f.push(("alpha_prime", complex(a)));
            }
            f.push(("phi", float(phi)));
        }
        StateSpec::TwoModeAddedCoherent { alpha, phi } => {
            f.push(("alpha", complex(alpha)));
            f.push(("phi", float(phi)));
        }
    }
    f
}

fn inline(fields: &[(&str, String)]) -> String {
    let items: Vec<String> = fields.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!("{{ {} }}", items.join(", "))
}

fn detector_fields(d: &DetectorModel) -> Vec<(&'static str, String)> {
    match *d {
        DetectorModel::Projective { n } => vec![("model", "\"projective\"".into()), ("n", n.to_string())],
        DetectorModel::OnOff { efficiency, dark_rate } => vec![
            ("model", "\"on_off\"".into()),
            ("efficiency", float(efficiency)),
            ("dark_rate", float(dark_rate)),
        ],
        DetectorModel::Pnr { efficiency, max_count } => vec![
            ("model", "\"pnr\"".into()),
            ("efficiency", float(efficiency)),
            ("max_count", max_count.to_string()),
        ],
    }
}

fn outcome(o: Outcome) -> String {
    match o {
        Outcome::Click => "\"click\"".into(),
        Outcome::NoClick => "\"no_click\"".into(),
        Outcome::Count(k) => k.to_string(),
    }
}

fn operator(o: OrthoOperator) -> String {
    match o {
        OrthoOperator::Creation => "\"creation\"".into(),
        OrthoOperator::Number => "\"number\"".into(),
    }
}

fn stage_fields(s: &Stage) -> Vec<(&'static str, String)> {
    let pair = |m: (usize, usize)| modes(&[m.0, m.1]);
    match s {
        Stage::BeamSplitter { modes: m, tau } => vec![("modes", pair(*m)), ("tau", float(*tau))],
        Stage::TwoModeSqueeze { modes: m, zeta } => vec![("modes", pair(*m)), ("zeta", float(*zeta))],
        Stage::Squeeze { mode, zeta } => vec![("mode", mode.to_string()), ("zeta", float(*zeta))],
        Stage::Displace { mode, alpha } => vec![("mode", mode.to_string()), ("alpha", complex(*alpha))],
        Stage::Phase { mode, theta } => vec![("mode", mode.to_string()), ("theta", float(*theta))],
        Stage::Loss { mode, eta } => vec![("mode", mode.to_string()), ("eta", float(*eta))],
        Stage::Add { mode } | Stage::Subtract { mode } => vec![("mode", mode.to_string())],
        Stage::DisplacedAdd { mode, gamma } | Stage::DisplacedSubtract { mode, gamma } => {
            vec![("mode", mode.to_string()), ("gamma", complex(*gamma))]
        }
        Stage::DelocalizedAdd { modes: m, c1, c2, phi } | Stage::DelocalizedSubtract { modes: m, c1, c2, phi } => {
            vec![("modes", pair(*m)), ("c1", complex(*c1)), ("c2", complex(*c2)), ("phi", float(*phi))]
        }
        Stage::Sequence { steps } => {
            let items: Vec<String> = steps
                .iter()
                .map(|st| match *st {
                    Step::Add(m) => inline(&[("kind", "\"add\"".into()), ("mode", m.to_string())]),
                    Step::Subtract(m) => inline(&[("kind", "\"subtract\"".into()), ("mode", m.to_string())]),
                })
                .collect();
            vec![("steps", format!("[{}]", items.join(", ")))]
        }
        Stage::SuperposeSequences { mode, c1, c2 } => {
            vec![("mode", mode.to_string()), ("c1", complex(*c1)), ("c2", complex(*c2))]
        }
        Stage::AffineNumber { mode, a, b } => vec![("mode", mode.to_string()), ("a", complex(*a)), ("b", complex(*b))],
        Stage::Orthogonalize { mode, operator: o } => vec![("mode", mode.to_string()), ("operator", operator(*o))],
        Stage::CvQubit { mode, operator: o, mu, nu } => vec![
            ("mode", mode.to_string()),
            ("operator", operator(*o)),
            ("mu", complex(*mu)),
            ("nu", complex(*nu)),
        ],
        Stage::KerrEmulate { mode, phase, min_support } => vec![
            ("mode", mode.to_string()),
            ("phase", float(*phase)),
            ("min_support", float(*min_support)),
        ],
        Stage::SubtractPhysical { mode, reflectivity, detector } => vec![
            ("mode", mode.to_string()),
            ("reflectivity", float(*reflectivity)),
            ("detector", inline(&detector_fields(detector))),
        ],
        Stage::AddPhysical { mode, zeta, detector } => vec![
            ("mode", mode.to_string()),
            ("zeta", float(*zeta)),
            ("detector", inline(&detector_fields(detector))),
        ],
        Stage::Herald { detections } => {
            let items: Vec<String> = detections
                .iter()
                .map(|d| {
                    let mut f = vec![("mode", d.mode.to_string()), ("outcome", outcome(d.outcome))];
                    f.extend(detector_fields(&d.detector));
                    inline(&f)
                })
                .collect();
            vec![("detectors", format!("[\n    {},\n]", items.join(",\n    ")))]
        }
        Stage::HeraldFock { mode, k, lambda, detector, depth } => vec![
            ("mode", mode.to_string()),
            ("k", k.to_string()),
            ("lambda", float(*lambda)),
            ("detector", inline(&detector_fields(detector))),
            ("depth", depth.to_string()),
        ],
        Stage::ConditionQuadrature { mode, theta, window } => vec![
            ("mode", mode.to_string()),
            ("theta", float(*theta)),
            ("window", format!("[{}, {}]", float(window.0), float(window.1))),
        ],
    }
}

fn measure_fields(k: &MeasureKind) -> Vec<(&'static str, String)> {
    let opt_modes = |m: &[usize]| if m.is_empty() { vec![] } else { vec![("modes", modes(m))] };
    match k {
        MeasureKind::State { modes: m } | MeasureKind::PhotonStatistics { modes: m } | MeasureKind::Purity { modes: m } => {
            opt_modes(m)
        }
        MeasureKind::Fidelity { modes: m, target } => {
            let mut f = opt_modes(m);
            let t = match target {
                FidelityTarget::State(s) => inline(&state_fields(s)),
                FidelityTarget::Amplitudes(a) => {
                    let items: Vec<String> = a.iter().map(|z| complex(*z)).collect();
                    inline(&[("amplitudes", format!("[{}]", items.join(", ")))])
                }
            };
            f.push(("target", t));
            f
        }
        MeasureKind::MeanPhoton { mode } | MeasureKind::NegativityVolume { mode } => vec![("mode", mode.to_string())],
        MeasureKind::Discorrelation { modes: m, levels } => {
            vec![("modes", modes(&[m.0, m.1])), ("levels", levels.to_string())]
        }
        MeasureKind::LogNegativity { part } => vec![("part", modes(part))],
        MeasureKind::Wigner { mode, half_width, points } => {
            let mut f = vec![("mode", mode.to_string())];
            if let Some(w) = half_width {
                f.push(("half_width", float(*w)));
            }
            f.push(("points", points.to_string()));
            f
        }
        MeasureKind::Homodyne { mode, phases, samples } => vec![
            ("mode", mode.to_string()),
            ("phases", phases.to_string()),
            ("samples", samples.to_string()),
        ],
        MeasureKind::Tomography { mode, phases, samples, cutoff, max_iterations } => vec![
            ("mode", mode.to_string()),
            ("phases", phases.to_string()),
            ("samples", samples.to_string()),
            ("cutoff", cutoff.to_string()),
            ("max_iterations", max_iterations.to_string()),
        ],
    }
}

/// Canonical text of `plan`; `parse_plan(&print_plan(p))` equals `p`.
pub fn print_plan(plan: &CircuitPlan) -> String {
    let mut out = String::new();
    let mut section = |header: &str, fields: Vec<(&str, String)>| {
        let _ = writeln!(out, "\n{header}");
        for (k, v) in fields {
            let _ = writeln!(out, "{k} = {v}");
        }
    };
    section(
        &format!("seed = {}\n\n[space]", plan.seed),
        vec![("modes", plan.modes.to_string()), ("cutoff", plan.cutoff.to_string())],
    );
    for input in &plan.inputs {
        let mut f = vec![("modes", modes(&input.modes))];
        f.extend(state_fields(&input.state));
        section("[[input]]", f);
    }
    for stage in &plan.stages {
        let mut f = vec![("op", format!("{:?}", stage.name()))];
        f.extend(stage_fields(stage));
        section("[[stage]]", f);
    }
    for m in &plan.measurements {
        let mut f = vec![("kind", format!("{:?}", m.kind.name())), ("name", format!("{:?}", m.name))];
        f.extend(measure_fields(&m.kind));
        section("[[measure]]", f);
    }
    out.trim_start().to_string()
}
