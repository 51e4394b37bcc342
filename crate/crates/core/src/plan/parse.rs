use std::ops::Range;

use toml::de::{DeTable, DeValue};
use toml::Spanned;

use super::{CircuitPlan, Detection, FidelityTarget, Input, MeasureKind, Measurement, PlanError, Stage};
use crate::fock::C64;
use crate::herald::{DetectorModel, KerrConfig, OrthoOperator, Outcome, Step};
use crate::states::{Parity, StateSpec};

pub const STAGE_NAMES: &[&str] = &[
    "beam_splitter",
    "two_mode_squeeze",
    "squeeze",
    "displace",
    "phase",
    "loss",
    "add",
    "subtract",
    "displaced_add",
    "displaced_subtract",
    "delocalized_add",
    "delocalized_subtract",
    "sequence",
    "superpose_sequences",
    "affine_number",
    "orthogonalize",
    "cv_qubit",
    "kerr_emulate",
    "subtract_physical",
    "add_physical",
    "herald",
    "herald_fock",
    "condition_quadrature",
];

pub const MEASUREMENT_KINDS: &[&str] = &[
    "state",
    "fidelity",
    "mean_photon",
    "photon_statistics",
    "discorrelation",
    "log_negativity",
    "purity",
    "wigner",
    "negativity_volume",
    "homodyne",
    "tomography",
];

type Value<'i> = Spanned<DeValue<'i>>;
type PResult<T> = Result<T, PlanError>;

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }
}

fn fail<T>(line: usize, message: impl Into<String>) -> PResult<T> {
    Err(PlanError { line, message: message.into() })
}

/// Keyed access to one table that remembers which keys were read.
struct Fields<'s, 't, 'i> {
    src: &'s Source<'s>,
    table: &'t DeTable<'i>,
    line: usize,
    context: String,
    used: Vec<String>,
}

impl<'s, 't, 'i> Fields<'s, 't, 'i> {
    fn new(src: &'s Source<'s>, value: &'t Value<'i>, context: String) -> PResult<Self> {
        let line = src.line(value.span());
        match value.get_ref() {
            DeValue::Table(table) => Ok(Self { src, table, line, context, used: Vec::new() }),
            other => fail(line, format!("{context}: expected a table, found {}", other.type_str())),
        }
    }

    fn line_of(&self, v: &Value<'_>) -> usize {
        self.src.line(v.span())
    }

    fn get(&mut self, key: &str) -> Option<&'t Value<'i>> {
        self.used.push(key.to_string());
        self.table.get(key)
    }

    fn req(&mut self, key: &str) -> PResult<&'t Value<'i>> {
        match self.get(key) {
            Some(v) => Ok(v),
            None => fail(self.line, format!("{}: missing parameter '{key}'", self.context)),
        }
    }

    fn bad<T>(&self, v: &Value<'_>, key: &str, expected: &str) -> PResult<T> {
        fail(
            self.line_of(v),
            format!("{}: parameter '{key}' must be {expected}, found {}", self.context, v.get_ref().type_str()),
        )
    }

    fn number(&self, v: &Value<'_>, key: &str) -> PResult<f64> {
        let parsed = match v.get_ref() {
            DeValue::Float(f) => f.as_str().parse::<f64>().ok(),
            DeValue::Integer(i) => i64::from_str_radix(i.as_str(), i.radix()).ok().map(|x| x as f64),
            _ => return self.bad(v, key, "a number"),
        };
        match parsed {
            Some(x) if !x.is_nan() => Ok(x),
            _ => fail(self.line_of(v), format!("{}: parameter '{key}' is not a number", self.context)),
        }
    }

    fn float(&mut self, key: &str) -> PResult<f64> {
        let v = self.req(key)?;
        let x = self.number(v, key)?;
        if !x.is_finite() {
            return fail(self.line_of(v), format!("{}: parameter '{key}' must be finite", self.context));
        }
        Ok(x)
    }

    fn float_or(&mut self, key: &str, default: f64) -> PResult<f64> {
        if self.table.contains_key(key) {
            self.float(key)
        } else {
            self.used.push(key.to_string());
            Ok(default)
        }
    }

    fn float_in(&mut self, key: &str, lo: f64, hi: f64, open: bool) -> PResult<f64> {
        let x = self.float(key)?;
        let ok = if open { x > lo && x < hi } else { x >= lo && x <= hi };
        if !ok {
            let line = self.line_of(self.table.get(key).expect("key was read"));
            let (l, r) = if open { ("(", ")") } else { ("[", "]") };
            return fail(line, format!("{}: '{key}' = {x} outside {l}{lo}, {hi}{r}", self.context));
        }
        Ok(x)
    }

    fn count_of(&self, v: &Value<'_>, key: &str) -> PResult<usize> {
        match v.get_ref() {
            DeValue::Integer(i) => match u64::from_str_radix(i.as_str(), i.radix()) {
                Ok(x) => Ok(x as usize),
                Err(_) => fail(
                    self.line_of(v),
                    format!("{}: parameter '{key}' must be a nonnegative integer", self.context),
                ),
            },
            _ => self.bad(v, key, "a nonnegative integer"),
        }
    }

    fn count(&mut self, key: &str) -> PResult<usize> {
        let v = self.req(key)?;
        self.count_of(v, key)
    }

    fn count_or(&mut self, key: &str, default: usize) -> PResult<usize> {
        match self.get(key) {
            Some(v) => self.count_of(v, key),
            None => Ok(default),
        }
    }

    fn positive(&mut self, key: &str, default: usize) -> PResult<usize> {
        let n = self.count_or(key, default)?;
        if n == 0 {
            let line = self.table.get(key).map_or(self.line, |v| self.line_of(v));
            return fail(line, format!("{}: '{key}' must be positive", self.context));
        }
        Ok(n)
    }

    fn complex_of(&self, v: &Value<'_>, key: &str) -> PResult<C64> {
        let z = match v.get_ref() {
            DeValue::Array(items) if items.len() == 2 => {
                C64::new(self.number(&items[0], key)?, self.number(&items[1], key)?)
            }
            DeValue::Float(_) | DeValue::Integer(_) => C64::new(self.number(v, key)?, 0.0),
            _ => return self.bad(v, key, "a number or a [re, im] pair"),
        };
        if !z.re.is_finite() || !z.im.is_finite() {
            return fail(self.line_of(v), format!("{}: parameter '{key}' must be finite", self.context));
        }
        Ok(z)
    }

    fn complex(&mut self, key: &str) -> PResult<C64> {
        let v = self.req(key)?;
        self.complex_of(v, key)
    }

    fn complex_or(&mut self, key: &str, default: C64) -> PResult<C64> {
        match self.get(key) {
            Some(v) => self.complex_of(v, key),
            None => Ok(default),
        }
    }

    fn string(&mut self, key: &str) -> PResult<&'t str> {
        let v = self.req(key)?;
        match v.get_ref() {
            DeValue::String(s) => Ok(s.as_ref()),
            _ => self.bad(v, key, "a string"),
        }
    }

    fn list(&mut self, key: &str) -> PResult<&'t [Value<'i>]> {
        let v = self.req(key)?;
        match v.get_ref() {
            DeValue::Array(items) => Ok(items),
            _ => self.bad(v, key, "an array"),
        }
    }

    fn modes_of(&mut self, key: &str) -> PResult<Vec<usize>> {
        let items = self.list(key)?;
        items.iter().map(|v| self.count_of(v, key)).collect()
    }

    fn modes_or_empty(&mut self, key: &str) -> PResult<Vec<usize>> {
        if self.table.contains_key(key) {
            self.modes_of(key)
        } else {
            self.used.push(key.to_string());
            Ok(Vec::new())
        }
    }

    fn pair(&mut self, key: &str) -> PResult<(usize, usize)> {
        let modes = self.modes_of(key)?;
        if modes.len() != 2 || modes[0] == modes[1] {
            let line = self.line_of(self.table.get(key).expect("key was read"));
            return fail(line, format!("{}: '{key}' must name two distinct modes", self.context));
        }
        Ok((modes[0], modes[1]))
    }

    fn line_of_key(&self, key: &str) -> usize {
        self.table.get(key).map_or(self.line, |v| self.line_of(v))
    }

    /// Line of whichever key names the modes of a stage or measurement.
    fn mode_line(&self) -> usize {
        ["mode", "modes", "part", "detectors", "steps"]
            .iter()
            .find(|k| self.table.contains_key(**k))
            .map_or(self.line, |k| self.line_of_key(k))
    }

    /// Rejects keys that were never read.
    fn finish(self) -> PResult<()> {
        for (k, v) in self.table.iter() {
            if !self.used.iter().any(|u| u == k.get_ref().as_ref()) {
                return fail(
                    self.src.line(v.span()),
                    format!("{}: unknown parameter '{}'", self.context, k.get_ref()),
                );
            }
        }
        Ok(())
    }
}

/// Parses and fully validates a plan; every diagnostic names a line.
pub fn parse_plan(text: &str) -> Result<CircuitPlan, PlanError> {
    let src = Source { text };
    let doc = DeTable::parse(text).map_err(|e| PlanError {
        line: e.span().map_or(1, |s| src.line(s)),
        message: format!("syntax error: {}", e.message().trim()),
    })?;
    let root_value: Value<'_> = Spanned::new(doc.span(), DeValue::Table(doc.into_inner()));
    let mut root = Fields::new(&src, &root_value, "plan".into())?;

    let seed = match root.get("seed") {
        Some(v) => root.count_of(v, "seed")? as u64,
        None => 0,
    };

    let space_value = root.req("space")?;
    let mut space = Fields::new(&src, space_value, "[space]".into())?;
    let modes = space.count("modes")?;
    let cutoff = space.count("cutoff")?;
    if modes == 0 || cutoff == 0 {
        return fail(space.line, "[space]: modes and cutoff must be positive");
    }
    space.finish()?;

    let mut inputs = Vec::new();
    let mut assigned = vec![false; modes];
    for (i, v) in tables(&mut root, "input")?.iter().enumerate() {
        let mut f = Fields::new(&src, v, format!("input {i}"))?;
        let labels = f.modes_of("modes")?;
        let state = parse_state(&mut f)?;
        if labels.len() != state.num_modes() {
            return fail(
                f.line_of_key("modes"),
                format!("input {i}: {} state needs {} mode(s), got {}", state.name(), state.num_modes(), labels.len()),
            );
        }
        for &m in &labels {
            if m >= modes {
                return fail(f.line_of_key("modes"), format!("input {i}: mode {m} does not exist"));
            }
            if assigned[m] {
                return fail(f.line_of_key("modes"), format!("input {i}: mode {m} already has an input"));
            }
            assigned[m] = true;
        }
        f.finish()?;
        inputs.push(Input { modes: labels, state });
    }

    let mut live: Vec<usize> = (0..modes).collect();
    let mut stages = Vec::new();
    for (i, v) in tables(&mut root, "stage")?.iter().enumerate() {
        let mut f = Fields::new(&src, v, format!("stage {i}"))?;
        let stage = parse_stage(&mut f, i)?;
        let mode_line = f.mode_line();
        for m in stage.modes() {
            if m >= modes {
                return fail(mode_line, format!("stage {i} ({}): mode {m} does not exist", stage.name()));
            }
            if !live.contains(&m) {
                return fail(mode_line, format!("stage {i} ({}): mode {m} was already measured", stage.name()));
            }
        }
        let gone = stage.consumed();
        live.retain(|m| !gone.contains(m));
        if live.is_empty() {
            return fail(f.line, format!("stage {i} ({}): no mode would remain", stage.name()));
        }
        f.finish()?;
        stages.push(stage);
    }

    let mut measurements: Vec<Measurement> = Vec::new();
    for (j, v) in tables(&mut root, "measure")?.iter().enumerate() {
        let mut f = Fields::new(&src, v, format!("measure {j}"))?;
        let m = parse_measurement(&mut f, j, cutoff)?;
        for mode in m.kind.modes() {
            if !live.contains(&mode) {
                return fail(f.mode_line(), format!("measure {j} ({}): mode {mode} is not available", m.kind.name()));
            }
        }
        check_measurement_modes(&m, &live, f.line, j)?;
        if measurements.iter().any(|o| o.name == m.name) {
            return fail(f.line, format!("measure {j}: duplicate name '{}'", m.name));
        }
        f.finish()?;
        measurements.push(m);
    }
    root.finish()?;
    Ok(CircuitPlan { seed, modes, cutoff, inputs, stages, measurements })
}

fn tables<'t, 'i>(root: &mut Fields<'_, 't, 'i>, key: &str) -> PResult<&'t [Value<'i>]> {
    match root.get(key) {
        None => Ok(&[]),
        Some(v) => match v.get_ref() {
            DeValue::Array(items) => Ok(items),
            _ => fail(root.line_of(v), format!("'{key}' must be an array of tables ([[{key}]])")),
        },
    }
}

fn parse_state(f: &mut Fields<'_, '_, '_>) -> PResult<StateSpec> {
    let name = f.string("state")?;
    let spec = match name {
        "vacuum" => StateSpec::Vacuum,
        "fock" => StateSpec::Fock { n: f.count("n")? },
        "coherent" => StateSpec::Coherent { alpha: f.complex("alpha")? },
        "thermal" => StateSpec::Thermal { mean: f.float("mean")? },
        "squeezed_vacuum" => StateSpec::SqueezedVacuum { lambda: f.float("lambda")? },
        "cat" => {
            let alpha = f.complex("alpha")?;
            let parity = match f.string("parity")? {
                "even" | "+" => Parity::Even,
                "odd" | "-" => Parity::Odd,
                other => {
                    return fail(f.line_of_key("parity"), format!("{}: parity '{other}' is not even/odd", f.context))
                }
            };
            StateSpec::Cat { alpha, parity }
        }
        "epr" => StateSpec::Epr { lambda: f.float("lambda")? },
        "sp_entangled" => StateSpec::SpEntangled {
            c1: f.complex("c1")?,
            c2: f.complex("c2")?,
            phi: f.float_or("phi", 0.0)?,
        },
        "hybrid" => {
            let alpha = f.complex("alpha")?;
            let alpha_prime = match f.get("alpha_prime") {
                Some(v) => Some(f.complex_of(v, "alpha_prime")?),
                None => None,
            };
            StateSpec::Hybrid { alpha, alpha_prime, phi: f.float_or("phi", 0.0)? }
        }
        "two_mode_added_coherent" => StateSpec::TwoModeAddedCoherent {
            alpha: f.complex("alpha")?,
            phi: f.float("phi")?,
        },
        other => return fail(f.line_of_key("state"), format!("{}: unknown state '{other}'", f.context)),
    };
    if let Err(e) = spec.validate() {
        return fail(f.line, format!("{}: {e}", f.context));
    }
    Ok(spec)
}

/// Detector model from table `v`; `extra` lists sibling keys owned by the
/// caller.
fn parse_detector(f: &Fields<'_, '_, '_>, v: &Value<'_>, extra: &[&str]) -> PResult<DetectorModel> {
    let mut d = Fields::new(f.src, v, format!("{} detector", f.context))?;
    d.used.extend(extra.iter().map(|k| k.to_string()));
    let det = match d.string("model")? {
        "projective" => DetectorModel::Projective { n: d.count_or("n", 1)? },
        "on_off" => DetectorModel::OnOff {
            efficiency: d.float_in("efficiency", 0.0, 1.0, false)?,
            dark_rate: d.float_or("dark_rate", 0.0)?,
        },
        "pnr" => DetectorModel::Pnr {
            efficiency: d.float_in("efficiency", 0.0, 1.0, false)?,
            max_count: d.positive("max_count", 1)?,
        },
        other => return fail(d.line_of_key("model"), format!("{}: unknown model '{other}'", d.context)),
    };
    if let Err(e) = det.validate() {
        return fail(d.line, format!("{}: {e}", d.context));
    }
    d.finish()?;
    Ok(det)
}

fn detector_or_ideal(f: &mut Fields<'_, '_, '_>) -> PResult<DetectorModel> {
    match f.get("detector") {
        Some(v) => parse_detector(f, v, &[]),
        None => Ok(DetectorModel::ideal_on_off()),
    }
}

fn parse_outcome(f: &Fields<'_, '_, '_>, v: &Value<'_>) -> PResult<Outcome> {
    match v.get_ref() {
        DeValue::String(s) => match s.as_ref() {
            "click" => Ok(Outcome::Click),
            "no_click" => Ok(Outcome::NoClick),
            other => fail(f.line_of(v), format!("{}: outcome '{other}' is not click/no_click", f.context)),
        },
        DeValue::Integer(_) => Ok(Outcome::Count(f.count_of(v, "outcome")?)),
        _ => f.bad(v, "outcome", "\"click\", \"no_click\" or a photon count"),
    }
}

fn ortho(f: &mut Fields<'_, '_, '_>) -> PResult<OrthoOperator> {
    match f.string("operator")? {
        "creation" => Ok(OrthoOperator::Creation),
        "number" => Ok(OrthoOperator::Number),
        other => fail(
            f.line_of_key("operator"),
            format!("{}: operator '{other}' is not creation/number", f.context),
        ),
    }
}

fn parse_stage(f: &mut Fields<'_, '_, '_>, index: usize) -> PResult<Stage> {
    let op = f.string("op")?;
    if !STAGE_NAMES.contains(&op) {
        return fail(
            f.line_of_key("op"),
            format!("stage {index}: unknown stage '{op}' (known: {})", STAGE_NAMES.join(", ")),
        );
    }
    f.context = format!("stage {index} ({op})");
    let stage = match op {
        "beam_splitter" => {
            let modes = f.pair("modes")?;
            let tau = match (f.table.contains_key("tau"), f.table.contains_key("reflectivity")) {
                (true, false) => f.float("tau")?,
                (false, true) => f.float_in("reflectivity", 0.0, 1.0, false)?.asin(),
                _ => return fail(f.line, format!("{}: give exactly one of 'tau' or 'reflectivity'", f.context)),
            };
            f.used.extend(["tau".to_string(), "reflectivity".to_string()]);
            Stage::BeamSplitter { modes, tau }
        }
        "two_mode_squeeze" => Stage::TwoModeSqueeze { modes: f.pair("modes")?, zeta: f.float("zeta")? },
        "squeeze" => Stage::Squeeze { mode: f.count("mode")?, zeta: f.float("zeta")? },
        "displace" => Stage::Displace { mode: f.count("mode")?, alpha: f.complex("alpha")? },
        "phase" => Stage::Phase { mode: f.count("mode")?, theta: f.float("theta")? },
        "loss" => Stage::Loss { mode: f.count("mode")?, eta: f.float_in("eta", 0.0, 1.0, false)? },
        "add" => Stage::Add { mode: f.count("mode")? },
        "subtract" => Stage::Subtract { mode: f.count("mode")? },
        "displaced_add" => Stage::DisplacedAdd { mode: f.count("mode")?, gamma: f.complex("gamma")? },
        "displaced_subtract" => Stage::DisplacedSubtract { mode: f.count("mode")?, gamma: f.complex("gamma")? },
        "delocalized_add" | "delocalized_subtract" => {
            let modes = f.pair("modes")?;
            let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let c1 = f.complex_or("c1", h)?;
            let c2 = f.complex_or("c2", h)?;
            let phi = f.float_or("phi", 0.0)?;
            if op == "delocalized_add" {
                Stage::DelocalizedAdd { modes, c1, c2, phi }
            } else {
                Stage::DelocalizedSubtract { modes, c1, c2, phi }
            }
        }
        "sequence" => {
            let items = f.list("steps")?;
            if items.is_empty() {
                return fail(f.line_of_key("steps"), format!("{}: 'steps' is empty", f.context));
            }
            let mut steps = Vec::new();
            for (k, v) in items.iter().enumerate() {
                let mut s = Fields::new(f.src, v, format!("{} step {k}", f.context))?;
                let mode = s.count("mode")?;
                let step = match s.string("kind")? {
                    "add" => Step::Add(mode),
                    "subtract" => Step::Subtract(mode),
                    other => {
                        return fail(s.line_of_key("kind"), format!("{}: kind '{other}' is not add/subtract", s.context))
                    }
                };
                s.finish()?;
                steps.push(step);
            }
            Stage::Sequence { steps }
        }
        "superpose_sequences" => Stage::SuperposeSequences {
            mode: f.count("mode")?,
            c1: f.complex("c1")?,
            c2: f.complex("c2")?,
        },
        "affine_number" => Stage::AffineNumber { mode: f.count("mode")?, a: f.complex("a")?, b: f.complex("b")? },
        "orthogonalize" => Stage::Orthogonalize { mode: f.count("mode")?, operator: ortho(f)? },
        "cv_qubit" => Stage::CvQubit {
            mode: f.count("mode")?,
            operator: ortho(f)?,
            mu: f.complex("mu")?,
            nu: f.complex("nu")?,
        },
        "kerr_emulate" => {
            let defaults = KerrConfig::default();
            Stage::KerrEmulate {
                mode: f.count("mode")?,
                phase: f.float_or("phase", defaults.phase)?,
                min_support: f.float_or("min_support", defaults.min_support)?,
            }
        }
        "subtract_physical" => Stage::SubtractPhysical {
            mode: f.count("mode")?,
            reflectivity: f.float_in("reflectivity", 0.0, 1.0, true)?,
            detector: detector_or_ideal(f)?,
        },
        "add_physical" => Stage::AddPhysical {
            mode: f.count("mode")?,
            zeta: f.float_in("zeta", 0.0, 1.0, true)?,
            detector: detector_or_ideal(f)?,
        },
        "herald" => {
            let items = f.list("detectors")?;
            if items.is_empty() {
                return fail(f.line_of_key("detectors"), format!("{}: 'detectors' is empty", f.context));
            }
            let mut detections: Vec<Detection> = Vec::new();
            for (k, v) in items.iter().enumerate() {
                let mut d = Fields::new(f.src, v, format!("{} detector {k}", f.context))?;
                let mode = d.count("mode")?;
                let detector = if d.table.contains_key("model") {
                    d.used.extend(["model", "efficiency", "dark_rate", "max_count", "n"].map(String::from));
                    parse_detector(&d, v, &["mode", "outcome"])?
                } else {
                    DetectorModel::ideal_on_off()
                };
                let outcome = parse_outcome(&d, d.table.get("outcome").ok_or_else(|| PlanError {
                    line: d.line,
                    message: format!("{}: missing parameter 'outcome'", d.context),
                })?)?;
                d.used.push("outcome".into());
                if let Err(e) = detector.element(outcome, 1) {
                    if !matches!(e, crate::Error::InsufficientCutoff(_)) {
                        return fail(d.line, format!("{}: {e}", d.context));
                    }
                }
                if detections.iter().any(|x| x.mode == mode) {
                    return fail(d.line, format!("{}: mode {mode} detected twice", d.context));
                }
                d.finish()?;
                detections.push(Detection { mode, detector, outcome });
            }
            Stage::Herald { detections }
        }
        "herald_fock" => {
            let stage = Stage::HeraldFock {
                mode: f.count("mode")?,
                k: f.positive("k", 1)?,
                lambda: f.float_in("lambda", -1.0, 1.0, true)?,
                detector: detector_or_ideal(f)?,
                depth: f.count_or("depth", 0)?,
            };
            if let Stage::HeraldFock { k, detector: DetectorModel::OnOff { .. }, depth, .. } = stage {
                if k > 1usize << depth.min(16) || (depth == 0 && k > 1) {
                    return fail(f.line, format!("{}: {k} clicks need a deeper detector tree", f.context));
                }
            }
            stage
        }
        "condition_quadrature" => {
            let mode = f.count("mode")?;
            let theta = f.float_or("theta", 0.0)?;
            let items = f.list("window")?;
            if items.len() != 2 {
                return fail(f.line_of_key("window"), format!("{}: 'window' must be [lo, hi]", f.context));
            }
            let lo = f.number(&items[0], "window")?;
            let hi = f.number(&items[1], "window")?;
            if lo >= hi {
                return fail(f.line_of_key("window"), format!("{}: window needs lo < hi", f.context));
            }
            Stage::ConditionQuadrature { mode, theta, window: (lo, hi) }
        }
        _ => unreachable!("checked against STAGE_NAMES"),
    };
    Ok(stage)
}

fn parse_measurement(f: &mut Fields<'_, '_, '_>, index: usize, cutoff: usize) -> PResult<Measurement> {
    let kind = f.string("kind")?;
    if !MEASUREMENT_KINDS.contains(&kind) {
        return fail(
            f.line_of_key("kind"),
            format!("measure {index}: unknown measurement '{kind}' (known: {})", MEASUREMENT_KINDS.join(", ")),
        );
    }
    f.context = format!("measure {index} ({kind})");
    let name = match f.get("name") {
        Some(v) => match v.get_ref() {
            DeValue::String(s) => {
                let s = s.to_string();
                if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return fail(f.line_of(v), format!("{}: name must be [A-Za-z0-9_-]+", f.context));
                }
                s
            }
            _ => return f.bad(v, "name", "a string"),
        },
        None => format!("{kind}_{index}"),
    };
    let m = match kind {
        "state" => MeasureKind::State { modes: f.modes_or_empty("modes")? },
        "fidelity" => {
            let modes = f.modes_or_empty("modes")?;
            let v = f.req("target")?;
            let mut t = Fields::new(f.src, v, format!("{} target", f.context))?;
            let target = if t.table.contains_key("amplitudes") {
                let items = t.list("amplitudes")?;
                let amps = items.iter().map(|a| t.complex_of(a, "amplitudes")).collect::<PResult<Vec<_>>>()?;
                if amps.iter().all(|z| z.norm() == 0.0) {
                    return fail(t.line, format!("{}: amplitudes are all zero", t.context));
                }
                FidelityTarget::Amplitudes(amps)
            } else {
                FidelityTarget::State(parse_state(&mut t)?)
            };
            t.finish()?;
            MeasureKind::Fidelity { modes, target }
        }
        "mean_photon" => MeasureKind::MeanPhoton { mode: f.count("mode")? },
        "photon_statistics" => MeasureKind::PhotonStatistics { modes: f.modes_or_empty("modes")? },
        "discorrelation" => MeasureKind::Discorrelation { modes: f.pair("modes")?, levels: f.positive("levels", 3)? },
        "log_negativity" => MeasureKind::LogNegativity { part: f.modes_of("part")? },
        "purity" => MeasureKind::Purity { modes: f.modes_or_empty("modes")? },
        "wigner" => {
            let mode = f.count("mode")?;
            let half_width = match f.get("half_width") {
                Some(v) => {
                    let w = f.number(v, "half_width")?;
                    if !(w > 0.0 && w.is_finite()) {
                        return fail(f.line_of(v), format!("{}: half_width must be positive", f.context));
                    }
                    Some(w)
                }
                None => None,
            };
            let points = f.count_or("points", 201)?;
            if points < 2 {
                return fail(f.line_of_key("points"), format!("{}: points must be at least 2", f.context));
            }
            MeasureKind::Wigner { mode, half_width, points }
        }
        "negativity_volume" => MeasureKind::NegativityVolume { mode: f.count("mode")? },
        "homodyne" => MeasureKind::Homodyne {
            mode: f.count("mode")?,
            phases: f.positive("phases", 12)?,
            samples: f.positive("samples", 1000)?,
        },
        "tomography" => MeasureKind::Tomography {
            mode: f.count("mode")?,
            phases: f.positive("phases", 12)?,
            samples: f.positive("samples", 8334)?,
            cutoff: f.positive("cutoff", cutoff.min(10))?,
            max_iterations: f.positive("max_iterations", 500)?,
        },
        _ => unreachable!("checked against MEASUREMENT_KINDS"),
    };
    if let MeasureKind::Tomography { phases, .. } = m {
        if phases < 8 {
            return fail(f.line_of_key("phases"), format!("{}: tomography needs at least 8 phases", f.context));
        }
    }
    Ok(Measurement { name, kind: m })
}

fn check_measurement_modes(m: &Measurement, live: &[usize], line: usize, j: usize) -> PResult<()> {
    let ctx = format!("measure {j} ({})", m.kind.name());
    let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
    match &m.kind {
        MeasureKind::State { modes } | MeasureKind::Purity { modes } | MeasureKind::PhotonStatistics { modes } => {
            if !increasing(modes) {
                return fail(line, format!("{ctx}: modes must be listed in increasing order"));
            }
        }
        MeasureKind::Fidelity { modes, target } => {
            let n = if modes.is_empty() { live.len() } else { modes.len() };
            if !increasing(modes) {
                return fail(line, format!("{ctx}: modes must be listed in increasing order"));
            }
            if let FidelityTarget::State(target) = target {
                if n != target.num_modes() {
                return fail(
                    line,
                        format!("{ctx}: target {} has {} mode(s), compared against {n}", target.name(), target.num_modes()),
                    );
                }
            }
        }
        MeasureKind::LogNegativity { part } => {
            if part.is_empty() || part.len() >= live.len() || !increasing(part) {
                return fail(line, format!("{ctx}: 'part' must be an increasing proper subset of the live modes"));
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[space]\nmodes = 1\ncutoff = 4\n";

    #[test]
    fn minimal_plan() {
        let p = parse_plan(MINIMAL).unwrap();
        assert_eq!(p.seed, 0);
        assert!(p.stages.is_empty() && p.inputs.is_empty());
    }

    #[test]
    fn misspelled_stage_names_its_line() {
        let text = format!("{MINIMAL}\n[[stage]]\nop = \"subtract_foton\"\nmode = 0\n");
        let e = parse_plan(&text).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.message.contains("subtract_foton"), "{}", e.message);
    }

    #[test]
    fn unknown_parameter_rejected() {
        let text = format!("{MINIMAL}\n[[stage]]\nop = \"phase\"\nmode = 0\ntheta = 1.0\ntehta = 2\n");
        let e = parse_plan(&text).unwrap_err();
        assert_eq!(e.line, 9);
    }

    #[test]
    fn measured_mode_cannot_be_reused() {
        let text = "[space]\nmodes = 2\ncutoff = 4\n\n[[stage]]\nop = \"herald\"\n\
                    detectors = [{ mode = 1, outcome = \"click\" }]\n\n[[stage]]\nop = \"add\"\nmode = 1\n";
        let e = parse_plan(text).unwrap_err();
        assert_eq!(e.line, 11);
        assert!(e.message.contains("already measured"));
    }

    #[test]
    fn syntax_error_has_line() {
        let e = parse_plan("[space]\nmodes = = 1\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
