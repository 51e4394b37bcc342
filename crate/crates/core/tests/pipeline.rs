use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use qlight::analysis::{equally_spaced_phases, log_negativity, mean_photon, sample_homodyne_with, samples_to_text};
use qlight::fock::io::{state_from_text, state_to_text};
use qlight::herald::{apply_ideal, subtract_physical, DetectorModel, OperatorSuperposition};
use qlight::plan::{
    execute_plan, export_outputs, parse_metrics, parse_plan, print_plan, CircuitPlan, FINAL_STATE_FILE,
    METRICS_FILE, PLAN_FILE, REPORT_FILE,
};
use qlight::rng::{stream, MEASURE_STREAM_BASE};
use qlight::states::{make_state, StateSpec};
use qlight::{ModeSpace, C64};

fn plans_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/plans")
}

fn load(name: &str) -> CircuitPlan {
    let text = fs::read_to_string(plans_dir().join(name)).unwrap();
    parse_plan(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn example_plans() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(plans_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
}

#[test]
fn example_plans_parse_and_print_back() {
    let paths = example_plans();
    assert!(paths.len() >= 6);
    for path in paths {
        let plan = parse_plan(&fs::read_to_string(&path).unwrap()).unwrap();
        let printed = print_plan(&plan);
        assert_eq!(parse_plan(&printed).unwrap(), plan, "{}", path.display());
    }
}

#[test]
fn malformed_fixtures_are_rejected_with_a_line() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/plans");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let e = parse_plan(&fs::read_to_string(&path).unwrap()).unwrap_err();
        assert!(e.line >= 1, "{}", path.display());
        n += 1;
    }
    assert_eq!(n, 5);
}

#[test]
fn reruns_are_byte_identical() {
    let plan = load("delocalized_addition.toml");
    let a = execute_plan(&plan).unwrap();
    let b = execute_plan(&plan).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = export_outputs(&a, da.path()).unwrap();
    let fb = export_outputs(&b, db.path()).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn seed_drives_sampled_measurements_only() {
    let mut plan = load("delocalized_addition.toml");
    let a = execute_plan(&plan).unwrap();
    plan.seed += 1;
    let b = execute_plan(&plan).unwrap();
    assert_ne!(a.metric("homodyne.mean_x"), b.metric("homodyne.mean_x"));
    assert_eq!(a.metric("entanglement.log_negativity"), b.metric("entanglement.log_negativity"));
}

#[test]
fn export_round_trips_metrics_and_state() {
    let report = execute_plan(&load("thermal_subtraction.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export_outputs(&report, dir.path()).unwrap();
    for f in [REPORT_FILE, METRICS_FILE, PLAN_FILE, FINAL_STATE_FILE] {
        assert!(files.contains(&dir.path().join(f)), "{f}");
    }
    let metrics = parse_metrics(&fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap()).unwrap();
    assert_eq!(metrics, report.metrics());
    let state = state_from_text(&fs::read_to_string(dir.path().join(FINAL_STATE_FILE)).unwrap()).unwrap();
    assert_eq!(state_to_text(&state), state_to_text(&report.final_state));
    let echo = fs::read_to_string(dir.path().join(PLAN_FILE)).unwrap();
    assert_eq!(parse_plan(&echo).unwrap(), load("thermal_subtraction.toml"));
}

#[test]
fn each_wigner_request_writes_one_full_grid() {
    let report = execute_plan(&load("odd_cat.toml")).unwrap();
    let grids: Vec<_> = report
        .measurements
        .iter()
        .flat_map(|m| m.artifacts.iter())
        .filter(|a| a.file.ends_with(".wigner.txt"))
        .collect();
    assert_eq!(grids.len(), 1);
    assert_eq!(grids[0].contents.lines().count(), 81 * 81);
    for line in grids[0].contents.lines() {
        assert_eq!(line.split_whitespace().count(), 3);
    }
}

#[test]
fn plan_stages_match_direct_calls_bit_for_bit() {
    let report = execute_plan(&load("thermal_subtraction.toml")).unwrap();
    let thermal = make_state(&StateSpec::Thermal { mean: 1.0 }, &ModeSpace::single(40).unwrap()).unwrap();
    let direct = subtract_physical(&thermal, 0, 0.05, DetectorModel::ideal_on_off()).unwrap();
    assert_eq!(state_to_text(&report.final_state), state_to_text(&direct.state));
    assert_eq!(report.metric("stage.0.probability"), direct.probability());
    assert_eq!(report.metric("subtracted.mean_photon"), Some(mean_photon(&direct.state, 0).unwrap()));

    let plan = load("delocalized_addition.toml");
    let report = execute_plan(&plan).unwrap();
    let one = ModeSpace::single(20).unwrap();
    let coherent = make_state(&StateSpec::Coherent { alpha: C64::new(1.0, 0.0) }, &one).unwrap();
    let c = C64::new(FRAC_1_SQRT_2, 0.0);
    let sup = OperatorSuperposition::delocalized_add((0, 1), c, c, PI);
    let direct = apply_ideal(&coherent.tensor(&coherent).unwrap(), &sup).unwrap();
    assert_eq!(state_to_text(&report.final_state), state_to_text(&direct.state));
    assert_eq!(
        report.metric("entanglement.log_negativity"),
        Some(log_negativity(&direct.state, &[0]).unwrap())
    );
    let j = plan.measurements.iter().position(|m| m.name == "homodyne").unwrap();
    let mut rng = stream(plan.seed, MEASURE_STREAM_BASE + j as u64);
    let samples = sample_homodyne_with(&direct.state, 0, &equally_spaced_phases(4), 200, &mut rng).unwrap();
    let artifact = &report.measurement("homodyne").unwrap().artifacts[0];
    assert_eq!(artifact.contents, samples_to_text(&samples));
}

#[test]
fn example_plans_reach_their_reference_values() {
    let scissors = execute_plan(&load("scissors.toml")).unwrap();
    let p = (-0.09f64).exp() * 1.09 / 4.0;
    assert!((scissors.metric("stage.2.probability").unwrap() - p).abs() < 1e-12);
    assert!(scissors.metric("truncated.fidelity").unwrap() > 1.0 - 1e-12);

    let fock = execute_plan(&load("fock_herald.toml")).unwrap();
    let oracle = qlight::oracle::two_leaf_fock2_fidelity(0.3);
    assert!((fock.metric("two_photons.fidelity").unwrap() - oracle).abs() < 1e-9);

    let thermal = execute_plan(&load("thermal_subtraction.toml")).unwrap();
    let oracle = qlight::oracle::thermal_subtracted_mean(1.0, 0.05);
    assert!((thermal.metric("subtracted.mean_photon").unwrap() - oracle).abs() < 1e-8);

    let tomo = execute_plan(&load("single_photon_tomography.toml")).unwrap();
    assert!(tomo.metric("tomography.fidelity").unwrap() > 0.99);
    assert!(tomo.metric("wigner.origin").unwrap() < 0.0);
}
