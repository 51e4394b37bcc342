mod states {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/states.rs"));
}

mod ideal_heralding {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ideal_heralding.rs"));
}

mod physical_heralding {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/physical_heralding.rs"));
}

mod wigner {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/wigner.rs"));
}

mod entanglement {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/entanglement.rs"));
}

mod kerr {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kerr.rs"));
}

mod tomography {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tomography.rs"));
}

mod run_plan {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/run_plan.rs"));
}

mod oracles {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/oracles.rs"));
}

#[test]
fn states_example_runs() {
    states::run_example().expect("states example should run");
}

#[test]
fn ideal_heralding_example_runs() {
    ideal_heralding::run_example().expect("ideal_heralding example should run");
}

#[test]
fn physical_heralding_example_runs() {
    physical_heralding::run_example().expect("physical_heralding example should run");
}

#[test]
fn wigner_example_runs() {
    wigner::run_example().expect("wigner example should run");
}

#[test]
fn entanglement_example_runs() {
    entanglement::run_example().expect("entanglement example should run");
}

#[test]
fn kerr_example_runs() {
    kerr::run_example().expect("kerr example should run");
}

#[test]
fn tomography_example_runs() {
    tomography::run_example().expect("tomography example should run");
}

#[test]
fn run_plan_example_runs() {
    run_plan::run_example().expect("run_plan example should run");
}

#[test]
fn oracles_example_runs() {
    oracles::run_example().expect("oracles example should run");
}
