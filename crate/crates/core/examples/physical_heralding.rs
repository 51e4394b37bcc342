// Heralded operations with explicit ancillas and detectors: tapped
// subtraction, squeezer-based addition and Fock states from EPR pairs.

use qlight::analysis::mean_photon;
use qlight::fock::{fidelity, trace_distance};
use qlight::herald::{add_ideal, add_physical, herald_fock, subtract_ideal, subtract_physical, DetectorModel};
use qlight::states::{make_state, StateSpec};
use qlight::{ModeSpace, C64};

pub fn run_example() -> qlight::Result<()> {
    let space = ModeSpace::single(40)?;
    let ideal = DetectorModel::ideal_on_off();

    println!("thermal input, r = 0.05, ideal on/off click:");
    for nbar in [0.5, 1.0, 2.0] {
        let thermal = make_state(&StateSpec::Thermal { mean: nbar }, &ModeSpace::single(80)?)?;
        let out = subtract_physical(&thermal, 0, 0.05, ideal)?;
        println!("  nbar {nbar}: <n> = {:.5}, p = {:.3e}", mean_photon(&out.state, 0)?, out.likelihood.value());
    }

    let coherent = make_state(&StateSpec::Coherent { alpha: C64::new(0.8, 0.0) }, &space)?;
    let target = subtract_ideal(&coherent, 0)?.state;
    println!("tap subtraction on |0.8>, distance to a|0.8>:");
    for r in [0.2, 0.1, 0.05] {
        let out = subtract_physical(&coherent, 0, r, ideal)?;
        println!("  r {r}: {:.3e}", trace_distance(&out.state, &target)?);
    }

    let target = add_ideal(&coherent, 0)?.state;
    let lossy = DetectorModel::OnOff { efficiency: 0.6, dark_rate: 1e-4 };
    println!("squeezer addition on |0.8>, fidelity with a^dag|0.8>:");
    for zeta in [0.2, 0.1, 0.05] {
        let a = add_physical(&coherent, 0, zeta, ideal)?;
        let b = add_physical(&coherent, 0, zeta, lossy)?;
        println!(
            "  zeta {zeta}: ideal detector {:.6}, lossy detector {:.6}",
            fidelity(&a.state, &target)?,
            fidelity(&b.state, &target)?
        );
    }

    let two = make_state(&StateSpec::Fock { n: 2 }, &ModeSpace::single(30)?)?;
    println!("two photons from an EPR pair, two on/off leaves:");
    for lambda in [0.1, 0.3, 0.5] {
        let out = herald_fock(2, lambda, ideal, 1, 30)?;
        println!("  lambda {lambda}: fidelity {:.5}, p = {:.3e}", fidelity(&out.state, &two)?, out.likelihood.value());
    }
    let pnr = DetectorModel::Pnr { efficiency: 1.0, max_count: 4 };
    let out = herald_fock(2, 0.3, pnr, 0, 30)?;
    println!("  number-resolving detector: fidelity {:.5}", fidelity(&out.state, &two)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
