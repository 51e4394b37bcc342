// Builds the named states and prints their norms, purities and mean
// photon numbers.

use qlight::analysis::mean_photon;
use qlight::states::{make_state, Parity, StateSpec};
use qlight::{ModeSpace, C64};

pub fn run_example() -> qlight::Result<()> {
    let one = ModeSpace::single(60)?;
    let two = ModeSpace::new(2, 20)?;
    let specs = [
        (StateSpec::Vacuum, one),
        (StateSpec::Fock { n: 3 }, one),
        (StateSpec::Coherent { alpha: C64::new(1.0, 0.5) }, one),
        (StateSpec::Thermal { mean: 0.8 }, one),
        (StateSpec::SqueezedVacuum { lambda: 0.3 }, one),
        (StateSpec::Cat { alpha: C64::new(1.2, 0.0), parity: Parity::Odd }, one),
        (StateSpec::Epr { lambda: 0.3 }, two),
        (StateSpec::TwoModeAddedCoherent { alpha: C64::new(0.7, 0.0), phi: std::f64::consts::PI }, two),
    ];
    println!("{:<26} {:>8} {:>8} {:>8}", "state", "trace", "purity", "<n_0>");
    for (spec, space) in specs {
        let state = make_state(&spec, &space)?;
        println!(
            "{:<26} {:>8.5} {:>8.5} {:>8.5}",
            spec.name(),
            state.trace(),
            state.purity(),
            mean_photon(&state, 0)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
