// Emulating a photon-number-dependent phase with the superposition
// c1 a a^dag + c2 a^dag a on weak coherent inputs.

use std::f64::consts::FRAC_PI_2;

use qlight::herald::{kerr_emulate, KerrConfig};
use qlight::states::{make_state, StateSpec};
use qlight::{ModeSpace, C64};

pub fn run_example() -> qlight::Result<()> {
    let space = ModeSpace::single(20)?;
    let config = KerrConfig { phase: FRAC_PI_2, min_support: 0.99, ..KerrConfig::default() };
    println!("{:>6} {:>10} {:>22} {:>22}", "alpha", "fidelity", "c1", "c2");
    for alpha in [0.1, 0.2, 0.3, 0.5] {
        let input = make_state(&StateSpec::Coherent { alpha: C64::new(alpha, 0.0) }, &space)?;
        let k = kerr_emulate(&input, 0, config)?;
        println!("{alpha:>6} {:>10.6} {:>22.5} {:>22.5}", k.fidelity, k.c1, k.c2);
    }
    let bright = make_state(&StateSpec::Coherent { alpha: C64::new(1.0, 0.0) }, &space)?;
    if let Err(e) = kerr_emulate(&bright, 0, config) {
        println!("alpha 1: {e}");
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
