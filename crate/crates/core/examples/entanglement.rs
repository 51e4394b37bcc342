// Delocalized photon addition on two coherent beams: discorrelated photon
// numbers and entanglement that depends only on the relative phase.

use std::f64::consts::PI;

use qlight::analysis::{discorrelation_check, log_negativity};
use qlight::herald::{apply_ideal, OperatorSuperposition};
use qlight::states::{make_state, StateSpec};
use qlight::{ModeSpace, C64};

pub fn run_example() -> qlight::Result<()> {
    let space = ModeSpace::new(2, 30)?;
    let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    println!("{:>6} {:>14} {:>14}", "alpha", "LN (phi = pi)", "LN (phi = 0)");
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        let mut ln = [0.0; 2];
        for (slot, phi) in [PI, 0.0].into_iter().enumerate() {
            let input = make_state(&StateSpec::Coherent { alpha: C64::new(alpha, 0.0) }, &ModeSpace::single(30)?)?;
            let pair = input.tensor(&input)?;
            let out = apply_ideal(&pair, &OperatorSuperposition::delocalized_add((0, 1), c, c, phi))?;
            ln[slot] = log_negativity(&out.state, &[0])?;
        }
        println!("{alpha:>6} {:>14.9} {:>14.9}", ln[0], ln[1]);
    }

    let input = make_state(&StateSpec::TwoModeAddedCoherent { alpha: C64::new(1.0, 0.0), phi: PI }, &space)?;
    let d = discorrelation_check(&input, (0, 1), 3)?;
    println!("discorrelation: {d:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
