// Wigner functions on a phase-space grid: anchor values, normalization,
// negativity and a grid file for plotting.

use std::f64::consts::PI;

use qlight::analysis::{wigner, wigner_at, GridSpec};
use qlight::herald::add_ideal;
use qlight::states::{make_state, Parity, StateSpec};
use qlight::{ModeSpace, C64};

pub fn run_example() -> qlight::Result<()> {
    let space = ModeSpace::single(30)?;
    let vacuum = make_state(&StateSpec::Vacuum, &space)?;
    let one = make_state(&StateSpec::Fock { n: 1 }, &space)?;
    println!("W_vac(0,0) * pi = {:.9}", wigner_at(&vacuum, 0, 0.0, 0.0)? * PI);
    println!("W_1(0,0) * pi   = {:.9}", wigner_at(&one, 0, 0.0, 0.0)? * PI);

    let grid = GridSpec::square(5.0, 101);
    let cases = [
        ("vacuum", vacuum),
        ("fock 1", one),
        ("added coherent 0.5", add_ideal(&make_state(&StateSpec::Coherent { alpha: C64::new(0.5, 0.0) }, &space)?, 0)?.state),
        ("odd cat 1.5", make_state(&StateSpec::Cat { alpha: C64::new(1.5, 0.0), parity: Parity::Odd }, &space)?),
    ];
    println!("{:<20} {:>10} {:>10} {:>10}", "state", "integral", "min", "neg. vol.");
    for (name, state) in &cases {
        let w = wigner(state, 0, &grid)?;
        println!("{name:<20} {:>10.6} {:>10.6} {:>10.6}", w.integral(), w.min(), w.negative_volume());
    }

    let w = wigner(&cases[3].1, 0, &GridSpec::square(4.0, 41))?;
    let path = std::env::temp_dir().join("odd_cat_wigner.txt");
    std::fs::write(&path, w.to_text())?;
    println!("grid written to {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
