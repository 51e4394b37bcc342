// Ideal photon addition and subtraction, their sequences and
// superpositions, and the orthogonalizing operators.

use qlight::fock::fidelity;
use qlight::herald::{
    add_ideal, apply_sequence, orthogonalize, subtract_ideal, superpose_sequences, OrthoOperator, Step,
};
use qlight::states::{make_state, Parity, StateSpec};
use qlight::{ModeSpace, QuantumState, C64};

pub fn run_example() -> qlight::Result<()> {
    let space = ModeSpace::single(40)?;
    let coherent = make_state(&StateSpec::Coherent { alpha: C64::new(0.5, 0.0) }, &space)?;

    let added = add_ideal(&coherent, 0)?;
    println!("a^dag |0.5>: weight {:.6}, vacuum population {:.2e}", added.likelihood.value(), population(&added.state, 0));

    let sub = subtract_ideal(&coherent, 0)?;
    println!("a |0.5>: fidelity with input {:.12}", fidelity(&sub.state, &coherent)?);

    let squeezed = make_state(&StateSpec::SqueezedVacuum { lambda: 0.2 }, &space)?;
    let cat = subtract_ideal(&squeezed, 0)?;
    let target = make_state(&StateSpec::Cat { alpha: C64::new(0.0, 0.7842), parity: Parity::Odd }, &space)?;
    println!("a S|0>: odd cat fidelity {:.6}", fidelity(&cat.state, &target)?);

    let thermal = make_state(&StateSpec::Thermal { mean: 0.5 }, &space)?;
    let sa = apply_sequence(&thermal, &[Step::Subtract(0), Step::Add(0)])?;
    let asub = apply_sequence(&thermal, &[Step::Add(0), Step::Subtract(0)])?;
    println!("thermal: a^dag a weight {:.6}, a a^dag weight {:.6}", sa.likelihood.value(), asub.likelihood.value());

    let same = superpose_sequences(&coherent, 0, C64::new(1.0, 0.0), C64::new(-1.0, 0.0))?;
    println!("(a a^dag - a^dag a)|0.5>: fidelity with input {:.12}", fidelity(&same.state, &coherent)?);

    let ortho = orthogonalize(&coherent, 0, OrthoOperator::Number)?;
    let overlap = ortho.state.as_ket().unwrap().inner(coherent.as_ket().unwrap())?;
    println!("number orthogonalizer: |<out|in>| = {:.2e}", overlap.norm());

    let fock = make_state(&StateSpec::Fock { n: 2 }, &space)?;
    match orthogonalize(&fock, 0, OrthoOperator::Number) {
        Err(e) if e.is_herald_impossible() => println!("number orthogonalizer on |2>: {e}"),
        other => println!("unexpected: {:?}", other.map(|o| o.likelihood)),
    }
    Ok(())
}

fn population(state: &QuantumState, n: usize) -> f64 {
    state.to_density().probabilities()[n]
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
