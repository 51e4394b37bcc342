// Simulated homodyne data from a single photon and its maximum-likelihood
// reconstruction.

use std::time::Instant;

use qlight::analysis::{equally_spaced_phases, sample_homodyne};
use qlight::fock::fidelity;
use qlight::states::{make_state, StateSpec};
use qlight::tomography::{maxlik_reconstruct, TomographyConfig};
use qlight::{ModeSpace, QuantumState};

pub fn run_example() -> qlight::Result<()> {
    let space = ModeSpace::single(10)?;
    let one = make_state(&StateSpec::Fock { n: 1 }, &space)?;
    let samples = sample_homodyne(&one, 0, &equally_spaced_phases(12), 8334, 42)?;
    println!("{} samples over 12 phases", samples.len());

    let start = Instant::now();
    let rec = maxlik_reconstruct(&samples, &TomographyConfig::default())?;
    let estimate = QuantumState::Mixed(rec.state.clone());
    println!(
        "{} iterations (converged: {}), log-likelihood {:.6}, {:.2} s",
        rec.iterations,
        rec.converged,
        rec.log_likelihood.last().copied().unwrap_or(f64::NAN),
        start.elapsed().as_secs_f64()
    );
    println!("fidelity with |1> = {:.5}", fidelity(&estimate, &one)?);
    let p = rec.state.probabilities();
    println!("photon numbers: p0 {:.4}, p1 {:.4}, p2 {:.4}", p[0], p[1], p[2]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
