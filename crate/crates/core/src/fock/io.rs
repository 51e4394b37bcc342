//! Line-based text format for kets and density operators.
//!
//! ```text
//! <num_modes> <cutoff> ket
//! <index> <re> <im>
//! ...
//! ```
//! or, for density operators, a `density` header followed by
//! `<row> <col> <re> <im>` lines. Every entry is written, with 17
//! significant digits, so values round-trip exactly.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{DensityOperator, Ket, ModeSpace, QuantumState, C64};
use crate::error::{Error, Result};

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ket_to_text(ket: &Ket) -> String {
    let space = ket.space();
    let mut out = format!("{} {} ket\n", space.num_modes(), space.cutoff());
    for (i, z) in ket.amplitudes().iter().enumerate() {
        let _ = writeln!(out, "{i} {} {}", fmt_f64(z.re), fmt_f64(z.im));
    }
    out
}

pub fn density_to_text(rho: &DensityOperator) -> String {
    let space = rho.space();
    let dim = space.dimension();
    let mut out = format!("{} {} density\n", space.num_modes(), space.cutoff());
    let m = rho.matrix();
    for r in 0..dim {
        for c in 0..dim {
            let z = m[(r, c)];
            let _ = writeln!(out, "{r} {c} {} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

pub fn state_to_text(state: &QuantumState) -> String {
    match state {
        QuantumState::Pure(k) => ket_to_text(k),
        QuantumState::Mixed(r) => density_to_text(r),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format(format!("line {line}: expected {what}")))
}

pub fn state_from_text(text: &str) -> Result<QuantumState> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty state file".into()))?;
    let mut h = header.split_whitespace();
    let modes: usize = parse_num(h.next(), ln, "mode count")?;
    let cutoff: usize = parse_num(h.next(), ln, "cutoff")?;
    let kind = h.next().unwrap_or("");
    let space = ModeSpace::new(modes, cutoff)?;
    let dim = space.dimension();
    match kind {
        "ket" => {
            let mut amps = DVector::<C64>::zeros(dim);
            let mut seen = vec![false; dim];
            for (ln, line) in lines {
                let mut t = line.split_whitespace();
                let i: usize = parse_num(t.next(), ln, "index")?;
                let re: f64 = parse_num(t.next(), ln, "real part")?;
                let im: f64 = parse_num(t.next(), ln, "imaginary part")?;
                if i >= dim {
                    return Err(Error::Format(format!("line {ln}: index {i} out of range")));
                }
                amps[i] = C64::new(re, im);
                seen[i] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::Format("ket file is missing entries".into()));
            }
            Ok(QuantumState::Pure(Ket::new(space, amps)?))
        }
        "density" => {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            let mut count = 0usize;
            for (ln, line) in lines {
                let mut t = line.split_whitespace();
                let r: usize = parse_num(t.next(), ln, "row")?;
                let c: usize = parse_num(t.next(), ln, "column")?;
                let re: f64 = parse_num(t.next(), ln, "real part")?;
                let im: f64 = parse_num(t.next(), ln, "imaginary part")?;
                if r >= dim || c >= dim {
                    return Err(Error::Format(format!("line {ln}: entry ({r},{c}) out of range")));
                }
                m[(r, c)] = C64::new(re, im);
                count += 1;
            }
            if count != dim * dim {
                return Err(Error::Format("density file is missing entries".into()));
            }
            Ok(QuantumState::Mixed(DensityOperator::new(space, m)?))
        }
        other => Err(Error::Format(format!("line {ln}: unknown state kind '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let s = ModeSpace::new(2, 1).unwrap();
        let text = ket_to_text(&Ket::vacuum(s));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("2 1 ket"));
        assert_eq!(lines.next(), Some("0 1.0000000000000000e0 0.0000000000000000e0"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn rejects_truncated_files() {
        assert!(state_from_text("1 2 ket\n0 1 0\n").is_err());
        assert!(state_from_text("1 2 blob\n").is_err());
        assert!(state_from_text("").is_err());
    }
}
