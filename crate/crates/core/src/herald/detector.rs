use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::C64;

/// Herald detector. All models are diagonal in the Fock basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorModel {
    /// Ideal photon counter whose heralding event is exactly `n` photons.
    Projective { n: usize },
    /// Threshold detector with efficiency `efficiency` and dark-count
    /// probability `dark_rate` per detection window.
    OnOff { efficiency: f64, dark_rate: f64 },
    /// Photon-number-resolving detector with efficiency `efficiency` that
    /// distinguishes `0..max_count` and lumps `>= max_count` together.
    Pnr { efficiency: f64, max_count: usize },
}

/// Detector outcome label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Click,
    NoClick,
    Count(usize),
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Click => write!(f, "click"),
            Outcome::NoClick => write!(f, "no_click"),
            Outcome::Count(k) => write!(f, "count_{k}"),
        }
    }
}

impl DetectorModel {
    /// Unit-efficiency on/off detector without dark counts.
    pub fn ideal_on_off() -> Self {
        DetectorModel::OnOff { efficiency: 1.0, dark_rate: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DetectorModel::Projective { .. } => Ok(()),
            DetectorModel::OnOff { efficiency, dark_rate } => {
                if !(0.0..=1.0).contains(&efficiency) {
                    return Err(Error::invalid(format!("efficiency {efficiency} outside [0, 1]")));
                }
                if !(0.0..1.0).contains(&dark_rate) {
                    return Err(Error::invalid(format!("dark rate {dark_rate} outside [0, 1)")));
                }
                Ok(())
            }
            DetectorModel::Pnr { efficiency, max_count } => {
                if !(0.0..=1.0).contains(&efficiency) {
                    return Err(Error::invalid(format!("efficiency {efficiency} outside [0, 1]")));
                }
                if max_count == 0 {
                    return Err(Error::invalid("PNR detector needs max_count >= 1"));
                }
                Ok(())
            }
        }
    }

    /// Outcome that heralds a single photon: `Count(n)` for projective,
    /// `Click` for on/off, `Count(1)` for PNR.
    pub fn single_photon_herald(&self) -> Outcome {
        match *self {
            DetectorModel::Projective { n } => Outcome::Count(n),
            DetectorModel::OnOff { .. } => Outcome::Click,
            DetectorModel::Pnr { .. } => Outcome::Count(1),
        }
    }

    /// Outcome that reports an empty mode.
    pub fn no_photon_outcome(&self) -> Outcome {
        match self {
            DetectorModel::OnOff { .. } => Outcome::NoClick,
            _ => Outcome::Count(0),
        }
    }

    /// Diagonal of the POVM element for `outcome` on levels `0..=cutoff`.
    pub fn element(&self, outcome: Outcome, cutoff: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let levels = cutoff + 1;
        let indicator = |k: usize| -> Result<Vec<f64>> {
            if k > cutoff {
                return Err(Error::InsufficientCutoff(format!(
                    "outcome of {k} photons exceeds cutoff {cutoff}"
                )));
            }
            Ok((0..levels).map(|n| if n == k { 1.0 } else { 0.0 }).collect())
        };
        let complement = |v: Vec<f64>| v.into_iter().map(|p| 1.0 - p).collect::<Vec<_>>();
        match *self {
            DetectorModel::Projective { n } => match outcome {
                Outcome::Count(k) => indicator(k),
                Outcome::Click => indicator(n),
                Outcome::NoClick => Ok(complement(indicator(n)?)),
            },
            DetectorModel::OnOff { efficiency, dark_rate } => {
                let silent: Vec<f64> = (0..levels)
                    .map(|n| (1.0 - dark_rate) * (1.0 - efficiency).powi(n as i32))
                    .collect();
                match outcome {
                    Outcome::NoClick | Outcome::Count(0) => Ok(silent),
                    Outcome::Click => Ok(complement(silent)),
                    Outcome::Count(k) => Err(Error::invalid(format!(
                        "an on/off detector cannot resolve {k} photons"
                    ))),
                }
            }
            DetectorModel::Pnr { efficiency, max_count } => {
                let count = |k: usize| -> Vec<f64> {
                    (0..levels)
                        .map(|n| {
                            if k < max_count {
                                binomial_pmf(n, k, efficiency)
                            } else {
                                (max_count..=n).map(|j| binomial_pmf(n, j, efficiency)).sum()
                            }
                        })
                        .collect()
                };
                match outcome {
                    Outcome::Count(k) if k > max_count => Err(Error::invalid(format!(
                        "PNR detector counts at most {max_count}"
                    ))),
                    Outcome::Count(k) => Ok(count(k)),
                    Outcome::NoClick => Ok(count(0)),
                    Outcome::Click => Ok(complement(count(0))),
                }
            }
        }
    }

    pub fn element_matrix(&self, outcome: Outcome, cutoff: usize) -> Result<DMatrix<C64>> {
        let diag = self.element(outcome, cutoff)?;
        Ok(DMatrix::from_fn(cutoff + 1, cutoff + 1, |r, c| {
            if r == c {
                C64::new(diag[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// A complete, mutually exclusive set of outcomes at this cutoff.
    pub fn outcomes(&self, cutoff: usize) -> Vec<Outcome> {
        match *self {
            DetectorModel::Projective { .. } => (0..=cutoff).map(Outcome::Count).collect(),
            DetectorModel::OnOff { .. } => vec![Outcome::NoClick, Outcome::Click],
            DetectorModel::Pnr { max_count, .. } => (0..=max_count).map(Outcome::Count).collect(),
        }
    }

    /// POVM elements for [`DetectorModel::outcomes`]; they sum to the
    /// identity.
    pub fn povm(&self, cutoff: usize) -> Result<Vec<(Outcome, Vec<f64>)>> {
        self.outcomes(cutoff)
            .into_iter()
            .map(|o| Ok((o, self.element(o, cutoff)?)))
            .collect()
    }
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    crate::fock::binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}
