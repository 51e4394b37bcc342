//! Observables: quadrature statistics and homodyne sampling, Wigner
//! functions, photon-number statistics and entanglement.

mod quadrature;
mod stats;
mod wigner;

pub use quadrature::{
    equally_spaced_phases, hermite_functions, quadrature_extent, quadrature_operator,
    quadrature_pdf, sample_homodyne, sample_homodyne_with, samples_from_text, samples_to_text,
    window_element, QuadratureSample,
};
pub(crate) use quadrature::{overlap_integrals, reduced};
pub use stats::{
    discorrelation_check, log_negativity, mean_photon, photon_statistics, Discorrelation,
    PhotonStatistics, DISCORRELATION_TOL,
};
pub use wigner::{
    displacement_elements, wigner, wigner_at, wigner_negativity_volume, GridSpec, WignerGrid,
};
