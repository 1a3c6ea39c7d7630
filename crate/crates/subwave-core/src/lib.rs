//! Capacitance-matrix models for chains of high-contrast subwavelength
//! resonators: boundary-integral assembly on sphere unions, resonance
//! spectra, multiple-scattering expansions of defect perturbations, and
//! the defect-localization experiments built on top of them.

pub mod bie;
pub mod capacitance;
pub mod geometry;
pub mod harmonics;
pub mod quadrature;
pub mod scattering;
pub mod sensing;
pub mod spectral;
