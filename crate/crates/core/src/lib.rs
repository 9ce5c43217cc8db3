//! Forward models, simulation and Poisson maximum-likelihood fitting for pulsed
//! photon-coincidence histograms.
//!
//! The crate is organised around four layers:
//!
//! * [`model`]: line shapes (Voigt instrument response, two-sided exponential
//!   decay), the peak-train forward model and the CW trough model.
//! * [`simulator`]: path enumeration of interferometer peak areas and seeded
//!   Poisson sampling of synthetic histograms.
//! * [`estimation`]: objectives, the multi-start separable fitter, confidence
//!   intervals and the fitter-comparison harness.
//! * [`analysis`]: visibility, g²(0), jitter model and linewidth extraction.

pub mod analysis;
pub mod estimation;
pub mod model;
pub mod rng;
pub mod simulator;

pub use model::{BeamSplitter, Histogram, TimeGrid, VoigtIrf};
