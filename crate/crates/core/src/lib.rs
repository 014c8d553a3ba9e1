//! Entanglement witnesses and quantum-correlation measures for small
//! spin-1/2 lattice models.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] builds Hamiltonians and site/collective spin operators.
//! * [`thermal`] diagonalizes models, forms Boltzmann ensembles and produces
//!   expectation values and reduced density matrices.
//! * [`witness`] evaluates the static witnesses (one-tangle, concurrence,
//!   two-tangle, entanglement of formation, susceptibility witness, discord).
//! * [`spectral`] holds the dynamical pipeline: Lehmann poles, structure
//!   factors, fluctuation-dissipation conversion, the quantum Fisher
//!   information family and entanglement-depth bounds.
//! * [`ingest`] reads and normalizes binned spectra and integrates them
//!   numerically.
//!
//! Natural units are used throughout: `hbar = k_B = 1`, energies in units of
//! the model exchange.

pub mod error;
pub mod ingest;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod spectral;
pub mod thermal;
pub mod two_site;
pub mod witness;

pub use error::{Error, Result};
pub use model::{Axis, Boundary, ModelKind, SiteOperatorSpec, SpinModel};
pub use thermal::{Eigendecomposition, Temperature, ThermalEnsemble};
pub use two_site::TwoSiteState;
