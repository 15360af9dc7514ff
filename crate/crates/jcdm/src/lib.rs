//! Numerical laboratory for the Jaynes-Cummings dimer: two resonant
//! cavity-qubit sites exchanging photons.
//!
//! The crate builds the fixed-polariton-number Hamiltonian in the
//! imbalance (Fock) basis, diagonalizes it exactly, and independently
//! reproduces its spectrum and localization structure through three
//! semiclassical engines that cross-check one another:
//!
//! * [`bands`]/[`wkb`] — polariton-band potentials, discrete-WKB momenta,
//!   singular-endpoint action integrals and Bohr-Sommerfeld quantization
//!   rules (standard, tunneling-split, and critical-level variants);
//! * [`classical`] — coherent-state equations of motion, the dynamical
//!   self-trapping threshold, and Poincaré sections of the restricted flow;
//! * [`husimi`] — squeezed-state Q distributions of eigenstates in the
//!   band phase space, overlaid on classical energy contours.

pub mod bands;
pub mod basis;
pub mod classical;
pub mod cli;
pub mod eigen;
pub mod gamma;
pub mod hamiltonian;
pub mod husimi;
pub mod ode;
pub mod output;
pub mod params;
pub mod quad;
pub mod spectra;
pub mod wavefunction;
pub mod wkb;

pub use basis::{BasisState, FockBasis, Spin};
pub use eigen::EigenSolution;
pub use hamiltonian::BandedHamiltonian;
pub use params::ModelParams;

/// Errors shared by every engine in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("eigensolver did not converge (index {0})")]
    NonConvergence(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
