//! Hyperfine-resolved simulation of RF-dressed Rydberg EIT ladders.
//!
//! The crate enumerates dipole couplings between hyperfine sublevels,
//! diagonalizes the resonant RF dressing Hamiltonian on a pair of Rydberg
//! levels and computes Doppler-free probe transmission while the coupling
//! laser is scanned.
//!
//! Frequencies in every public interface are linear frequencies in MHz. The
//! numerical kernels ([`linalg`], [`dressing`], [`spectrum::peaks`]) are generic
//! over [`Real`]; the aliases below fix the common `f64` instantiations.

pub mod angular;
pub mod couplings;
pub mod dressing;
pub mod error;
pub mod linalg;
pub mod model;
pub mod polarization;
pub mod scalar;
pub mod spectrum;
pub mod validate;

pub use angular::HalfInteger;
pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;

pub type RfHamiltonian64 = dressing::RfHamiltonian<f64>;
pub type RfHamiltonian32 = dressing::RfHamiltonian<f32>;
pub type DressedResult64 = dressing::DressedResult<f64>;
pub type DressedResult32 = dressing::DressedResult<f32>;
