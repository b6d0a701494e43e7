//! Multiresolution analysis on Cantor-type fractals.
//!
//! The crate models the Hilbert space `L²(ℛ, ℋˢ)` of an affine digit system
//! `(N, S)` exactly, through lattice coefficients over the orthonormal
//! families `{U⁻ⁿTᵏφ}`, and provides the Fourier-side machinery around it:
//! Laurent filters, the transfer (Ruelle) operator, its invariant measures,
//! and spectral duality of exponentials.
//!
//! Coefficients are exact in `ℚ(√p)` whenever the filters allow it
//! ([`Scalar::Exact`]) and fall back to double precision otherwise.

pub mod duality;
pub mod error;
pub mod filterbank;
pub mod ifs;
pub mod lattice;
pub mod laurent;
pub mod measure;
pub mod scalar;
pub mod tables;
pub mod transfer;

pub use error::{Error, Result};
pub use filterbank::{build_bank, FilterBank, LoopMatrix};
pub use ifs::{CylinderAddress, DigitSystem};
pub use lattice::LatticeVector;
pub use laurent::LaurentPolynomial;
pub use measure::MomentTable;
pub use scalar::{Scalar, Surd};
pub use transfer::TransferOperator;
