//! Relative chiral charges on model globally hyperbolic spacetimes.
//!
//! The crate evaluates the Lorentzian index formula for the relative
//! right-handed charge between the Fock vacua of two Cauchy hypersurfaces,
//!
//! ```text
//! Q_R = -∫_M Â ∧ ch(∇^E) + (h(Σ₁) - h(Σ₂) + η(Σ₁) - η(Σ₂)) / 2,
//! ```
//!
//! together with `Q_L = -Q_R`, `Q_total = 0` and `Q_chir = 2 Q_R`, for four
//! families of model spacetimes (flat cylinder with an electric field,
//! Bianchi-I, Bianchi-II and a registered sphere reference value). For the
//! cylinder an independent mode-counting oracle (canonical trace of the
//! projector difference, and spectral flow) computes the same integer.
//!
//! Modules, bottom-up:
//!
//! - [`models`]: time profiles with product-structure plateaus, spacetime models.
//! - [`forms`]: metric, Christoffel symbols, curvature, Â density, form integrals.
//! - [`spectral`]: hypersurface Dirac spectra, η and kernel dimensions.
//! - [`flow`]: projector trace and spectral flow of the decoupled mode family.
//! - [`charge`]: assembly of the charges and cross-validation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod charge;
mod error;
pub mod flow;
pub mod forms;
mod linalg;
pub mod models;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
