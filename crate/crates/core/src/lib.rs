//! Finite de Finetti approximation for coherent-power states of bosonic modes.
//!
//! The crate builds, for a pure state |Ψ⟩ in the span 𝒞ₙ of coherent power
//! states |γ⟩^{⊗n}, the reduced k-mode state and its approximation by a
//! mixture of product coherent states, and measures their trace distance.
//!
//! * [`fock`]: one truncated mode, coherent amplitudes, displacements.
//! * [`weight_basis`]: compact representation of 𝒞ₙ by total excitation.
//! * [`oracle`]: brute-force dense tensors used as ground truth.
//! * [`quadrature`]: lattice midpoint rules for ∫ d²α.
//! * [`definetti`]: the measure, the mixture, the trace-distance report.
//! * [`par`]: deterministic chunked reductions (rayon behind `parallel`).

pub mod definetti;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod par;
pub mod quadrature;
pub mod weight_basis;

pub use error::{Error, Result};
pub use num_complex::Complex64;
