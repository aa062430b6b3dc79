//! Numerical laboratory for the anisotropic quantum Rabi model (AQRM) and its
//! driven circuit-QED realisation.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: truncated qubit ⊗ boson spaces, operators, states, partial traces.
//! * [`models`]: Hamiltonian builders (effective AQRM, lab-frame drive model,
//!   interaction picture, degenerate multi-qubit model) and the closed-form
//!   evolution operator of the degenerate model.
//! * [`spectra`]: eigensolvers, parity-sector fast path, gaps, quadrature moments,
//!   cutoff convergence.
//! * [`criticality`]: fidelity susceptibility, pseudocritical points, exponent
//!   fits, cumulant ratio and data collapse.
//! * [`dynamics`]: time propagation, Wigner functions, cat-state and gate protocols.
//!
//! Conventions used everywhere: ħ = 1; qubit basis `{|e⟩, |g⟩}` with
//! `σ_z|e⟩ = +|e⟩`; composite basis index `q · N_c + n` with qubit indices
//! varying slowest and the Fock index fastest.

pub mod criticality;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod models;
pub mod spectra;
pub mod units;

pub use error::{AqrmError, Result};
pub use num_complex::Complex64 as C64;
