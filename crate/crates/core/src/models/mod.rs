//! Hamiltonian builders: the effective anisotropic model, the driven circuit
//! in the lab and rotating frames, and the degenerate multi-qubit model with
//! its closed-form propagator.

mod builders;
mod degenerate;
mod driven;
mod params;

pub use builders::{
    bare_frame_diagonal, build_anisotropic_rabi, build_aqrm, build_degenerate_hamiltonian,
    build_interaction_hamiltonian, build_lab_hamiltonian, coupling_operator, degenerate_hamiltonian,
    effective_frame_diagonal, interaction_hamiltonian, lab_hamiltonian, lab_hamiltonian_bare_frame,
    DEGENERATE_DIM_BUDGET, MAX_DEGENERATE_QUBITS,
};
pub use degenerate::{
    analytic_evolution, displacement_and_phase, evolve_analytic, jx_projectors, leakage_free_levels, Evolution, EvolutionSummary,
    SERIES_THRESHOLD, TRUNCATION_TAIL,
};
pub use driven::{DrivenHamiltonian, Harmonic, TimeDependent};
pub use params::{
    drives_for_aqrm, map_drives_to_aqrm, mapping_report, AqrmParams, CircuitParams, DegenerateParams, Drive,
    MappingReport, ValidityRatio, ValidityReport, VALIDITY_WARN_THRESHOLD,
};
