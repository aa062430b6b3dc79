//! Time evolution of the driven circuit and of its effective models.
//!
//! Lab-frame runs integrate the circuit Hamiltonian in the interaction
//! picture of the bare qubit and resonator energies (see
//! [`crate::models::lab_hamiltonian_bare_frame`]). That frame and the
//! rotating frame of the effective model differ from the lab frame by
//! diagonal, qubit-local and field-local phases, so `P_g` and the qubit
//! entropy are the same in every frame; field quasi-probabilities are not and
//! are compared in the frame in which both are computed.

mod cat;
mod gate;
mod propagate;
mod wigner;

use nalgebra::DVector;
use serde::Serialize;

pub use cat::{
    cat_cutoff, cat_protocol, cat_state, coherent_overlap, max_displacement, multiqubit_cat, CatBranch, CatReport,
    EvolutionMode, Measurement, MultiQubitCat, Outcome, CAT_TAIL_TOL,
};
pub use gate::{gate_cutoff, gate_unitary, target_gate, Gate, GateReport, PURITY_TOL};
pub use propagate::{
    default_step, propagate, uniform_grid, Integrator, PropagateOptions, Record, Trajectory, DRIFT_TOL, NORM_STEP,
    STEPS_PER_PERIOD,
};
pub use wigner::{
    grid_coverage, hermite_functions, momentum_distribution, position_distribution, principal_variances,
    quadrature_covariance, wigner, wigner_at, GridSpec, WignerGrid, COVERAGE_WARN,
};

use crate::hilbert::{entanglement_entropy, reduce_to_qubits, StateVector};
use crate::models::{build_aqrm, lab_hamiltonian_bare_frame, map_drives_to_aqrm, CircuitParams, TimeDependent};
use crate::{AqrmError, Result, C64};

/// Population of the all-`g` qubit register, summed over the field.
pub fn ground_population(psi: &StateVector) -> f64 {
    let shape = psi.shape();
    let q = shape.qubit_dim() - 1;
    (0..shape.boson_cutoff).map(|n| psi.amplitudes()[shape.index(q, n)].norm_sqr()).sum()
}

/// Von Neumann entropy (bits) of the qubit reduction.
pub fn qubit_entropy(psi: &StateVector) -> Result<f64> {
    entanglement_entropy(&reduce_to_qubits(psi))
}

pub fn mean_photon_number(psi: &StateVector) -> f64 {
    let nc = psi.shape().boson_cutoff;
    psi.amplitudes().iter().enumerate().map(|(i, c)| (i % nc) as f64 * c.norm_sqr()).sum()
}

/// The `S_G` series of a trajectory.
pub fn entropy_trace(traj: &Trajectory) -> Vec<f64> {
    traj.records.iter().map(|r| r.s_g).collect()
}

/// `e^{i D t} ψ` for a diagonal generator `D` (moves a state into the
/// interaction picture of `D`).
pub fn rotate_frame(psi: &StateVector, diagonal: &[f64], t: f64) -> Result<StateVector> {
    if diagonal.len() != psi.shape().dim() {
        return Err(AqrmError::invalid("frame diagonal does not match the state"));
    }
    let v = DVector::from_iterator(
        diagonal.len(),
        psi.amplitudes().iter().zip(diagonal).map(|(c, &d)| c * C64::cis(d * t)),
    );
    StateVector::new(psi.shape(), v)
}

/// Lab-frame and effective-model trajectories from `|g, 0⟩` on a common grid.
#[derive(Clone, Debug, Serialize)]
pub struct FrameComparison {
    pub lab: Trajectory,
    pub effective: Trajectory,
    pub max_dp_g: f64,
    pub max_ds_g: f64,
    pub cutoff: usize,
}

/// Integrate the full circuit Hamiltonian and the static effective model it
/// maps to, both from `|g, 0⟩`, and compare `P_g` and `S_G`.
pub fn compare_lab_effective(
    c: &CircuitParams,
    cutoff: usize,
    t_grid: &[f64],
    opts: &PropagateOptions,
) -> Result<FrameComparison> {
    let lab_h = lab_hamiltonian_bare_frame(c, cutoff)?;
    let eff_h = build_aqrm(&map_drives_to_aqrm(c), cutoff)?;
    let psi0 = StateVector::basis(TimeDependent::shape(&lab_h), 1, 0)?;
    let eff_opts = PropagateOptions { dt_max: None, ..*opts };
    let (lab, effective) = rayon::join(
        || propagate(&lab_h, &psi0, t_grid, opts),
        || propagate(&eff_h, &psi0, t_grid, &eff_opts),
    );
    let (lab, effective) = (lab?, effective?);
    let dev = |f: fn(&Record) -> f64| {
        lab.records.iter().zip(&effective.records).map(|(a, b)| (f(a) - f(b)).abs()).fold(0.0, f64::max)
    };
    Ok(FrameComparison { max_dp_g: dev(|r| r.p_g), max_ds_g: dev(|r| r.s_g), lab, effective, cutoff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SpaceShape;
    use crate::models::{drives_for_aqrm, effective_frame_diagonal, interaction_hamiltonian, AqrmParams, Drive};
    use crate::units::{ghz, mhz, with_energy_scale};

    #[test]
    fn product_and_bell_observables() {
        let shape = SpaceShape::new(1, 3).unwrap();
        let g0 = StateVector::basis(shape, 1, 0).unwrap();
        assert_eq!(ground_population(&g0), 1.0);
        assert!(qubit_entropy(&g0).unwrap().abs() < 1e-12);
        let mut v = DVector::zeros(shape.dim());
        v[shape.index(1, 0)] = C64::new(1.0, 0.0);
        v[shape.index(0, 1)] = C64::new(1.0, 0.0);
        let bell = StateVector::normalized(shape, v).unwrap();
        assert!((ground_population(&bell) - 0.5).abs() < 1e-12);
        assert!((qubit_entropy(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert!((mean_photon_number(&bell) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn decoupled_ground_state_only_acquires_phase() {
        let h = build_aqrm(&AqrmParams::new(1.0, 2.0, 0.0, 0.0), 8).unwrap();
        let psi = StateVector::basis(h.shape(), 1, 0).unwrap();
        let traj = propagate(&h, &psi, &uniform_grid(0.0, 20.0, 40).unwrap(), &PropagateOptions::default()).unwrap();
        assert!(traj.records.iter().all(|r| (r.p_g - 1.0).abs() < 1e-12 && r.s_g.abs() < 1e-9));
    }

    fn circuit(red: f64, blue: f64, strength: f64) -> CircuitParams {
        let d = |f: f64| Drive { strength: mhz(strength), coupling: mhz(strength), frequency: ghz(f), phase: 0.0 };
        CircuitParams { omega: ghz(3.0), omega_q: ghz(18.0), g: mhz(37.0), red: d(red), blue: d(blue) }
    }

    #[test]
    fn rotating_frame_equals_static_model_after_rotation() {
        let c = circuit(15.448, 20.548, 10.5);
        let nc = 24;
        let h4 = interaction_hamiltonian(&c, nc).unwrap();
        let h5 = build_aqrm(&map_drives_to_aqrm(&c), nc).unwrap();
        let psi = StateVector::basis(h4.shape(), 1, 0).unwrap();
        let t1 = 40e-9;
        let opts = PropagateOptions::default().keeping_states();
        let a = propagate(&h4, &psi, &[0.0, t1], &opts.with_dt(1e-12)).unwrap();
        let b = propagate(&h5, &psi, &[0.0, t1], &opts.with_dt(1e-12)).unwrap();
        let rotated = rotate_frame(b.final_state().unwrap(), &effective_frame_diagonal(&c, nc), t1).unwrap();
        let f = rotated.fidelity(a.final_state().unwrap());
        assert!(f >= 1.0 - 1e-8, "{f}");
    }

    #[test]
    fn weak_coupling_stays_in_product_state() {
        // g̃/g̃_c = 0.4 at η̃ = 300: the qubit stays near |g,0⟩
        let target = with_energy_scale(&AqrmParams::at_ratio(300.0, 1.0, 0.4), mhz(1.5));
        let c = drives_for_aqrm(ghz(3.0), ghz(18.0), mhz(37.0), &target);
        let grid = uniform_grid(0.0, 20e-9, 20).unwrap();
        let cmp = compare_lab_effective(&c, 16, &grid, &PropagateOptions::default()).unwrap();
        assert!(cmp.effective.records.iter().all(|r| r.s_g < 0.1 && r.p_g > 0.97));
        assert!(cmp.max_dp_g < 0.05, "{}", cmp.max_dp_g);
    }
}
