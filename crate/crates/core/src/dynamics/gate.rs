//! Two-qubit gate generated by the degenerate model over one field period.
//!
//! At `T = 2π/δ` the displacement returns to zero and only
//! `exp[iΦ̄(T) J_x²]` survives; up to a global phase this is
//! `cos θ̄ + i sin θ̄ σ_x⊗σ_x` with `θ̄ = 4πḡ²/δ²`.

use serde::{Deserialize, Serialize};

use super::cat::EvolutionMode;
use super::propagate::{propagate, PropagateOptions};
use crate::hilbert::{reduce_to_field, SpaceShape, StateVector};
use crate::models::{degenerate_hamiltonian, evolve_analytic, DegenerateParams};
use crate::{AqrmError, Result, C64};

/// Minimum field purity at `T` for the gate to count as disentangled.
pub const PURITY_TOL: f64 = 1e-8;

/// Field levels used when the caller does not choose: enough for the
/// largest mid-period displacement `2·2ḡ/δ`.
pub fn gate_cutoff(d: &DegenerateParams) -> usize {
    let a = 4.0 * d.g_bar / d.delta.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

pub type Gate = [[C64; 4]; 4];

/// Ideal gate in the basis `{ee, eg, ge, gg}`.
pub fn target_gate(theta: f64) -> Gate {
    let c = C64::new(theta.cos(), 0.0);
    let s = C64::new(0.0, theta.sin());
    let z = C64::new(0.0, 0.0);
    [[c, z, z, s], [z, c, s, z], [z, s, c, z], [s, z, z, c]]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateReport {
    pub mode: EvolutionMode,
    pub period: f64,
    pub theta: f64,
    pub cutoff: usize,
    /// Row-major real and imaginary parts after the global phase fix.
    pub matrix_re: [[f64; 4]; 4],
    pub matrix_im: [[f64; 4]; 4],
    pub max_deviation: f64,
    pub min_field_purity: f64,
}

impl GateReport {
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        C64::new(self.matrix_re[i][j], self.matrix_im[i][j])
    }
}

/// Evolve each qubit basis state with the field in vacuum over one period,
/// verify the field returns to a pure state, and read off the qubit unitary.
pub fn gate_unitary(d: &DegenerateParams, mode: EvolutionMode, cutoff: Option<usize>) -> Result<GateReport> {
    d.validate()?;
    if d.n_qubits != 2 {
        return Err(AqrmError::invalid("the gate protocol uses two qubits"));
    }
    let (Some(period), Some(theta)) = (d.gate_time(), d.gate_angle()) else {
        return Err(AqrmError::invalid("the gate protocol needs delta > 0"));
    };
    let nc = cutoff.unwrap_or_else(|| gate_cutoff(d));
    let shape = SpaceShape::new(2, nc)?;
    let h = match mode {
        EvolutionMode::Numeric => Some(degenerate_hamiltonian(d, nc)?),
        EvolutionMode::Analytic => None,
    };
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    let mut min_purity: f64 = 1.0;
    for j in 0..4 {
        let psi0 = StateVector::basis(shape, j, 0)?;
        let psi = match &h {
            Some(h) => {
                let traj = propagate(h, &psi0, &[0.0, period], &PropagateOptions::default().keeping_states())?;
                traj.states.last().cloned().expect("final state kept")
            }
            None => evolve_analytic(d, period, &psi0)?.0,
        };
        let purity = reduce_to_field(&psi).purity();
        min_purity = min_purity.min(purity);
        if purity < 1.0 - PURITY_TOL {
            return Err(AqrmError::Protocol(format!(
                "field purity {purity:.12} after one period for input {j}; qubits and field did not disentangle"
            )));
        }
        for (i, row) in u.iter_mut().enumerate() {
            row[j] = psi.amplitudes()[shape.index(i, 0)];
        }
    }
    let target = target_gate(theta);
    fix_global_phase(&mut u, &target);
    let max_deviation = (0..16)
        .map(|k| (u[k / 4][k % 4] - target[k / 4][k % 4]).norm())
        .fold(0.0, f64::max);
    Ok(GateReport {
        mode,
        period,
        theta,
        cutoff: nc,
        matrix_re: u.map(|r| r.map(|c| c.re)),
        matrix_im: u.map(|r| r.map(|c| c.im)),
        max_deviation,
        min_field_purity: min_purity,
    })
}

/// Rotate `u` so entry (0,0) carries the phase of the target's (0,0)
/// (that of cos θ̄); when that entry vanishes, align the largest entry.
fn fix_global_phase(u: &mut Gate, target: &Gate) {
    let (i, j) = if u[0][0].norm() > 1e-6 && target[0][0].norm() > 1e-6 {
        (0, 0)
    } else {
        let k = (0..16).max_by(|&a, &b| u[a / 4][a % 4].norm().total_cmp(&u[b / 4][b % 4].norm())).unwrap();
        (k / 4, k % 4)
    };
    let want = target[i][j];
    let have = u[i][j];
    if have.norm() == 0.0 || want.norm() == 0.0 {
        return;
    }
    let rot = (want / want.norm()) / (have / have.norm());
    u.iter_mut().flatten().for_each(|c| *c *= rot);
}
