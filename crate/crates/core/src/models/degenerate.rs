//! Closed-form propagator of the degenerate model.
//!
//! `U(t) = exp[iΦ̄(t) J_x²] D(α(t) J_x)` with `Φ̄ = (ḡ/δ)²(δt − sin δt)` and
//! `α = ḡ(1 − e^{iδt})e^{iφ}/δ`. Within a `J_x = m` eigenspace this is the
//! phase `e^{iΦ̄m²}` times the field displacement `D(mα)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::builders::degenerate_shape;
use super::params::DegenerateParams;
use crate::hilbert::{displacement_matrix, Operator, StateVector};
use crate::{AqrmError, Result, C64};

/// Below this `|δt|` the closed forms switch to their series limits.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Population above `0.95·cutoff` that triggers a truncation warning.
pub const TRUNCATION_TAIL: f64 = 1e-8;

/// `(α(t), Φ̄(t))`.
pub fn displacement_and_phase(d: &DegenerateParams, t: f64) -> (C64, f64) {
    let x = d.delta * t;
    let eiphi = C64::cis(d.phi);
    if x.abs() < SERIES_THRESHOLD {
        let alpha = C64::new(0.0, -d.g_bar * t) * eiphi;
        let phase = d.g_bar * d.g_bar * d.delta * t.powi(3) / 6.0;
        (alpha, phase)
    } else {
        let alpha = (C64::new(1.0, 0.0) - C64::cis(x)) * eiphi * (d.g_bar / d.delta);
        let phase = (d.g_bar / d.delta).powi(2) * (x - x.sin());
        (alpha, phase)
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub unitary: Operator,
    pub alpha: C64,
    pub phase: f64,
    pub warnings: Vec<String>,
}

/// Serializable summary of an [`Evolution`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub phase: f64,
    pub warnings: Vec<String>,
}

impl Evolution {
    pub fn summary(&self) -> EvolutionSummary {
        EvolutionSummary { alpha_re: self.alpha.re, alpha_im: self.alpha.im, phase: self.phase, warnings: self.warnings.clone() }
    }
}

/// Projectors onto the `J_x = m` eigenspaces of an N-qubit register, keyed by m.
pub fn jx_projectors(n_qubits: usize) -> Vec<(i32, DMatrix<f64>)> {
    let dim = 1usize << n_qubits;
    let mut out: Vec<(i32, DMatrix<f64>)> = Vec::new();
    // |s⟩ = ⊗|±⟩ with bit l of `s` set for |−⟩; ⟨q|s⟩ = 2^{−N/2} (−1)^{popcount(q & s)}
    let amp = (dim as f64).sqrt().recip();
    for s in 0..dim {
        let m = n_qubits as i32 - 2 * s.count_ones() as i32;
        let v: Vec<f64> = (0..dim)
            .map(|q| if (q & s).count_ones() % 2 == 0 { amp } else { -amp })
            .collect();
        let proj = DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j]);
        match out.iter_mut().find(|(k, _)| *k == m) {
            Some((_, p)) => *p += proj,
            None => out.push((m, proj)),
        }
    }
    out.sort_by_key(|(m, _)| -*m);
    out
}

/// Weight of a coherent state `|β⟩` on Fock levels `n ≥ from`.
pub(crate) fn coherent_tail(beta: f64, from: usize) -> f64 {
    let mean = beta * beta;
    let mut p = (-mean).exp();
    let mut below = 0.0;
    for n in 0..from {
        below += p;
        p *= mean / (n + 1) as f64;
    }
    (1.0 - below).max(0.0)
}

/// Number of low Fock levels whose image under `D(β)`, `|β| ≤ amplitude`,
/// stays inside the truncated space: `⌊(√cutoff − amplitude − 3)²⌋`.
///
/// `D(β)|n⟩` spreads over roughly `(√n ± |β|)²`, so a margin linear in
/// `|β|` alone is not enough for the higher levels.
pub fn leakage_free_levels(cutoff: usize, amplitude: f64) -> usize {
    let r = (cutoff as f64).sqrt() - amplitude - 3.0;
    if r <= 0.0 {
        0
    } else {
        ((r * r).floor() as usize).min(cutoff)
    }
}

fn truncation_warning(amplitude: f64, cutoff: usize) -> Option<String> {
    let edge = ((0.95 * cutoff as f64).floor() as usize).max(1);
    let tail = coherent_tail(amplitude, edge);
    (tail > TRUNCATION_TAIL).then(|| {
        format!("displacement |N alpha| = {amplitude:.3} leaves population {tail:.2e} within 5% of cutoff {cutoff}")
    })
}

pub fn analytic_evolution(d: &DegenerateParams, t: f64, cutoff: usize) -> Result<Evolution> {
    if !(t >= 0.0) {
        return Err(AqrmError::invalid("time must be non-negative"));
    }
    let shape = degenerate_shape(d, cutoff)?;
    let (alpha, phase) = displacement_and_phase(d, t);
    let qd = shape.qubit_dim();
    let mut u = DMatrix::<C64>::zeros(shape.dim(), shape.dim());
    for (m, proj) in jx_projectors(d.n_qubits) {
        let mf = m as f64;
        let disp = displacement_matrix(alpha * mf, cutoff, cutoff) * C64::cis(phase * mf * mf);
        for q in 0..qd {
            for qq in 0..qd {
                let w = proj[(q, qq)];
                if w == 0.0 {
                    continue;
                }
                let mut block = u.view_mut((q * cutoff, qq * cutoff), (cutoff, cutoff));
                block += &disp * C64::new(w, 0.0);
            }
        }
    }
    let warnings = truncation_warning(d.n_qubits as f64 * alpha.norm(), cutoff).into_iter().collect();
    Ok(Evolution { unitary: Operator::from_dense(shape, u), alpha, phase, warnings })
}

/// `U(t)|ψ⟩` under [`analytic_evolution`].
pub fn evolve_analytic(d: &DegenerateParams, t: f64, psi: &StateVector) -> Result<(StateVector, Evolution)> {
    let ev = analytic_evolution(d, t, psi.shape().boson_cutoff)?;
    if ev.unitary.shape() != psi.shape() {
        return Err(AqrmError::invalid("state does not match the degenerate model register"));
    }
    let out = StateVector::normalized(psi.shape(), ev.unitary.apply(psi.amplitudes()))?;
    Ok((out, ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{collective_sigma_x, SpaceShape};
    use std::f64::consts::PI;

    #[test]
    fn identity_at_zero() {
        let d = DegenerateParams { n_qubits: 2, g_bar: 0.7, delta: 1.0, phi: 0.2 };
        let ev = analytic_evolution(&d, 0.0, 6).unwrap();
        let id = Operator::identity(ev.unitary.shape());
        assert!(ev.unitary.max_abs_diff(&id).unwrap() < 1e-15);
    }

    #[test]
    fn half_and_full_period() {
        let d = DegenerateParams { n_qubits: 1, g_bar: 1.0, delta: 1.0, phi: 0.0 };
        let (a, _) = displacement_and_phase(&d, PI);
        assert!((a.norm() - 2.0).abs() < 1e-14);
        let (a, ph) = displacement_and_phase(&d, 2.0 * PI);
        assert!(a.norm() < 1e-14);
        let d = DegenerateParams { g_bar: 0.25, ..d };
        let (_, ph2) = displacement_and_phase(&d, 2.0 * PI);
        assert!((2.0 * ph2 - d.gate_angle().unwrap()).abs() < 1e-14);
        assert!((ph - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn series_limit_is_continuous() {
        let d = DegenerateParams { n_qubits: 1, g_bar: 0.8, delta: 1.0, phi: 0.3 };
        let t = 0.999e-6;
        let (a_s, p_s) = displacement_and_phase(&d, t);
        let (a_c, p_c) = displacement_and_phase(&d, 1.001e-6);
        assert!((a_s - a_c).norm() < 1e-8);
        assert!((p_s - p_c).abs() < 1e-18);
        let zero = DegenerateParams { delta: 0.0, ..d };
        let (a0, p0) = displacement_and_phase(&zero, 2.5);
        assert!((a0 - C64::new(0.0, -2.0) * C64::cis(0.3)).norm() < 1e-15);
        assert_eq!(p0, 0.0);
    }

    #[test]
    fn projectors_resolve_jx() {
        for n in 1..=3 {
            let shape = SpaceShape::qubits(n);
            let jx = collective_sigma_x(shape).unwrap().to_dense().map(|v| v.re);
            let mut sum = DMatrix::<f64>::zeros(1 << n, 1 << n);
            let mut weighted = sum.clone();
            for (m, p) in jx_projectors(n) {
                assert!((&p * &p - &p).amax() < 1e-14);
                weighted += &p * m as f64;
                sum += p;
            }
            assert!((sum - DMatrix::identity(1 << n, 1 << n)).amax() < 1e-14);
            assert!((weighted - jx).amax() < 1e-14);
        }
    }

    #[test]
    fn unitary_below_leakage_region() {
        let d = DegenerateParams { n_qubits: 2, g_bar: 0.5, delta: 1.0, phi: 0.1 };
        let nc = 80;
        let t = 2.0;
        let ev = analytic_evolution(&d, t, nc).unwrap();
        let u = ev.unitary.to_dense();
        let keep = leakage_free_levels(nc, 2.0 * ev.alpha.norm());
        assert!(keep >= 4);
        let udu = u.adjoint() * &u;
        for q in 0..4 {
            for qq in 0..4 {
                for n in 0..keep {
                    for m in 0..keep {
                        let want = if q == qq && n == m { 1.0 } else { 0.0 };
                        let v = udu[(q * nc + n, qq * nc + m)];
                        assert!((v - C64::new(want, 0.0)).norm() < 1e-8);
                    }
                }
            }
        }
        assert!(ev.warnings.is_empty());
        let small = analytic_evolution(&DegenerateParams { g_bar: 3.0, ..d }, t, 12).unwrap();
        assert_eq!(small.warnings.len(), 1);
    }

    #[test]
    fn coherent_tail_sums() {
        assert!((coherent_tail(0.0, 1)).abs() < 1e-15);
        assert!((coherent_tail(1.0, 1) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(coherent_tail(2.0, 0), 1.0);
    }
}
