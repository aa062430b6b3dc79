//! Cat-state generation in the degenerate model and its N-qubit enhancement.
//!
//! From `|g, 0⟩` the closed-form propagator gives
//! `e^{iΦ̄}(|+⟩|α⟩ − |−⟩|−α⟩)/√2`; projecting the qubit onto `|g⟩` leaves the
//! even cat `(|α⟩ + |−α⟩)/N₊` and onto `|e⟩` the odd cat.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::propagate::{propagate, PropagateOptions};
use crate::hilbert::{SpaceShape, StateVector};
use crate::models::{degenerate_hamiltonian, displacement_and_phase, evolve_analytic, DegenerateParams};
use crate::{AqrmError, Result, C64};

/// Coherent-state population allowed beyond the cutoff for N-qubit cats.
pub const CAT_TAIL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    #[default]
    Analytic,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    G,
    E,
}

impl Outcome {
    fn qubit(self) -> usize {
        match self {
            Outcome::E => 0,
            Outcome::G => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Measurement {
    /// Report both branches.
    #[default]
    Both,
    Fixed { outcome: Outcome },
    /// Draw one outcome with the Born probabilities from a seeded generator.
    Sampled { seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct CatBranch {
    pub outcome: Outcome,
    pub probability: f64,
    /// `(1 ± e^{−2|α|²})/2`.
    pub expected_probability: f64,
    /// `|⟨𝒞^±_α|ψ_field⟩|²` against the normalised ideal cat.
    pub fidelity: f64,
    #[serde(skip)]
    pub field: StateVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatReport {
    pub t: f64,
    pub mode: EvolutionMode,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub phase: f64,
    pub cutoff: usize,
    /// Overlap of the pre-measurement state with `e^{iΦ̄}(|+⟩|α⟩ − |−⟩|−α⟩)/√2`.
    pub pre_measurement_fidelity: f64,
    pub branches: Vec<CatBranch>,
    pub warnings: Vec<String>,
}

impl CatReport {
    pub fn alpha(&self) -> C64 {
        C64::new(self.alpha_re, self.alpha_im)
    }

    pub fn branch(&self, o: Outcome) -> Option<&CatBranch> {
        self.branches.iter().find(|b| b.outcome == o)
    }
}

/// Largest `|α(s)|` over `s ∈ [0, t]`.
pub fn max_displacement(d: &DegenerateParams, t: f64) -> f64 {
    if d.delta == 0.0 {
        return d.g_bar * t;
    }
    let x = (d.delta * t).abs();
    let s = if x >= std::f64::consts::PI { 1.0 } else { (0.5 * x).sin() };
    2.0 * d.g_bar / d.delta.abs() * s
}

/// `N_c ≥ (N|α|)² + 6N|α| + 10` for the largest displacement reached by `t`.
pub fn cat_cutoff(d: &DegenerateParams, t: f64) -> usize {
    let a = d.n_qubits as f64 * max_displacement(d, t);
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// Normalised `(|α⟩ + s|−α⟩)` on `cutoff` levels.
pub fn cat_state(alpha: C64, sign: f64, cutoff: usize) -> Result<StateVector> {
    let a = StateVector::coherent_amplitudes(alpha, cutoff);
    let b = StateVector::coherent_amplitudes(-alpha, cutoff);
    let v = DVector::from_iterator(cutoff, a.iter().zip(&b).map(|(x, y)| x + y * sign));
    StateVector::normalized(SpaceShape::field(cutoff), v)
}

/// `|⟨α|β⟩|² = e^{−|α−β|²}`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> f64 {
    (-(alpha - beta).norm_sqr()).exp()
}

fn register_state(n: usize, plus: bool) -> Vec<C64> {
    // |±⟩ = (|e⟩ ± |g⟩)/√2 on every qubit, e = 0 and g = 1
    let s: f64 = if plus { 1.0 } else { -1.0 };
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    (0..dim).map(|q| C64::new(amp * s.powi(q.count_ones() as i32), 0.0)).collect()
}

/// `(|+…+⟩|β⟩ − |−…−⟩|−β⟩)/√2 · e^{iθ}` on `cutoff` levels.
fn ghz_cat(n: usize, beta: C64, theta: f64, cutoff: usize) -> Result<StateVector> {
    let shape = SpaceShape::new(n, cutoff)?;
    let plus = register_state(n, true);
    let minus = register_state(n, false);
    let a = StateVector::coherent_amplitudes(beta, cutoff);
    let b = StateVector::coherent_amplitudes(-beta, cutoff);
    let ph = C64::cis(theta) * std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::zeros(shape.dim());
    for q in 0..shape.qubit_dim() {
        for k in 0..cutoff {
            v[shape.index(q, k)] = (plus[q] * a[k] - minus[q] * b[k]) * ph;
        }
    }
    StateVector::normalized(shape, v)
}

fn numeric_evolution(d: &DegenerateParams, t: f64, psi: &StateVector) -> Result<StateVector> {
    let h = degenerate_hamiltonian(d, psi.shape().boson_cutoff)?;
    let traj = propagate(&h, psi, &[0.0, t], &PropagateOptions::default().keeping_states())?;
    Ok(traj.states.last().cloned().expect("final state kept"))
}

fn evolve(d: &DegenerateParams, t: f64, psi: &StateVector, mode: EvolutionMode) -> Result<(StateVector, Vec<String>)> {
    match mode {
        EvolutionMode::Analytic => {
            let (out, ev) = evolve_analytic(d, t, psi)?;
            Ok((out, ev.warnings))
        }
        EvolutionMode::Numeric => Ok((numeric_evolution(d, t, psi)?, Vec::new())),
    }
}

/// Run the single-qubit cat protocol and project the qubit.
///
/// `cutoff: None` uses [`cat_cutoff`].
pub fn cat_protocol(
    d: &DegenerateParams,
    t: f64,
    mode: EvolutionMode,
    measurement: Measurement,
    cutoff: Option<usize>,
) -> Result<CatReport> {
    d.validate()?;
    if d.n_qubits != 1 {
        return Err(AqrmError::invalid("the cat protocol uses a single qubit"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(AqrmError::invalid("protocol time must be positive"));
    }
    let nc = cutoff.unwrap_or_else(|| cat_cutoff(d, t));
    let shape = SpaceShape::new(1, nc)?;
    let psi0 = StateVector::basis(shape, 1, 0)?;
    let (psi, mut warnings) = evolve(d, t, &psi0, mode)?;
    let (alpha, phase) = displacement_and_phase(d, t);
    let ideal = ghz_cat(1, alpha, phase, nc)?;
    let pre = ideal.fidelity(&psi);

    let outcomes = match measurement {
        Measurement::Both => vec![Outcome::G, Outcome::E],
        Measurement::Fixed { outcome } => vec![outcome],
        Measurement::Sampled { seed } => {
            let pg: f64 = (0..nc).map(|k| psi.amplitudes()[shape.index(1, k)].norm_sqr()).sum();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            vec![if rng.random::<f64>() < pg { Outcome::G } else { Outcome::E }]
        }
    };
    let overlap = (-2.0 * alpha.norm_sqr()).exp();
    let mut branches = Vec::new();
    for o in outcomes {
        let q = o.qubit();
        let amps = DVector::from_iterator(nc, (0..nc).map(|k| psi.amplitudes()[shape.index(q, k)]));
        let prob = amps.norm_squared();
        if prob <= 0.0 {
            warnings.push(format!("outcome {o:?} has zero probability"));
            continue;
        }
        let field = StateVector::normalized(SpaceShape::field(nc), amps)?;
        let sign = if o == Outcome::G { 1.0 } else { -1.0 };
        let target = cat_state(alpha, sign, nc)?;
        branches.push(CatBranch {
            outcome: o,
            probability: prob,
            expected_probability: 0.5 * (1.0 + sign * overlap),
            fidelity: target.fidelity(&field),
            field,
        });
    }
    Ok(CatReport {
        t,
        mode,
        alpha_re: alpha.re,
        alpha_im: alpha.im,
        phase,
        cutoff: nc,
        pre_measurement_fidelity: pre,
        branches,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiQubitCat {
    #[serde(skip)]
    pub state: StateVector,
    /// Field amplitude `Nα`.
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    /// Global phase `N²Φ̄`.
    pub phase: f64,
    pub analytic_fidelity: f64,
    pub numeric_fidelity: f64,
    pub cutoff: usize,
}

/// Coherent population at or above level `cutoff`.
fn coherent_tail(beta: f64, cutoff: usize) -> f64 {
    let amps = StateVector::coherent_amplitudes(C64::new(beta, 0.0), cutoff);
    (1.0 - amps.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0)
}

/// Closed-form N-qubit cat from `(|+…+⟩ − |−…−⟩)|0⟩/√2`, checked against the
/// analytic propagator and numerical propagation of the degenerate model.
pub fn multiqubit_cat(d: &DegenerateParams, t: f64, cutoff: Option<usize>) -> Result<MultiQubitCat> {
    d.validate()?;
    let n = d.n_qubits;
    if n < 2 || n % 2 != 0 {
        return Err(AqrmError::invalid(format!("the enhanced cat needs an even number of qubits, got {n}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(AqrmError::invalid("protocol time must be positive"));
    }
    let nc = cutoff.unwrap_or_else(|| cat_cutoff(d, t));
    let peak = n as f64 * max_displacement(d, t);
    let tail = coherent_tail(peak, nc);
    if tail > CAT_TAIL_TOL {
        return Err(AqrmError::Truncation(format!(
            "cutoff {nc} leaves population {tail:.2e} of a coherent state with |N alpha| = {peak:.3}"
        )));
    }
    let (alpha, phi) = displacement_and_phase(d, t);
    let nf = n as f64;
    let beta = alpha * nf;
    let theta = nf * nf * phi;
    let state = ghz_cat(n, beta, theta, nc)?;
    let psi0 = ghz_cat(n, C64::new(0.0, 0.0), 0.0, nc)?;
    let (an, _) = evolve_analytic(d, t, &psi0)?;
    let num = numeric_evolution(d, t, &psi0)?;
    Ok(MultiQubitCat {
        analytic_fidelity: state.fidelity(&an),
        numeric_fidelity: state.fidelity(&num),
        state,
        amplitude_re: beta.re,
        amplitude_im: beta.im,
        phase: theta,
        cutoff: nc,
    })
}
