//! Fixed-step integration of `i dψ/dt = H(t) ψ`.
//!
//! Steps are laid out per record interval (each interval split into equal
//! steps no longer than the chosen `dt`), so record times are hit exactly and
//! the result does not depend on floating-point accumulation of `t`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{ground_population, mean_photon_number, qubit_entropy};
use crate::hilbert::StateVector;
use crate::models::TimeDependent;
use crate::{AqrmError, Result, C64};

/// Largest allowed norm drift over one record interval.
pub const DRIFT_TOL: f64 = 1e-6;

/// Default steps per shortest period of the explicit time dependence.
pub const STEPS_PER_PERIOD: f64 = 200.0;

/// Upper bound on `dt · ‖H‖` used when the Hamiltonian itself is the fastest scale.
pub const NORM_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    /// Midpoint exponential `exp(−i H(t + dt/2) dt)`, applied by Taylor series.
    Magnus2,
}

impl Integrator {
    fn order(self) -> f64 {
        match self {
            Integrator::Rk4 => 4.0,
            Integrator::Magnus2 => 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateOptions {
    #[serde(default)]
    pub method: Integrator,
    /// Upper bound on the step; `None` uses the automatic rule only.
    #[serde(default)]
    pub dt_max: Option<f64>,
    /// Keep the state at every record time.
    #[serde(default)]
    pub keep_states: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { method: Integrator::Rk4, dt_max: None, keep_states: false }
    }
}

impl PropagateOptions {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt_max = Some(dt);
        self
    }

    pub fn keeping_states(mut self) -> Self {
        self.keep_states = true;
        self
    }

    pub fn method(mut self, m: Integrator) -> Self {
        self.method = m;
        self
    }
}

/// Observables at one record time. `norm` is the norm reached before the
/// record-point renormalisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub p_g: f64,
    pub s_g: f64,
    pub n_mean: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    #[serde(skip)]
    pub states: Vec<StateVector>,
    pub method: Integrator,
    /// Largest step actually taken.
    pub dt: f64,
    pub steps: usize,
    /// Largest `|‖ψ‖ − 1|` over a record interval.
    pub max_drift: f64,
    /// `max_drift` rescaled to one period of the fastest explicit frequency
    /// (`None` for time-independent Hamiltonians).
    pub drift_per_period: Option<f64>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn ground_population(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_g).collect()
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        self.states.last()
    }

    /// CSV with a units comment line, a header and one row per record.
    pub fn to_csv(&self, time_unit: &str) -> String {
        let mut s = format!("# units: t [{time_unit}], P_g [probability], S_G [bits], n_mean [photons], norm [1]\n");
        s.push_str("t,P_g,S_G,n_mean,norm\n");
        for r in &self.records {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.t, r.p_g, r.s_g, r.n_mean, r.norm
            ));
        }
        s
    }
}

/// Step used for `h` under `opts`.
///
/// `dt = min(dt_max, T_min/200, 0.05/‖H‖)` with `T_min = 2π/ω_max`. A `dt_max`
/// above `1/(50 f_max)` is rejected.
pub fn default_step(h: &dyn TimeDependent, dt_max: Option<f64>) -> Result<f64> {
    let w = h.max_angular_frequency();
    let mut dt = f64::INFINITY;
    if let Some(d) = dt_max {
        if !(d > 0.0 && d.is_finite()) {
            return Err(AqrmError::invalid("dt_max must be positive"));
        }
        if w > 0.0 {
            let limit = 2.0 * std::f64::consts::PI / (50.0 * w);
            if d > limit * (1.0 + 1e-12) {
                return Err(AqrmError::invalid(format!(
                    "dt_max = {d:.3e} exceeds 1/(50 f_max) = {limit:.3e}"
                )));
            }
        }
        dt = d;
    }
    if w > 0.0 {
        dt = dt.min(2.0 * std::f64::consts::PI / (w * STEPS_PER_PERIOD));
    }
    let nb = h.norm_bound();
    if nb > 0.0 {
        dt = dt.min(NORM_STEP / nb);
    }
    if !dt.is_finite() {
        return Err(AqrmError::invalid("cannot choose a step for a zero Hamiltonian without dt_max"));
    }
    Ok(dt)
}

struct Work {
    k: Vec<C64>,
    tmp: Vec<C64>,
    acc: Vec<C64>,
}

impl Work {
    fn new(dim: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); dim];
        Work { k: z(), tmp: z(), acc: z() }
    }
}

const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

fn rk4_step(h: &dyn TimeDependent, t: f64, dt: f64, psi: &mut [C64], w: &mut Work) {
    let Work { k, tmp, acc } = w;
    // k1
    h.apply(t, psi, k);
    k.iter_mut().for_each(|v| *v *= MINUS_I);
    acc.copy_from_slice(k);
    for stage in 0..3 {
        let (frac, weight) = match stage {
            0 => (0.5, 2.0),
            1 => (0.5, 2.0),
            _ => (1.0, 1.0),
        };
        for ((ti, &pi), &ki) in tmp.iter_mut().zip(psi.iter()).zip(k.iter()) {
            *ti = pi + ki * (frac * dt);
        }
        h.apply(t + frac * dt, tmp, k);
        k.iter_mut().for_each(|v| *v *= MINUS_I);
        acc.iter_mut().zip(k.iter()).for_each(|(a, &ki)| *a += ki * weight);
    }
    let s = dt / 6.0;
    psi.iter_mut().zip(acc.iter()).for_each(|(p, &a)| *p += a * s);
}

fn magnus2_step(h: &dyn TimeDependent, t: f64, dt: f64, psi: &mut [C64], w: &mut Work) {
    let Work { k, tmp, acc } = w;
    let tm = t + 0.5 * dt;
    // Σ_j (−i H dt)^j/j! ψ
    acc.copy_from_slice(psi);
    tmp.copy_from_slice(psi);
    let n0 = norm(psi).max(f64::MIN_POSITIVE);
    for j in 1..60 {
        h.apply(tm, tmp, k);
        let f = MINUS_I * (dt / j as f64);
        tmp.iter_mut().zip(k.iter()).for_each(|(x, &y)| *x = y * f);
        acc.iter_mut().zip(tmp.iter()).for_each(|(a, &x)| *a += x);
        if norm(tmp) <= 1e-17 * n0 {
            break;
        }
    }
    psi.copy_from_slice(acc);
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate from `psi0` at `t_grid[0]` through every grid time.
pub fn propagate(
    h: &dyn TimeDependent,
    psi0: &StateVector,
    t_grid: &[f64],
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    if psi0.shape() != h.shape() {
        return Err(AqrmError::invalid("initial state does not match the Hamiltonian's space"));
    }
    if t_grid.is_empty() {
        return Err(AqrmError::invalid("time grid is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AqrmError::invalid("time grid must be finite and strictly increasing"));
    }
    let dt = default_step(h, opts.dt_max)?;
    let shape = psi0.shape();
    let mut psi: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let mut work = Work::new(psi.len());
    let mut records = Vec::with_capacity(t_grid.len());
    let mut states = Vec::new();
    let mut steps = 0;
    let mut dt_used: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    let mut max_rate: f64 = 0.0;

    let mut record = |t: f64, amps: &[C64], nrm: f64, states: &mut Vec<StateVector>| -> Result<()> {
        let sv = StateVector::new(shape, DVector::from_column_slice(amps))?;
        records.push(Record {
            t,
            p_g: ground_population(&sv),
            s_g: qubit_entropy(&sv)?,
            n_mean: mean_photon_number(&sv),
            norm: nrm,
        });
        if opts.keep_states {
            states.push(sv);
        }
        Ok(())
    };
    record(t_grid[0], &psi, norm(&psi), &mut states)?;

    for win in t_grid.windows(2) {
        let (t0, t1) = (win[0], win[1]);
        let span = t1 - t0;
        let n = (span / dt).ceil().max(1.0) as usize;
        let h_step = span / n as f64;
        dt_used = dt_used.max(h_step);
        for i in 0..n {
            let t = t0 + span * (i as f64) / (n as f64);
            match opts.method {
                Integrator::Rk4 => rk4_step(h, t, h_step, &mut psi, &mut work),
                Integrator::Magnus2 => magnus2_step(h, t, h_step, &mut psi, &mut work),
            }
        }
        steps += n;
        let nrm = norm(&psi);
        let drift = (nrm - 1.0).abs();
        if !nrm.is_finite() || drift > DRIFT_TOL {
            let ratio = if drift.is_finite() && drift > 0.0 { 0.5 * DRIFT_TOL / drift } else { 1e-3 };
            return Err(AqrmError::StepSize {
                drift,
                time: t1,
                suggested_dt: h_step * ratio.powf(1.0 / opts.method.order()),
            });
        }
        max_drift = max_drift.max(drift);
        max_rate = max_rate.max(drift / span);
        psi.iter_mut().for_each(|v| *v /= nrm);
        record(t1, &psi, nrm, &mut states)?;
    }
    let w = h.max_angular_frequency();
    let drift_per_period = (w > 0.0).then(|| max_rate * 2.0 * std::f64::consts::PI / w);
    Ok(Trajectory { records, states, method: opts.method, dt: dt_used, steps, max_drift, drift_per_period })
}

/// `n + 1` equally spaced times on `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(t1 > t0) {
        return Err(AqrmError::invalid("time grid needs t1 > t0 and at least one interval"));
    }
    Ok((0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Operator;
    use crate::models::{build_aqrm, lab_hamiltonian_bare_frame, AqrmParams, CircuitParams, Drive};
    use crate::units::{ghz, mhz};
    use nalgebra::DMatrix;

    fn expm_apply(h: &Operator, t: f64, psi: &StateVector) -> DVector<C64> {
        // eigen-decomposition of the Hermitian matrix: exp(−iHt) = V e^{−iEt} V†
        let eig = nalgebra::SymmetricEigen::new(h.to_dense());
        let v: &DMatrix<C64> = &eig.eigenvectors;
        let c = v.adjoint() * psi.amplitudes();
        let phased = DVector::from_iterator(c.len(), c.iter().zip(eig.eigenvalues.iter()).map(|(ci, &e)| ci * C64::cis(-e * t)));
        v * phased
    }

    fn small_case() -> (Operator, StateVector) {
        let p = AqrmParams::new(1.0, 1.3, 0.7, 0.4).with_phases(0.3, -0.2);
        let h = build_aqrm(&p, 32).unwrap();
        let psi = StateVector::basis(h.shape(), 1, 0).unwrap();
        (h, psi)
    }

    #[test]
    fn static_hamiltonian_matches_expm() {
        let (h, psi) = small_case();
        // g̃ t up to 10
        let t1 = 10.0 / 0.7;
        let grid = uniform_grid(0.0, t1, 20).unwrap();
        for m in [Integrator::Rk4, Integrator::Magnus2] {
            let dt = if m == Integrator::Rk4 { 2e-3 } else { 2e-4 };
            let traj = propagate(&h, &psi, &grid, &PropagateOptions::default().with_dt(dt).method(m).keeping_states()).unwrap();
            let want = expm_apply(&h, t1, &psi);
            let err = (traj.final_state().unwrap().amplitudes() - want).norm();
            assert!(err <= 1e-8, "{m:?}: {err:.3e}");
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        // small norm so the automatic cap stays below the probed steps
        let h = build_aqrm(&AqrmParams::new(0.05, 0.075, 0.0375, 0.025), 8).unwrap();
        let psi = StateVector::basis(h.shape(), 1, 0).unwrap();
        let t1 = 80.0;
        assert!(default_step(&h, None).unwrap() > 0.08);
        let want = expm_apply(&h, t1, &psi);
        let errs: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&dt| {
                let traj = propagate(&h, &psi, &[0.0, t1], &PropagateOptions::default().with_dt(dt).keeping_states()).unwrap();
                (traj.final_state().unwrap().amplitudes() - &want).norm()
            })
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((3.7..=4.3).contains(&slope), "slope {slope} from {errs:?}");
        }
    }

    #[test]
    fn record_times_are_exact_and_grid_is_validated() {
        let (h, psi) = small_case();
        let grid = [0.0, 0.3, 0.31, 1.0];
        let traj = propagate(&h, &psi, &grid, &PropagateOptions::default()).unwrap();
        assert_eq!(traj.times(), grid.to_vec());
        assert!(propagate(&h, &psi, &[0.0, 1.0, 1.0], &PropagateOptions::default()).is_err());
        assert!(propagate(&h, &psi, &[], &PropagateOptions::default()).is_err());
    }

    #[test]
    fn oversized_step_is_reported_with_a_suggestion() {
        let (h, psi) = small_case();
        // bypass the automatic rule by wrapping into a tiny-norm-bound view
        struct Loose<'a>(&'a Operator);
        impl TimeDependent for Loose<'_> {
            fn shape(&self) -> crate::hilbert::SpaceShape {
                self.0.shape()
            }
            fn apply(&self, t: f64, x: &[C64], out: &mut [C64]) {
                TimeDependent::apply(self.0, t, x, out)
            }
            fn max_angular_frequency(&self) -> f64 {
                0.0
            }
            fn norm_bound(&self) -> f64 {
                0.0
            }
            fn at(&self, t: f64) -> Operator {
                TimeDependent::at(self.0, t)
            }
        }
        let err = propagate(&Loose(&h), &psi, &[0.0, 5.0], &PropagateOptions::default().with_dt(0.5)).unwrap_err();
        match err {
            AqrmError::StepSize { suggested_dt, drift, .. } => {
                assert!(drift > DRIFT_TOL);
                assert!(suggested_dt < 0.5);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn dt_max_above_sampling_limit_is_rejected() {
        let d = |f: f64| Drive { strength: mhz(15.0), coupling: mhz(15.0), frequency: ghz(f), phase: 0.0 };
        let c = CircuitParams { omega: ghz(3.0), omega_q: ghz(18.0), g: mhz(37.0), red: d(15.0), blue: d(21.0) };
        let h = lab_hamiltonian_bare_frame(&c, 8).unwrap();
        let psi = StateVector::basis(h.shape(), 1, 0).unwrap();
        assert!(propagate(&h, &psi, &[0.0, 1e-10], &PropagateOptions::default().with_dt(1e-11)).is_err());
        let dt = default_step(&h, None).unwrap();
        assert!(dt <= 2.0 * std::f64::consts::PI / (200.0 * h.max_angular_frequency()) * (1.0 + 1e-12));
    }

    #[test]
    fn drift_per_period_is_small_at_default_step() {
        let d = |f: f64| Drive { strength: mhz(15.0), coupling: mhz(15.0), frequency: ghz(f), phase: 0.0 };
        let c = CircuitParams { omega: ghz(3.0), omega_q: ghz(18.0), g: mhz(37.0), red: d(15.0), blue: d(21.0) };
        let h = lab_hamiltonian_bare_frame(&c, 24).unwrap();
        let psi = StateVector::basis(h.shape(), 1, 0).unwrap();
        let grid = uniform_grid(0.0, 5e-9, 10).unwrap();
        let traj = propagate(&h, &psi, &grid, &PropagateOptions::default()).unwrap();
        assert!(traj.drift_per_period.unwrap() <= 1e-8, "{:?}", traj.drift_per_period);
    }

    #[test]
    fn csv_has_units_and_header() {
        let (h, psi) = small_case();
        let traj = propagate(&h, &psi, &[0.0, 0.5], &PropagateOptions::default()).unwrap();
        let csv = traj.to_csv("1/omega");
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# units"));
        assert_eq!(lines[1], "t,P_g,S_G,n_mean,norm");
        assert_eq!(lines.len(), 4);
    }
}
