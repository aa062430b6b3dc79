//! Eigenproblems and static observables: low spectra, ground states,
//! excitation gaps, quadrature moments and cutoff convergence.
//!
//! General operators go through [`low_spectrum`], which uses a dense
//! Hermitian solve below the dense threshold and restarted Lanczos above.
//! The effective model has a Z₂ parity, and every AQRM-specific routine here
//! works on the two real tridiagonal parity chains instead of the full
//! matrix; the full solve remains available as the oracle.

mod lanczos;
mod parity;
mod tridiag;

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub use lanczos::{lanczos_lowest, LanczosOptions, LanczosOutput};
pub use parity::{parity_chains, ParityChain, Sector};
pub use tridiag::Tridiagonal;

use crate::hilbert::{dense_threshold, Operator, StateVector};
use crate::models::AqrmParams;
use crate::{AqrmError, Result, C64};

/// Relative residual bound every returned eigenpair must satisfy.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    pub cutoff_used: usize,
    pub converged: bool,
    /// `‖Hψ − Eψ‖ / ‖H‖_∞` per pair.
    pub residuals: Vec<f64>,
}

impl EigenResult {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn gap(&self) -> Option<f64> {
        (self.energies.len() > 1).then(|| self.energies[1] - self.energies[0])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum SolverMethod {
    /// Dense below [`dense_threshold`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos(LanczosOptions),
}

/// Rotate `v` so its largest-magnitude amplitude is real and positive.
pub fn fix_phase(v: &mut DVector<C64>) {
    let Some((_, &big)) = v.iter().enumerate().max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr())) else {
        return;
    };
    if big.norm() > 0.0 {
        let rot = big.conj() / big.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

/// The `k` lowest eigenpairs of a Hermitian operator.
pub fn low_spectrum(h: &Operator, k: usize) -> Result<EigenResult> {
    low_spectrum_with(h, k, SolverMethod::Auto)
}

pub fn low_spectrum_with(h: &Operator, k: usize, method: SolverMethod) -> Result<EigenResult> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(AqrmError::invalid(format!("requested {k} eigenpairs of a {dim}-dimensional operator")));
    }
    if !h.is_hermitian_rel(1e-10) {
        return Err(AqrmError::invalid(format!(
            "operator is not Hermitian (defect {:.3e})",
            h.hermiticity_defect()
        )));
    }
    let use_dense = match method {
        SolverMethod::Auto => dim < dense_threshold(),
        SolverMethod::Dense => true,
        SolverMethod::Lanczos(_) => false,
    };
    let (energies, mut vectors) = if use_dense {
        let eig = SymmetricEigen::new(h.to_dense());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order.truncate(k);
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect::<Vec<_>>();
        let vecs = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>();
        (vals, vecs)
    } else {
        let opts = match method {
            SolverMethod::Lanczos(o) => o,
            _ => LanczosOptions::default(),
        };
        let out = lanczos_lowest(h, k, &opts)?;
        (out.values, out.vectors)
    };
    let hnorm = h.norm_inf().max(f64::MIN_POSITIVE);
    let mut residuals = Vec::with_capacity(k);
    let mut states = Vec::with_capacity(k);
    for (e, v) in energies.iter().zip(vectors.iter_mut()) {
        fix_phase(v);
        let r = (h.apply(v) - &*v * C64::new(*e, 0.0)).norm() / hnorm;
        residuals.push(r);
        states.push(StateVector::normalized(h.shape(), v.clone())?);
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > RESIDUAL_TOL {
        return Err(AqrmError::Iteration {
            iterations: 0,
            residual: worst,
            converged: residuals.iter().filter(|r| **r <= RESIDUAL_TOL).count(),
            requested: k,
        });
    }
    Ok(EigenResult { energies, states, cutoff_used: h.shape().boson_cutoff, converged: true, residuals })
}

/// Lowest `k` eigenpairs of one parity chain, kept in chain coordinates.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub chain: ParityChain,
    pub energies: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SectorSpectrum {
    pub fn state(&self, i: usize) -> Result<StateVector> {
        let psi = self.chain.embed(&self.vectors[i])?;
        let mut amps = psi.into_amplitudes();
        fix_phase(&mut amps);
        StateVector::new(self.chain_shape(), amps)
    }

    fn chain_shape(&self) -> crate::hilbert::SpaceShape {
        crate::hilbert::SpaceShape { n_qubits: 1, boson_cutoff: self.chain.cutoff() }
    }
}

pub fn sector_spectrum(p: &AqrmParams, cutoff: usize, sector: Sector, k: usize) -> Result<SectorSpectrum> {
    let chain = ParityChain::new(p, cutoff, sector)?;
    let k = k.min(cutoff);
    let (energies, vectors) = chain.matrix.lowest_eigenpairs(k)?;
    Ok(SectorSpectrum { chain, energies, vectors })
}

/// Lowest `k` AQRM eigenpairs from both parity chains, merged and sorted.
pub fn aqrm_low_spectrum(p: &AqrmParams, cutoff: usize, k: usize) -> Result<EigenResult> {
    if k == 0 || k > 2 * cutoff {
        return Err(AqrmError::invalid(format!("requested {k} eigenpairs at cutoff {cutoff}")));
    }
    let sectors = [
        sector_spectrum(p, cutoff, Sector::Ground, k)?,
        sector_spectrum(p, cutoff, Sector::Other, k)?,
    ];
    let mut all: Vec<(f64, usize, usize)> = sectors
        .iter()
        .enumerate()
        .flat_map(|(s, sp)| sp.energies.iter().enumerate().map(move |(i, &e)| (e, s, i)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.truncate(k);
    let mut residuals = Vec::with_capacity(k);
    let mut states = Vec::with_capacity(k);
    for &(e, s, i) in &all {
        let sp = &sectors[s];
        residuals.push(sp.chain.matrix.residual(e, &sp.vectors[i]) / sp.chain.matrix.norm_bound());
        states.push(sp.state(i)?);
    }
    let converged = residuals.iter().all(|r| *r <= RESIDUAL_TOL);
    Ok(EigenResult { energies: all.iter().map(|x| x.0).collect(), states, cutoff_used: cutoff, converged, residuals })
}

/// Ground energy and state: the lowest state of the parity sector containing `|g,0⟩`.
pub fn ground_state(p: &AqrmParams, cutoff: usize) -> Result<(f64, StateVector)> {
    let sp = sector_spectrum(p, cutoff, Sector::Ground, 1)?;
    Ok((sp.energies[0], sp.state(0)?))
}

/// Truncation handling for AQRM observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum CutoffPolicy {
    Fixed { cutoff: usize },
    Converge { tol: f64, start: usize, cap: usize },
}

impl CutoffPolicy {
    pub fn converge(tol: f64, cap: usize) -> Self {
        CutoffPolicy::Converge { tol, start: 32, cap }
    }

    /// Resolve to a concrete cutoff for `p`; an unconverged search is an error.
    pub fn resolve(&self, p: &AqrmParams) -> Result<usize> {
        match *self {
            CutoffPolicy::Fixed { cutoff } => {
                if cutoff == 0 {
                    return Err(AqrmError::invalid("cutoff must be positive"));
                }
                Ok(cutoff)
            }
            CutoffPolicy::Converge { tol, start, cap } => {
                let report = converge_cutoff(aqrm_probe(p), tol, start, cap)?;
                report.accepted()
            }
        }
    }
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::converge(1e-10, 4096)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSample {
    pub cutoff: usize,
    pub e0: f64,
    pub x2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cutoff: usize,
    pub converged: bool,
    pub cap: usize,
    pub tol: f64,
    /// Largest of the two relative changes at the last comparison.
    pub last_change: f64,
    pub history: Vec<CutoffSample>,
}

impl ConvergenceReport {
    /// The cutoff if converged, otherwise [`AqrmError::Unconverged`].
    pub fn accepted(&self) -> Result<usize> {
        if self.converged {
            Ok(self.cutoff)
        } else {
            Err(AqrmError::Unconverged { cap: self.cap, last_change: self.last_change })
        }
    }
}

/// Ground energy and `⟨X²⟩` of the AQRM ground state at a given cutoff.
pub fn aqrm_probe(p: &AqrmParams) -> impl FnMut(usize) -> Result<(f64, f64)> + '_ {
    move |nc| {
        let (e0, psi) = ground_state(p, nc)?;
        Ok((e0, quadrature_moment(&psi, 1)))
    }
}

/// Doubling search `start, 2·start, …` (clamped to `cap`) for the smallest
/// cutoff at which both the ground energy and `⟨X²⟩` change by less than
/// `tol` (relative) from the previous cutoff.
pub fn converge_cutoff<F>(mut probe: F, tol: f64, start: usize, cap: usize) -> Result<ConvergenceReport>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    if !(tol > 0.0) {
        return Err(AqrmError::invalid("convergence tolerance must be positive"));
    }
    if start == 0 || cap < start {
        return Err(AqrmError::invalid(format!("invalid cutoff range {start}..{cap}")));
    }
    let mut history: Vec<CutoffSample> = Vec::new();
    let mut nc = start;
    let mut last_change = f64::INFINITY;
    loop {
        let (e0, x2) = probe(nc)?;
        if let Some(prev) = history.last() {
            let de = (e0 - prev.e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
            let dx = (x2 - prev.x2).abs() / x2.abs().max(f64::MIN_POSITIVE);
            last_change = de.max(dx);
        }
        history.push(CutoffSample { cutoff: nc, e0, x2 });
        if last_change < tol {
            return Ok(ConvergenceReport { cutoff: nc, converged: true, cap, tol, last_change, history });
        }
        if nc >= cap {
            return Ok(ConvergenceReport { cutoff: nc, converged: false, cap, tol, last_change, history });
        }
        nc = (2 * nc).min(cap);
    }
}

/// `E₁ − E₀` over both parity sectors.
pub fn excitation_gap(p: &AqrmParams, policy: &CutoffPolicy) -> Result<f64> {
    let nc = policy.resolve(p)?;
    let s = aqrm_low_spectrum(p, nc, 2)?;
    Ok(s.energies[1] - s.energies[0])
}

/// `E₁ − E₀` within the ground parity sector.
pub fn intra_sector_gap(p: &AqrmParams, policy: &CutoffPolicy) -> Result<f64> {
    let nc = policy.resolve(p)?;
    let s = sector_spectrum(p, nc, Sector::Ground, 2)?;
    if s.energies.len() < 2 {
        return Err(AqrmError::invalid("intra-sector gap needs a cutoff of at least 2"));
    }
    Ok(s.energies[1] - s.energies[0])
}

// Quadratures act on the Fock index; the field vector is padded by one level
// per application so ⟨X^{2n}⟩ = ‖X^n ψ‖² is exact for the truncated state.
fn apply_quadrature(v: &[C64], momentum: bool) -> Vec<C64> {
    let n = v.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..=n)
        .map(|m| {
            let down = if m >= 1 { v[m - 1] * (m as f64).sqrt() } else { C64::new(0.0, 0.0) };
            let up = if m + 1 < n { v[m + 1] * ((m + 1) as f64).sqrt() } else { C64::new(0.0, 0.0) };
            if momentum {
                C64::new(0.0, s) * (down - up)
            } else {
                (down + up) * s
            }
        })
        .collect()
}

fn field_moment(psi: &StateVector, order: usize, momentum: bool) -> f64 {
    let nc = psi.shape().boson_cutoff;
    let amps = psi.amplitudes().as_slice();
    amps.chunks(nc)
        .map(|block| {
            let mut v = block.to_vec();
            for _ in 0..order {
                v = apply_quadrature(&v, momentum);
            }
            v.iter().map(|x| x.norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// `⟨X^{2n}⟩` with `X = (a + a†)/√2` acting on the field factor.
pub fn quadrature_moment(psi: &StateVector, n: usize) -> f64 {
    field_moment(psi, n, false)
}

/// `⟨P^{2n}⟩` with `P = i(a† − a)/√2`.
pub fn momentum_moment(psi: &StateVector, n: usize) -> f64 {
    field_moment(psi, n, true)
}
