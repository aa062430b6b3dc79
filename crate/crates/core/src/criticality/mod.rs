//! Quantum phase transition diagnostics of the effective model: fidelity
//! susceptibility, pseudocritical points, finite-size exponent fits, the
//! quadrature cumulant ratio with its fixed point, data collapse and gap
//! exponents.
//!
//! All sweeps are over independent `(η̃, λ̃, g̃)` points and run on the rayon
//! pool; results are collected in input order, so output does not depend on
//! the number of workers.

mod collapse;
mod cumulant;
mod fidelity;
mod fit;
mod gap;
mod peak;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use collapse::{collapse, CollapseKind, CollapseResult, ScalingCurve, X_WINDOW};
pub use cumulant::{cumulant_ratio, find_crossing, find_crossing_fn, rescaled_eta, Crossing, Curve};
pub use fidelity::{
    fidelity_susceptibility, susceptibility, FsMethod, FsOptions, FsValue, DEGENERACY_FLOOR, SPECTRAL_MAX_STATES,
    SPECTRAL_TAIL,
};
pub use fit::{fit_exponent, linear_fit, ScalingFit};
pub use gap::{critical_gap_scaling, default_gap_window, gap_scaling, GapScaling};
pub use peak::{find_peak, Peak, PeakOptions};

use crate::models::AqrmParams;
use crate::spectra::CutoffPolicy;
use crate::{AqrmError, Result};

/// A one-parameter family of models at fixed frequencies, anisotropy and
/// phases, indexed by the rotating coupling g̃ (with g̃_cr = λ̃ g̃).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub omega: f64,
    pub omega_q: f64,
    pub lambda: f64,
    #[serde(default)]
    pub phi_r: f64,
    #[serde(default)]
    pub phi_b: f64,
}

impl Family {
    /// `ω̃ = 1`, `ω̃_q = η̃`.
    pub fn scaled(eta: f64, lambda: f64) -> Self {
        Family { omega: 1.0, omega_q: eta, lambda, phi_r: 0.0, phi_b: 0.0 }
    }

    /// The family through `p`; needs `g̃_r ≠ 0` to read off λ̃.
    pub fn from_params(p: &AqrmParams) -> Result<Self> {
        let lambda = p.anisotropy().ok_or_else(|| AqrmError::invalid("λ̃ is undefined when g̃_r = 0"))?;
        Ok(Family { omega: p.omega, omega_q: p.omega_q, lambda, phi_r: p.phi_r, phi_b: p.phi_b })
    }

    pub fn with_phases(mut self, phi_r: f64, phi_b: f64) -> Self {
        self.phi_r = phi_r;
        self.phi_b = phi_b;
        self
    }

    pub fn at(&self, g: f64) -> AqrmParams {
        AqrmParams::new(self.omega, self.omega_q, g, self.lambda * g).with_phases(self.phi_r, self.phi_b)
    }

    pub fn at_ratio(&self, ratio: f64) -> AqrmParams {
        self.at(ratio * self.critical_coupling().unwrap_or(f64::NAN))
    }

    pub fn eta(&self) -> Result<f64> {
        if self.omega == 0.0 {
            return Err(AqrmError::NumericDomain("η̃ undefined for ω̃ = 0".into()));
        }
        Ok(self.omega_q / self.omega)
    }

    pub fn critical_coupling(&self) -> Result<f64> {
        let prod = self.omega * self.omega_q;
        if !(prod > 0.0) || !(self.lambda > -1.0) {
            return Err(AqrmError::NumericDomain(format!(
                "g̃_c undefined for ω̃ω̃_q = {prod}, λ̃ = {}",
                self.lambda
            )));
        }
        Ok(prod.sqrt() / (1.0 + self.lambda))
    }

    pub fn eta_prime(&self) -> Result<f64> {
        rescaled_eta(self.eta()?, self.lambda)
    }
}

/// χ_F sampled on a coupling grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsCurve {
    /// The family evaluated at g̃_c.
    pub params: AqrmParams,
    pub g_grid: Vec<f64>,
    pub chi: Vec<f64>,
    pub eta: f64,
    pub lambda: f64,
}

impl FsCurve {
    pub fn ratios(&self) -> Vec<f64> {
        let gc = self.params.g_r;
        self.g_grid.iter().map(|g| g / gc).collect()
    }
}

/// χ_F on the couplings `ratios · g̃_c` (ascending).
pub fn fs_curve(fam: &Family, ratios: &[f64], opts: &FsOptions) -> Result<FsCurve> {
    if ratios.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AqrmError::invalid("coupling grid must be strictly ascending"));
    }
    let gc = fam.critical_coupling()?;
    let g_grid: Vec<f64> = ratios.iter().map(|r| r * gc).collect();
    let chi = g_grid
        .par_iter()
        .map(|&g| susceptibility(fam, g, opts).map(|v| v.chi))
        .collect::<Result<Vec<f64>>>()?;
    Ok(FsCurve { params: fam.at(gc), g_grid, chi, eta: fam.eta()?, lambda: fam.lambda })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalOptions {
    pub fs: FsOptions,
    /// Peak search bracket in units of g̃_c.
    pub bracket: [f64; 2],
    pub peak: PeakOptions,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            fs: FsOptions::default(),
            bracket: [0.8, 1.5],
            peak: PeakOptions { scan_points: 36, xtol: 1e-6, max_iter: 200 },
        }
    }
}

/// Location and height of the χ_F maximum of one family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub eta: f64,
    pub lambda: f64,
    /// g̃_max / g̃_c.
    pub ratio: f64,
    pub g_max: f64,
    pub chi_max: f64,
    pub evaluations: usize,
}

pub fn pseudocritical_point(fam: &Family, opts: &CriticalOptions) -> Result<PeakRecord> {
    let gc = fam.critical_coupling()?;
    let f = |x: f64| susceptibility(fam, x * gc, &opts.fs).map(|v| v.chi);
    let peak = find_peak(f, opts.bracket[0], opts.bracket[1], &opts.peak)?;
    Ok(PeakRecord {
        eta: fam.eta()?,
        lambda: fam.lambda,
        ratio: peak.x,
        g_max: peak.x * gc,
        chi_max: peak.value,
        evaluations: peak.evaluations,
    })
}

/// Finite-size scaling of the χ_F peak at one anisotropy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingAnalysis {
    pub lambda: f64,
    pub peaks: Vec<PeakRecord>,
    /// `χ_F(g̃_max) ∼ η̃^{d_a}`.
    pub adiabatic_dimension: ScalingFit,
    /// `|1 − g̃_max/g̃_c| ∼ η̃^{−1/ν}`.
    pub shift: ScalingFit,
}

/// Default η̃ values for exponent fits.
pub const DEFAULT_ETAS: [f64; 5] = [32.0, 64.0, 128.0, 256.0, 512.0];

pub fn scaling_analysis(etas: &[f64], lambda: f64, opts: &CriticalOptions) -> Result<ScalingAnalysis> {
    let peaks = etas
        .par_iter()
        .map(|&eta| pseudocritical_point(&Family::scaled(eta, lambda), opts))
        .collect::<Result<Vec<PeakRecord>>>()?;
    let heights: Vec<f64> = peaks.iter().map(|p| p.chi_max).collect();
    let shifts: Vec<f64> = peaks.iter().map(|p| (1.0 - p.ratio).abs()).collect();
    Ok(ScalingAnalysis {
        lambda,
        adiabatic_dimension: fit_exponent(etas, &heights)?,
        shift: fit_exponent(etas, &shifts)?,
        peaks,
    })
}

/// U_X on the couplings `ratios · g̃_c`.
pub fn cumulant_curve(fam: &Family, ratios: &[f64], policy: &CutoffPolicy) -> Result<ScalingCurve> {
    let values = ratios
        .par_iter()
        .map(|&r| cumulant_ratio(&fam.at_ratio(r), policy))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalingCurve { eta: fam.eta()?, lambda: fam.lambda, eta_prime: fam.eta_prime()?, ratios: ratios.to_vec(), values })
}

/// Grid of ratios covering `|x| ≤ half_width` in the scaling variable
/// `x = η̃′^{1/ν}(g̃/g̃_c − 1)`.
pub fn scaling_grid(eta_prime: f64, nu: f64, half_width: f64, points: usize) -> Vec<f64> {
    let s = eta_prime.powf(-1.0 / nu);
    (0..points)
        .map(|i| 1.0 + s * half_width * (2.0 * i as f64 / (points - 1) as f64 - 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::StateVector;
    use crate::spectra::ground_state;
    use crate::C64;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn family_round_trip() {
        let p = AqrmParams::at_ratio(30.0, 0.4, 0.7).with_phases(0.1, 0.2);
        let f = Family::from_params(&p).unwrap();
        let q = f.at(p.g_r);
        assert!((q.g_cr - p.g_cr).abs() < 1e-15 && q.phi_b == 0.2);
        assert!((f.at_ratio(0.7).g_r - p.g_r).abs() < 1e-12);
        assert!(Family::from_params(&AqrmParams::new(1.0, 1.0, 0.0, 0.3)).is_err());
    }

    #[test]
    fn susceptibility_ignores_state_phases() {
        // overlap χ_F from full-space states with random global phases
        let fam = Family::scaled(40.0, 0.8);
        let gc = fam.critical_coupling().unwrap();
        let (g, dg, nc) = (0.95 * gc, 1e-4 * gc, 120);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut states: Vec<StateVector> = [g - dg, g, g + dg]
            .iter()
            .map(|&x| ground_state(&fam.at(x), nc).unwrap().1)
            .collect();
        for s in &mut states {
            let phase = C64::from_polar(1.0, rng.random::<f64>() * 6.0);
            let amps: DVector<C64> = s.amplitudes() * phase;
            *s = StateVector::new(s.shape(), amps).unwrap();
        }
        let inf = |a: &StateVector, b: &StateVector| {
            // 1 − |⟨a|b⟩| = min_φ ‖a − e^{iφ} b‖² / 2
            let ov = a.inner(b);
            let rot = ov / ov.norm();
            (a.amplitudes() - b.amplitudes() * rot.conj()).norm_squared() * 0.5
        };
        let chi = (inf(&states[0], &states[1]) + inf(&states[1], &states[2])) / (dg * dg);
        let want = fidelity_susceptibility(&fam, g, dg, FsMethod::Overlap, nc).unwrap().chi;
        assert!((chi - want).abs() <= 1e-8 * want, "{chi} vs {want}");
    }

    #[test]
    fn peak_grows_and_approaches_critical_point() {
        let opts = CriticalOptions::default();
        let lo = pseudocritical_point(&Family::scaled(32.0, 0.1), &opts).unwrap();
        let hi = pseudocritical_point(&Family::scaled(256.0, 0.1), &opts).unwrap();
        assert!(hi.chi_max > lo.chi_max);
        assert!((hi.ratio - 1.0).abs() < (lo.ratio - 1.0).abs());
        let a = pseudocritical_point(&Family::scaled(64.0, 10.0), &opts).unwrap();
        let b = pseudocritical_point(&Family::scaled(512.0, 10.0), &opts).unwrap();
        assert!((b.ratio - 1.0).abs() < (a.ratio - 1.0).abs());
    }

    #[test]
    fn fs_curve_is_positive_and_peaked() {
        let ratios: Vec<f64> = (0..=20).map(|i| 0.5 + 0.05 * i as f64).collect();
        let c = fs_curve(&Family::scaled(64.0, 1.0), &ratios, &FsOptions::default()).unwrap();
        assert!(c.chi.iter().all(|v| *v >= 0.0));
        let imax = (0..c.chi.len()).max_by(|&a, &b| c.chi[a].total_cmp(&c.chi[b])).unwrap();
        assert!(imax > 0 && imax < c.chi.len() - 1);
    }

    #[test]
    fn scaling_grid_spans_window() {
        let g = scaling_grid(100.0, 1.5, 2.0, 5);
        let s = 100f64.powf(1.0 / 1.5);
        assert!(((g[0] - 1.0) * s + 2.0).abs() < 1e-12 && ((g[4] - 1.0) * s - 2.0).abs() < 1e-12);
    }
}
