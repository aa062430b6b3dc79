//! Excitation-gap exponents.
//!
//! In the normal phase of the η̃ → ∞ model the soft mode has frequency
//! `ω̃ √(1 − (g̃/g̃_c)²)`, so the intra-sector gap is fitted against
//! `1 − (g̃/g̃_c)²`; the fit against `1 − g̃/g̃_c` carries the `(1 + g̃/g̃_c)^{zν}`
//! factor and is reported alongside. Close to g̃_c the finite-η̃ gap saturates
//! at `∼ η̃^{−z}`, which sets the lower end of the default window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_exponent, ScalingFit};
use super::Family;
use crate::spectra::{excitation_gap, intra_sector_gap, CutoffPolicy};
use crate::{AqrmError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScaling {
    pub eta: f64,
    pub lambda: f64,
    /// `(g̃/g̃_c, intra-sector gap)` on the normal side.
    pub points: Vec<(f64, f64)>,
    /// Exponent zν from the gap against `1 − (g̃/g̃_c)²`.
    pub reduced: ScalingFit,
    /// Exponent from the gap against `1 − g̃/g̃_c`.
    pub linear: ScalingFit,
}

/// Default window in `d = 1 − (g̃/g̃_c)²`: from `10 η̃^{−2/3}` to 0.9.
pub fn default_gap_window(eta: f64) -> (f64, f64) {
    (10.0 * eta.powf(-2.0 / 3.0), 0.9)
}

/// Fit the normal-side intra-sector gap on `points` values of
/// `d = 1 − (g̃/g̃_c)²` spaced geometrically over `window`.
pub fn gap_scaling(fam: &Family, window: (f64, f64), points: usize, policy: &CutoffPolicy) -> Result<GapScaling> {
    let (lo, hi) = window;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(AqrmError::invalid(format!("gap window ({lo}, {hi}) must satisfy 0 < lo < hi < 1")));
    }
    if points < 3 {
        return Err(AqrmError::invalid("gap fit needs at least 3 points"));
    }
    let ds: Vec<f64> = (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect();
    let ratios: Vec<f64> = ds.iter().map(|d| (1.0 - d).sqrt()).collect();
    let gaps = ratios
        .par_iter()
        .map(|&r| intra_sector_gap(&fam.at_ratio(r), policy))
        .collect::<Result<Vec<f64>>>()?;
    let reduced = fit_exponent(&ds, &gaps)?;
    let lin: Vec<f64> = ratios.iter().map(|r| 1.0 - r).collect();
    let linear = fit_exponent(&lin, &gaps)?;
    Ok(GapScaling {
        eta: fam.eta()?,
        lambda: fam.lambda,
        points: ratios.into_iter().zip(gaps).collect(),
        reduced,
        linear,
    })
}

/// Cross-sector gap at g̃ = g̃_c against η̃; the slope estimates −z.
pub fn critical_gap_scaling(etas: &[f64], lambda: f64, policy: &CutoffPolicy) -> Result<ScalingFit> {
    let gaps = etas
        .par_iter()
        .map(|&eta| excitation_gap(&Family::scaled(eta, lambda).at_ratio(1.0), policy))
        .collect::<Result<Vec<f64>>>()?;
    fit_exponent(etas, &gaps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_gap_exponent() {
        let fam = Family::scaled(400.0, 1.0);
        let g = gap_scaling(&fam, default_gap_window(400.0), 12, &CutoffPolicy::converge(1e-10, 4096)).unwrap();
        assert!((g.reduced.exponent - 0.5).abs() <= 0.05, "{:?}", g.reduced);
        assert!(g.points.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 > w[0].1));
    }

    #[test]
    fn critical_gap_closes() {
        let f = critical_gap_scaling(&[32.0, 128.0, 512.0], 1.0, &CutoffPolicy::converge(1e-10, 4096)).unwrap();
        assert!(f.exponent < -0.2 && f.exponent > -0.45, "{f:?}");
    }

    #[test]
    fn invalid_window() {
        let fam = Family::scaled(8.0, 1.0);
        assert!(gap_scaling(&fam, (0.5, 0.2), 5, &CutoffPolicy::Fixed { cutoff: 40 }).is_err());
    }
}
