//! Finite-size data collapse onto a single scaling function.

use serde::{Deserialize, Serialize};

use super::cumulant::Curve;
use crate::{AqrmError, Result};

/// Half-width of the scaling window `|x| ≤ X_WINDOW`.
pub const X_WINDOW: f64 = 2.0;
const GRID_POINTS: usize = 81;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollapseKind {
    /// Dimensionless ordinate (the cumulant ratio), not rescaled.
    #[default]
    Cumulant,
    /// χ_F, rescaled by `η̃^{−d_a}` and a fitted constant per curve.
    Susceptibility,
}

/// One finite-size curve: coupling ratios `g̃/g̃_c` and ordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub eta: f64,
    pub lambda: f64,
    pub eta_prime: f64,
    pub ratios: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub d_a: f64,
    pub nu: f64,
    pub kind: CollapseKind,
    /// Rescaled curves, in input order.
    pub curves: Vec<Curve>,
    /// Fitted amplitude per curve (1 for cumulant collapses).
    pub constants: Vec<f64>,
    /// Window actually compared, a subset of `|x| ≤ X_WINDOW`.
    pub window: [f64; 2],
    pub residual: f64,
}

/// Rescale `curves` with `x = η̃′^{1/ν} (g̃/g̃_c − 1)` and measure the spread:
/// the pointwise standard deviation across curves, averaged over the common
/// window and divided by the range of the mean curve.
pub fn collapse(curves: &[ScalingCurve], d_a: f64, nu: f64, kind: CollapseKind) -> Result<CollapseResult> {
    if curves.len() < 2 {
        return Err(AqrmError::invalid("a collapse needs at least two curves"));
    }
    if !(nu > 0.0) || !d_a.is_finite() {
        return Err(AqrmError::invalid(format!("invalid exponents d_a = {d_a}, ν = {nu}")));
    }
    let mut rescaled = Vec::with_capacity(curves.len());
    for c in curves {
        if !(c.eta_prime > 0.0) {
            return Err(AqrmError::invalid("rescaled η̃′ must be positive"));
        }
        let s = c.eta_prime.powf(1.0 / nu);
        let xs = c.ratios.iter().map(|r| s * (r - 1.0)).collect();
        let ys = match kind {
            CollapseKind::Cumulant => c.values.clone(),
            CollapseKind::Susceptibility => c.values.iter().map(|v| v * c.eta.powf(-d_a)).collect(),
        };
        rescaled.push(Curve::new(xs, ys)?);
    }
    let lo = rescaled.iter().map(|c| c.xs[0]).fold(-X_WINDOW, f64::max);
    let hi = rescaled.iter().map(|c| c.xs[c.xs.len() - 1]).fold(X_WINDOW, f64::min);
    if !(hi > lo) {
        return Err(AqrmError::invalid("rescaled curves share no window"));
    }
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).collect();
    let sampled: Vec<Vec<f64>> = rescaled
        .iter()
        .map(|c| grid.iter().map(|&x| c.interpolate(x).expect("grid inside every curve")).collect())
        .collect();
    let constants = match kind {
        CollapseKind::Cumulant => vec![1.0; curves.len()],
        CollapseKind::Susceptibility => fit_constants(&sampled),
    };
    let scaled: Vec<Vec<f64>> = sampled.iter().zip(&constants).map(|(s, c)| s.iter().map(|v| v / c).collect()).collect();
    let m = scaled.len() as f64;
    let mean: Vec<f64> = (0..grid.len()).map(|j| scaled.iter().map(|s| s[j]).sum::<f64>() / m).collect();
    let spread: f64 = (0..grid.len())
        .map(|j| (scaled.iter().map(|s| (s[j] - mean[j]).powi(2)).sum::<f64>() / m).sqrt())
        .sum::<f64>()
        / grid.len() as f64;
    let range = mean.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mean.iter().copied().fold(f64::INFINITY, f64::min);
    let residual = if range > 0.0 { spread / range } else if spread == 0.0 { 0.0 } else { f64::INFINITY };
    let curves = rescaled
        .into_iter()
        .zip(&constants)
        .map(|(c, k)| Curve { ys: c.ys.iter().map(|v| v / k).collect(), xs: c.xs })
        .collect();
    Ok(CollapseResult { d_a, nu, kind, curves, constants, window: [lo, hi], residual })
}

// Amplitudes C_i minimising Σ_i ‖y_i / C_i − m‖² with m the mean of the
// rescaled curves, normalised so the first curve keeps C = 1.
fn fit_constants(sampled: &[Vec<f64>]) -> Vec<f64> {
    let mut c = vec![1.0; sampled.len()];
    for _ in 0..50 {
        let m: Vec<f64> = (0..sampled[0].len())
            .map(|j| sampled.iter().zip(&c).map(|(s, k)| s[j] / k).sum::<f64>() / sampled.len() as f64)
            .collect();
        let mm: f64 = m.iter().map(|v| v * v).sum();
        let next: Vec<f64> = sampled
            .iter()
            .map(|s| {
                let sy: f64 = s.iter().zip(&m).map(|(a, b)| a * b).sum();
                let yy: f64 = s.iter().map(|v| v * v).sum();
                // 1/C minimising ‖y/C − m‖²
                if sy > 0.0 { yy / sy } else { 1.0 }
            })
            .map(|v| if mm > 0.0 { v } else { 1.0 })
            .collect();
        let norm = next[0];
        let next: Vec<f64> = next.iter().map(|v| v / norm).collect();
        let change = next.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        c = next;
        if change < 1e-14 {
            break;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(eta_prime: f64, nu: f64, amp: f64) -> ScalingCurve {
        let ratios: Vec<f64> = (0..201).map(|i| 0.9 + 0.001 * i as f64).collect();
        let values = ratios.iter().map(|r| amp * (-(eta_prime.powf(1.0 / nu) * (r - 1.0)).powi(2)).exp() + 1.0).collect();
        ScalingCurve { eta: eta_prime, lambda: 1.0, eta_prime, ratios, values }
    }

    #[test]
    fn identical_curves_collapse_exactly() {
        let c = synthetic(200.0, 1.5, 1.0);
        let r = collapse(&[c.clone(), c], 1.0 / 3.0, 1.5, CollapseKind::Cumulant).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn planted_exponent_wins() {
        let curves: Vec<ScalingCurve> = [100.0, 300.0, 900.0].iter().map(|&e| synthetic(e, 1.5, 1.0)).collect();
        let good = collapse(&curves, 0.0, 1.5, CollapseKind::Cumulant).unwrap().residual;
        let bad = collapse(&curves, 0.0, 1.0, CollapseKind::Cumulant).unwrap().residual;
        assert!(good < 1e-3 && bad > 10.0 * good, "{good} {bad}");
    }

    #[test]
    fn fitted_constants_absorb_amplitudes() {
        let mut curves: Vec<ScalingCurve> = [100.0, 300.0].iter().map(|&e| synthetic(e, 1.5, 1.0)).collect();
        curves[1].values.iter_mut().for_each(|v| *v *= 2.5);
        let r = collapse(&curves, 0.0, 1.5, CollapseKind::Susceptibility).unwrap();
        assert!((r.constants[1] / r.constants[0] - 2.5).abs() < 1e-3);
        assert!(r.residual < 1e-3);
    }

    #[test]
    fn disjoint_windows_rejected() {
        let mut a = synthetic(100.0, 1.5, 1.0);
        a.ratios = a.ratios.iter().map(|r| r + 5.0).collect();
        let b = synthetic(100.0, 1.5, 1.0);
        assert!(matches!(collapse(&[a, b], 0.0, 1.5, CollapseKind::Cumulant), Err(AqrmError::InvalidArgument(_))));
    }
}
