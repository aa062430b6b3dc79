//! Ground-state fidelity susceptibility in the ground parity sector.
//!
//! Both methods work on the real parity chain. The coupling phases only enter
//! the gauge, which does not depend on g̃ ≥ 0, so chain vectors at different
//! couplings are directly comparable.

use serde::{Deserialize, Serialize};

use super::Family;
use crate::spectra::{sector_spectrum, CutoffPolicy, ParityChain, Sector};
use crate::{AqrmError, Result};

/// States kept in the spectral sum.
pub const SPECTRAL_MAX_STATES: usize = 200;
/// Relative bound on the omitted terms below which the spectral sum stops.
pub const SPECTRAL_TAIL: f64 = 1e-10;
/// Energy denominators below this are excluded from the spectral sum and flagged.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FsMethod {
    /// Symmetric overlap stencil of neighbouring ground states.
    #[default]
    Overlap,
    /// Perturbative sum over excited states.
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsOptions {
    pub method: FsMethod,
    /// Overlap stencil step as a fraction of g̃_c.
    pub step: f64,
    /// Relative disagreement between steps dg and dg/2 that triggers a smaller step.
    pub richardson_tol: f64,
    pub max_refinements: usize,
    pub cutoff: CutoffPolicy,
}

impl Default for FsOptions {
    fn default() -> Self {
        FsOptions {
            method: FsMethod::Overlap,
            step: 1e-4,
            richardson_tol: 1e-3,
            max_refinements: 4,
            cutoff: CutoffPolicy::converge(1e-10, 4096),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsValue {
    pub chi: f64,
    pub cutoff: usize,
    /// Overlap: the accepted step. Spectral: 0.
    pub step: f64,
    /// Overlap: relative change from halving the accepted step.
    pub richardson: Option<f64>,
    /// Spectral: number of terms summed.
    pub terms: usize,
    /// Spectral: terms dropped for a vanishing energy denominator.
    pub excluded: usize,
    /// Spectral: sum-rule bound on the omitted terms, relative to χ_F. It stays
    /// above the stopping threshold when the state budget runs out first.
    pub tail: Option<f64>,
}

fn ground_vector(chain: &ParityChain) -> Result<Vec<f64>> {
    let x = chain.matrix.eigenvalue(0)?;
    Ok(chain.matrix.eigenvector(x, &[]))
}

fn ground_at(fam: &Family, g: f64, cutoff: usize) -> Result<Vec<f64>> {
    ground_vector(&ParityChain::new(&fam.at(g), cutoff, Sector::Ground)?)
}

// 1 − |⟨a|b⟩| for real unit vectors, without cancellation.
fn infidelity(a: &[f64], b: &[f64]) -> f64 {
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum();
    0.5 * minus.min(plus)
}

fn overlap_chi(fam: &Family, g: f64, dg: f64, cutoff: usize) -> Result<f64> {
    let a = ground_at(fam, g - dg, cutoff)?;
    let b = ground_at(fam, g, cutoff)?;
    let c = ground_at(fam, g + dg, cutoff)?;
    let forward = 2.0 * infidelity(&b, &c) / (dg * dg);
    let backward = 2.0 * infidelity(&a, &b) / (dg * dg);
    Ok(0.5 * (forward + backward))
}

fn spectral_chi(fam: &Family, g: f64, cutoff: usize) -> Result<(f64, usize, usize, f64)> {
    let p = fam.at(g);
    let sp = sector_spectrum(&p, cutoff, Sector::Ground, SPECTRAL_MAX_STATES.min(cutoff))?;
    // H_I in chain coordinates: the chain off-diagonals at unit coupling
    let unit = ParityChain::new(&fam.at(1.0), cutoff, Sector::Ground)?;
    let c = &unit.matrix.b;
    let v0 = &sp.vectors[0];
    let n = v0.len();
    let hv: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = 0.0;
            if i > 0 {
                s += c[i - 1] * v0[i - 1];
            }
            if i + 1 < n {
                s += c[i] * v0[i + 1];
            }
            s
        })
        .collect();
    let e0 = sp.energies[0];
    // sum rule: the weights |⟨n|H_I|0⟩|² over n > 0 add up to the variance of H_I
    let mean: f64 = v0.iter().zip(&hv).map(|(x, y)| x * y).sum();
    let variance = (hv.iter().map(|x| x * x).sum::<f64>() - mean * mean).max(0.0);
    let mut covered = 0.0;
    let mut total = 0.0;
    let mut terms = 0;
    let mut excluded = 0;
    let mut tail = f64::INFINITY;
    for (k, (e, v)) in sp.energies.iter().zip(&sp.vectors).enumerate().skip(1) {
        let de = e - e0;
        let m: f64 = v.iter().zip(&hv).map(|(x, y)| x * y).sum();
        covered += m * m;
        if de.abs() < DEGENERACY_FLOOR {
            if m.abs() > DEGENERACY_FLOOR {
                excluded += 1;
            }
        } else {
            total += m * m / (de * de);
            terms += 1;
        }
        // every remaining term has a denominator at least as large as the next gap
        tail = match sp.energies.get(k + 1) {
            Some(next) => (variance - covered).max(0.0) / (next - e0).powi(2),
            None if sp.energies.len() == n => 0.0,
            None => (variance - covered).max(0.0) / (e - e0).powi(2),
        };
        if tail <= SPECTRAL_TAIL * total {
            break;
        }
    }
    let relative_tail = if total > 0.0 { tail / total } else { tail };
    Ok((total, terms, excluded, relative_tail))
}

/// χ_F at coupling `g` with stencil step `dg` (ignored by the spectral method)
/// at a fixed cutoff.
pub fn fidelity_susceptibility(fam: &Family, g: f64, dg: f64, method: FsMethod, cutoff: usize) -> Result<FsValue> {
    if !g.is_finite() || g < 0.0 {
        return Err(AqrmError::invalid(format!("coupling {g} outside g >= 0")));
    }
    match method {
        FsMethod::Overlap => {
            if !(dg > 0.0) || g - dg < 0.0 {
                return Err(AqrmError::invalid(format!("stencil g ± dg = {g} ± {dg} leaves g >= 0")));
            }
            let chi = overlap_chi(fam, g, dg, cutoff)?;
            Ok(FsValue { chi, cutoff, step: dg, richardson: None, terms: 0, excluded: 0, tail: None })
        }
        FsMethod::Spectral => {
            let (chi, terms, excluded, tail) = spectral_chi(fam, g, cutoff)?;
            Ok(FsValue { chi, cutoff, step: 0.0, richardson: None, terms, excluded, tail: Some(tail) })
        }
    }
}

/// χ_F at coupling `g` with the cutoff resolved at `g` and, for the overlap
/// method, the step checked against its half.
pub fn susceptibility(fam: &Family, g: f64, opts: &FsOptions) -> Result<FsValue> {
    let cutoff = opts.cutoff.resolve(&fam.at(g))?;
    match opts.method {
        FsMethod::Spectral => fidelity_susceptibility(fam, g, 0.0, FsMethod::Spectral, cutoff),
        FsMethod::Overlap => {
            let gc = fam.critical_coupling()?;
            let mut dg = opts.step * gc;
            if g - dg < 0.0 {
                dg = g;
            }
            let mut coarse = fidelity_susceptibility(fam, g, dg, FsMethod::Overlap, cutoff)?;
            for _ in 0..=opts.max_refinements {
                let fine = fidelity_susceptibility(fam, g, 0.5 * dg, FsMethod::Overlap, cutoff)?;
                let rel = (coarse.chi - fine.chi).abs() / fine.chi.abs().max(f64::MIN_POSITIVE);
                coarse.richardson = Some(rel);
                if rel <= opts.richardson_tol {
                    break;
                }
                dg *= 0.5;
                coarse = fine;
            }
            Ok(coarse)
        }
    }
}
