//! Binder-type cumulant ratio of the field quadrature and the fixed-point
//! crossing of its finite-η̃ curves.

use serde::{Deserialize, Serialize};

use crate::models::AqrmParams;
use crate::spectra::{ground_state, quadrature_moment, CutoffPolicy};
use crate::{AqrmError, Result};

/// `U_X = ⟨X⁴⟩ / ⟨X²⟩²` in the ground state at the resolved cutoff.
pub fn cumulant_ratio(p: &AqrmParams, policy: &CutoffPolicy) -> Result<f64> {
    let nc = policy.resolve(p)?;
    let (_, psi) = ground_state(p, nc)?;
    let x2 = quadrature_moment(&psi, 1);
    Ok(quadrature_moment(&psi, 2) / (x2 * x2))
}

/// Anisotropy-modified scaling variable `η̃′ = η̃ (1 + λ̃) / (2√|λ̃|)`.
pub fn rescaled_eta(eta: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 || !lambda.is_finite() || !eta.is_finite() {
        return Err(AqrmError::invalid(format!("rescaled η̃ undefined for λ̃ = {lambda}")));
    }
    Ok(eta * (1.0 + lambda) / (2.0 * lambda.abs().sqrt()))
}

/// A sampled curve on a strictly ascending grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Curve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(AqrmError::invalid("a curve needs at least two points with matching ordinates"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(AqrmError::invalid("curve grid must be strictly ascending"));
        }
        Ok(Curve { xs, ys })
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return None;
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        Some(self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub x: f64,
    pub y: f64,
}

fn sign_changes(d: &[f64], xs: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < d.len() {
        if d[i] == 0.0 {
            out.push((i, xs[i]));
            i += 1;
            continue;
        }
        if d[i + 1] != 0.0 && (d[i] < 0.0) != (d[i + 1] < 0.0) {
            let t = d[i] / (d[i] - d[i + 1]);
            out.push((i, xs[i] + t * (xs[i + 1] - xs[i])));
        }
        i += 1;
    }
    if d[d.len() - 1] == 0.0 {
        out.push((d.len() - 1, xs[d.len() - 1]));
    }
    out
}

/// Unique crossing of two curves sampled on the same grid, by linear
/// interpolation of their difference.
pub fn find_crossing(a: &Curve, b: &Curve) -> Result<Crossing> {
    if a.xs.len() != b.xs.len() || a.xs.iter().zip(&b.xs).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0)) {
        return Err(AqrmError::invalid("crossing requires curves on the same grid"));
    }
    let d: Vec<f64> = a.ys.iter().zip(&b.ys).map(|(x, y)| x - y).collect();
    let roots = sign_changes(&d, &a.xs);
    if roots.len() != 1 {
        return Err(AqrmError::AmbiguousCrossing { candidates: roots.iter().map(|r| r.1).collect() });
    }
    let x = roots[0].1;
    let y = a.interpolate(x).expect("root lies on the grid");
    Ok(Crossing { x, y })
}

/// Unique crossing of two functions: sign change located on `grid`, then
/// bisection of the difference down to `xtol`.
pub fn find_crossing_fn<A, B>(mut fa: A, mut fb: B, grid: &[f64], xtol: f64) -> Result<Crossing>
where
    A: FnMut(f64) -> Result<f64>,
    B: FnMut(f64) -> Result<f64>,
{
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AqrmError::invalid("crossing grid must be strictly ascending with two or more points"));
    }
    let mut d = Vec::with_capacity(grid.len());
    for &x in grid {
        d.push(fa(x)? - fb(x)?);
    }
    let roots = sign_changes(&d, grid);
    if roots.len() != 1 {
        return Err(AqrmError::AmbiguousCrossing { candidates: roots.iter().map(|r| r.1).collect() });
    }
    let i = roots[0].0;
    if d[i] == 0.0 {
        return Ok(Crossing { x: grid[i], y: fa(grid[i])? });
    }
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let (mut dlo, mut dhi) = (d[i], d[i + 1]);
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        let dm = fa(mid)? - fb(mid)?;
        if dm == 0.0 {
            (lo, hi, dlo, dhi) = (mid, mid, 0.0, 0.0);
            break;
        }
        if (dm < 0.0) == (dlo < 0.0) {
            (lo, dlo) = (mid, dm);
        } else {
            (hi, dhi) = (mid, dm);
        }
    }
    let x = if dlo == dhi { lo } else { lo + dlo / (dlo - dhi) * (hi - lo) };
    Ok(Crossing { x, y: fa(x)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::Family;

    #[test]
    fn gaussian_vacuum_ratio() {
        let p = AqrmParams::scaled(50.0, 1.0, 0.0);
        let u = cumulant_ratio(&p, &CutoffPolicy::Fixed { cutoff: 32 }).unwrap();
        assert!((u - 3.0).abs() < 1e-12);
    }

    #[test]
    fn broken_phase_tends_to_bimodal() {
        let u = |eta: f64| cumulant_ratio(&AqrmParams::at_ratio(eta, 1.0, 2.0), &CutoffPolicy::converge(1e-10, 4096)).unwrap();
        let (a, b) = (u(50.0), u(400.0));
        assert!(b < a && b < 1.05, "{a} {b}");
    }

    #[test]
    fn unit_convention_invariance() {
        let scale = 2.0 * std::f64::consts::PI * 1.234e6;
        let p = AqrmParams::at_ratio(120.0, 0.6, 1.05);
        let q = AqrmParams::new(p.omega * scale, p.omega_q * scale, p.g_r * scale, p.g_cr * scale);
        let policy = CutoffPolicy::Fixed { cutoff: 160 };
        let (a, b) = (cumulant_ratio(&p, &policy).unwrap(), cumulant_ratio(&q, &policy).unwrap());
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn rescaled_eta_values() {
        assert_eq!(rescaled_eta(37.0, 1.0).unwrap(), 37.0);
        assert!((rescaled_eta(100.0, 0.1).unwrap() - 173.925).abs() < 1e-3);
        assert!((rescaled_eta(80.0, 0.3).unwrap() - rescaled_eta(80.0, 1.0 / 0.3).unwrap()).abs() < 1e-10);
        assert!(rescaled_eta(10.0, 0.0).is_err());
    }

    #[test]
    fn line_crossing() {
        let xs: Vec<f64> = (0..11).map(|i| 0.35 * i as f64).collect();
        let a = Curve::new(xs.clone(), xs.iter().map(|x| 2.0 * x - 1.0).collect()).unwrap();
        let b = Curve::new(xs.clone(), xs.iter().map(|x| 0.5 * x + 2.0).collect()).unwrap();
        let c = find_crossing(&a, &b).unwrap();
        assert!((c.x - 2.0).abs() < 1e-9 && (c.y - 3.0).abs() < 1e-9);
        let f = find_crossing_fn(|x| Ok(2.0 * x - 1.0), |x| Ok(0.5 * x + 2.0), &xs, 1e-12).unwrap();
        assert!((f.x - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ambiguous_crossings_listed() {
        let xs: Vec<f64> = (0..41).map(|i| 0.1 * i as f64).collect();
        let a = Curve::new(xs.clone(), xs.iter().map(|x| (3.0 * x).sin()).collect()).unwrap();
        let b = Curve::new(xs.clone(), vec![0.1; xs.len()]).unwrap();
        match find_crossing(&a, &b) {
            Err(AqrmError::AmbiguousCrossing { candidates }) => assert!(candidates.len() >= 3),
            other => panic!("{other:?}"),
        }
        let c = Curve::new(xs.clone(), vec![5.0; xs.len()]).unwrap();
        assert!(matches!(find_crossing(&a, &c), Err(AqrmError::AmbiguousCrossing { candidates }) if candidates.is_empty()));
    }

    #[test]
    fn cumulant_curves_cross_near_critical_point() {
        let policy = CutoffPolicy::converge(1e-10, 4096);
        let u = |eta: f64| {
            let fam = Family::scaled(eta, 1.0);
            move |x: f64| cumulant_ratio(&fam.at_ratio(x), &policy)
        };
        let grid: Vec<f64> = (0..=16).map(|i| 0.9 + 0.0125 * i as f64).collect();
        let c = find_crossing_fn(u(100.0), u(400.0), &grid, 1e-9).unwrap();
        assert!((c.x - 1.0).abs() <= 0.02, "{c:?}");
    }
}
