//! Wigner functions of field states by displaced parity.
//!
//! `W(β) = (2/π) Tr[ρ D(β) Π D(−β)]` with `β = (X + iP)/√2`, evaluated from
//! the Fock-basis matrix elements of the displaced parity. With this
//! normalisation the vacuum has `W(0) = 2/π` and the measure is
//! `d²β = dX dP / 2`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hilbert::DensityMatrix;
use crate::{AqrmError, Result, C64};

/// Grid capture below this triggers a coverage warning.
pub const COVERAGE_WARN: f64 = 0.99;

/// Eigencomponents of ρ below this weight are dropped.
const MIXTURE_CUT: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, n: usize) -> Self {
        GridSpec { x_min: -half_width, x_max: half_width, nx: n, p_min: -half_width, p_max: half_width, np: n }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: f64, hi: f64, n: usize| lo.is_finite() && hi.is_finite() && hi > lo && n >= 2;
        if !ok(self.x_min, self.x_max, self.nx) || !ok(self.p_min, self.p_max, self.np) {
            return Err(AqrmError::invalid("Wigner grid needs finite ranges with max > min and at least 2 points per axis"));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// `W(X, P)` on a rectangular grid; `values[ip * nx + ix]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    /// Smaller of the position and momentum probabilities inside the grid.
    pub coverage: f64,
    pub warnings: Vec<String>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.x.len() + ix]
    }

    fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// Trapezoid estimate of `∫ W d²β = ∫ W dX dP / 2`.
    pub fn normalization(&self) -> f64 {
        let nx = self.x.len();
        let np = self.p.len();
        let mut s = 0.0;
        for ip in 0..np {
            let wp = if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 };
            for ix in 0..nx {
                let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
                s += wp * wx * self.at(ix, ip);
            }
        }
        0.5 * s * self.dx() * self.dp()
    }

    /// Position distribution `½ ∫ W dP` at each grid X.
    pub fn position_marginal(&self) -> Vec<f64> {
        let np = self.p.len();
        (0..self.x.len())
            .map(|ix| {
                let s: f64 = (0..np).map(|ip| if ip == 0 || ip == np - 1 { 0.5 } else { 1.0 } * self.at(ix, ip)).sum();
                0.5 * s * self.dp()
            })
            .collect()
    }

    /// Momentum distribution `½ ∫ W dX` at each grid P.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let nx = self.x.len();
        (0..self.p.len())
            .map(|ip| {
                let s: f64 = (0..nx).map(|ix| if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 } * self.at(ix, ip)).sum();
                0.5 * s * self.dx()
            })
            .collect()
    }

    /// `√(Σ (W_a − W_b)² dX dP / 2)` on a common grid.
    pub fn l2_distance(&self, other: &WignerGrid) -> Result<f64> {
        if self.x != other.x || self.p != other.p {
            return Err(AqrmError::invalid("Wigner grids differ"));
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).powi(2)).sum();
        Ok((0.5 * s * self.dx() * self.dp()).sqrt())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serialises")
    }
}

fn mixture(rho: &DensityMatrix) -> Vec<(f64, DVector<C64>)> {
    rho.eigen_mixture(MIXTURE_CUT)
}

/// `Tr[ρ O(β)]` for the displaced parity `O = D(β) Π D(−β)`, without the
/// 2/π. Below the diagonal
/// `O_{n+k,n} = (−1)ⁿ √(n!/(n+k)!) (2β)ᵏ e^{−x/2} L_n^{(k)}(x)`, `x = 4|β|²`,
/// and the rest follows from Hermiticity. Each diagonal `k` runs the Laguerre
/// recurrence on `t_n = √(n!/(n+k)!) L_n^{(k)}(x)`, which stays accurate at
/// displacements where stepping `D(β)` through the Fock ladder does not; the
/// prefactor is carried as a logarithm with `t` rescaled before it overflows.
fn displaced_parity(rho: &DMatrix<C64>, beta: C64) -> f64 {
    let dim = rho.nrows();
    let r = beta.norm();
    if r == 0.0 {
        return (0..dim).map(|n| if n % 2 == 0 { rho[(n, n)].re } else { -rho[(n, n)].re }).sum();
    }
    const RESCALE: f64 = 1e150;
    let x = 4.0 * r * r;
    let unit = beta / r;
    let ln_2r = (2.0 * r).ln();
    let mut ln_fact = 0.0; // ln k!
    let mut phase = C64::new(1.0, 0.0); // (β/|β|)^k
    let mut w = 0.0;
    for k in 0..dim {
        if k > 0 {
            ln_fact += (k as f64).ln();
            phase *= unit;
        }
        let kf = k as f64;
        let mut ln_pref = -0.5 * ln_fact + kf * ln_2r - 0.5 * x;
        let mut pref = ln_pref.exp();
        let (mut tm, mut t) = (0.0, 1.0);
        let mut sum = C64::new(0.0, 0.0);
        for n in 0..dim - k {
            let o = if n % 2 == 0 { t * pref } else { -t * pref };
            sum += rho[(n, n + k)] * o;
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + kf - x) * t - (nf * (nf + kf)).sqrt() * tm) / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
            (tm, t) = (t, next);
            if t.abs() > RESCALE {
                t /= RESCALE;
                tm /= RESCALE;
                ln_pref += RESCALE.ln();
                pref = ln_pref.exp();
            }
        }
        let s = (sum * phase).re;
        w += if k == 0 { s } else { 2.0 * s };
    }
    w
}

/// Wigner function of a single point `(X, P)`.
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    let beta = C64::new(x, p) * std::f64::consts::FRAC_1_SQRT_2;
    2.0 / std::f64::consts::PI * displaced_parity(rho.matrix(), beta)
}

/// Wigner function on a grid. Points are evaluated in parallel and
/// assembled in grid order.
pub fn wigner(rho: &DensityMatrix, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let m = rho.matrix();
    let xs = spec.xs();
    let ps = spec.ps();
    let values: Vec<f64> = (0..spec.np * spec.nx)
        .into_par_iter()
        .map(|k| {
            let (ip, ix) = (k / spec.nx, k % spec.nx);
            let beta = C64::new(xs[ix], ps[ip]) * std::f64::consts::FRAC_1_SQRT_2;
            2.0 / std::f64::consts::PI * displaced_parity(m, beta)
        })
        .collect();
    let coverage = grid_coverage(rho, spec);
    let mut warnings = Vec::new();
    if coverage < COVERAGE_WARN {
        warnings.push(format!("grid captures only {:.2}% of the state's quadrature probability", 100.0 * coverage));
    }
    Ok(WignerGrid { x: xs, p: ps, values, coverage, warnings })
}

/// Hermite functions `φ_n(x)`, `n < count`, by the stable three-term recurrence.
pub fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let p0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(p0);
    if count > 1 {
        out.push(std::f64::consts::SQRT_2 * x * p0);
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// `|⟨X|ψ⟩|²` averaged over ρ, from the Hermite-function expansion.
pub fn position_distribution(rho: &DensityMatrix, xs: &[f64]) -> Vec<f64> {
    quadrature_distribution(rho, xs, false)
}

/// `|⟨P|ψ⟩|²` averaged over ρ, with `⟨P|n⟩ = (−i)^n φ_n(P)`.
pub fn momentum_distribution(rho: &DensityMatrix, ps: &[f64]) -> Vec<f64> {
    quadrature_distribution(rho, ps, true)
}

fn quadrature_distribution(rho: &DensityMatrix, pts: &[f64], momentum: bool) -> Vec<f64> {
    let comps = mixture(rho);
    let n = rho.dim();
    let phase: Vec<C64> = (0..n)
        .map(|k| if momentum { C64::new(0.0, -1.0).powu(k as u32) } else { C64::new(1.0, 0.0) })
        .collect();
    pts.iter()
        .map(|&x| {
            let h = hermite_functions(x, n);
            comps
                .iter()
                .map(|(p, v)| {
                    let amp: C64 = v.iter().zip(&h).zip(&phase).map(|((c, hk), ph)| c * hk * ph).sum();
                    p * amp.norm_sqr()
                })
                .sum()
        })
        .collect()
}

fn capture(rho: &DensityMatrix, lo: f64, hi: f64, momentum: bool) -> f64 {
    let n = 2000;
    let xs = linspace(lo, hi, n + 1);
    let f = quadrature_distribution(rho, &xs, momentum);
    let h = (hi - lo) / n as f64;
    // composite Simpson
    let mut s = f[0] + f[n];
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    s * h / 3.0
}

/// Smaller of the position and momentum probabilities inside the grid rectangle.
pub fn grid_coverage(rho: &DensityMatrix, spec: &GridSpec) -> f64 {
    let x = capture(rho, spec.x_min, spec.x_max, false);
    let p = capture(rho, spec.p_min, spec.p_max, true);
    x.min(p)
}

/// Quadrature covariance `[[V_XX, V_XP], [V_XP, V_PP]]` (symmetrised) and
/// the means `(⟨X⟩, ⟨P⟩)`.
pub fn quadrature_covariance(rho: &DensityMatrix) -> ([[f64; 2]; 2], (f64, f64)) {
    let n = rho.dim();
    let r = |i: usize, j: usize| rho.entry(i, j);
    let mut a = C64::new(0.0, 0.0);
    let mut a2 = C64::new(0.0, 0.0);
    let mut num = 0.0;
    for k in 0..n {
        num += k as f64 * r(k, k).re;
        if k >= 1 {
            a += (k as f64).sqrt() * r(k, k - 1);
        }
        if k >= 2 {
            a2 += ((k * (k - 1)) as f64).sqrt() * r(k, k - 2);
        }
    }
    let mx = std::f64::consts::SQRT_2 * a.re;
    let mp = std::f64::consts::SQRT_2 * a.im;
    let xx = a2.re + num + 0.5;
    let pp = -a2.re + num + 0.5;
    let xp = a2.im;
    ([[xx - mx * mx, xp - mx * mp], [xp - mx * mp, pp - mp * mp]], (mx, mp))
}

/// Principal quadrature variances (ascending) of the covariance matrix.
pub fn principal_variances(rho: &DensityMatrix) -> [f64; 2] {
    let ([[a, b], [_, d]], _) = quadrature_covariance(rho);
    let m = 0.5 * (a + d);
    let r = (0.25 * (a - d).powi(2) + b * b).sqrt();
    [m - r, m + r]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{SpaceShape, StateVector};
    use std::f64::consts::PI;

    fn pure_field(amps: Vec<C64>) -> DensityMatrix {
        let n = amps.len();
        let psi = StateVector::normalized(SpaceShape::field(n), DVector::from_vec(amps)).unwrap();
        DensityMatrix::from_pure(&psi)
    }

    fn fock(n: usize, cutoff: usize) -> DensityMatrix {
        let mut v = vec![C64::new(0.0, 0.0); cutoff];
        v[n] = C64::new(1.0, 0.0);
        pure_field(v)
    }

    fn coherent(alpha: C64, cutoff: usize) -> DensityMatrix {
        pure_field(StateVector::coherent_amplitudes(alpha, cutoff))
    }

    fn cat(alpha: C64, cutoff: usize, sign: f64) -> DensityMatrix {
        let a = StateVector::coherent_amplitudes(alpha, cutoff);
        let b = StateVector::coherent_amplitudes(-alpha, cutoff);
        pure_field(a.iter().zip(&b).map(|(x, y)| x + y * sign).collect())
    }

    #[test]
    fn parity_values_at_origin() {
        assert!((wigner_at(&fock(0, 10), 0.0, 0.0) - 2.0 / PI).abs() < 1e-14);
        assert!((wigner_at(&fock(1, 10), 0.0, 0.0) + 2.0 / PI).abs() < 1e-14);
        let even = cat(C64::new(2.0, 0.0), 40, 1.0);
        assert!((wigner_at(&even, 0.0, 0.0) - 2.0 / PI).abs() < 1e-10);
        let odd = cat(C64::new(2.0, 0.0), 40, -1.0);
        assert!((wigner_at(&odd, 0.0, 0.0) + 2.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn coherent_state_is_a_displaced_gaussian() {
        let alpha = C64::new(1.2, -0.7);
        let rho = coherent(alpha, 40);
        let (x0, p0) = (alpha.re * 2f64.sqrt(), alpha.im * 2f64.sqrt());
        for (x, p) in [(0.0, 0.0), (x0, p0), (x0 + 0.5, p0 - 0.3)] {
            let want = 2.0 / PI * (-(x - x0).powi(2) - (p - p0).powi(2)).exp();
            assert!((wigner_at(&rho, x, p) - want).abs() < 1e-10, "({x}, {p})");
        }
    }

    #[test]
    fn large_displacements_stay_accurate() {
        // ⟨n⟩ = 40 on 100 levels, probed across and beyond the state
        let alpha = C64::new(5.0, 3.5);
        let rho = coherent(alpha, 100);
        let (x0, p0) = (alpha.re * 2f64.sqrt(), alpha.im * 2f64.sqrt());
        for (x, p) in [(0.0, 0.0), (x0, p0), (x0 - 1.0, p0 + 0.5), (-9.0, 9.0), (12.0, -3.0)] {
            let want = 2.0 / PI * (-(x - x0).powi(2) - (p - p0).powi(2)).exp();
            assert!((wigner_at(&rho, x, p) - want).abs() < 1e-9, "({x}, {p}) {} {want}", wigner_at(&rho, x, p));
        }
        let w = wigner(&rho, &GridSpec::square(14.0, 141)).unwrap();
        assert!((w.normalization() - 1.0).abs() < 1e-6, "{}", w.normalization());
    }

    #[test]
    fn cat_lobes_sit_at_plus_minus_x_alpha() {
        let rho = cat(C64::new(2.0, 0.0), 40, 1.0);
        let xa = 2.0 * 2f64.sqrt();
        let lobe = wigner_at(&rho, xa, 0.0);
        // each lobe carries half the weight of a coherent-state peak
        assert!((lobe - 1.0 / PI).abs() < 1e-3, "{lobe}");
        assert!(wigner_at(&rho, 0.0, 0.0) > lobe);
    }

    #[test]
    fn normalization_and_marginals() {
        let states = [fock(3, 30), coherent(C64::new(0.8, 0.9), 40), cat(C64::new(1.5, 0.5), 40, 1.0)];
        let spec = GridSpec::square(7.0, 141);
        for rho in &states {
            let g = wigner(rho, &spec).unwrap();
            assert!(g.coverage > 0.999);
            assert!(g.warnings.is_empty());
            assert!((g.normalization() - 1.0).abs() < 1e-3, "{}", g.normalization());
            let mx = g.position_marginal();
            let want = position_distribution(rho, &g.x);
            let dev = mx.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev <= 1e-3, "X marginal deviation {dev:.3e}");
            let mp = g.momentum_marginal();
            let want = momentum_distribution(rho, &g.p);
            let dev = mp.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev <= 1e-3, "P marginal deviation {dev:.3e}");
        }
    }

    #[test]
    fn small_grid_triggers_coverage_warning() {
        let g = wigner(&coherent(C64::new(2.0, 0.0), 40), &GridSpec::square(1.0, 11)).unwrap();
        assert!(g.coverage < COVERAGE_WARN);
        assert_eq!(g.warnings.len(), 1);
        assert!(wigner(&fock(0, 4), &GridSpec::square(1.0, 1)).is_err());
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 12;
        let xs = linspace(-12.0, 12.0, 4001);
        let h = 24.0 / 4000.0;
        let table: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_functions(x, n)).collect();
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = table.iter().map(|r| r[i] * r[j]).sum::<f64>() * h;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "({i},{j}) {s}");
            }
        }
    }

    #[test]
    fn vacuum_and_squeezing_moments() {
        let v = principal_variances(&fock(0, 10));
        assert!((v[0] - 0.5).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12);
        let (cov, (mx, mp)) = quadrature_covariance(&coherent(C64::new(1.0, -2.0), 60));
        assert!((mx - 2f64.sqrt()).abs() < 1e-10 && (mp + 2.0 * 2f64.sqrt()).abs() < 1e-10);
        assert!((cov[0][0] - 0.5).abs() < 1e-9 && cov[0][1].abs() < 1e-9);
        // Fock |1⟩: ⟨X²⟩ = ⟨P²⟩ = 3/2
        let v = principal_variances(&fock(1, 10));
        assert!((v[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_is_weighted_sum() {
        let m = (fock(0, 8).matrix() + fock(1, 8).matrix()) * C64::new(0.5, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        assert!(wigner_at(&rho, 0.0, 0.0).abs() < 1e-14);
    }
}
