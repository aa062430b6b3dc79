//! Maximisation of a scalar function on a bracket: a coarse scan to locate
//! the interior maximum, then Brent's golden-section/parabolic search.

use serde::{Deserialize, Serialize};

use crate::{AqrmError, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakOptions {
    /// Points in the initial scan (including both ends).
    pub scan_points: usize,
    /// Absolute tolerance on the location.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions { scan_points: 41, xtol: 1e-7, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Interior maximum of `f` on `[lo, hi]`.
pub fn find_peak<F>(mut f: F, lo: f64, hi: f64, opts: &PeakOptions) -> Result<Peak>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(AqrmError::invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    let n = opts.scan_points.max(3);
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut ys = Vec::with_capacity(n);
    for &x in &xs {
        ys.push(f(x)?);
    }
    let imax = (0..n).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
    if imax == 0 || imax == n - 1 {
        return Err(AqrmError::Bracketing(format!(
            "maximum of the scan over [{lo}, {hi}] sits at the edge x = {}",
            xs[imax]
        )));
    }
    let mut evaluations = n;
    let (x, v) = brent_max(&mut f, xs[imax - 1], xs[imax], ys[imax], xs[imax + 1], opts, &mut evaluations)?;
    Ok(Peak { x, value: v, evaluations })
}

// Brent's method on -f, started from a known interior point `b` with value `fb`.
fn brent_max<F>(f: &mut F, a0: f64, b: f64, fb: f64, c0: f64, opts: &PeakOptions, evals: &mut usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut c) = (a0, c0);
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (-fb, -fb, -fb);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..opts.max_iter {
        let m = 0.5 * (a + c);
        let tol1 = opts.xtol * 0.5 + f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (c - a) {
            return Ok((x, -fx));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (c - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || c - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { c - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = -f(u)?;
        *evals += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                c = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                c = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Err(AqrmError::Bracketing(format!("peak search did not reach tolerance {} in {} steps", opts.xtol, opts.max_iter)))
}
