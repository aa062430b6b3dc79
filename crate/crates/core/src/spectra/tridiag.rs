//! Real symmetric tridiagonal eigenproblems: Sturm-sequence bisection for
//! eigenvalues, inverse iteration for eigenvectors.

use crate::{AqrmError, Result};

/// Symmetric tridiagonal matrix with diagonal `a` and off-diagonal `b`
/// (`b[i]` couples `i` and `i + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || b.len() + 1 != a.len() {
            return Err(AqrmError::invalid(format!(
                "tridiagonal needs n diagonal and n-1 off-diagonal entries, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(AqrmError::NumericDomain("tridiagonal entries must be finite".into()));
        }
        Ok(Tridiagonal { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Leading `n × n` block.
    pub fn truncated(&self, n: usize) -> Tridiagonal {
        let n = n.clamp(1, self.dim());
        Tridiagonal { a: self.a[..n].to_vec(), b: self.b[..n - 1].to_vec() }
    }

    /// Gershgorin bounds on the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.b[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.b[i].abs() } else { 0.0 };
            lo = lo.min(self.a[i] - r);
            hi = hi.max(self.a[i] + r);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::EPSILON * self.scale() * 1e-3;
        let mut count = 0;
        let mut d = self.a[0] - x;
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            d = self.a[i] - x - self.b[i - 1] * self.b[i - 1] / d;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(AqrmError::invalid(format!("eigenvalue index {k} >= dimension {}", self.dim())));
        }
        let (mut lo, mut hi) = self.bounds();
        let pad = f64::EPSILON * self.scale() * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        (0..k).map(|i| self.eigenvalue(i)).collect()
    }

    /// Unit eigenvector for the eigenvalue `lambda` by inverse iteration,
    /// orthogonalised against `previous` (used for close eigenvalues).
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let lu = ShiftedLu::new(self, lambda);
        // deterministic, generic start vector
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 101) as f64 / 101.0)).collect();
        for _ in 0..4 {
            for p in previous {
                let c = dot(p, &x);
                x.iter_mut().zip(p).for_each(|(xi, pi)| *xi -= c * pi);
            }
            normalize(&mut x);
            x = lu.solve(&x);
            normalize(&mut x);
        }
        for p in previous {
            let c = dot(p, &x);
            x.iter_mut().zip(p).for_each(|(xi, pi)| *xi -= c * pi);
        }
        normalize(&mut x);
        // sign convention: largest-magnitude component positive
        let imax = (0..n).max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap();
        if x[imax] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    }

    /// The `k` lowest eigenpairs.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let vals = self.lowest_eigenvalues(k)?;
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(k);
        let gap_tol = 1e-8 * self.scale();
        for (i, &v) in vals.iter().enumerate() {
            // only eigenvalues that are numerically close need explicit orthogonalisation
            let close: Vec<Vec<f64>> = (0..i)
                .filter(|&j| (vals[j] - v).abs() < gap_tol)
                .map(|j| vecs[j].clone())
                .collect();
            vecs.push(self.eigenvector(v, &close));
        }
        Ok((vals, vecs))
    }

    /// `y = T x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.a[i] * x[i];
                if i > 0 {
                    y += self.b[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.b[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `‖T x − λ x‖₂`
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(y, xi)| (y - lambda * xi).powi(2)).sum::<f64>().sqrt()
    }

    /// Spectral-norm bound (max |Gershgorin endpoint|).
    pub fn norm_bound(&self) -> f64 {
        self.scale()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// LU factorisation with partial pivoting of `T − λI`.
struct ShiftedLu {
    // U has up to two super-diagonals after pivoting
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &Tridiagonal, lambda: f64) -> Self {
        let n = t.dim();
        let tiny = f64::EPSILON * t.scale();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut l = vec![0.0; n];
        let mut swapped = vec![false; n];
        // current row k: (d, e, f) at columns k, k+1, k+2
        let mut d = t.a[0] - lambda;
        let mut e = if n > 1 { t.b[0] } else { 0.0 };
        for k in 0..n - 1 {
            let sub = t.b[k];
            let next_d = t.a[k + 1] - lambda;
            let next_e = if k + 2 < n { t.b[k + 1] } else { 0.0 };
            if sub.abs() > d.abs() {
                // swap rows k and k+1
                swapped[k] = true;
                let m = d / sub;
                l[k] = m;
                u0[k] = sub;
                u1[k] = next_d;
                u2[k] = next_e;
                d = e - m * next_d;
                e = -m * next_e;
            } else {
                let piv = if d == 0.0 { tiny } else { d };
                let m = sub / piv;
                l[k] = m;
                u0[k] = piv;
                u1[k] = e;
                u2[k] = 0.0;
                d = next_d - m * e;
                e = next_e;
            }
        }
        u0[n - 1] = if d == 0.0 { tiny } else { d };
        ShiftedLu { u0, u1, u2, l, swapped }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for k in 0..n - 1 {
            if self.swapped[k] {
                y.swap(k, k + 1);
            }
            y[k + 1] -= self.l[k] * y[k];
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            if k + 1 < n {
                s -= self.u1[k] * x[k + 1];
            }
            if k + 2 < n {
                s -= self.u2[k] * x[k + 2];
            }
            x[k] = s / self.u0[k];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn dense(t: &Tridiagonal) -> DMatrix<f64> {
        let n = t.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.a[i]
            } else if j == i + 1 {
                t.b[i]
            } else if i == j + 1 {
                t.b[j]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn matches_dense_solver() {
        let n = 40;
        let a: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64) - 3.0).collect();
        let b: Vec<f64> = (0..n - 1).map(|i| 0.5 + ((i * 13 % 7) as f64) * 0.3).collect();
        let t = Tridiagonal::new(a, b).unwrap();
        let mut want: Vec<f64> = SymmetricEigen::new(dense(&t)).eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        let (vals, vecs) = t.lowest_eigenpairs(n).unwrap();
        for i in 0..n {
            assert!((vals[i] - want[i]).abs() < 1e-12, "{i}: {} vs {}", vals[i], want[i]);
            assert!(t.residual(vals[i], &vecs[i]) < 1e-12);
        }
        for i in 0..n {
            for j in 0..i {
                assert!(dot(&vecs[i], &vecs[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn decoupled_blocks_and_exact_shifts() {
        let t = Tridiagonal::new(vec![3.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(t.lowest_eigenvalues(3).unwrap().iter().map(|v| v.round()).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        let v = t.eigenvector(1.0, &[]);
        assert!((v[1] - 1.0).abs() < 1e-14);
        assert!(Tridiagonal::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn sturm_count_interlaces() {
        let t = Tridiagonal::new(vec![0.0; 6], vec![1.0; 5]).unwrap();
        // eigenvalues 2 cos(kπ/7)
        for k in 1..=6 {
            let e = 2.0 * (k as f64 * std::f64::consts::PI / 7.0).cos();
            assert!((t.eigenvalue(6 - k).unwrap() - e).abs() < 1e-14);
        }
        assert_eq!(t.count_below(0.0), 3);
    }
}
