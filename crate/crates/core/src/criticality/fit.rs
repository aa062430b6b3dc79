//! Log-log least squares for scaling exponents.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{AqrmError, Result};

/// `log y = intercept + exponent · log x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Standard error of the exponent.
    pub std_error: f64,
    /// 95% confidence interval of the exponent (Student t, n − 2 dof).
    pub ci95: [f64; 2],
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.exponent * x.ln()).exp()
    }
}

/// Ordinary least squares of `ys` on `xs`: `(slope, intercept, r², slope standard error)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = xs.len();
    if n != ys.len() {
        return Err(AqrmError::invalid(format!("{n} abscissae but {} ordinates", ys.len())));
    }
    if n < 3 {
        return Err(AqrmError::invalid(format!("a fit needs at least 3 points, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(AqrmError::NumericDomain("fit inputs must be finite".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AqrmError::invalid("fit abscissae are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 1.0 };
    let se = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok((slope, intercept, r2, se))
}

/// Power-law fit `y ∼ x^exponent` on strictly positive data.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(AqrmError::invalid("power-law fits need strictly positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, r_squared, std_error) = linear_fit(&lx, &ly)?;
    let dof = (xs.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| AqrmError::NumericDomain(e.to_string()))?.inverse_cdf(0.975);
    Ok(ScalingFit {
        exponent: slope,
        intercept,
        r_squared,
        points_used: xs.len(),
        std_error,
        ci95: [slope - t * std_error, slope + t * std_error],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_square_root() {
        let xs = [1.0, 4.0, 9.0, 16.0, 25.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sqrt()).collect();
        let f = fit_exponent(&xs, &ys).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(f.ci95[1] - f.ci95[0] < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_exponent(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]), Err(AqrmError::InvalidArgument(_))));
        assert!(fit_exponent(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn interval_covers_planted_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..8).map(|k| 32.0 * 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x.powf(0.35) * (1.0 + 0.01 * (rng.random::<f64>() - 0.5))).collect();
        let f = fit_exponent(&xs, &ys).unwrap();
        assert!(f.ci95[0] <= 0.35 && 0.35 <= f.ci95[1], "{f:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn recovers_planted_power_law(exponent in -2.0f64..2.0, amp in 0.1f64..10.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..5).map(|k| 32.0 * 2f64.powi(k)).collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|x| amp * x.powf(exponent) * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
                .collect();
            let f = fit_exponent(&xs, &ys).unwrap();
            prop_assert!((f.exponent - exponent).abs() <= 0.01);
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
        }
    }
}
