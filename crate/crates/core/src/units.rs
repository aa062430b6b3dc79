//! Unit conventions.
//!
//! Criticality code works in dimensionless units with the effective resonator
//! frequency set to one. Dynamics code works with angular frequencies in rad/s
//! and times in seconds. This module owns the conversion between the two.

use std::f64::consts::PI;

use crate::models::AqrmParams;

/// Angular frequency (rad/s) of a frequency given in MHz.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// Angular frequency (rad/s) of a frequency given in GHz.
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * f * 1e9
}

/// Ordinary frequency in MHz of an angular frequency in rad/s.
pub fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// Rescale effective parameters so that `omega == 1`.
///
/// Returns the rescaled parameters and the energy scale that was divided out;
/// times in the rescaled problem are `t · scale`.
pub fn to_dimensionless(p: &AqrmParams) -> (AqrmParams, f64) {
    let scale = p.omega;
    let q = AqrmParams {
        omega: 1.0,
        omega_q: p.omega_q / scale,
        g_r: p.g_r / scale,
        g_cr: p.g_cr / scale,
        phi_r: p.phi_r,
        phi_b: p.phi_b,
    };
    (q, scale)
}

/// Inverse of [`to_dimensionless`].
pub fn with_energy_scale(p: &AqrmParams, scale: f64) -> AqrmParams {
    AqrmParams {
        omega: p.omega * scale,
        omega_q: p.omega_q * scale,
        g_r: p.g_r * scale,
        g_cr: p.g_cr * scale,
        phi_r: p.phi_r,
        phi_b: p.phi_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = AqrmParams::new(mhz(0.3), mhz(90.0), mhz(7.5), mhz(7.5));
        let (d, s) = to_dimensionless(&p);
        assert!((d.omega - 1.0).abs() < 1e-15);
        assert!((d.omega_q - 300.0).abs() < 1e-9);
        let back = with_energy_scale(&d, s);
        assert!((back.g_r - p.g_r).abs() / p.g_r < 1e-14);
        assert!((to_mhz(mhz(37.0)) - 37.0).abs() < 1e-12);
    }
}
