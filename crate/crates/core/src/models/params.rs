use serde::{Deserialize, Serialize};

use crate::{AqrmError, Result};

/// Effective AQRM parameters (angular frequencies, ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AqrmParams {
    /// Resonator frequency ω̃.
    pub omega: f64,
    /// Qubit frequency ω̃_q.
    pub omega_q: f64,
    /// Rotating coupling g̃_r.
    pub g_r: f64,
    /// Counter-rotating coupling g̃_cr.
    pub g_cr: f64,
    #[serde(default)]
    pub phi_r: f64,
    #[serde(default)]
    pub phi_b: f64,
}

impl AqrmParams {
    pub fn new(omega: f64, omega_q: f64, g_r: f64, g_cr: f64) -> Self {
        AqrmParams { omega, omega_q, g_r, g_cr, phi_r: 0.0, phi_b: 0.0 }
    }

    /// Dimensionless parameters with `ω̃ = 1`, `ω̃_q = η̃`, `g̃_r = g`, `g̃_cr = λ̃ g`.
    pub fn scaled(eta: f64, lambda: f64, g: f64) -> Self {
        Self::new(1.0, eta, g, lambda * g)
    }

    /// Like [`AqrmParams::scaled`] with the coupling given as a fraction of g̃_c.
    pub fn at_ratio(eta: f64, lambda: f64, ratio: f64) -> Self {
        let gc = eta.sqrt() / (1.0 + lambda);
        Self::scaled(eta, lambda, ratio * gc)
    }

    pub fn with_phases(mut self, phi_r: f64, phi_b: f64) -> Self {
        self.phi_r = phi_r;
        self.phi_b = phi_b;
        self
    }

    /// Same model with the rotating coupling replaced, keeping λ̃ fixed.
    pub fn with_coupling(&self, g: f64) -> Self {
        let lambda = self.anisotropy().unwrap_or(0.0);
        AqrmParams { g_r: g, g_cr: lambda * g, ..*self }
    }

    /// λ̃ = g̃_cr / g̃_r, undefined when g̃_r = 0.
    pub fn anisotropy(&self) -> Option<f64> {
        (self.g_r != 0.0).then(|| self.g_cr / self.g_r)
    }

    /// η̃ = ω̃_q / ω̃, undefined when ω̃ = 0.
    pub fn eta(&self) -> Option<f64> {
        (self.omega != 0.0).then(|| self.omega_q / self.omega)
    }

    /// g̃_c = √(ω̃_q ω̃)/(1 + λ̃); requires ω̃_q ω̃ > 0 and a defined λ̃.
    pub fn critical_coupling(&self) -> Option<f64> {
        let lambda = self.anisotropy()?;
        let prod = self.omega_q * self.omega;
        (prod > 0.0 && lambda > -1.0).then(|| prod.sqrt() / (1.0 + lambda))
    }

    /// g̃_r / g̃_c.
    pub fn coupling_ratio(&self) -> Option<f64> {
        Some(self.g_r / self.critical_coupling()?)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.omega_q, self.g_r, self.g_cr, self.phi_r, self.phi_b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(AqrmError::invalid("AQRM parameters must be finite"));
        }
        Ok(())
    }
}

/// One cosine drive `cos(ω_j t + φ_j)` with direct strength Ω_j and
/// parametric strength Λ_j.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drive {
    /// Direct qubit drive Ω_j.
    pub strength: f64,
    /// Parametric qubit-resonator coupling Λ_j.
    pub coupling: f64,
    /// Drive frequency ω_j.
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Lab-frame parameters of the two-tone driven qubit-resonator circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// LC resonator frequency ω.
    pub omega: f64,
    /// Qubit frequency ω_q.
    pub omega_q: f64,
    /// Always-on coupling g.
    pub g: f64,
    pub red: Drive,
    pub blue: Drive,
}

/// Ratio of a neglected coupling to the detuning that suppresses it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityRatio {
    pub condition: String,
    pub ratio: f64,
    pub threshold: f64,
    pub ok: bool,
}

/// Smallness conditions behind the reduction to the effective model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub ratios: Vec<ValidityRatio>,
}

impl ValidityReport {
    pub fn warnings(&self) -> Vec<String> {
        self.ratios
            .iter()
            .filter(|r| !r.ok)
            .map(|r| format!("{}: ratio {:.3e} exceeds {:.1e}", r.condition, r.ratio, r.threshold))
            .collect()
    }
}

/// Ratios above this value are reported as warnings.
pub const VALIDITY_WARN_THRESHOLD: f64 = 0.1;

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let freqs = [self.omega, self.omega_q, self.red.frequency, self.blue.frequency];
        if freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(AqrmError::invalid("all circuit frequencies must be positive"));
        }
        for (name, d) in [("red", &self.red), ("blue", &self.blue)] {
            if !(d.strength >= 0.0 && d.coupling >= 0.0) || !d.phase.is_finite() {
                return Err(AqrmError::invalid(format!("{name} drive strengths must be non-negative")));
            }
        }
        if !self.g.is_finite() {
            return Err(AqrmError::invalid("coupling g must be finite"));
        }
        Ok(())
    }

    /// `(δ_r, δ_b)` with `δ_r = ω_q − ω − ω_r` and `δ_b = ω_q + ω − ω_b`.
    pub fn detunings(&self) -> (f64, f64) {
        (
            self.omega_q - self.omega - self.red.frequency,
            self.omega_q + self.omega - self.blue.frequency,
        )
    }

    /// Largest angular frequency appearing in the lab-frame Hamiltonian.
    pub fn max_angular_frequency(&self) -> f64 {
        [self.omega, self.omega_q, self.red.frequency, self.blue.frequency]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn validity_report(&self) -> ValidityReport {
        let (w, wq) = (self.omega, self.omega_q);
        let mut ratios = Vec::new();
        let mut push = |condition: String, num: f64, den: f64| {
            let ratio = if den > 0.0 { num.abs() / den } else { f64::INFINITY };
            ratios.push(ValidityRatio {
                condition,
                ratio,
                threshold: VALIDITY_WARN_THRESHOLD,
                ok: ratio <= VALIDITY_WARN_THRESHOLD,
            });
        };
        push("g << |w_q - w|".into(), self.g, (wq - w).abs());
        push("g << |w_q + w|".into(), self.g, wq + w);
        for (name, d) in [("r", &self.red), ("b", &self.blue)] {
            let den = wq.min((wq - d.frequency).abs()).min(wq + d.frequency);
            push(format!("Omega_{name} << min(w_q, |w_q +- w_{name}|)"), d.strength, den);
        }
        let wr = self.red.frequency;
        let wb = self.blue.frequency;
        push("Lambda_r << |w - w_r + w_q|".into(), self.red.coupling, (w - wr + wq).abs());
        push("Lambda_r << |w - w_r - w_q|".into(), self.red.coupling, (w - wr - wq).abs());
        push("Lambda_b << |w - w_q + w_b|".into(), self.blue.coupling, (w - wq + wb).abs());
        push("Lambda_b << |w - w_q - w_b|".into(), self.blue.coupling, (w - wq - wb).abs());
        ValidityReport { ratios }
    }
}

/// Effective AQRM realised by the drives: `ω̃_q = (δ_r+δ_b)/2`,
/// `ω̃ = (δ_b−δ_r)/2`, `g̃_r = Λ_r/2`, `g̃_cr = Λ_b/2`, phases copied.
pub fn map_drives_to_aqrm(c: &CircuitParams) -> AqrmParams {
    let (dr, db) = c.detunings();
    AqrmParams {
        omega: 0.5 * (db - dr),
        omega_q: 0.5 * (dr + db),
        g_r: 0.5 * c.red.coupling,
        g_cr: 0.5 * c.blue.coupling,
        phi_r: c.red.phase,
        phi_b: c.blue.phase,
    }
}

/// Inverse of [`map_drives_to_aqrm`] for a fixed circuit (ω, ω_q, g).
///
/// The direct drive strengths Ω_j are set equal to Λ_j.
pub fn drives_for_aqrm(omega: f64, omega_q: f64, g: f64, target: &AqrmParams) -> CircuitParams {
    let dr = target.omega_q - target.omega;
    let db = target.omega_q + target.omega;
    let drive = |coupling: f64, frequency: f64, phase: f64| Drive { strength: coupling, coupling, frequency, phase };
    CircuitParams {
        omega,
        omega_q,
        g,
        red: drive(2.0 * target.g_r, omega_q - omega - dr, target.phi_r),
        blue: drive(2.0 * target.g_cr, omega_q + omega - db, target.phi_b),
    }
}

/// Both readings of the detuning-to-frequency assignment.
///
/// `text` is [`map_drives_to_aqrm`]; `swapped` exchanges the roles of ω̃ and
/// ω̃_q, which is the reading that reproduces the frequency ratios quoted for
/// some published drive sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    pub delta_r: f64,
    pub delta_b: f64,
    pub text: AqrmParams,
    pub swapped: AqrmParams,
    pub eta_text: Option<f64>,
    pub eta_swapped: Option<f64>,
    pub ratio_text: Option<f64>,
    pub ratio_swapped: Option<f64>,
    /// `|η̃ − target| / target` for each reading, when a target was given.
    pub target_eta: Option<f64>,
    pub eta_mismatch_text: Option<f64>,
    pub eta_mismatch_swapped: Option<f64>,
    pub validity: ValidityReport,
}

pub fn mapping_report(c: &CircuitParams, target_eta: Option<f64>) -> MappingReport {
    let (dr, db) = c.detunings();
    let text = map_drives_to_aqrm(c);
    let swapped = AqrmParams { omega: text.omega_q, omega_q: text.omega, ..text };
    let mismatch = |eta: Option<f64>| match (eta, target_eta) {
        (Some(e), Some(t)) if t != 0.0 => Some((e - t).abs() / t.abs()),
        _ => None,
    };
    MappingReport {
        delta_r: dr,
        delta_b: db,
        eta_text: text.eta(),
        eta_swapped: swapped.eta(),
        ratio_text: text.coupling_ratio(),
        ratio_swapped: swapped.coupling_ratio(),
        target_eta,
        eta_mismatch_text: mismatch(text.eta()),
        eta_mismatch_swapped: mismatch(swapped.eta()),
        text,
        swapped,
        validity: c.validity_report(),
    }
}

/// Degenerate N-qubit model `ḡ J_x (a e^{−iδt−iφ} + a† e^{iδt+iφ})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateParams {
    pub n_qubits: usize,
    /// ḡ = Λ/2.
    pub g_bar: f64,
    /// δ = δ_b = −δ_r.
    pub delta: f64,
    #[serde(default)]
    pub phi: f64,
}

impl DegenerateParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(AqrmError::invalid("degenerate model needs at least one qubit"));
        }
        if !(self.g_bar >= 0.0) || !self.delta.is_finite() || !self.phi.is_finite() {
            return Err(AqrmError::invalid("g_bar must be non-negative and delta, phi finite"));
        }
        Ok(())
    }

    /// Period `T = 2π/δ` after which the field returns to its initial state.
    pub fn gate_time(&self) -> Option<f64> {
        (self.delta > 0.0).then(|| 2.0 * std::f64::consts::PI / self.delta)
    }

    /// Gate angle θ̄ = 2Φ̄(T) = 4π ḡ²/δ².
    pub fn gate_angle(&self) -> Option<f64> {
        (self.delta != 0.0).then(|| 4.0 * std::f64::consts::PI * self.g_bar.powi(2) / self.delta.powi(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, mhz};

    fn fig4_cd() -> CircuitParams {
        let d = |f| Drive { strength: mhz(15.0), coupling: mhz(15.0), frequency: f, phase: 0.0 };
        CircuitParams {
            omega: ghz(3.0),
            omega_q: ghz(18.0),
            g: mhz(37.0),
            red: d(ghz(15.0897)),
            blue: d(ghz(20.9097)),
        }
    }

    #[test]
    fn derived_quantities() {
        let p = AqrmParams::scaled(100.0, 0.5, 2.0);
        assert_eq!(p.anisotropy(), Some(0.5));
        assert_eq!(p.eta(), Some(100.0));
        assert!((p.critical_coupling().unwrap() - 10.0 / 1.5).abs() < 1e-14);
        assert!(AqrmParams::new(1.0, 1.0, 0.0, 1.0).anisotropy().is_none());
        assert!(AqrmParams::new(0.0, 1.0, 1.0, 1.0).eta().is_none());
        assert!(AqrmParams::new(-1.0, 1.0, 1.0, 1.0).critical_coupling().is_none());
        assert!((AqrmParams::at_ratio(300.0, 1.0, 0.4).coupling_ratio().unwrap() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn resonant_sidebands_give_degenerate_model() {
        let mut c = fig4_cd();
        c.red.frequency = c.omega_q - c.omega;
        c.blue.frequency = c.omega_q + c.omega;
        let p = map_drives_to_aqrm(&c);
        assert_eq!(p.omega, 0.0);
        assert_eq!(p.omega_q, 0.0);
        assert_eq!(p.g_r, mhz(7.5));
    }

    #[test]
    fn published_drive_set_under_both_readings() {
        let r = mapping_report(&fig4_cd(), Some(300.0));
        assert!((r.delta_r - mhz(-89.7)).abs() < 1.0);
        assert!((r.delta_b - mhz(90.3)).abs() < 1.0);
        assert!((r.swapped.omega_q - mhz(90.0)).abs() < 1.0);
        assert!((r.swapped.omega - mhz(0.3)).abs() < 1.0);
        assert!((r.eta_swapped.unwrap() - 300.0).abs() < 1e-6);
        assert!((r.eta_text.unwrap() - 1.0 / 300.0).abs() < 1e-9);
        // g̃/g̃_c = 7.5 / (√(90·0.3)/2) ≈ 2.887 under either reading
        assert!((r.ratio_swapped.unwrap() - 2.8868).abs() < 1e-3);
        assert!((r.ratio_text.unwrap() - 2.8868).abs() < 1e-3);
        assert!(r.eta_mismatch_swapped.unwrap() < 1e-9);
    }

    #[test]
    fn inverse_mapping_round_trip() {
        let target = AqrmParams::new(mhz(0.3), mhz(90.0), mhz(7.5), mhz(2.5));
        let c = drives_for_aqrm(ghz(3.0), ghz(18.0), mhz(37.0), &target);
        let back = map_drives_to_aqrm(&c);
        for (a, b) in [(back.omega, target.omega), (back.omega_q, target.omega_q), (back.g_r, target.g_r), (back.g_cr, target.g_cr)] {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
        c.validate().unwrap();
    }

    #[test]
    fn validity_flags() {
        let rep = fig4_cd().validity_report();
        assert!(rep.ratios.iter().all(|r| r.ok), "{:?}", rep.warnings());
        let mut strong = fig4_cd();
        strong.g = ghz(5.0);
        assert!(!strong.validity_report().warnings().is_empty());
    }

    #[test]
    fn gate_angle_for_quarter_coupling() {
        let d = DegenerateParams { n_qubits: 2, g_bar: 0.25, delta: 1.0, phi: 0.0 };
        assert!((d.gate_angle().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(DegenerateParams { n_qubits: 0, ..d }.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn circuit(wr: f64, wb: f64, lr: f64, lb: f64) -> CircuitParams {
            let d = |l, f| Drive { strength: l, coupling: l, frequency: f, phase: 0.0 };
            CircuitParams { omega: 3.0, omega_q: 18.0, g: 0.037, red: d(lr, wr), blue: d(lb, wb) }
        }

        proptest! {
            #[test]
            fn mapping_matches_direct_substitution(wr in 14.0f64..16.0, wb in 20.0f64..22.0, lr in 0.0f64..0.1, lb in 0.0f64..0.1) {
                let p = map_drives_to_aqrm(&circuit(wr, wb, lr, lb));
                // ω̃_q = (δ_r + δ_b)/2 = (2ω_q − ω_r − ω_b)/2,  ω̃ = (δ_b − δ_r)/2 = (2ω + ω_r − ω_b)/2
                prop_assert!((p.omega_q - (36.0 - wr - wb) / 2.0).abs() < 1e-12);
                prop_assert!((p.omega - (6.0 + wr - wb) / 2.0).abs() < 1e-12);
                prop_assert!((p.g_r - lr / 2.0).abs() < 1e-15);
                prop_assert!((p.g_cr - lb / 2.0).abs() < 1e-15);
            }

            #[test]
            fn mapping_linear_and_affine(wr in 14.0f64..16.0, wb in 20.0f64..22.0, lr in 0.0f64..0.1, lb in 0.0f64..0.1, s in 0.0f64..3.0, dw in -0.5f64..0.5) {
                let base = map_drives_to_aqrm(&circuit(wr, wb, lr, lb));
                let scaled = map_drives_to_aqrm(&circuit(wr, wb, s * lr, s * lb));
                prop_assert!((scaled.g_r - s * base.g_r).abs() < 1e-14);
                prop_assert!((scaled.g_cr - s * base.g_cr).abs() < 1e-14);
                let shifted = map_drives_to_aqrm(&circuit(wr + dw, wb, lr, lb));
                prop_assert!((shifted.omega_q - base.omega_q + dw / 2.0).abs() < 1e-12);
                prop_assert!((shifted.omega - base.omega - dw / 2.0).abs() < 1e-12);
            }
        }
    }
}
