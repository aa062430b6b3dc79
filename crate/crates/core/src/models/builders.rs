use super::driven::{DrivenHamiltonian, Harmonic, TimeDependent};
use super::params::{AqrmParams, CircuitParams, DegenerateParams};
use crate::hilbert::{
    boson_annihilator, collective_sigma_x, embed_field, number_operator, pauli, tensor, Operator, Pauli, SpaceShape,
};
use crate::{AqrmError, Result, C64};

/// Register size accepted by the degenerate-model builders.
pub const MAX_DEGENERATE_QUBITS: usize = 4;

/// Largest Hilbert-space dimension the degenerate-model builders allocate.
pub const DEGENERATE_DIM_BUDGET: usize = 1 << 16;

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(AqrmError::invalid(format!("boson cutoff must be >= 2, got {cutoff}")));
    }
    Ok(())
}

/// Effective AQRM on a single qubit ⊗ truncated mode.
///
/// `H = (ω̃_q/2)σ_z + ω̃ a†a + g̃_r(σ_+ a e^{iφ_r} + h.c.) + g̃_cr(σ_+ a† e^{iφ_b} + h.c.)`
pub fn build_aqrm(p: &AqrmParams, cutoff: usize) -> Result<Operator> {
    check_cutoff(cutoff)?;
    p.validate()?;
    let shape = SpaceShape::new(1, cutoff)?;
    let (e, g) = (0, 1);
    let mut t = Vec::with_capacity(6 * cutoff);
    for n in 0..cutoff {
        let nf = n as f64;
        t.push((shape.index(e, n), shape.index(e, n), C64::new(0.5 * p.omega_q + p.omega * nf, 0.0)));
        t.push((shape.index(g, n), shape.index(g, n), C64::new(-0.5 * p.omega_q + p.omega * nf, 0.0)));
        if n + 1 < cutoff {
            let s = (nf + 1.0).sqrt();
            // σ_+ a |g, n+1⟩ = √(n+1) |e, n⟩
            let r = C64::from_polar(p.g_r * s, p.phi_r);
            t.push((shape.index(e, n), shape.index(g, n + 1), r));
            t.push((shape.index(g, n + 1), shape.index(e, n), r.conj()));
            // σ_+ a† |g, n⟩ = √(n+1) |e, n+1⟩
            let b = C64::from_polar(p.g_cr * s, p.phi_b);
            t.push((shape.index(e, n + 1), shape.index(g, n), b));
            t.push((shape.index(g, n), shape.index(e, n + 1), b.conj()));
        }
    }
    Ok(Operator::from_triplets(shape, t).hermitian())
}

/// `H_I = (σ_−a† + σ_+a) + λ̃(σ_+a† + σ_−a)`, the operator multiplying g̃ at fixed λ̃.
pub fn coupling_operator(lambda: f64, cutoff: usize) -> Result<Operator> {
    let a = boson_annihilator(cutoff)?;
    let ad = a.adjoint();
    let sp = pauli(Pauli::Plus);
    let sm = pauli(Pauli::Minus);
    let rot = tensor(&sm, &ad)?.add(&tensor(&sp, &a)?)?;
    let counter = tensor(&sp, &ad)?.add(&tensor(&sm, &a)?)?;
    Ok(rot.add_scaled(&counter, C64::new(lambda, 0.0))?.hermitian())
}

/// Anisotropic Rabi model written as `ω a†a + (ω_q/2)σ_z + g H_I(λ)`,
/// assembled from tensor products. Independent of [`build_aqrm`].
pub fn build_anisotropic_rabi(omega: f64, omega_q: f64, g: f64, lambda: f64, cutoff: usize) -> Result<Operator> {
    let shape = SpaceShape::new(1, cutoff)?;
    let field = embed_field(&number_operator(cutoff)?, shape)?.scale_re(omega);
    let qubit = tensor(&pauli(Pauli::Z), &Operator::identity(SpaceShape::field(cutoff)))?.scale_re(0.5 * omega_q);
    let coupling = coupling_operator(lambda, cutoff)?.scale_re(g);
    Ok(field.add(&qubit)?.add(&coupling)?.hermitian())
}

struct CircuitOps {
    shape: SpaceShape,
    sz: Operator,
    sx: Operator,
    num: Operator,
    /// σ_x(a + a†)
    sx_field: Operator,
    sp: Operator,
    sp_a: Operator,
    sp_ad: Operator,
}

impl CircuitOps {
    fn new(cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        let shape = SpaceShape::new(1, cutoff)?;
        let id_f = Operator::identity(SpaceShape::field(cutoff));
        let a = boson_annihilator(cutoff)?;
        let ad = a.adjoint();
        let x = a.add(&ad)?.hermitian();
        let sp = pauli(Pauli::Plus);
        Ok(CircuitOps {
            shape,
            sz: tensor(&pauli(Pauli::Z), &id_f)?,
            sx: tensor(&pauli(Pauli::X), &id_f)?,
            num: embed_field(&number_operator(cutoff)?, shape)?,
            sx_field: tensor(&pauli(Pauli::X), &x)?,
            sp: tensor(&sp, &id_f)?,
            sp_a: tensor(&sp, &a)?,
            sp_ad: tensor(&sp, &ad)?,
        })
    }
}

/// Lab-frame driven circuit Hamiltonian as a time-dependent factory.
///
/// `H(t) = (ω_q/2)σ_z + ω a†a + g σ_x(a†+a) + Σ_j cos(ω_j t + φ_j)[Ω_j σ_x − Λ_j σ_x(a†+a)]`
pub fn lab_hamiltonian(c: &CircuitParams, cutoff: usize) -> Result<DrivenHamiltonian> {
    c.validate()?;
    let ops = CircuitOps::new(cutoff)?;
    let fixed = ops
        .sz
        .scale_re(0.5 * c.omega_q)
        .add(&ops.num.scale_re(c.omega))?
        .add(&ops.sx_field.scale_re(c.g))?
        .hermitian();
    let mut h = DrivenHamiltonian::new(ops.shape).with_static(&fixed)?;
    for d in [&c.red, &c.blue] {
        let op = ops
            .sx
            .scale_re(d.strength)
            .add(&ops.sx_field.scale_re(-d.coupling))?
            .hermitian();
        h = h.with_hermitian_term(&op, Harmonic::cosine(1.0, d.frequency, d.phase))?;
    }
    Ok(h)
}

/// Instantaneous lab-frame Hamiltonian at time `t`.
pub fn build_lab_hamiltonian(c: &CircuitParams, t: f64, cutoff: usize) -> Result<Operator> {
    if !(t >= 0.0) {
        return Err(AqrmError::invalid("time must be non-negative"));
    }
    Ok(lab_hamiltonian(c, cutoff)?.at(t))
}

/// The lab-frame Hamiltonian in the interaction picture of the bare
/// `H_0 = (ω_q/2)σ_z + ω a†a`. No approximation is made; the fast phases move
/// from the state into the coefficients. Convert states back with
/// [`bare_frame_diagonal`].
pub fn lab_hamiltonian_bare_frame(c: &CircuitParams, cutoff: usize) -> Result<DrivenHamiltonian> {
    c.validate()?;
    let ops = CircuitOps::new(cutoff)?;
    // g − Σ_j Λ_j cos(ω_j t + φ_j)
    let mut field_coupling = Harmonic::constant(C64::new(c.g, 0.0));
    let mut drive = Harmonic::zero();
    for d in [&c.red, &c.blue] {
        field_coupling = field_coupling.plus(Harmonic::cosine(-d.coupling, d.frequency, d.phase));
        drive = drive.plus(Harmonic::cosine(d.strength, d.frequency, d.phase));
    }
    // σ_+ → σ_+ e^{iω_q t}, a → a e^{−iωt}
    DrivenHamiltonian::new(ops.shape)
        .with_pair(&ops.sp_ad, field_coupling.clone().shift(c.omega_q + c.omega))?
        .with_pair(&ops.sp_a, field_coupling.shift(c.omega_q - c.omega))?
        .with_pair(&ops.sp, drive.shift(c.omega_q))
}

/// Diagonal of `H_0 = (ω_q/2)σ_z + ω a†a` in the product basis.
pub fn bare_frame_diagonal(c: &CircuitParams, cutoff: usize) -> Vec<f64> {
    qubit_field_diagonal(0.5 * c.omega_q, c.omega, cutoff)
}

/// Diagonal of `H_0 = (δ_r+δ_b)σ_z/4 + (δ_b−δ_r)a†a/2`, the frame linking the
/// time-dependent effective Hamiltonian to the static AQRM.
pub fn effective_frame_diagonal(c: &CircuitParams, cutoff: usize) -> Vec<f64> {
    let (dr, db) = c.detunings();
    qubit_field_diagonal(0.25 * (dr + db), 0.5 * (db - dr), cutoff)
}

fn qubit_field_diagonal(half_wq: f64, w: f64, cutoff: usize) -> Vec<f64> {
    [half_wq, -half_wq]
        .into_iter()
        .flat_map(|s| (0..cutoff).map(move |n| s + w * n as f64))
        .collect()
}

/// Rotating-wave effective Hamiltonian as a time-dependent factory.
///
/// `H(t) = (Λ_r/2)(σ_+ a e^{iδ_r t + iφ_r} + h.c.) + (Λ_b/2)(σ_+ a† e^{iδ_b t + iφ_b} + h.c.)`
pub fn interaction_hamiltonian(c: &CircuitParams, cutoff: usize) -> Result<DrivenHamiltonian> {
    c.validate()?;
    let ops = CircuitOps::new(cutoff)?;
    let (dr, db) = c.detunings();
    DrivenHamiltonian::new(ops.shape)
        .with_pair(&ops.sp_a, Harmonic::exp(C64::from_polar(0.5 * c.red.coupling, c.red.phase), dr))?
        .with_pair(&ops.sp_ad, Harmonic::exp(C64::from_polar(0.5 * c.blue.coupling, c.blue.phase), db))
}

pub fn build_interaction_hamiltonian(c: &CircuitParams, t: f64, cutoff: usize) -> Result<Operator> {
    if !(t >= 0.0) {
        return Err(AqrmError::invalid("time must be non-negative"));
    }
    Ok(interaction_hamiltonian(c, cutoff)?.at(t))
}

pub(crate) fn degenerate_shape(d: &DegenerateParams, cutoff: usize) -> Result<SpaceShape> {
    d.validate()?;
    check_cutoff(cutoff)?;
    if d.n_qubits > MAX_DEGENERATE_QUBITS {
        return Err(AqrmError::Resource(format!(
            "{} qubits exceeds the supported register of {MAX_DEGENERATE_QUBITS}",
            d.n_qubits
        )));
    }
    let shape = SpaceShape::new(d.n_qubits, cutoff)?;
    if shape.dim() > DEGENERATE_DIM_BUDGET {
        return Err(AqrmError::Resource(format!(
            "dimension {} exceeds the budget of {DEGENERATE_DIM_BUDGET}",
            shape.dim()
        )));
    }
    Ok(shape)
}

/// Degenerate multi-qubit model `ḡ J_x (a e^{−iδt−iφ} + a† e^{iδt+iφ})`.
pub fn degenerate_hamiltonian(d: &DegenerateParams, cutoff: usize) -> Result<DrivenHamiltonian> {
    let shape = degenerate_shape(d, cutoff)?;
    let jx = collective_sigma_x(shape)?;
    let ad = embed_field(&boson_annihilator(cutoff)?.adjoint(), shape)?;
    let op = jx.matmul(&ad)?;
    DrivenHamiltonian::new(shape).with_pair(&op, Harmonic::exp(C64::from_polar(d.g_bar, d.phi), d.delta))
}

pub fn build_degenerate_hamiltonian(d: &DegenerateParams, t: f64, cutoff: usize) -> Result<Operator> {
    Ok(degenerate_hamiltonian(d, cutoff)?.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::parity;
    use crate::models::params::Drive;
    use crate::units::{ghz, mhz};
    use nalgebra::{DMatrix, SymmetricEigen};

    fn circuit() -> CircuitParams {
        let d = |s: f64, f: f64| Drive { strength: s, coupling: s, frequency: f, phase: 0.0 };
        CircuitParams {
            omega: ghz(3.0),
            omega_q: ghz(18.0),
            g: mhz(37.0),
            red: d(mhz(15.0), ghz(15.0)),
            blue: d(mhz(15.0), ghz(21.0)),
        }
    }

    #[test]
    fn isotropic_case_equals_rabi_model() {
        let p = AqrmParams::new(1.0, 7.0, 0.8, 0.8);
        let h = build_aqrm(&p, 12).unwrap();
        let q = build_anisotropic_rabi(1.0, 7.0, 0.8, 1.0, 12).unwrap();
        assert_eq!(h.max_abs_diff(&q).unwrap(), 0.0);
        let p = AqrmParams::new(1.3, 2.0, 0.4, 0.1);
        let h = build_aqrm(&p, 9).unwrap();
        let q = build_anisotropic_rabi(1.3, 2.0, 0.4, 0.25, 9).unwrap();
        assert!(h.max_abs_diff(&q).unwrap() < 1e-15);
        assert!(build_aqrm(&p, 1).is_err());
    }

    #[test]
    fn decoupled_ground_energy() {
        let h = build_aqrm(&AqrmParams::scaled(100.0, 1.0, 0.0), 8).unwrap();
        let e = SymmetricEigen::new(h.to_dense()).eigenvalues;
        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min + 50.0).abs() < 1e-12);
    }

    #[test]
    fn jaynes_cummings_conserves_excitations() {
        let nc = 10;
        let h = build_aqrm(&AqrmParams::new(1.0, 1.5, 0.7, 0.0).with_phases(0.3, 0.0), nc).unwrap();
        // N = a†a + σ_+σ_−
        let shape = h.shape();
        let excit = Operator::from_triplets(
            shape,
            (0..shape.dim())
                .map(|i| {
                    let (q, n) = shape.split(i);
                    (i, i, C64::new(n as f64 + if q == 0 { 1.0 } else { 0.0 }, 0.0))
                })
                .collect(),
        );
        assert!(h.commutator(&excit).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn parity_symmetry() {
        let h = build_aqrm(&AqrmParams::new(1.0, 3.0, 0.9, 0.4), 14).unwrap();
        let pi = parity(h.shape());
        assert!(h.commutator(&pi).unwrap().max_abs() <= 1e-12);
        let h = build_aqrm(&AqrmParams::new(1.0, 3.0, 0.9, 0.4).with_phases(0.5, 0.0), 14).unwrap();
        assert!(h.commutator(&pi).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn lab_hamiltonian_terms() {
        let c = circuit();
        let nc = 6;
        // ω_r : ω_b = 5 : 7, so ω_r t = 5π/2 puts both cosines at a node
        let t = 5.0 * std::f64::consts::FRAC_PI_2 / c.red.frequency;
        let h_t = build_lab_hamiltonian(&c, t, nc).unwrap();
        let mut bare = c;
        bare.red.strength = 0.0;
        bare.red.coupling = 0.0;
        bare.blue.strength = 0.0;
        bare.blue.coupling = 0.0;
        let h_static = build_lab_hamiltonian(&bare, 0.0, nc).unwrap();
        let scale = h_static.max_abs();
        assert!(h_t.max_abs_diff(&h_static).unwrap() <= 1e-12 * scale);
        let q = build_anisotropic_rabi(c.omega, c.omega_q, c.g, 1.0, nc).unwrap();
        assert!(h_static.max_abs_diff(&q).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn lab_hamiltonian_at_zero_matches_term_sum() {
        let c = circuit();
        let nc = 7;
        let h = build_lab_hamiltonian(&c, 0.0, nc).unwrap().to_dense();
        // term-by-term dense oracle
        let mut a = DMatrix::<C64>::zeros(nc, nc);
        for n in 1..nc {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        let idf = DMatrix::<C64>::identity(nc, nc);
        let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]).map(|v| C64::new(v, 0.0));
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).map(|v| C64::new(v, 0.0));
        let id2 = DMatrix::<C64>::identity(2, 2);
        let x = &a + a.adjoint();
        let num = a.adjoint() * &a;
        let re = |v: f64| C64::new(v, 0.0);
        let mut want = sz.kronecker(&idf) * re(0.5 * c.omega_q) + id2.kronecker(&num) * re(c.omega);
        want += sx.kronecker(&x) * re(c.g);
        for d in [&c.red, &c.blue] {
            want += sx.kronecker(&idf) * re(d.strength) - sx.kronecker(&x) * re(d.coupling);
        }
        let diff = (&h - &want).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12 * want.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }

    #[test]
    fn bare_frame_matches_lab_frame_operator() {
        // H_I(t) = e^{iH_0 t}(H(t) − H_0)e^{−iH_0 t}
        let c = circuit();
        let nc = 5;
        let t = 1.234e-10;
        let lab = build_lab_hamiltonian(&c, t, nc).unwrap().to_dense();
        let h0d = bare_frame_diagonal(&c, nc);
        let rot = lab_hamiltonian_bare_frame(&c, nc).unwrap().at(t).to_dense();
        let scale = lab.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..2 * nc {
            for j in 0..2 * nc {
                let mut v = lab[(i, j)];
                if i == j {
                    v -= h0d[i];
                }
                let want = v * C64::cis((h0d[i] - h0d[j]) * t);
                assert!((rot[(i, j)] - want).norm() <= 1e-10 * scale, "({i},{j})");
            }
        }
    }

    #[test]
    fn interaction_hamiltonian_limits() {
        let mut c = circuit();
        let nc = 6;
        let h0 = build_interaction_hamiltonian(&c, 0.0, nc).unwrap();
        let want = build_aqrm(&AqrmParams::new(0.0, 0.0, 0.5 * c.red.coupling, 0.5 * c.blue.coupling), nc).unwrap();
        assert!(h0.max_abs_diff(&want).unwrap() <= 1e-15 * want.max_abs());
        c.blue.coupling = 0.0;
        let h = interaction_hamiltonian(&c, nc).unwrap();
        let shape = h.shape();
        let excit = Operator::from_triplets(
            shape,
            (0..shape.dim())
                .map(|i| {
                    let (q, n) = shape.split(i);
                    (i, i, C64::new(n as f64 + if q == 0 { 1.0 } else { 0.0 }, 0.0))
                })
                .collect(),
        );
        for t in [0.0, 3e-9, 7.7e-8] {
            assert!(h.at(t).commutator(&excit).unwrap().max_abs() <= 1e-6);
        }
    }

    #[test]
    fn degenerate_model_structure() {
        let d = DegenerateParams { n_qubits: 1, g_bar: 0.3, delta: 0.7, phi: 0.0 };
        let h = build_degenerate_hamiltonian(&d, 0.0, 8).unwrap();
        let want = build_anisotropic_rabi(0.0, 0.0, 0.3, 1.0, 8).unwrap();
        assert!(h.max_abs_diff(&want).unwrap() < 1e-15);
        let d2 = DegenerateParams { n_qubits: 2, phi: 0.4, ..d };
        let hd = degenerate_hamiltonian(&d2, 8).unwrap();
        let jx = collective_sigma_x(hd.shape()).unwrap();
        for t in [0.0, 0.9, 4.0] {
            assert!(hd.at(t).commutator(&jx).unwrap().max_abs() < 1e-14);
        }
        assert!(matches!(
            degenerate_hamiltonian(&DegenerateParams { n_qubits: 5, ..d }, 8),
            Err(AqrmError::Resource(_))
        ));
    }

    #[test]
    fn two_qubit_degenerate_spectrum() {
        let nc = 10;
        let d = DegenerateParams { n_qubits: 2, g_bar: 0.5, delta: 1.0, phi: 0.0 };
        let h = build_degenerate_hamiltonian(&d, 0.0, nc).unwrap();
        let mut got: Vec<f64> = SymmetricEigen::new(h.to_dense()).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        // J_x ∈ {2, 0, 0, −2}; each branch is ḡ m (a + a†) on the truncated field
        let mut x = DMatrix::<f64>::zeros(nc, nc);
        for n in 1..nc {
            x[(n - 1, n)] = (n as f64).sqrt();
            x[(n, n - 1)] = (n as f64).sqrt();
        }
        let xe: Vec<f64> = SymmetricEigen::new(x).eigenvalues.iter().copied().collect();
        let mut want = Vec::new();
        for m in [2.0, 0.0, 0.0, -2.0] {
            want.extend(xe.iter().map(|v| d.g_bar * m * v));
        }
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn frame_diagonals() {
        let c = circuit();
        let d = effective_frame_diagonal(&c, 3);
        let p = super::super::params::map_drives_to_aqrm(&c);
        assert!((d[0] - 0.5 * p.omega_q).abs() < 1e-6);
        assert!((d[3 + 2] - (-0.5 * p.omega_q + 2.0 * p.omega)).abs() < 1e-6);
    }
}
