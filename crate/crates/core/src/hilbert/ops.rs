//! Elementary operator constructors.

use serde::{Deserialize, Serialize};

use super::operator::{Operator, SpaceShape};
use super::sparse::CsrMatrix;
use crate::{AqrmError, Result, C64};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Truncated annihilation operator: `⟨n−1|a|n⟩ = √n` for `1 ≤ n < cutoff`.
pub fn boson_annihilator(cutoff: usize) -> Result<Operator> {
    if cutoff < 2 {
        return Err(AqrmError::invalid(format!("boson cutoff must be >= 2, got {cutoff}")));
    }
    let t = (1..cutoff)
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect();
    Ok(Operator::from_triplets(SpaceShape::field(cutoff), t))
}

pub fn boson_creator(cutoff: usize) -> Result<Operator> {
    Ok(boson_annihilator(cutoff)?.adjoint())
}

/// `a†a` on the truncated space.
pub fn number_operator(cutoff: usize) -> Result<Operator> {
    if cutoff < 2 {
        return Err(AqrmError::invalid(format!("boson cutoff must be >= 2, got {cutoff}")));
    }
    let t = (0..cutoff).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
    Ok(Operator::from_triplets(SpaceShape::field(cutoff), t).hermitian())
}

/// Position quadrature `X = (a + a†)/√2`.
pub fn position_quadrature(cutoff: usize) -> Result<Operator> {
    let a = boson_annihilator(cutoff)?;
    Ok(a.add(&a.adjoint())?.scale_re(std::f64::consts::FRAC_1_SQRT_2).hermitian())
}

/// Momentum quadrature `P = i(a† − a)/√2`.
pub fn momentum_quadrature(cutoff: usize) -> Result<Operator> {
    let a = boson_annihilator(cutoff)?;
    Ok(a
        .adjoint()
        .sub(&a)?
        .scale(C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2))
        .hermitian())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Single-qubit Pauli matrices in the basis `{|e⟩, |g⟩}`.
pub fn pauli(which: Pauli) -> Operator {
    let i = C64::new(0.0, 1.0);
    let t = match which {
        Pauli::X => vec![(0, 1, ONE), (1, 0, ONE)],
        Pauli::Y => vec![(0, 1, -i), (1, 0, i)],
        Pauli::Z => vec![(0, 0, ONE), (1, 1, -ONE)],
        Pauli::Plus => vec![(0, 1, ONE)],
        Pauli::Minus => vec![(1, 0, ONE)],
    };
    let op = Operator::from_triplets(SpaceShape::qubits(1), t);
    match which {
        Pauli::X | Pauli::Y | Pauli::Z => op.hermitian(),
        _ => op,
    }
}

/// Kronecker product `a ⊗ b`.
///
/// The left factor must carry no bosonic mode so the result keeps the
/// qubits-slow, Fock-fast ordering.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa.boson_cutoff != 1 {
        return Err(AqrmError::invalid(format!(
            "left tensor factor {sa:?} carries a bosonic mode; put the field factor on the right"
        )));
    }
    let shape = SpaceShape::new(sa.n_qubits + sb.n_qubits, sb.boson_cutoff)?;
    let m = a.to_csr().kron(&b.to_csr());
    let op = Operator::from_csr(shape, m);
    Ok(if a.hermitian_hint() && b.hermitian_hint() { op.hermitian() } else { op })
}

fn qubit_identity(n: usize) -> CsrMatrix {
    CsrMatrix::identity(1 << n)
}

/// Place a single-qubit operator at `site` (0 = most significant qubit) of
/// `shape`, with identities on the other qubits and on the field.
pub fn embed_qubit(op: &Operator, site: usize, shape: SpaceShape) -> Result<Operator> {
    if op.shape() != SpaceShape::qubits(1) {
        return Err(AqrmError::invalid(format!("embed_qubit expects a 2x2 operator, got {:?}", op.shape())));
    }
    if site >= shape.n_qubits {
        return Err(AqrmError::invalid(format!("site {site} out of range for {} qubits", shape.n_qubits)));
    }
    let left = qubit_identity(site);
    let right = qubit_identity(shape.n_qubits - site - 1);
    let m = left
        .kron(&op.to_csr())
        .kron(&right)
        .kron(&CsrMatrix::identity(shape.boson_cutoff));
    let out = Operator::from_csr(shape, m);
    Ok(if op.hermitian_hint() { out.hermitian() } else { out })
}

/// Place a field operator on `shape`: `I_qubits ⊗ op`.
pub fn embed_field(op: &Operator, shape: SpaceShape) -> Result<Operator> {
    if op.shape() != SpaceShape::field(shape.boson_cutoff) {
        return Err(AqrmError::invalid(format!(
            "field operator {:?} does not match cutoff {}",
            op.shape(),
            shape.boson_cutoff
        )));
    }
    let m = qubit_identity(shape.n_qubits).kron(&op.to_csr());
    let out = Operator::from_csr(shape, m);
    Ok(if op.hermitian_hint() { out.hermitian() } else { out })
}

/// Collective `J_x = Σ_l σ_x^l`.
pub fn collective_sigma_x(shape: SpaceShape) -> Result<Operator> {
    let sx = pauli(Pauli::X);
    let mut acc = Operator::zeros(shape);
    for l in 0..shape.n_qubits {
        acc = acc.add(&embed_qubit(&sx, l, shape)?)?;
    }
    Ok(acc.hermitian())
}

/// Z₂ parity `(⊗_l σ_z^l) · exp(iπ a†a)`, diagonal in the product basis.
pub fn parity(shape: SpaceShape) -> Operator {
    let t = (0..shape.dim())
        .map(|i| {
            let (q, n) = shape.split(i);
            // a set bit means |g⟩, which has σ_z = −1
            let flips = q.count_ones() as usize + n;
            (i, i, if flips % 2 == 0 { ONE } else { -ONE })
        })
        .collect();
    Operator::from_triplets(shape, t).hermitian()
}

/// Matrix elements `⟨m|D(β)|n⟩` for `m < rows`, `n < cols`. Below the
/// diagonal `⟨n+k|D|n⟩ = √(n!/(n+k)!) βᵏ e^{−|β|²/2} L_n^{(k)}(|β|²)`; above
/// it `β` is replaced by `−β*`. Each diagonal runs the Laguerre recurrence on
/// `√(n!/(n+k)!) L_n^{(k)}` with the prefactor kept as a logarithm; stepping
/// `a D = D (a + β)` down the rows instead loses all precision once `|β|`
/// reaches a few units. The entries are those of the untruncated operator,
/// so the result is unitary only on the sub-block well below the cutoff.
pub fn displacement_matrix(beta: C64, rows: usize, cols: usize) -> nalgebra::DMatrix<C64> {
    let mut d = nalgebra::DMatrix::zeros(rows, cols);
    let r = beta.norm();
    if r == 0.0 {
        for n in 0..rows.min(cols) {
            d[(n, n)] = C64::new(1.0, 0.0);
        }
        return d;
    }
    const RESCALE: f64 = 1e150;
    let x = r * r;
    let (lower, upper) = (beta / r, -beta.conj() / r);
    let mut ln_fact = 0.0;
    let (mut ph_lo, mut ph_up) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    for k in 0..rows.max(cols) {
        if k > 0 {
            ln_fact += (k as f64).ln();
            ph_lo *= lower;
            ph_up *= upper;
        }
        let kf = k as f64;
        let mut ln_pref = -0.5 * ln_fact + kf * r.ln() - 0.5 * x;
        let mut pref = ln_pref.exp();
        let (mut tm, mut t) = (0.0, 1.0);
        for n in 0.. {
            let (lo, up) = (n + k < rows && n < cols, k > 0 && n < rows && n + k < cols);
            if !lo && !up {
                break;
            }
            let v = t * pref;
            if lo {
                d[(n + k, n)] = ph_lo * v;
            }
            if up {
                d[(n, n + k)] = ph_up * v;
            }
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
    }
    d
}

/// Displacement operator `D(β) = exp(β a† − β* a)` on the truncated field.
pub fn displacement(beta: C64, cutoff: usize) -> Result<Operator> {
    if cutoff < 2 {
        return Err(AqrmError::invalid(format!("boson cutoff must be >= 2, got {cutoff}")));
    }
    Ok(Operator::from_dense(SpaceShape::field(cutoff), displacement_matrix(beta, cutoff, cutoff)))
}
