//! Time-dependent Hamiltonians built from operators with harmonic coefficients.

use crate::hilbert::{CsrMatrix, Operator, SpaceShape};
use crate::{AqrmError, Result, C64};

/// Coefficient `f(t) = Σ_k c_k e^{iω_k t}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Harmonic {
    terms: Vec<(C64, f64)>,
}

impl Harmonic {
    pub fn zero() -> Self {
        Harmonic { terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::exp(c, 0.0)
    }

    /// `c e^{iωt}`
    pub fn exp(c: C64, omega: f64) -> Self {
        Harmonic { terms: vec![(c, omega)] }
    }

    /// `amp · cos(ωt + φ)`
    pub fn cosine(amp: f64, omega: f64, phase: f64) -> Self {
        let half = 0.5 * amp;
        Harmonic {
            terms: vec![(C64::from_polar(half, phase), omega), (C64::from_polar(half, -phase), -omega)],
        }
    }

    pub fn plus(mut self, other: Harmonic) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(mut self, s: C64) -> Self {
        self.terms.iter_mut().for_each(|(c, _)| *c *= s);
        self
    }

    /// Multiply by `e^{iωt}`.
    pub fn shift(mut self, omega: f64) -> Self {
        self.terms.iter_mut().for_each(|(_, w)| *w += omega);
        self
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().map(|&(c, w)| c * C64::cis(w * t)).sum()
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(c, _)| *c != C64::new(0.0, 0.0))
            .map(|(_, w)| w.abs())
            .fold(0.0, f64::max)
    }

    /// `Σ |c_k|`, an upper bound on `|f(t)|`.
    pub fn bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    pub fn terms(&self) -> &[(C64, f64)] {
        &self.terms
    }
}

/// Anything that can apply `H(t)` to a state vector.
pub trait TimeDependent: Sync {
    fn shape(&self) -> SpaceShape;

    /// `out = H(t) x`
    fn apply(&self, t: f64, x: &[C64], out: &mut [C64]);

    /// Largest angular frequency in the explicit time dependence.
    fn max_angular_frequency(&self) -> f64;

    /// Upper bound on `‖H(t)‖_∞` over all t.
    fn norm_bound(&self) -> f64;

    /// Instantaneous Hamiltonian as an [`Operator`].
    fn at(&self, t: f64) -> Operator;
}

impl TimeDependent for Operator {
    fn shape(&self) -> SpaceShape {
        Operator::shape(self)
    }

    fn apply(&self, _t: f64, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.apply_add(C64::new(1.0, 0.0), x, out);
    }

    fn max_angular_frequency(&self) -> f64 {
        0.0
    }

    fn norm_bound(&self) -> f64 {
        self.norm_inf()
    }

    fn at(&self, _t: f64) -> Operator {
        self.clone()
    }
}

#[derive(Clone, Debug)]
enum Coupling {
    /// `Re f(t) · O` with O Hermitian.
    Hermitian(CsrMatrix),
    /// `f(t) O + f(t)* O†`.
    Pair(CsrMatrix, CsrMatrix),
}

#[derive(Clone, Debug)]
struct Term {
    coupling: Coupling,
    coeff: Harmonic,
}

/// `H(t) = H_s + Σ_k [f_k(t) O_k + h.c.]`, kept in sparse form for propagation.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    shape: SpaceShape,
    fixed: CsrMatrix,
    terms: Vec<Term>,
    fused: Fused,
}

/// All parts merged into one row-compressed pattern whose entries carry the
/// index of the coefficient slot they scale, so `apply` is a single pass.
/// Slot 0 is the static part; term k owns slots 2k+1 (f) and 2k+2 (f* or
/// unused for Hermitian terms).
#[derive(Clone, Debug, Default)]
struct Fused {
    row_ptr: Vec<usize>,
    entries: Vec<(usize, u32, C64)>,
}

impl Fused {
    fn build(dim: usize, fixed: &CsrMatrix, terms: &[Term]) -> Self {
        let mut t: Vec<(usize, usize, u32, C64)> = fixed.triplets().map(|(r, c, v)| (r, c, 0, v)).collect();
        for (k, term) in terms.iter().enumerate() {
            let slot = 2 * k as u32 + 1;
            match &term.coupling {
                Coupling::Hermitian(m) => t.extend(m.triplets().map(|(r, c, v)| (r, c, slot, v))),
                Coupling::Pair(m, adj) => {
                    t.extend(m.triplets().map(|(r, c, v)| (r, c, slot, v)));
                    t.extend(adj.triplets().map(|(r, c, v)| (r, c, slot + 1, v)));
                }
            }
        }
        t.sort_by_key(|e| (e.0, e.1, e.2));
        let mut row_ptr = vec![0usize; dim + 1];
        for e in &t {
            row_ptr[e.0 + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Fused { row_ptr, entries: t.into_iter().map(|(_, c, s, v)| (c, s, v)).collect() }
    }
}

impl DrivenHamiltonian {
    pub fn new(shape: SpaceShape) -> Self {
        let fixed = CsrMatrix::zeros(shape.dim());
        let fused = Fused::build(shape.dim(), &fixed, &[]);
        DrivenHamiltonian { shape, fixed, terms: Vec::new(), fused }
    }

    fn check(&self, op: &Operator) -> Result<()> {
        if op.shape() != self.shape {
            return Err(AqrmError::invalid(format!("operator shape {:?} does not match {:?}", op.shape(), self.shape)));
        }
        Ok(())
    }

    /// Add a time-independent Hermitian part.
    pub fn with_static(mut self, h: &Operator) -> Result<Self> {
        self.check(h)?;
        if !h.is_hermitian_rel(1e-12) {
            return Err(AqrmError::invalid("static part must be Hermitian"));
        }
        self.fixed = self.fixed.add_scaled(&h.to_csr(), C64::new(1.0, 0.0));
        Ok(self.refused())
    }

    /// Add `Re f(t) · O` for Hermitian `O`.
    pub fn with_hermitian_term(mut self, op: &Operator, coeff: Harmonic) -> Result<Self> {
        self.check(op)?;
        if !op.is_hermitian_rel(1e-12) {
            return Err(AqrmError::invalid("term operator must be Hermitian"));
        }
        self.terms.push(Term { coupling: Coupling::Hermitian(op.to_csr()), coeff });
        Ok(self.refused())
    }

    /// Add `f(t) O + f(t)* O†`.
    pub fn with_pair(mut self, op: &Operator, coeff: Harmonic) -> Result<Self> {
        self.check(op)?;
        let m = op.to_csr();
        let adj = m.adjoint();
        self.terms.push(Term { coupling: Coupling::Pair(m, adj), coeff });
        Ok(self.refused())
    }

    fn refused(mut self) -> Self {
        self.fused = Fused::build(self.shape.dim(), &self.fixed, &self.terms);
        self
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

impl TimeDependent for DrivenHamiltonian {
    fn shape(&self) -> SpaceShape {
        self.shape
    }

    fn apply(&self, t: f64, x: &[C64], out: &mut [C64]) {
        let mut slots = Vec::with_capacity(2 * self.terms.len() + 1);
        slots.push(C64::new(1.0, 0.0));
        for term in &self.terms {
            let f = term.coeff.eval(t);
            match term.coupling {
                Coupling::Hermitian(_) => slots.extend([C64::new(f.re, 0.0), C64::new(0.0, 0.0)]),
                Coupling::Pair(..) => slots.extend([f, f.conj()]),
            }
        }
        let f = &self.fused;
        for (r, o) in out[..self.shape.dim()].iter_mut().enumerate() {
            *o = f.entries[f.row_ptr[r]..f.row_ptr[r + 1]]
                .iter()
                .fold(C64::new(0.0, 0.0), |acc, &(c, s, v)| acc + slots[s as usize] * v * x[c]);
        }
    }

    fn max_angular_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.max_frequency()).fold(0.0, f64::max)
    }

    fn norm_bound(&self) -> f64 {
        self.fixed.norm_inf()
            + self
                .terms
                .iter()
                .map(|t| match &t.coupling {
                    Coupling::Hermitian(m) => t.coeff.bound() * m.norm_inf(),
                    Coupling::Pair(m, a) => t.coeff.bound() * (m.norm_inf() + a.norm_inf()),
                })
                .sum::<f64>()
    }

    fn at(&self, t: f64) -> Operator {
        let mut m = self.fixed.clone();
        for term in &self.terms {
            let f = term.coeff.eval(t);
            match &term.coupling {
                Coupling::Hermitian(op) => m = m.add_scaled(op, C64::new(f.re, 0.0)),
                Coupling::Pair(op, adj) => m = m.add_scaled(op, f).add_scaled(adj, f.conj()),
            }
        }
        Operator::from_csr(self.shape, m).hermitian()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{boson_annihilator, embed_field, SpaceShape};

    #[test]
    fn harmonic_evaluation() {
        let f = Harmonic::cosine(2.0, 3.0, 0.4);
        for t in [0.0, 0.3, 1.7] {
            let want = 2.0 * (3.0 * t + 0.4f64).cos();
            assert!((f.eval(t) - C64::new(want, 0.0)).norm() < 1e-14);
        }
        let g = Harmonic::exp(C64::new(0.0, 1.0), 2.0).shift(-2.0);
        assert!((g.eval(5.0) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(f.max_frequency(), 3.0);
        assert!((f.bound() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn apply_matches_instantaneous_operator() {
        let shape = SpaceShape::new(0, 6).unwrap();
        let a = embed_field(&boson_annihilator(6).unwrap(), shape).unwrap();
        let n = a.adjoint().matmul(&a).unwrap().hermitian();
        let h = DrivenHamiltonian::new(shape)
            .with_static(&n)
            .unwrap()
            .with_pair(&a, Harmonic::exp(C64::new(0.3, 0.1), 1.3))
            .unwrap()
            .with_hermitian_term(&n, Harmonic::cosine(0.5, 2.0, 0.0))
            .unwrap();
        let x: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 6];
        let t = 0.77;
        h.apply(t, &x, &mut out);
        let op = h.at(t);
        assert!(op.is_hermitian(1e-14));
        let want = op.apply(&nalgebra::DVector::from_vec(x));
        for i in 0..6 {
            assert!((out[i] - want[i]).norm() < 1e-13);
        }
    }
}
