use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::{AqrmError, Result, C64};

static DENSE_THRESHOLD: AtomicUsize = AtomicUsize::new(1024);

/// Operators with dimension below this value are stored densely.
pub fn dense_threshold() -> usize {
    DENSE_THRESHOLD.load(Ordering::Relaxed)
}

pub fn set_dense_threshold(dim: usize) {
    DENSE_THRESHOLD.store(dim, Ordering::Relaxed);
}

/// Shape of a truncated `n_qubits` ⊗ boson space.
///
/// Basis index of `|q_1 … q_N, n⟩` is `q · boson_cutoff + n`, where `q` is the
/// qubit register read as a binary number with `q_1` most significant and
/// `0 = |e⟩`, `1 = |g⟩`. A pure qubit factor has `boson_cutoff == 1`; a pure
/// field factor has `n_qubits == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceShape {
    pub n_qubits: usize,
    pub boson_cutoff: usize,
}

impl SpaceShape {
    pub fn new(n_qubits: usize, boson_cutoff: usize) -> Result<Self> {
        if boson_cutoff == 0 {
            return Err(AqrmError::invalid("boson cutoff must be positive"));
        }
        if n_qubits > 20 {
            return Err(AqrmError::Resource(format!("{n_qubits} qubits exceeds the supported register size")));
        }
        Ok(SpaceShape { n_qubits, boson_cutoff })
    }

    pub fn qubits(n_qubits: usize) -> Self {
        SpaceShape { n_qubits, boson_cutoff: 1 }
    }

    pub fn field(cutoff: usize) -> Self {
        SpaceShape { n_qubits: 0, boson_cutoff: cutoff }
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.qubit_dim() * self.boson_cutoff
    }

    pub fn index(&self, qubits: usize, fock: usize) -> usize {
        qubits * self.boson_cutoff + fock
    }

    /// Inverse of [`SpaceShape::index`]: `(qubit register, Fock index)`.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.boson_cutoff, index % self.boson_cutoff)
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// A complex square matrix on a [`SpaceShape`].
///
/// Storage is dense below [`dense_threshold`] and sparse above. Operators are
/// immutable; every arithmetic method returns a new value.
#[derive(Clone, Debug)]
pub struct Operator {
    shape: SpaceShape,
    storage: Storage,
    hermitian_hint: bool,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl Operator {
    pub fn from_csr(shape: SpaceShape, m: CsrMatrix) -> Self {
        assert_eq!(m.dim(), shape.dim(), "matrix does not match shape");
        let storage = if shape.dim() < dense_threshold() {
            Storage::Dense(m.to_dense())
        } else {
            Storage::Sparse(m)
        };
        Operator { shape, storage, hermitian_hint: false }
    }

    pub fn from_dense(shape: SpaceShape, m: DMatrix<C64>) -> Self {
        assert!(m.is_square() && m.nrows() == shape.dim(), "matrix does not match shape");
        let storage = if shape.dim() < dense_threshold() {
            Storage::Dense(m)
        } else {
            Storage::Sparse(CsrMatrix::from_dense(&m))
        };
        Operator { shape, storage, hermitian_hint: false }
    }

    pub fn from_triplets(shape: SpaceShape, t: Vec<(usize, usize, C64)>) -> Self {
        Self::from_csr(shape, CsrMatrix::from_triplets(shape.dim(), t))
    }

    pub fn identity(shape: SpaceShape) -> Self {
        Self::from_csr(shape, CsrMatrix::identity(shape.dim())).hermitian()
    }

    pub fn zeros(shape: SpaceShape) -> Self {
        Self::from_csr(shape, CsrMatrix::zeros(shape.dim())).hermitian()
    }

    /// Mark as Hermitian. Panics in debug builds when the defect exceeds
    /// 1e-12 relative to the largest entry (absolute below unit scale).
    pub fn hermitian(mut self) -> Self {
        debug_assert!(
            self.is_hermitian_rel(HERMITIAN_TOL),
            "hermitian hint set on non-Hermitian operator (defect {:.3e})",
            self.hermiticity_defect()
        );
        self.hermitian_hint = true;
        self
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(r, c)],
            Storage::Sparse(m) => m.get(r, c),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    fn same_shape(&self, other: &Operator) -> Result<()> {
        if self.shape != other.shape {
            return Err(AqrmError::invalid(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Operator {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(m) => Storage::Sparse(m.adjoint()),
        };
        Operator { shape: self.shape, storage, hermitian_hint: self.hermitian_hint }
    }

    pub fn scale(&self, s: C64) -> Operator {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * s),
            Storage::Sparse(m) => Storage::Sparse(m.scale(s)),
        };
        Operator {
            shape: self.shape,
            storage,
            hermitian_hint: self.hermitian_hint && s.im == 0.0,
        }
    }

    pub fn scale_re(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    /// `self + s · other`
    pub fn add_scaled(&self, other: &Operator, s: C64) -> Result<Operator> {
        self.same_shape(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a + b * s),
            _ => Storage::Sparse(self.to_csr().add_scaled(&other.to_csr(), s)),
        };
        Ok(Operator {
            shape: self.shape,
            storage,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint && s.im == 0.0,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.same_shape(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * b),
            _ => Storage::Sparse(self.to_csr().matmul(&other.to_csr())),
        };
        Ok(Operator { shape: self.shape, storage, hermitian_hint: false })
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.dim());
        match &self.storage {
            Storage::Dense(m) => m * x,
            Storage::Sparse(m) => {
                let mut out = DVector::zeros(x.len());
                m.matvec_into(x.as_slice(), out.as_mut_slice());
                out
            }
        }
    }

    /// `out += s · self · x` on raw slices.
    pub fn apply_add(&self, s: C64, x: &[C64], out: &mut [C64]) {
        match &self.storage {
            Storage::Dense(m) => {
                let n = self.dim();
                for j in 0..n {
                    let xj = s * x[j];
                    if xj == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let col = m.column(j);
                    for i in 0..n {
                        out[i] += col[i] * xj;
                    }
                }
            }
            Storage::Sparse(m) => m.matvec_add(s, x, out),
        }
    }

    pub fn expectation(&self, x: &DVector<C64>) -> C64 {
        x.dotc(&self.apply(x))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => m.max_abs(),
        }
    }

    /// Induced ∞-norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m
                .row_iter()
                .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
                .fold(0.0, f64::max),
            Storage::Sparse(m) => m.norm_inf(),
        }
    }

    /// `max |A − A†|` over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => m.add_scaled(&m.adjoint(), C64::new(-1.0, 0.0)).max_abs(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Hermiticity with the tolerance scaled by `max(1, max_abs)`.
    pub fn is_hermitian_rel(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(1.0)
    }

    /// Largest entry-wise difference between two operators of equal shape.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_indexing_round_trip() {
        let s = SpaceShape::new(2, 5).unwrap();
        assert_eq!(s.dim(), 20);
        for i in 0..s.dim() {
            let (q, n) = s.split(i);
            assert_eq!(s.index(q, n), i);
        }
        assert!(SpaceShape::new(1, 0).is_err());
    }

    #[test]
    fn dense_and_sparse_storage_agree() {
        let shape = SpaceShape::new(1, 700).unwrap();
        let t: Vec<_> = (0..shape.dim() - 1)
            .map(|i| (i, i + 1, C64::new((i as f64).sqrt(), 0.0)))
            .collect();
        let sparse = Operator::from_triplets(shape, t);
        assert!(!sparse.is_dense());
        let dense = Operator::from_dense(SpaceShape::new(1, 3).unwrap(), DMatrix::identity(6, 6));
        assert!(dense.is_dense());
        let prod = sparse.matmul(&sparse.adjoint()).unwrap();
        assert!(prod.is_hermitian(1e-12));
        assert!((prod.entry(5, 5) - C64::new(5.0, 0.0)).norm() < 1e-12);
    }
}
