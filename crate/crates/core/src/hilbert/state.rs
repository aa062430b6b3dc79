use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::operator::{Operator, SpaceShape};
use crate::{AqrmError, Result, C64};

const NORM_TOL: f64 = 1e-10;

/// Pure state on a [`SpaceShape`]; normalised to within 1e-10.
#[derive(Clone, Debug)]
pub struct StateVector {
    shape: SpaceShape,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalised.
    pub fn new(shape: SpaceShape, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != shape.dim() {
            return Err(AqrmError::invalid(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                shape.dim()
            )));
        }
        let n = amps.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(AqrmError::NumericDomain(format!("state norm {n} is not 1")));
        }
        Ok(StateVector { shape, amps })
    }

    /// Normalise and wrap; fails only on the zero vector.
    pub fn normalized(shape: SpaceShape, amps: DVector<C64>) -> Result<Self> {
        let n = amps.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(AqrmError::NumericDomain("cannot normalise a zero or non-finite vector".into()));
        }
        Self::new(shape, amps / C64::new(n, 0.0))
    }

    /// Product basis state `|q, n⟩`.
    pub fn basis(shape: SpaceShape, qubits: usize, fock: usize) -> Result<Self> {
        if qubits >= shape.qubit_dim() || fock >= shape.boson_cutoff {
            return Err(AqrmError::invalid("basis label out of range"));
        }
        let mut amps = DVector::zeros(shape.dim());
        amps[shape.index(qubits, fock)] = C64::new(1.0, 0.0);
        Ok(StateVector { shape, amps })
    }

    /// `|qubit⟩ ⊗ |field⟩` from factor amplitudes (normalised on output).
    pub fn product(n_qubits: usize, qubit: &[C64], field: &[C64]) -> Result<Self> {
        let shape = SpaceShape::new(n_qubits, field.len())?;
        if qubit.len() != shape.qubit_dim() {
            return Err(AqrmError::invalid("qubit amplitude count does not match register"));
        }
        let amps = DVector::from_iterator(
            shape.dim(),
            qubit.iter().flat_map(|&q| field.iter().map(move |&f| q * f)),
        );
        Self::normalized(shape, amps)
    }

    /// Truncated coherent-state amplitudes `e^{-|α|²/2} α^n / √n!`, not renormalised.
    pub fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(cutoff);
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..cutoff {
            if n > 0 {
                c = c * alpha / (n as f64).sqrt();
            }
            out.push(c);
        }
        out
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        op.expectation(&self.amps)
    }

    /// Amplitudes arranged as a `qubit_dim × cutoff` matrix.
    fn as_matrix(&self) -> DMatrix<C64> {
        let nc = self.shape.boson_cutoff;
        DMatrix::from_fn(self.shape.qubit_dim(), nc, |q, n| self.amps[q * nc + n])
    }

    /// Multiply by a global phase.
    pub fn with_phase(&self, phase: f64) -> StateVector {
        StateVector {
            shape: self.shape,
            amps: &self.amps * C64::from_polar(1.0, phase),
        }
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite (to tolerance).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(AqrmError::invalid("density matrix must be square"));
        }
        let herm = (&m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(AqrmError::NumericDomain(format!("density matrix not Hermitian (defect {herm:.3e})")));
        }
        let tr: C64 = m.diagonal().iter().sum();
        if (tr.re - 1.0).abs() > NORM_TOL {
            return Err(AqrmError::NumericDomain(format!("density matrix trace {} is not 1", tr.re)));
        }
        let rho = DensityMatrix { m };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(AqrmError::NumericDomain(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix { m: a * a.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.m[(r, c)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|v| v.re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Eigen-decomposition `ρ = Σ p_i |v_i⟩⟨v_i|`, keeping weights above `cut`.
    pub fn eigen_mixture(&self, cut: f64) -> Vec<(f64, DVector<C64>)> {
        let eig = SymmetricEigen::new(self.m.clone());
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > cut)
            .map(|(i, &p)| (p, eig.eigenvectors.column(i).into_owned()))
            .collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).diagonal().iter().map(|v| v.re).sum()
    }
}

/// Partial trace over the field: `2^N × 2^N` qubit density matrix.
pub fn reduce_to_qubits(psi: &StateVector) -> DensityMatrix {
    let m = psi.as_matrix();
    let rho = &m * m.adjoint();
    DensityMatrix { m: hermitize(rho) }
}

/// Partial trace over the qubits: `N_c × N_c` field density matrix.
pub fn reduce_to_field(psi: &StateVector) -> DensityMatrix {
    let m = psi.as_matrix();
    // ρ_f[n, m] = Σ_q ψ(q,n) ψ*(q,m)
    let mt = m.transpose();
    let rho = &mt * mt.adjoint();
    DensityMatrix { m: hermitize(rho) }
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Von Neumann entropy in bits, `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn entanglement_entropy(rho: &DensityMatrix) -> Result<f64> {
    let ev = rho.eigenvalues();
    let mut s = 0.0;
    for p in ev {
        if p < -1e-10 {
            return Err(AqrmError::NumericDomain(format!("negative eigenvalue {p:.3e} in entropy")));
        }
        if p > 1e-300 {
            s -= p * p.log2();
        }
    }
    Ok(s.max(0.0))
}
