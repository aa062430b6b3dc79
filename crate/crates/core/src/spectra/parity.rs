//! Parity block-diagonalisation of the effective model.
//!
//! Both couplings flip the qubit and change the photon number by one, so
//! each Z₂ sector is a chain `|s_0, 0⟩ ↔ |s_1, 1⟩ ↔ |s_2, 2⟩ ↔ …` whose chain
//! index equals the Fock index. In the sector containing `|g,0⟩` the qubit is
//! `g` at even `n` and `e` at odd `n`; the other sector is the opposite
//! assignment. Complex coupling phases are gauged into the basis so each
//! chain is a real symmetric tridiagonal matrix.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::tridiag::Tridiagonal;
use crate::hilbert::{SpaceShape, StateVector};
use crate::models::AqrmParams;
use crate::{Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    /// The sector containing `|g, 0⟩` (Π = −1 with σ_z|g⟩ = −|g⟩).
    Ground,
    /// The complementary sector.
    Other,
}

impl Sector {
    /// Qubit label (0 = e, 1 = g) at Fock index `n`.
    pub fn qubit_at(self, n: usize) -> usize {
        match (self, n % 2) {
            (Sector::Ground, 0) | (Sector::Other, 1) => 1,
            _ => 0,
        }
    }
}

/// One parity sector as a real chain plus the gauge phases mapping chain
/// amplitudes back to the product basis.
#[derive(Clone, Debug)]
pub struct ParityChain {
    pub sector: Sector,
    pub matrix: Tridiagonal,
    gauge: Vec<C64>,
    shape: SpaceShape,
}

impl ParityChain {
    pub fn new(p: &AqrmParams, cutoff: usize, sector: Sector) -> Result<Self> {
        p.validate()?;
        let shape = SpaceShape::new(1, cutoff)?;
        let mut a = Vec::with_capacity(cutoff);
        let mut b = Vec::with_capacity(cutoff.saturating_sub(1));
        let mut gauge = Vec::with_capacity(cutoff);
        let mut u = C64::new(1.0, 0.0);
        for n in 0..cutoff {
            let q = sector.qubit_at(n);
            let s = if q == 0 { 1.0 } else { -1.0 };
            a.push(0.5 * s * p.omega_q + p.omega * n as f64);
            gauge.push(u);
            if n + 1 < cutoff {
                let r = ((n + 1) as f64).sqrt();
                // element ⟨n+1|H|n⟩ of the chain
                let h = if q == 1 {
                    // |g,n⟩ → |e,n+1⟩ through σ_+ a†
                    C64::from_polar(p.g_cr * r, p.phi_b)
                } else {
                    // |e,n⟩ → |g,n+1⟩ through σ_− a†, the adjoint of σ_+ a
                    C64::from_polar(p.g_r * r, -p.phi_r)
                };
                let mag = h.norm();
                if mag > 0.0 {
                    u *= h / mag;
                }
                b.push(mag);
            }
        }
        Ok(ParityChain { sector, matrix: Tridiagonal::new(a, b)?, gauge, shape })
    }

    pub fn cutoff(&self) -> usize {
        self.gauge.len()
    }

    /// Embed chain amplitudes as a product-basis state.
    pub fn embed(&self, x: &[f64]) -> Result<StateVector> {
        let mut amps = DVector::zeros(self.shape.dim());
        for (n, (&xn, &u)) in x.iter().zip(&self.gauge).enumerate() {
            amps[self.shape.index(self.sector.qubit_at(n), n)] = u * xn;
        }
        StateVector::normalized(self.shape, amps)
    }

    /// Product-basis index of chain site `n`.
    pub fn site_index(&self, n: usize) -> usize {
        self.shape.index(self.sector.qubit_at(n), n)
    }

    pub fn gauge(&self) -> &[C64] {
        &self.gauge
    }
}

/// Both parity chains, ground sector first.
pub fn parity_chains(p: &AqrmParams, cutoff: usize) -> Result<[ParityChain; 2]> {
    Ok([ParityChain::new(p, cutoff, Sector::Ground)?, ParityChain::new(p, cutoff, Sector::Other)?])
}
