//! Truncated Hilbert-space kernel: qubit and boson operators, tensor
//! products, pure and reduced states, entropies.

mod operator;
mod ops;
mod sparse;
mod state;

pub use operator::{dense_threshold, set_dense_threshold, Operator, SpaceShape};
pub use ops::{
    boson_annihilator, boson_creator, collective_sigma_x, displacement, displacement_matrix, embed_field,
    embed_qubit, momentum_quadrature, number_operator, parity, pauli, position_quadrature, tensor, Pauli,
};
pub use sparse::CsrMatrix;
pub use state::{entanglement_entropy, reduce_to_field, reduce_to_qubits, DensityMatrix, StateVector};
