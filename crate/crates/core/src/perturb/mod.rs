//! Perturbation of projections and matrix units.
//!
//! [`moduli`] evaluates the closeness thresholds exactly; [`numeric`] builds
//! the corresponding unitaries in `M_d(C)` and measures how far the bounds hold.

pub mod moduli;
pub mod numeric;

pub use moduli::{
    big_delta1, big_delta2, big_delta3, big_delta4, delta0, delta1, delta2, delta_glimm, glimm_k0,
    square_partitions, Rat,
};
pub use numeric::{
    canonical_matrix_units, defect, exchange_unitary, glimm_unitary, operator_norm, unitary_intertwiner,
    ComplexMatrix, MatrixUnitSystem, PerturbError,
};
