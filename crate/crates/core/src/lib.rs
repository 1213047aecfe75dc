//! Probability-conserving treatments of non-Hermitian qubit dynamics.
//!
//! Three formalisms make sense of evolution under a non-Hermitian Hamiltonian
//! while keeping probabilities meaningful:
//!
//! * the **metric** (vielbein) formalism, which redefines the inner product
//!   through a positive-definite operator eta and works in an equivalent
//!   Hermitized frame,
//! * the **normalization** formalism, which divides the propagated state by
//!   its trace at every instant,
//! * the **master-equation** formalism, which treats the non-Hermitian
//!   Hamiltonian as the no-jump part of a Lindblad generator.
//!
//! The crate builds all three for two-level systems, together with the
//! quantum Fisher information of initial-state and Hamiltonian parameters
//! under each, so their precision predictions can be compared on equal
//! footing.

pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod metric;
pub mod models;
pub mod observables;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
