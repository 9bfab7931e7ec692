//! Operator and state algebra on the composite qubit ⊗ qubit ⊗ mode ⊗ mode space.
//!
//! Storage is dense; [`SparseOperator`] is a compressed copy used by the
//! integrators. Qubit basis order is (|e⟩, |g⟩), so σᶻ|e⟩ = +|e⟩,
//! σᶻ|g⟩ = −|g⟩ and σʸ = −i|e⟩⟨g| + i|g⟩⟨e|.

mod layout;
mod operator;
mod sparse;
mod state;

pub use layout::HilbertLayout;
pub use operator::{
    collective_spin, embed, ladder, matrix_exponential, mode_op, number, qubit_op, tensor,
    Operator, Pauli, SpinAxis, HERMITIAN_TOL,
};
pub use sparse::SparseOperator;
pub use state::{
    partial_trace, thermal_populations, thermal_state, DensityMatrix, QubitState, StateVector,
    NORM_TOL, POSITIVITY_FLOOR, TRACE_TOL,
};

/// Subsystem slots of the canonical layout.
pub const QUBIT_1: usize = 0;
pub const QUBIT_2: usize = 1;
pub const CM_MODE: usize = 2;
pub const BREATHING_MODE: usize = 3;
