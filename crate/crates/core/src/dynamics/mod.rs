//! Lindblad generator, linear Bloch drift system and steady state.

mod drive;
mod generator;
mod steady;

pub use drive::{DriveConfig, LossChannel};
pub use generator::{
    apply_adjoint, build_generator, build_generator_unchecked, mode_coupling, state_dimension,
    vacuum_operator, CMatrix, Generator, GeneratorOptions, Jump,
};
pub(crate) use steady::{pivot_ratio, PIVOT_RATIO_TOL};
pub use steady::{steady_state, to_coherence_vector, to_density_matrix, CVector, DriftSystem};
