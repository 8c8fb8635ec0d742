//! Angular-momentum algebra, level schemes and polarization geometry.

mod polarization;
mod scheme;
mod wigner;

pub use polarization::{polarization_decompose, ModeAmplitudes, PolarizationGeometry};
pub use scheme::{
    build_scheme, dipole_weight, CouplingOverride, CouplingTensor, CustomManifold,
    CustomSchemeSpec, ExcitedSelection, HyperfineConstants, Level, LevelScheme, Manifold,
    ManifoldKind, Preset, Transition, DEFAULT_GAMMA_MHZ, RB87_D1_EXCITED_SPLITTING_MHZ,
    RB87_GROUND_SPLITTING_MHZ,
};
pub use wigner::{wigner3j, wigner6j};
