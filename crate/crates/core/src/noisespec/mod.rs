//! Linearized Heisenberg-Langevin noise engine.
//!
//! The pipeline for one drive is: steady state → diffusion matrix (Einstein
//! relation) → per-frequency slice response → propagation through the medium
//! → output correlations → quadrature extrema.

mod diffusion;
mod quadrature;
mod response;
mod sideband;

pub use diffusion::{diffusion_matrix, DiffusionMatrix};
pub use quadrature::{
    quadrature_noise, quadrature_spectrum, to_db, QuadraturePoint, QuadratureSpectrum,
};
pub use response::{FluctuationSystem, SliceResponse, C2};
pub use sideband::{propagate, sideband_from_response, SidebandCorrelation};

use crate::angular::{LevelScheme, PolarizationGeometry};
use crate::dynamics::{
    build_generator, steady_state, vacuum_operator, DriftSystem, DriveConfig, GeneratorOptions,
};
use crate::error::Result;

/// Output correlations for one drift system at one sideband frequency.
pub fn sideband_correlations(
    system: &DriftSystem,
    diffusion: &DiffusionMatrix,
    vacuum: &crate::dynamics::CMatrix,
    cooperativity: f64,
    delta: f64,
) -> Result<SidebandCorrelation> {
    let fluct = FluctuationSystem::new(system, diffusion, vacuum)?;
    sideband_from_response(&fluct.response(delta)?, cooperativity)
}

/// Everything needed to evaluate spectra for one atom class.
#[derive(Clone, Debug)]
pub struct PreparedPoint {
    pub system: DriftSystem,
    pub fluctuations: FluctuationSystem,
}

impl PreparedPoint {
    pub fn new(
        scheme: &LevelScheme,
        drive: &DriveConfig,
        geometry: &PolarizationGeometry,
        options: &GeneratorOptions,
    ) -> Result<Self> {
        let generator = build_generator(scheme, drive, geometry, options)?;
        let system = steady_state(&generator)?;
        let diffusion = diffusion_matrix(&system)?;
        // the reservoir level of the open loss channel does not radiate
        let vacuum = vacuum_operator(scheme, geometry, generator.n);
        let fluctuations = FluctuationSystem::new(&system, &diffusion, &vacuum)?;
        Ok(PreparedPoint {
            system,
            fluctuations,
        })
    }

    pub fn response(&self, delta: f64) -> Result<SliceResponse> {
        self.fluctuations.response(delta)
    }

    pub fn correlation(&self, cooperativity: f64, delta: f64) -> Result<SidebandCorrelation> {
        sideband_from_response(&self.response(delta)?, cooperativity)
    }
}

/// Stationary-atom output correlation for a drive (cooperativity from the drive).
pub fn stationary_correlation(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    delta: f64,
) -> Result<SidebandCorrelation> {
    PreparedPoint::new(scheme, drive, geometry, &GeneratorOptions::default())?
        .correlation(drive.cooperativity, delta)
}
