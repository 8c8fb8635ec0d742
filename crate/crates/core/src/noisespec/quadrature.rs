use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sideband::SidebandCorrelation;

/// Linear noise power to decibels relative to shot noise.
pub fn to_db(s: f64) -> f64 {
    10.0 * s.log10()
}

/// Quadrature noise `S_θ = 1 + 2 C_N + 2 Re[C_A e^{-2iθ}]` (shot noise = 1).
pub fn quadrature_noise(corr: &SidebandCorrelation, theta: f64) -> f64 {
    let phase = num_complex::Complex64::from_polar(1.0, -2.0 * theta);
    1.0 + 2.0 * corr.cn + 2.0 * (corr.ca * phase).re
}

/// Extremal quadratures at one sideband frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePoint {
    pub delta: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Homodyne phase of `s_min`, in `[0, π)`; `s_max` sits at `θ_min + π/2`.
    pub theta_min: f64,
}

impl QuadraturePoint {
    pub fn from_correlation(corr: &SidebandCorrelation) -> Self {
        let mean = 1.0 + 2.0 * corr.cn;
        let swing = 2.0 * corr.ca.norm();
        let theta_min = if corr.ca.norm() == 0.0 {
            0.0
        } else {
            (corr.ca.arg() - PI).rem_euclid(2.0 * PI) / 2.0
        };
        QuadraturePoint {
            delta: corr.delta,
            s_min: mean - swing,
            s_max: mean + swing,
            theta_min,
        }
    }

    pub fn s_min_db(&self) -> f64 {
        to_db(self.s_min)
    }

    pub fn s_max_db(&self) -> f64 {
        to_db(self.s_max)
    }
}

/// Extrema over a grid of sideband frequencies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpectrum {
    pub points: Vec<QuadraturePoint>,
}

/// Analytic extrema of `S_θ` for each correlation.
pub fn quadrature_spectrum(correlations: &[SidebandCorrelation]) -> QuadratureSpectrum {
    QuadratureSpectrum {
        points: correlations
            .iter()
            .map(QuadraturePoint::from_correlation)
            .collect(),
    }
}
