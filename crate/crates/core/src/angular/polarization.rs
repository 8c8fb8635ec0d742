//! Transverse polarization modes expressed in the spherical basis.
//!
//! The quantization axis is the propagation direction `z`. Spherical unit
//! vectors are `e₊ = -(x + i y)/√2`, `e₋ = (x - i y)/√2`, `e₀ = z`; a mode
//! with polarization `ε` has amplitudes `c_q = e_q* · ε`, so that absorbing a
//! photon of that mode drives `m_e = m_g + q` with weight `c_q`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spherical amplitudes `(c₋, c₀, c₊)` of one optical mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitudes(pub [Complex64; 3]);

impl ModeAmplitudes {
    /// Amplitude on spherical component `q ∈ {-1, 0, 1}`.
    pub fn component(&self, q: i32) -> Complex64 {
        self.0[(q + 1) as usize]
    }

    /// Hermitian inner product `Σ_q conj(a_q) b_q`.
    pub fn inner(&self, other: &ModeAmplitudes) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Amplitudes of a real polarization vector `(ex, ey, ez)`.
    pub fn from_cartesian(v: [f64; 3]) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let [x, y, z] = v;
        // e₊* · v = -(x - i y)/√2, e₋* · v = (x + i y)/√2
        let plus = Complex64::new(-x * s, y * s);
        let minus = Complex64::new(x * s, y * s);
        ModeAmplitudes([minus, Complex64::new(z, 0.0), plus])
    }
}

/// Pump and vacuum-mode polarizations for light propagating along `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationGeometry {
    /// Unit pump polarization axis (Cartesian).
    pub pump_axis: [f64; 3],
    pub pump: ModeAmplitudes,
    /// The orthogonal linear polarization, rotated by +π/2 about `z`.
    pub vacuum: ModeAmplitudes,
}

impl PolarizationGeometry {
    /// Pump linearly polarized at `angle` (radians) from `x` in the transverse plane.
    pub fn linear(angle: f64) -> Self {
        polarization_decompose([angle.cos(), angle.sin(), 0.0])
            .expect("transverse axis is always valid")
    }
}

impl Default for PolarizationGeometry {
    fn default() -> Self {
        Self::linear(0.0)
    }
}

/// Decompose a linear pump polarization axis and its orthogonal vacuum mode
/// into spherical components.
pub fn polarization_decompose(pump_axis: [f64; 3]) -> Result<PolarizationGeometry> {
    let norm = pump_axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::Geometry("pump axis must be a nonzero vector".into()));
    }
    let [x, y, z] = pump_axis.map(|c| c / norm);
    if z.abs() > 1e-12 {
        return Err(Error::Geometry(format!(
            "pump axis has a longitudinal component {z:.3e}; only transverse polarizations are supported"
        )));
    }
    Ok(PolarizationGeometry {
        pump_axis: [x, y, 0.0],
        pump: ModeAmplitudes::from_cartesian([x, y, 0.0]),
        vacuum: ModeAmplitudes::from_cartesian([-y, x, 0.0]),
    })
}
