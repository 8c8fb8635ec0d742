//! Doppler averaging over the thermal velocity distribution.
//!
//! Each velocity class is a bin of the Gaussian `k·v` distribution. A class
//! is integrated on a fine lattice of quadrature nodes (spacing
//! `resolution`, in units of Γ), because the single-atom response has
//! features much narrower than any practical class width. Every node sees the
//! pump at `Δ - k·v` and carries its share of the total cooperativity.
//!
//! Nodes are mixed at the level of the slice response (drift and noise per
//! unit length add linearly for a mixture of atoms), and the mixture is then
//! propagated once through the medium.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::angular::{LevelScheme, PolarizationGeometry};
use crate::dynamics::{DriveConfig, GeneratorOptions};
use crate::error::{Error, Result};
use crate::noisespec::{sideband_from_response, PreparedPoint, SidebandCorrelation, SliceResponse};

const BOLTZMANN: f64 = 1.380_649e-23;
const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// ⁸⁷Rb atomic mass in atomic mass units.
pub const RB87_MASS_AMU: f64 = 86.909_180_527;
/// D1 wavelength in nm.
pub const RB87_D1_WAVELENGTH_NM: f64 = 794.979;
/// Half-width of the velocity grid in units of the Doppler width.
pub const GRID_HALF_WIDTH: f64 = 6.0;
/// Default node spacing in units of Γ.
pub const DEFAULT_RESOLUTION: f64 = 0.25;

/// One-dimensional Doppler width `k σ_v = (2π/λ) √(k_B T / m)` in units of Γ.
pub fn doppler_width(temperature_c: f64, wavelength_nm: f64, mass_amu: f64, gamma_mhz: f64) -> f64 {
    let t = temperature_c + 273.15;
    let sigma_v = (BOLTZMANN * t / (mass_amu * ATOMIC_MASS_UNIT)).sqrt();
    let k = 2.0 * std::f64::consts::PI / (wavelength_nm * 1e-9);
    k * sigma_v / (2.0 * std::f64::consts::PI * gamma_mhz * 1e6)
}

/// How the total cooperativity is split between classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CooperativityShare {
    /// Class `i` carries `w_i C` (atoms are spread by the Boltzmann weight).
    #[default]
    Boltzmann,
    /// Every class carries `C / n`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureNode {
    /// `k·v` in units of Γ.
    pub shift: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityClass {
    /// Mean `k·v` of the class.
    pub shift: f64,
    /// Probability of the class; the sum of its node weights.
    pub weight: f64,
    pub nodes: Vec<QuadratureNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityEnsemble {
    pub classes: Vec<VelocityClass>,
    /// Standard deviation of `k·v` in units of Γ.
    pub width: f64,
    pub resolution: f64,
    pub share: CooperativityShare,
}

impl VelocityEnsemble {
    pub fn stationary() -> Self {
        let node = QuadratureNode {
            shift: 0.0,
            weight: 1.0,
        };
        VelocityEnsemble {
            classes: vec![VelocityClass {
                shift: 0.0,
                weight: 1.0,
                nodes: vec![node],
            }],
            width: 0.0,
            resolution: DEFAULT_RESOLUTION,
            share: CooperativityShare::Boltzmann,
        }
    }

    pub fn with_share(mut self, share: CooperativityShare) -> Self {
        self.share = share;
        self
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// All quadrature nodes, class by class.
    pub fn nodes(&self) -> impl Iterator<Item = &QuadratureNode> {
        self.classes.iter().flat_map(|c| c.nodes.iter())
    }

    pub fn node_count(&self) -> usize {
        self.classes.iter().map(|c| c.nodes.len()).sum()
    }

    /// Cooperativity carried by each class.
    pub fn cooperativity_shares(&self, total: f64) -> Vec<f64> {
        let n = self.classes.len() as f64;
        self.classes
            .iter()
            .map(|c| match self.share {
                CooperativityShare::Boltzmann => c.weight * total,
                CooperativityShare::Uniform => total / n,
            })
            .collect()
    }

    /// Cooperativity carried by each node, in [`nodes`](Self::nodes) order;
    /// a class share is split over its nodes by their Boltzmann weights.
    pub fn node_shares(&self, total: f64) -> Vec<f64> {
        self.classes
            .iter()
            .zip(self.cooperativity_shares(total))
            .flat_map(|(c, share)| c.nodes.iter().map(move |nd| share * nd.weight / c.weight))
            .collect()
    }

    /// `Σ w (k·v)²` over the quadrature nodes.
    pub fn second_moment(&self) -> f64 {
        self.nodes().map(|nd| nd.weight * nd.shift * nd.shift).sum()
    }
}

/// Velocity classes over `±6σ` with the default node spacing.
pub fn velocity_grid(width: f64, n_classes: usize) -> Result<VelocityEnsemble> {
    velocity_grid_with_resolution(width, n_classes, DEFAULT_RESOLUTION)
}

/// Velocity classes over `±6σ`. Nodes sit on the lattice `k · resolution`
/// (so that scans on a commensurate detuning grid reuse single-atom
/// responses) with normalized Gaussian weights; consecutive nodes are split
/// into `n_classes` contiguous classes. Zero width gives the single
/// stationary class.
pub fn velocity_grid_with_resolution(
    width: f64,
    n_classes: usize,
    resolution: f64,
) -> Result<VelocityEnsemble> {
    if n_classes == 0 {
        return Err(Error::Config(
            "at least one velocity class is required".into(),
        ));
    }
    if !(width >= 0.0) || !width.is_finite() {
        return Err(Error::Config(format!(
            "Doppler width {width} must be finite and >= 0"
        )));
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Config(format!(
            "node spacing {resolution} must be finite and > 0"
        )));
    }
    if width == 0.0 {
        return Ok(VelocityEnsemble {
            resolution,
            ..VelocityEnsemble::stationary()
        });
    }
    let half = GRID_HALF_WIDTH * width;
    // node spacing fine enough for every class to get at least one node
    let mut spacing = resolution;
    let mut k_max = (half / spacing).floor() as i64;
    if ((2 * k_max + 1) as usize) < n_classes {
        k_max = (n_classes / 2) as i64;
        spacing = half / k_max.max(1) as f64;
    }
    let nodes: Vec<QuadratureNode> = (-k_max..=k_max)
        .map(|k| {
            let shift = k as f64 * spacing;
            let z = shift / width;
            QuadratureNode {
                shift,
                weight: (-0.5 * z * z).exp(),
            }
        })
        .collect();
    let total: f64 = nodes.iter().map(|n| n.weight).sum();

    let count = nodes.len();
    let center = k_max as usize;
    // class boundaries, mirrored so the classes are symmetric about zero; an
    // even class count splits the central node between the two middle classes
    let even = n_classes.is_multiple_of(2);
    let boundary = |c: usize| -> usize {
        let lower = |c: usize| {
            if even {
                c * center / (n_classes / 2)
            } else {
                c * count / n_classes
            }
        };
        if 2 * c <= n_classes {
            lower(c)
        } else {
            count - lower(n_classes - c)
        }
    };
    let mut classes = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let (lo, hi) = (boundary(c), boundary(c + 1));
        let mut members: Vec<QuadratureNode> = nodes[lo..hi]
            .iter()
            .map(|n| QuadratureNode {
                shift: n.shift,
                weight: n.weight / total,
            })
            .collect();
        if even && c + 1 == n_classes / 2 {
            members.push(QuadratureNode {
                shift: 0.0,
                weight: 0.5 / total,
            });
        }
        if even && c == n_classes / 2 {
            members[0].weight *= 0.5;
        }
        let weight: f64 = members.iter().map(|n| n.weight).sum();
        let shift = members.iter().map(|n| n.weight * n.shift).sum::<f64>() / weight;
        classes.push(VelocityClass {
            shift,
            weight,
            nodes: members,
        });
    }
    Ok(VelocityEnsemble {
        classes,
        width,
        resolution: spacing,
        share: CooperativityShare::Boltzmann,
    })
}

/// Mix per-node slice responses (one list per node in
/// [`VelocityEnsemble::nodes`] order, same frequency grid) into the response
/// of the mixture per unit total cooperativity.
pub fn mix_responses(
    per_node: &[&[SliceResponse]],
    ensemble: &VelocityEnsemble,
) -> Result<Vec<SliceResponse>> {
    if per_node.len() != ensemble.node_count() {
        return Err(Error::Dimension(format!(
            "{} node results for {} quadrature nodes",
            per_node.len(),
            ensemble.node_count()
        )));
    }
    let Some(first) = per_node.first() else {
        return Ok(Vec::new());
    };
    if per_node.iter().any(|r| r.len() != first.len()) {
        return Err(Error::GridMismatch(
            "velocity nodes have different frequency grids".into(),
        ));
    }
    let shares = ensemble.node_shares(1.0);
    let mut out = Vec::with_capacity(first.len());
    for (k, r0) in first.iter().enumerate() {
        let mut mixed = SliceResponse::zero(r0.delta);
        for (node, &share) in per_node.iter().zip(&shares) {
            mixed.accumulate(&node[k], share)?;
        }
        out.push(mixed);
    }
    Ok(out)
}

/// Average over the ensemble at the correlation level: mix per-node slice
/// responses and propagate the mixture through a medium of total
/// cooperativity `total`. Quadrature extrema are taken afterwards.
pub fn doppler_average(
    per_node: &[Vec<SliceResponse>],
    ensemble: &VelocityEnsemble,
    total: f64,
) -> Result<Vec<SidebandCorrelation>> {
    let views: Vec<&[SliceResponse]> = per_node.iter().map(|r| r.as_slice()).collect();
    mix_responses(&views, ensemble)?
        .iter()
        .map(|m| sideband_from_response(m, total))
        .collect()
}

/// Slice responses of one atom whose frame sees the pump at `detuning`.
fn atom_responses(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    shift: f64,
    deltas: &[f64],
) -> Result<Vec<SliceResponse>> {
    let options = GeneratorOptions {
        doppler_shift: shift,
    };
    let point = PreparedPoint::new(scheme, drive, geometry, &options)?;
    deltas.iter().map(|&d| point.response(d)).collect()
}

/// Per-node slice responses for a drive and frequency grid.
pub fn node_responses(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    ensemble: &VelocityEnsemble,
    deltas: &[f64],
) -> Result<Vec<Vec<SliceResponse>>> {
    let shifts: Vec<f64> = ensemble.nodes().map(|n| n.shift).collect();
    crate::map_maybe_parallel(&shifts, |&s| {
        atom_responses(scheme, drive, geometry, s, deltas)
    })
    .into_iter()
    .collect()
}

/// Doppler-averaged output correlations for a drive (total cooperativity
/// from the drive).
pub fn doppler_correlations(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    ensemble: &VelocityEnsemble,
    deltas: &[f64],
) -> Result<Vec<SidebandCorrelation>> {
    let per_node = node_responses(scheme, drive, geometry, ensemble, deltas)?;
    doppler_average(&per_node, ensemble, drive.cooperativity)
}

/// Mixed slice responses per unit cooperativity for every detuning of a
/// scan. Single-atom responses are computed once per distinct atom-frame
/// detuning `Δ - k·v` and shared between scan rows; each row keeps its own
/// error.
pub fn doppler_scan_responses(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    ensemble: &VelocityEnsemble,
    detunings: &[f64],
    deltas: &[f64],
) -> Vec<Result<Vec<SliceResponse>>> {
    let shifts: Vec<f64> = ensemble.nodes().map(|n| n.shift).collect();
    let mut frame: Vec<f64> = detunings
        .iter()
        .flat_map(|&d| shifts.iter().map(move |&s| d - s))
        .collect();
    frame.sort_by(f64::total_cmp);
    frame.dedup_by(|a, b| a.to_bits() == b.to_bits());

    let computed = crate::map_maybe_parallel(&frame, |&x| {
        let atom = DriveConfig {
            detuning: x,
            ..drive.clone()
        };
        atom_responses(scheme, &atom, geometry, 0.0, deltas)
    });
    let table: HashMap<u64, &Result<Vec<SliceResponse>>> = frame
        .iter()
        .map(|x| x.to_bits())
        .zip(computed.iter())
        .collect();

    detunings
        .iter()
        .map(|&d| {
            let mut per_node = Vec::with_capacity(shifts.len());
            for &s in &shifts {
                match table[&(d - s).to_bits()] {
                    Ok(r) => per_node.push(r.as_slice()),
                    Err(e) => return Err(rebuild_error(e)),
                }
            }
            mix_responses(&per_node, ensemble)
        })
        .collect()
}

/// Errors are not `Clone` (they may wrap I/O errors); scan rows only need
/// the same code and message.
fn rebuild_error(e: &Error) -> Error {
    match e {
        Error::SingularSteadyState {
            pivot_ratio,
            residual,
        } => Error::SingularSteadyState {
            pivot_ratio: *pivot_ratio,
            residual: *residual,
        },
        Error::NotStationary(r) => Error::NotStationary(*r),
        Error::SingularFrequency { delta, pivot_ratio } => Error::SingularFrequency {
            delta: *delta,
            pivot_ratio: *pivot_ratio,
        },
        Error::InvalidDrive(m) => Error::InvalidDrive(m.clone()),
        Error::InvalidScheme(m) => Error::InvalidScheme(m.clone()),
        Error::Geometry(m) => Error::Geometry(m.clone()),
        Error::Dimension(m) => Error::Dimension(m.clone()),
        Error::NonFinite(m) => Error::NonFinite(m.clone()),
        Error::GridMismatch(m) => Error::GridMismatch(m.clone()),
        Error::HorizonTooShort(m) => Error::HorizonTooShort(m.clone()),
        Error::Config(m) => Error::Config(m.clone()),
        Error::Table(m) => Error::Table(m.clone()),
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), io.to_string())),
    }
}
