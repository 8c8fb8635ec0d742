//! Independent time-domain cross-check of the noise engine.
//!
//! Everything here works from the Lindblad generator by direct time
//! evolution: two-time correlations come from the quantum regression
//! theorem, the medium is integrated step by step, and the diffusion matrix
//! is read off the kink of short-time correlations at zero delay. None of
//! the frequency-domain solves of [`crate::noisespec`] are used.

mod compare;
mod integrator;
mod regression;

pub use compare::{compare_report, CompareReport, Deviation};
pub use integrator::{integrate, StepControl, StepStats};
pub use regression::{
    regression_spectrum, slowest_decay_rate, RegressionDiagnostics, RegressionOptions,
    RegressionResult,
};

use num_complex::Complex64;

use crate::angular::{LevelScheme, PolarizationGeometry};
use crate::dynamics::{
    build_generator, steady_state, vacuum_operator, CMatrix, DriveConfig, Generator,
    GeneratorOptions,
};
use crate::error::Result;

/// Evolve a density-like matrix under the generator for a time `t`.
pub fn evolve(
    generator: &Generator,
    rho0: &CMatrix,
    t: f64,
    control: &StepControl,
) -> Result<CMatrix> {
    let n = generator.n;
    let mut y = rho0.as_slice().to_vec();
    integrate(
        |_, y, dy| {
            let rho = CMatrix::from_column_slice(n, n, y);
            dy.copy_from_slice(generator.apply(&rho).as_slice());
        },
        0.0,
        t,
        &mut y,
        control,
    )?;
    Ok(CMatrix::from_column_slice(n, n, &y))
}

/// Diffusion matrix `2D` in the coherence-vector convention
/// (`s_(i,j) = |i⟩⟨j|`, index `i·n + j`), from the jump in slope of the
/// stationary correlation `G_αβ(τ) = ⟨δs_α(τ) δs_β(0)⟩` at `τ = 0`:
/// `2D = G'(0⁻) - G'(0⁺)`.
///
/// One-sided slopes come from evolving `s_β ρ` and `ρ s_α` over `h` and
/// `h/2`, with Richardson extrapolation.
pub fn diffusion_from_correlations(
    generator: &Generator,
    rho: &CMatrix,
    h: f64,
    control: &StepControl,
) -> Result<CMatrix> {
    let n = generator.n;
    let nn = n * n;
    let unit = |a: usize| {
        let mut m = CMatrix::zeros(n, n);
        m[(a / n, a % n)] = Complex64::ONE;
        m
    };
    // slope of Tr(s_α e^{Lτ} X) at τ = 0⁺ for every α, by Richardson
    let slopes = |x: &CMatrix| -> Result<CMatrix> {
        let full = evolve(generator, x, h, control)?;
        let half = evolve(generator, x, 0.5 * h, control)?;
        let d_full = (full - x) / Complex64::new(h, 0.0);
        let d_half = (half - x) / Complex64::new(0.5 * h, 0.0);
        Ok(d_half * Complex64::new(2.0, 0.0) - d_full)
    };
    let indices: Vec<usize> = (0..nn).collect();
    // Tr(|k⟩⟨l| X) = X_lk
    let right: Vec<CMatrix> = crate::map_maybe_parallel(&indices, |&b| slopes(&(unit(b) * rho)))
        .into_iter()
        .collect::<Result<_>>()?;
    let left: Vec<CMatrix> = crate::map_maybe_parallel(&indices, |&a| slopes(&(rho * unit(a))))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut two_d = CMatrix::zeros(nn, nn);
    for a in 0..nn {
        let (k, l) = (a / n, a % n);
        for b in 0..nn {
            let (i, j) = (b / n, b % n);
            // G'(0⁺) = d/dτ Tr(s_α e^{Lτ}(s_β ρ)),  G'(0⁻) = -d/dτ Tr(s_β e^{Lτ}(ρ s_α))
            let plus = right[b][(l, k)];
            let minus = -left[a][(j, i)];
            two_d[(a, b)] = minus - plus;
        }
    }
    Ok(two_d)
}

/// Regression spectrum for a stationary-atom drive (cooperativity from the
/// drive), building the generator and steady state from the dynamics module.
pub fn oracle_spectrum(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    deltas: &[f64],
    options: &RegressionOptions,
) -> Result<RegressionResult> {
    let generator = build_generator(scheme, drive, geometry, &GeneratorOptions::default())?;
    let system = steady_state(&generator)?;
    let vacuum = vacuum_operator(scheme, geometry, generator.n);
    // transit at γ₀ bounds the slowest relaxation; keep at least ten of its lifetimes
    let options = RegressionOptions {
        min_horizon: options.min_horizon.max(10.0 / drive.gamma0),
        ..*options
    };
    regression_spectrum(
        &generator,
        &system.rho,
        &vacuum,
        drive.cooperativity,
        deltas,
        &options,
    )
}
