//! Output spectra from two-time atomic correlations (quantum regression).
//!
//! Two-time correlations `⟨X(τ) Y(0)⟩ = Tr(X e^{Lτ}(Y ρ))` are obtained by
//! evolving `Y ρ` under the Lindblad generator in the time domain, and their
//! one-sided Fourier integrals are accumulated alongside the evolution. From
//! them the slice drift `K̂` (commutator response) and noise `Q̂`
//! (two-sided fluctuation spectra) are assembled and the field is propagated
//! through the medium by direct integration of
//! `dS/dζ = C (K̂ S + S K̂† + Q̂)`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::{integrate, StepControl, StepStats};
use crate::dynamics::{CMatrix, Generator};
use crate::error::{Error, Result};
use crate::noisespec::SidebandCorrelation;

type C2 = Matrix2<Complex64>;

/// Numerical settings of the regression oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionOptions {
    pub control: StepControl,
    /// The horizon is `max(horizon_decades · ln 10, 10) / (slowest decay rate)`.
    pub horizon_decades: f64,
    /// Lower bound on the horizon in units of 1/Γ.
    pub min_horizon: f64,
    /// Upper bound on the horizon; needing more is an error.
    pub max_horizon: f64,
    /// Largest allowed `|C K̂| h` of a propagation step through the medium.
    pub medium_step: f64,
    /// Correlations must have decayed below this fraction of their initial size.
    pub decay_tolerance: f64,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        RegressionOptions {
            control: StepControl::default(),
            horizon_decades: 8.0,
            min_horizon: 10.0,
            max_horizon: 1e7,
            medium_step: 0.02,
            decay_tolerance: 1e-6,
        }
    }
}

/// Diagnostics of a regression run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    /// Integration horizon in units of 1/Γ.
    pub horizon: f64,
    /// Slowest nonzero decay rate of the generator.
    pub slowest_rate: f64,
    /// Largest `‖σ(T)‖ / ‖σ(0)‖` over the evolved operators.
    pub residual_fraction: f64,
    /// Bound on the Fourier integrals beyond the horizon.
    pub tail_bound: f64,
    /// Combined step statistics of all evolutions.
    pub steps: StepStats,
    /// Number of medium propagation steps at the largest `δ`.
    pub medium_steps: usize,
}

/// Output correlations computed from time-domain regression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub deltas: Vec<f64>,
    pub correlations: Vec<SidebandCorrelation>,
    /// `(K̂(δ), K̂(-δ))` per δ, per unit cooperativity.
    #[serde(skip)]
    pub drift: Vec<[C2; 2]>,
    /// `(Q̂(δ), Q̂(-δ))` per δ, per unit cooperativity.
    #[serde(skip)]
    pub noise: Vec<[C2; 2]>,
    pub diagnostics: RegressionDiagnostics,
}

/// Slowest nonzero decay rate of the Lindblad generator.
pub fn slowest_decay_rate(generator: &Generator) -> Result<f64> {
    let m = generator.drift_matrix();
    let eig = m.schur().eigenvalues().ok_or_else(|| {
        Error::HorizonTooShort("eigenvalues of the generator did not converge".into())
    })?;
    let scale = 1.0 + eig.iter().map(|l| l.norm()).fold(0.0, f64::max);
    // the trace mode is the one eigenvalue closest to zero
    let mut rates: Vec<f64> = eig.iter().map(|l| -l.re).collect();
    rates.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let rest = &rates[1.min(rates.len())..];
    let slowest = rest.iter().copied().fold(f64::INFINITY, f64::min);
    if !(slowest > 1e-12 * scale) {
        return Err(Error::HorizonTooShort(format!(
            "generator has an undamped mode (slowest decay rate {slowest:.3e})"
        )));
    }
    Ok(slowest)
}

/// `Tr(A B)` for square matrices.
fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// One regression run: evolve `σ(0)`, accumulating
/// `∫₀^T e^{iω τ} Tr(X σ(τ)) dτ` for every probe `X` and frequency `ω`.
struct Transform {
    /// `[probe][frequency]`
    integrals: Vec<Vec<Complex64>>,
    residual_fraction: f64,
    final_values: Vec<Complex64>,
    stats: StepStats,
}

fn transform(
    generator: &Generator,
    sigma0: &CMatrix,
    probes: &[CMatrix],
    omegas: &[f64],
    horizon: f64,
    control: &StepControl,
) -> Result<Transform> {
    let n = generator.n;
    let nn = n * n;
    let nw = omegas.len();
    let np = probes.len();
    let mut y = vec![Complex64::ZERO; nn + np * nw];
    y[..nn].copy_from_slice(sigma0.as_slice());
    let mut phases = vec![Complex64::ZERO; nw];
    let stats = integrate(
        |t, y, dy| {
            let sigma = CMatrix::from_column_slice(n, n, &y[..nn]);
            dy[..nn].copy_from_slice(generator.apply(&sigma).as_slice());
            for (p, w) in phases.iter_mut().zip(omegas) {
                *p = Complex64::cis(w * t);
            }
            for (k, x) in probes.iter().enumerate() {
                let f = trace_product(x, &sigma);
                for (j, p) in phases.iter().enumerate() {
                    dy[nn + k * nw + j] = p * f;
                }
            }
        },
        0.0,
        horizon,
        &mut y,
        control,
    )?;
    let sigma_t = CMatrix::from_column_slice(n, n, &y[..nn]);
    let norm0 = sigma0.norm();
    Ok(Transform {
        integrals: (0..np)
            .map(|k| y[nn + k * nw..nn + (k + 1) * nw].to_vec())
            .collect(),
        residual_fraction: if norm0 > 0.0 {
            sigma_t.norm() / norm0
        } else {
            0.0
        },
        final_values: probes.iter().map(|x| trace_product(x, &sigma_t)).collect(),
        stats,
    })
}

/// Integrate `dS/dζ = K S + S K† + Q` over `ζ ∈ [0, 1]` with classical RK4,
/// from the vacuum input `S(0) = diag(1, 0)`.
fn propagate_rk4(k: &C2, q: &C2, steps: usize) -> C2 {
    let rhs = |s: &C2| k * s + s * k.adjoint() + q;
    let h = Complex64::new(1.0 / steps as f64, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let mut s = C2::zeros();
    s[(0, 0)] = Complex64::ONE;
    for _ in 0..steps {
        let k1 = rhs(&s);
        let k2 = rhs(&(s + k1 * h * half));
        let k3 = rhs(&(s + k2 * h * half));
        let k4 = rhs(&(s + k3 * h));
        s += (k1 + k2 * two + k3 * two + k4) * h * sixth;
    }
    s
}

/// Output correlations of the vacuum mode after a medium of cooperativity
/// `cooperativity`, from time-domain regression around the steady state `rho`.
///
/// `vacuum` is the atomic lowering operator `P` radiating into the vacuum
/// mode. The steady state is taken as given; nothing of the frequency-domain
/// engine is used.
pub fn regression_spectrum(
    generator: &Generator,
    rho: &CMatrix,
    vacuum: &CMatrix,
    cooperativity: f64,
    deltas: &[f64],
    options: &RegressionOptions,
) -> Result<RegressionResult> {
    let n = generator.n;
    if rho.nrows() != n || rho.ncols() != n || vacuum.nrows() != n || vacuum.ncols() != n {
        return Err(Error::Dimension(
            "steady state / vacuum operator do not match the generator".into(),
        ));
    }
    if deltas.iter().any(|d| !d.is_finite()) || !cooperativity.is_finite() {
        return Err(Error::InvalidDrive(
            "noise frequencies and cooperativity must be finite".into(),
        ));
    }
    let rate = slowest_decay_rate(generator)?;
    let horizon = (options.horizon_decades * std::f64::consts::LN_10).max(10.0) / rate;
    let horizon = horizon.max(options.min_horizon);
    if horizon > options.max_horizon {
        return Err(Error::HorizonTooShort(format!(
            "required horizon {horizon:.3e} exceeds the limit {:.3e} (slowest rate {rate:.3e})",
            options.max_horizon
        )));
    }

    let p = vacuum.clone();
    let pd = vacuum.adjoint();
    let mean_p = trace_product(&p, rho);
    let mean_pd = trace_product(&pd, rho);
    // mean-subtracted initial operators: P ρ, P† ρ, ρ P, ρ P†
    let sources = [
        &p * rho - rho * mean_p,
        &pd * rho - rho * mean_pd,
        rho * &p - rho * mean_p,
        rho * &pd - rho * mean_pd,
    ];
    let probes = [p.clone(), pd.clone()];
    let mut omegas = Vec::with_capacity(2 * deltas.len());
    for &d in deltas {
        omegas.push(d);
        omegas.push(-d);
    }

    let runs = crate::map_maybe_parallel(&sources, |s| {
        transform(generator, s, &probes, &omegas, horizon, &options.control)
    });
    let runs: Vec<Transform> = runs.into_iter().collect::<Result<_>>()?;

    let mut residual_fraction = 0.0f64;
    let mut tail = 0.0f64;
    let mut steps = StepStats {
        min_step: f64::INFINITY,
        ..StepStats::default()
    };
    for r in &runs {
        residual_fraction = residual_fraction.max(r.residual_fraction);
        for v in &r.final_values {
            tail = tail.max(v.norm() / rate);
        }
        steps.accepted += r.stats.accepted;
        steps.rejected += r.stats.rejected;
        steps.min_step = steps.min_step.min(r.stats.min_step);
        steps.max_step = steps.max_step.max(r.stats.max_step);
        steps.local_error += r.stats.local_error;
    }
    if residual_fraction > options.decay_tolerance {
        return Err(Error::HorizonTooShort(format!(
            "correlations decayed only to {residual_fraction:.3e} of their initial size at τ = {horizon:.3e}"
        )));
    }

    // t[source][probe](ω index)
    const PR: usize = 0;
    const PD: usize = 1;
    const A_P: usize = 0; // P ρ
    const A_PD: usize = 1; // P† ρ
    const B_P: usize = 2; // ρ P
    const B_PD: usize = 3; // ρ P†
    let t = |src: usize, probe: usize, w: usize| runs[src].integrals[probe][w];
    let two = Complex64::new(2.0, 0.0);
    let blocks = |w: usize, wm: usize| {
        // ∫₀^∞ e^{iωτ} ⟨[X(τ), Y]⟩ = T[X][Yρ] - T[X][ρY]
        let k = C2::new(
            -(t(A_PD, PR, w) - t(B_PD, PR, w)),
            -(t(A_P, PR, w) - t(B_P, PR, w)),
            t(A_PD, PD, w) - t(B_PD, PD, w),
            t(A_P, PD, w) - t(B_P, PD, w),
        ) * two;
        // ∫ e^{iωτ} ⟨δX(τ) δY⟩ over all τ: τ > 0 from Yρ probed by X,
        // τ < 0 from ρX probed by Y at -ω
        let q = C2::new(
            t(A_PD, PR, w) + t(B_P, PD, wm),
            -(t(A_P, PR, w) + t(B_P, PR, wm)),
            -(t(A_PD, PD, w) + t(B_PD, PD, wm)),
            t(A_P, PD, w) + t(B_PD, PR, wm),
        ) * two;
        (k, q)
    };

    let c = Complex64::new(cooperativity, 0.0);
    let mut correlations = Vec::with_capacity(deltas.len());
    let mut drift = Vec::with_capacity(deltas.len());
    let mut noise = Vec::with_capacity(deltas.len());
    let mut medium_steps = 0;
    for (i, &delta) in deltas.iter().enumerate() {
        let (kp, qp) = blocks(2 * i, 2 * i + 1);
        let (km, qm) = blocks(2 * i + 1, 2 * i);
        let size = [kp, km]
            .iter()
            .map(|k| k.iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
            * cooperativity.abs();
        let nsteps = ((size / options.medium_step).ceil() as usize).clamp(16, 10_000_000);
        medium_steps = medium_steps.max(nsteps);
        let sp = propagate_rk4(&(kp * c), &(qp * c), nsteps);
        let sm = propagate_rk4(&(km * c), &(qm * c), nsteps);
        if sp
            .iter()
            .chain(sm.iter())
            .any(|x| !x.re.is_finite() || !x.im.is_finite())
        {
            return Err(Error::NonFinite(format!(
                "oracle propagation overflowed at delta = {delta}"
            )));
        }
        correlations.push(SidebandCorrelation {
            delta,
            cn: 0.5 * (sp[(1, 1)].re + sm[(1, 1)].re),
            ca: (sp[(0, 1)] + sm[(0, 1)]) * 0.5,
            commutator: [sp[(0, 0)].re - sm[(1, 1)].re, sm[(0, 0)].re - sp[(1, 1)].re],
        });
        drift.push([kp, km]);
        noise.push([qp, qm]);
    }

    Ok(RegressionResult {
        deltas: deltas.to_vec(),
        correlations,
        drift,
        noise,
        diagnostics: RegressionDiagnostics {
            horizon,
            slowest_rate: rate,
            residual_fraction,
            tail_bound: tail,
            steps,
            medium_steps,
        },
    })
}
