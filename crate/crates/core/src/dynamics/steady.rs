use nalgebra::DVector;
use num_complex::Complex64;

use super::generator::{CMatrix, Generator};
use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// Relative residual above which a steady-state solve is rejected.
const STEADY_RESIDUAL_TOL: f64 = 1e-9;
/// Smallest acceptable ratio of LU pivots.
pub(crate) const PIVOT_RATIO_TOL: f64 = 1e-14;

/// Linear Bloch system for the coherence vector `s_(i,j) = ⟨|i⟩⟨j|⟩ = ρ_ji`
/// (index `i * n + j`).
#[derive(Clone, Debug)]
pub struct DriftSystem {
    pub n: usize,
    /// Full drift matrix `M` (`n² × n²`), one zero mode (the trace).
    pub drift: CMatrix,
    /// `M` with the `(0,0)` row replaced by the trace functional.
    pub constrained: CMatrix,
    /// Inhomogeneous term: `constrained · s + b = 0` on the steady state.
    pub b: CVector,
    /// Steady-state coherence vector.
    pub steady: CVector,
    /// Steady-state density matrix.
    pub rho: CMatrix,
}

impl DriftSystem {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// `⟨|i⟩⟨j|⟩` in the steady state.
    pub fn expectation(&self, i: usize, j: usize) -> Complex64 {
        self.steady[i * self.n + j]
    }

    /// Infinity norm of `M s` relative to the size of `M`.
    pub fn residual(&self, s: &CVector) -> f64 {
        let r = &self.drift * s;
        let scale = 1.0 + self.drift.iter().map(|x| x.norm()).fold(0.0, f64::max);
        r.iter().map(|x| x.norm()).fold(0.0, f64::max) / scale
    }
}

pub(crate) fn pivot_ratio(u_diag: impl Iterator<Item = Complex64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in u_diag {
        let a = d.norm();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Coherence vector of a density matrix.
pub fn to_coherence_vector(rho: &CMatrix) -> CVector {
    let n = rho.nrows();
    CVector::from_fn(n * n, |a, _| rho[(a % n, a / n)])
}

/// Density matrix of a coherence vector.
pub fn to_density_matrix(s: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| s[j * n + i])
}

/// Solve `M s = 0` with unit trace.
pub fn steady_state(generator: &Generator) -> Result<DriftSystem> {
    let n = generator.n;
    let drift = generator.drift_matrix();
    let mut constrained = drift.clone();
    for c in 0..n * n {
        constrained[(0, c)] = Complex64::ZERO;
    }
    for i in 0..n {
        constrained[(0, i * n + i)] = Complex64::ONE;
    }
    let mut b = CVector::zeros(n * n);
    b[0] = Complex64::new(-1.0, 0.0);

    let lu = constrained.clone().lu();
    let ratio = pivot_ratio(lu.u().diagonal().iter().copied());
    let solution = lu.solve(&(-&b));
    let Some(s) = solution.filter(|_| ratio > PIVOT_RATIO_TOL) else {
        return Err(Error::SingularSteadyState {
            pivot_ratio: ratio,
            residual: f64::NAN,
        });
    };

    let mut rho = to_density_matrix(&s, n);
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let steady = to_coherence_vector(&rho);

    let system = DriftSystem {
        n,
        drift,
        constrained,
        b,
        steady,
        rho,
    };
    let residual = system.residual(&system.steady);
    if !(residual < STEADY_RESIDUAL_TOL) {
        return Err(Error::SingularSteadyState {
            pivot_ratio: ratio,
            residual,
        });
    }
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{
        build_scheme, CustomSchemeSpec, HyperfineConstants, PolarizationGeometry, Preset,
    };
    use crate::dynamics::{build_generator, DriveConfig, GeneratorOptions};
    use approx::assert_abs_diff_eq;

    fn solve(preset: &str, drive: &DriveConfig) -> DriftSystem {
        let scheme = build_scheme(
            preset.parse::<Preset>().unwrap(),
            &HyperfineConstants::default(),
        )
        .unwrap();
        let g = build_generator(
            &scheme,
            drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        steady_state(&g).unwrap()
    }

    #[test]
    fn undriven_atoms_are_uniform_over_ground() {
        let drive = DriveConfig {
            omega_f: 0.0,
            detuning: 3.0,
            gamma0: 0.02,
            ..DriveConfig::default()
        };
        let sys = solve("rb87-d1-Fg2", &drive);
        for i in 0..sys.n {
            for j in 0..sys.n {
                let expected = if i == j && i < 5 { 0.2 } else { 0.0 };
                assert_abs_diff_eq!(sys.rho[(i, j)].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(sys.rho[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_level_resonant_saturation() {
        let scheme = CustomSchemeSpec::from_toml(
            r#"
            computed_couplings = false
            [[manifold]]
            label = "g"
            kind = "ground"
            F = 0
            [[manifold]]
            label = "e"
            kind = "excited"
            F = 1
            m = [1]
            [[coupling]]
            excited = ["e", 1]
            ground = ["g", 0]
            q = 1
            weight = 1.0
            "#,
        )
        .unwrap()
        .build()
        .unwrap();
        for omega_f in [0.3, 1.0, 4.0] {
            let drive = DriveConfig {
                omega_f,
                detuning: 0.0,
                gamma0: 1e-7,
                ..DriveConfig::default()
            };
            let g = build_generator(
                &scheme,
                &drive,
                &PolarizationGeometry::default(),
                &GeneratorOptions::default(),
            )
            .unwrap();
            let sys = steady_state(&g).unwrap();
            // transition Rabi frequency = Ω_f |c₊| · weight
            let omega = omega_f * std::f64::consts::FRAC_1_SQRT_2;
            let expected = (omega * omega / 4.0) / (0.25 + omega * omega / 2.0);
            assert_abs_diff_eq!(sys.rho[(1, 1)].re, expected, epsilon = 1e-6);
        }
    }

    #[test]
    fn toy_has_no_dark_trap() {
        let drive = DriveConfig {
            omega_f: 1.0,
            detuning: 0.0,
            gamma0: 0.001,
            ..DriveConfig::default()
        };
        let sys = solve("four-level-toy", &drive);
        // both ground sublevels stay populated and the pump-bright superposition is not emptied
        let p0 = sys.rho[(0, 0)].re;
        let p1 = sys.rho[(1, 1)].re;
        assert!(p0 > 0.1 && p1 > 0.1, "{p0} {p1}");
        assert!(sys.rho[(2, 2)].re > 1e-3);
    }

    #[test]
    fn trace_and_positivity() {
        let drive = DriveConfig {
            omega_f: 12.0,
            detuning: -7.0,
            gamma0: 0.01,
            ..DriveConfig::default()
        };
        let sys = solve("rb87-d1-Fg1", &drive);
        assert_abs_diff_eq!(sys.rho.trace().re, 1.0, epsilon = 1e-12);
        let eig = sys.rho.clone().symmetric_eigenvalues();
        assert!(eig.min() > -1e-10);
    }
}
