use num_complex::Complex64;

use crate::dynamics::{CMatrix, DriftSystem};
use crate::error::{Error, Result};

/// Relative stationarity residual accepted by the Einstein relation.
const STATIONARY_TOL: f64 = 1e-8;

/// Langevin force correlations `⟨F_α(t) F_β(t')⟩ = 2 D_αβ δ(t - t')` in the
/// coherence basis `s_(i,j) = |i⟩⟨j|`.
#[derive(Clone, Debug)]
pub struct DiffusionMatrix {
    pub n: usize,
    /// `2D`, the quantity that enters spectra directly.
    pub two_d: CMatrix,
}

impl DiffusionMatrix {
    pub fn d(&self) -> CMatrix {
        &self.two_d * Complex64::new(0.5, 0.0)
    }
}

/// Generalized Einstein relation at the steady state of `system`:
///
/// `2D_αβ = ⟨L†(s_α s_β)⟩ - ⟨L†(s_α) s_β⟩ - ⟨s_α L†(s_β)⟩`.
pub fn diffusion_matrix(system: &DriftSystem) -> Result<DiffusionMatrix> {
    let residual = system.residual(&system.steady);
    if !(residual < STATIONARY_TOL) {
        return Err(Error::NotStationary(residual));
    }
    let n = system.n;
    let m = &system.drift;
    let s = &system.steady;
    let idx = |i: usize, j: usize| i * n + j;
    // ⟨L†(|i⟩⟨l|)⟩, zero up to the solve residual
    let r = m * s;

    let mut two_d = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let alpha = idx(i, j);
            for k in 0..n {
                for l in 0..n {
                    let beta = idx(k, l);
                    let mut v = if j == k {
                        r[idx(i, l)]
                    } else {
                        Complex64::ZERO
                    };
                    // ⟨L†(s_α) s_β⟩ = Σ_a M[α,(a,k)] ⟨|a⟩⟨l|⟩
                    for a in 0..n {
                        v -= m[(alpha, idx(a, k))] * s[idx(a, l)];
                    }
                    // ⟨s_α L†(s_β)⟩ = Σ_b M[β,(j,b)] ⟨|i⟩⟨b|⟩
                    for b in 0..n {
                        v -= m[(beta, idx(j, b))] * s[idx(i, b)];
                    }
                    two_d[(alpha, beta)] = v;
                }
            }
        }
    }
    Ok(DiffusionMatrix { n, two_d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{CustomSchemeSpec, LevelScheme, PolarizationGeometry};
    use crate::dynamics::{build_generator_unchecked, steady_state, DriveConfig, GeneratorOptions};
    use approx::assert_abs_diff_eq;

    fn two_level(gamma: f64) -> LevelScheme {
        let mut s = CustomSchemeSpec::from_toml(
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
        s.gamma = gamma;
        s
    }

    /// Drift system around a given stationary density matrix (no solve).
    fn system_at(rho: CMatrix, gen: &crate::dynamics::Generator) -> DriftSystem {
        let steady = crate::dynamics::to_coherence_vector(&rho);
        DriftSystem {
            n: gen.n,
            drift: gen.drift_matrix(),
            constrained: gen.drift_matrix(),
            b: crate::dynamics::CVector::zeros(gen.n * gen.n),
            steady,
            rho,
        }
    }

    #[test]
    fn closed_system_has_no_diffusion() {
        // Γ = 0, γ₀ = 0, driven: any eigenstate of H is stationary.
        let scheme = two_level(0.0);
        let drive = DriveConfig {
            omega_f: 1.7,
            detuning: 0.3,
            gamma0: 0.0,
            ..DriveConfig::default()
        };
        let gen = build_generator_unchecked(
            &scheme,
            &drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let eig = gen.hamiltonian.clone().symmetric_eigen();
        let v = eig.eigenvectors.column(0).into_owned();
        let rho = &v * v.adjoint();
        let d = diffusion_matrix(&system_at(rho, &gen)).unwrap();
        assert!(d.two_d.norm() < 1e-13, "{}", d.two_d.norm());
    }

    #[test]
    fn undriven_two_level_noise_is_on_optical_coherences() {
        let scheme = two_level(1.0);
        let drive = DriveConfig {
            omega_f: 0.0,
            detuning: 0.7,
            gamma0: 0.0,
            ..DriveConfig::default()
        };
        let gen = build_generator_unchecked(
            &scheme,
            &drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let sys = steady_state(&gen).unwrap();
        let d = diffusion_matrix(&sys).unwrap();
        // index (i,j) -> 2i + j with g = 0, e = 1
        let ge = 1;
        let eg = 2;
        assert_abs_diff_eq!(d.two_d[(ge, eg)].re, 1.0, epsilon = 1e-12);
        for a in 0..4 {
            for b in 0..4 {
                if (a, b) != (ge, eg) {
                    assert!(
                        d.two_d[(a, b)].norm() < 1e-12,
                        "({a},{b}) = {}",
                        d.two_d[(a, b)]
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_non_stationary_state() {
        let scheme = two_level(1.0);
        let drive = DriveConfig {
            omega_f: 1.0,
            gamma0: 0.01,
            ..DriveConfig::default()
        };
        let gen = build_generator_unchecked(
            &scheme,
            &drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let mut rho = CMatrix::zeros(2, 2);
        rho[(1, 1)] = Complex64::ONE;
        assert!(matches!(
            diffusion_matrix(&system_at(rho, &gen)),
            Err(Error::NotStationary(_))
        ));
    }
}
