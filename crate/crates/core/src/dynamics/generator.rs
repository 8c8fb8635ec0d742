//! Lindblad generator of a multilevel atom under a classical pump.
//!
//! Rotating frame at the pump frequency, rotating-wave approximation. The
//! dissipators are excited-state decay with the coupling-tensor branching,
//! decay into the unmodeled ground manifold, and a transit term that
//! replaces atoms at rate γ₀ with fresh ones spread uniformly over the
//! modeled ground sublevels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::drive::{DriveConfig, LossChannel};
use crate::angular::{LevelScheme, ModeAmplitudes, PolarizationGeometry};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sparse jump operator, a list of `(row, col, value)` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Jump(pub Vec<(usize, usize, Complex64)>);

impl Jump {
    pub fn to_dense(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for &(i, j, v) in &self.0 {
            m[(i, j)] += v;
        }
        m
    }
}

/// `dρ/dt = -i[H, ρ] + Σ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub n: usize,
    pub hamiltonian: CMatrix,
    pub jumps: Vec<Jump>,
    /// `Σ_k L_k† L_k`
    anti: CMatrix,
}

impl Generator {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<Jump>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n {
            return Err(Error::Dimension("Hamiltonian must be square".into()));
        }
        if jumps
            .iter()
            .flat_map(|j| j.0.iter())
            .any(|&(i, k, _)| i >= n || k >= n)
        {
            return Err(Error::Dimension(
                "jump operator entry outside the state space".into(),
            ));
        }
        let mut anti = CMatrix::zeros(n, n);
        for jump in &jumps {
            for &(a, b, v) in &jump.0 {
                for &(c, d, w) in &jump.0 {
                    // (L†L)_{bd} = Σ_a conj(L_ab) L_ad
                    if a == c {
                        anti[(b, d)] += v.conj() * w;
                    }
                }
            }
        }
        Ok(Generator {
            n,
            hamiltonian,
            jumps,
            anti,
        })
    }

    /// Schrödinger-picture action on a density-like matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * (-I);
        out -= (&self.anti * rho + rho * &self.anti) * Complex64::new(0.5, 0.0);
        for jump in &self.jumps {
            for &(i, k, v) in &jump.0 {
                for &(j, l, w) in &jump.0 {
                    out[(i, j)] += v * rho[(k, l)] * w.conj();
                }
            }
        }
        out
    }

    /// Heisenberg-picture (adjoint) action on an operator.
    pub fn apply_adjoint(&self, op: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * op - op * h) * I;
        out -= (&self.anti * op + op * &self.anti) * Complex64::new(0.5, 0.0);
        for jump in &self.jumps {
            for &(k, i, v) in &jump.0 {
                for &(l, j, w) in &jump.0 {
                    // (L† X L)_{ij} = Σ conj(L_ki) X_kl L_lj
                    out[(i, j)] += v.conj() * op[(k, l)] * w;
                }
            }
        }
        out
    }

    /// Drift matrix of the expectation values `s_(i,j) = ⟨|i⟩⟨j|⟩`:
    /// `ds/dt = M s`, with `L†(|i⟩⟨j|) = Σ_(k,l) M[(i,j),(k,l)] |k⟩⟨l|`.
    pub fn drift_matrix(&self) -> CMatrix {
        let n = self.n;
        let idx = |i: usize, j: usize| i * n + j;
        let h = &self.hamiltonian;
        let a = &self.anti;
        let mut m = CMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let row = idx(i, j);
                for k in 0..n {
                    let hk = I * h[(k, i)] - a[(k, i)] * 0.5;
                    if hk != Complex64::ZERO {
                        m[(row, idx(k, j))] += hk;
                    }
                    let hl = -I * h[(j, k)] - a[(j, k)] * 0.5;
                    if hl != Complex64::ZERO {
                        m[(row, idx(i, k))] += hl;
                    }
                }
            }
        }
        for jump in &self.jumps {
            for &(i, k, v) in &jump.0 {
                for &(j, l, w) in &jump.0 {
                    // conj(L_ik) L_jl couples (i,j) -> (k,l)
                    m[(idx(i, j), idx(k, l))] += v.conj() * w;
                }
            }
        }
        m
    }
}

/// Apply the adjoint generator to an operator.
pub fn apply_adjoint(generator: &Generator, op: &CMatrix) -> CMatrix {
    generator.apply_adjoint(op)
}

/// Per-evaluation options that are not part of the drive itself.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GeneratorOptions {
    /// Velocity-induced shift `k·v`; the atom sees the pump at `Δ - k·v`.
    pub doppler_shift: f64,
}

/// Rotating-frame level energies and the pump coupling for a drive.
fn pump_frame(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    options: &GeneratorOptions,
) -> Result<Vec<f64>> {
    let reference = drive
        .reference
        .as_ref()
        .unwrap_or(&scheme.default_reference);
    let laser = scheme.line_frequency(reference)? + drive.detuning - options.doppler_shift;
    let origin = scheme.levels[scheme.ground_levels()[0]].energy;
    let mut energies: Vec<f64> = scheme.levels.iter().map(|l| l.energy - origin).collect();
    for &e in scheme.excited_levels() {
        energies[e] -= laser;
    }
    Ok(energies)
}

/// Mode coupling `V_eg = Σ_q c_q d_q(e, g)` as an `n × n` matrix of `|e⟩⟨g|` entries.
pub fn mode_coupling(scheme: &LevelScheme, mode: &ModeAmplitudes, n: usize) -> CMatrix {
    let mut v = CMatrix::zeros(n, n);
    let c = &scheme.coupling;
    for (a, &e) in c.excited.iter().enumerate() {
        for (b, &g) in c.ground.iter().enumerate() {
            let mut s = Complex64::ZERO;
            for q in -1..=1 {
                s += mode.component(q) * c.weight(q, a, b);
            }
            v[(e, g)] = s;
        }
    }
    v
}

/// Atomic lowering operator `P = Σ conj(V_eg) |g⟩⟨e|` radiating into the
/// vacuum (orthogonal) polarization mode.
pub fn vacuum_operator(scheme: &LevelScheme, geometry: &PolarizationGeometry, n: usize) -> CMatrix {
    mode_coupling(scheme, &geometry.vacuum, n).adjoint()
}

/// Number of states the generator acts on (the open loss channel adds a reservoir).
pub fn state_dimension(scheme: &LevelScheme, drive: &DriveConfig) -> usize {
    match drive.loss_channel {
        LossChannel::Recycle => scheme.len(),
        LossChannel::Open => scheme.len() + 1,
    }
}

/// Generator from raw rates. `gamma0 = 0` and `scheme.gamma = 0` are allowed
/// here for validation systems; [`build_generator`] enforces a physical drive.
pub fn build_generator_unchecked(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    options: &GeneratorOptions,
) -> Result<Generator> {
    let n = state_dimension(scheme, drive);
    let energies = pump_frame(scheme, drive, options)?;

    let mut h = CMatrix::zeros(n, n);
    for (i, &e) in energies.iter().enumerate() {
        h[(i, i)] = Complex64::new(e, 0.0);
    }
    let pump = mode_coupling(scheme, &geometry.pump, n);
    for &e in scheme.excited_levels() {
        for &g in scheme.ground_levels() {
            let v = pump[(e, g)] * (-0.5 * drive.omega_f);
            h[(e, g)] += v;
            h[(g, e)] += v.conj();
        }
    }

    let gamma = scheme.gamma;
    let c = &scheme.coupling;
    let ng = c.ground.len();
    let mut jumps = Vec::new();
    if gamma > 0.0 {
        for q in -1..=1 {
            let mut entries = Vec::new();
            for (a, &e) in c.excited.iter().enumerate() {
                for (b, &g) in c.ground.iter().enumerate() {
                    let w = c.weight(q, a, b);
                    if w != 0.0 {
                        entries.push((g, e, Complex64::new(gamma.sqrt() * w, 0.0)));
                    }
                }
            }
            if !entries.is_empty() {
                jumps.push(Jump(entries));
            }
        }
        for (a, &e) in c.excited.iter().enumerate() {
            let loss = scheme.loss_fraction(a);
            if loss <= 0.0 {
                continue;
            }
            match drive.loss_channel {
                LossChannel::Recycle => {
                    let amp = (gamma * loss / ng as f64).sqrt();
                    for &g in &c.ground {
                        jumps.push(Jump(vec![(g, e, Complex64::new(amp, 0.0))]));
                    }
                }
                LossChannel::Open => {
                    let amp = (gamma * loss).sqrt();
                    jumps.push(Jump(vec![(n - 1, e, Complex64::new(amp, 0.0))]));
                }
            }
        }
    }
    if drive.gamma0 > 0.0 {
        let amp = (drive.gamma0 / ng as f64).sqrt();
        for k in 0..n {
            for &g in &c.ground {
                jumps.push(Jump(vec![(g, k, Complex64::new(amp, 0.0))]));
            }
        }
    }
    Generator::new(h, jumps)
}

/// Build the generator for a validated scheme and drive.
pub fn build_generator(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    options: &GeneratorOptions,
) -> Result<Generator> {
    drive.validate()?;
    if !(options.doppler_shift.is_finite()) {
        return Err(Error::InvalidDrive("Doppler shift must be finite".into()));
    }
    let ne = scheme.coupling.excited.len();
    let ng = scheme.coupling.ground.len();
    if scheme
        .coupling
        .weights
        .iter()
        .any(|w| w.nrows() != ne || w.ncols() != ng)
        || ne + ng != scheme.len()
    {
        return Err(Error::Dimension(
            "coupling tensor does not match the level scheme".into(),
        ));
    }
    build_generator_unchecked(scheme, drive, geometry, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{build_scheme, HyperfineConstants, Preset};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn toy_generator() -> Generator {
        let scheme = build_scheme(Preset::FourLevelToy, &HyperfineConstants::default()).unwrap();
        let drive = DriveConfig {
            omega_f: 1.3,
            detuning: 0.4,
            gamma0: 0.05,
            ..DriveConfig::default()
        };
        build_generator(
            &scheme,
            &drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn adjoint_annihilates_identity() {
        let g = toy_generator();
        let id = CMatrix::identity(g.n, g.n);
        assert!(g.apply_adjoint(&id).norm() < 1e-14);
    }

    #[test]
    fn trace_duality() {
        let g = toy_generator();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let rho = random_matrix(g.n, &mut rng);
            let op = random_matrix(g.n, &mut rng);
            let lhs = (g.apply(&rho) * &op).trace();
            let rhs = (&rho * g.apply_adjoint(&op)).trace();
            assert!((lhs - rhs).norm() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn drift_matrix_matches_adjoint_action() {
        let g = toy_generator();
        let m = g.drift_matrix();
        let n = g.n;
        for i in 0..n {
            for j in 0..n {
                let mut x = CMatrix::zeros(n, n);
                x[(i, j)] = Complex64::ONE;
                let lx = g.apply_adjoint(&x);
                for k in 0..n {
                    for l in 0..n {
                        assert_abs_diff_eq!(
                            (m[(i * n + j, k * n + l)] - lx[(k, l)]).norm(),
                            0.0,
                            epsilon = 1e-14
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn two_level_adjoint_of_ground_projector() {
        // Γ|e⟩⟨e| at zero drive and γ₀ = 0
        let scheme = crate::angular::CustomSchemeSpec::from_toml(
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
        let drive = DriveConfig {
            omega_f: 0.0,
            gamma0: 0.0,
            ..DriveConfig::default()
        };
        let g = build_generator_unchecked(
            &scheme,
            &drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let mut pg = CMatrix::zeros(2, 2);
        pg[(0, 0)] = Complex64::ONE;
        let out = g.apply_adjoint(&pg);
        let mut expected = CMatrix::zeros(2, 2);
        expected[(1, 1)] = Complex64::new(1.0, 0.0);
        assert!((out - expected).norm() < 1e-15);
    }

    #[test]
    fn decay_anticommutator_is_gamma_on_excited_states() {
        let scheme = build_scheme(
            "rb87-d1-Fg2".parse().unwrap(),
            &HyperfineConstants::default(),
        )
        .unwrap();
        let drive = DriveConfig {
            gamma0: 1e-9,
            ..DriveConfig::default()
        };
        let g = build_generator(
            &scheme,
            &drive,
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        for &e in scheme.excited_levels() {
            for &e2 in scheme.excited_levels() {
                let expected = if e == e2 { 1.0 + 1e-9 } else { 0.0 };
                assert_abs_diff_eq!(g.anti[(e, e2)].re, expected, epsilon = 1e-12);
                assert_abs_diff_eq!(g.anti[(e, e2)].im, 0.0, epsilon = 1e-12);
            }
        }
    }
}
