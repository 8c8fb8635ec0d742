//! Steady states and generators against closed forms and direct time evolution.

use num_complex::Complex64;
use proptest::prelude::*;
use psr_core::angular::{
    build_scheme, CustomSchemeSpec, HyperfineConstants, LevelScheme, PolarizationGeometry, Preset,
};
use psr_core::dynamics::{
    build_generator, build_generator_unchecked, steady_state, CMatrix, DriveConfig,
    GeneratorOptions, LossChannel,
};
use psr_core::oracle::{evolve, StepControl};

const TWO_LEVEL: &str = r#"
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
"#;

fn two_level() -> LevelScheme {
    CustomSchemeSpec::from_toml(TWO_LEVEL)
        .unwrap()
        .build()
        .unwrap()
}

fn preset(name: &str) -> LevelScheme {
    build_scheme(
        name.parse::<Preset>().unwrap(),
        &HyperfineConstants::default(),
    )
    .unwrap()
}

fn drive(omega_f: f64, detuning: f64, gamma0: f64) -> DriveConfig {
    DriveConfig {
        omega_f,
        detuning,
        gamma0,
        ..DriveConfig::default()
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Start in the maximally mixed ground state and integrate for `50/γ₀`.
fn time_propagated(scheme: &LevelScheme, d: &DriveConfig) -> (CMatrix, CMatrix) {
    let g = build_generator(
        scheme,
        d,
        &PolarizationGeometry::default(),
        &GeneratorOptions::default(),
    )
    .unwrap();
    let steady = steady_state(&g).unwrap().rho;
    let mut rho0 = CMatrix::zeros(g.n, g.n);
    let ground = scheme.ground_levels();
    for &k in ground {
        rho0[(k, k)] = Complex64::new(1.0 / ground.len() as f64, 0.0);
    }
    let control = StepControl {
        rtol: 1e-11,
        atol: 1e-15,
        ..StepControl::default()
    };
    let evolved = evolve(&g, &rho0, 50.0 / d.gamma0, &control).unwrap();
    (steady, evolved)
}

#[test]
fn steady_state_is_the_long_time_limit_for_the_toy() {
    let (steady, evolved) = time_propagated(&preset("four-level-toy"), &drive(1.0, 0.0, 0.05));
    let diff = max_abs(&(steady - evolved));
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn steady_state_is_the_long_time_limit_for_rubidium() {
    for (name, d) in [
        ("rb87-d1-Fg1", drive(10.0, 5.0, 0.05)),
        ("rb87-d1-Fg2-Fe1", drive(6.0, -3.0, 0.1)),
    ] {
        let (steady, evolved) = time_propagated(&preset(name), &d);
        let diff = max_abs(&(steady - evolved));
        assert!(diff < 1e-8, "{name}: {diff:e}");
    }
}

#[test]
fn open_channel_steady_state_is_the_long_time_limit() {
    let d = DriveConfig {
        loss_channel: LossChannel::Open,
        ..drive(4.0, 0.0, 0.1)
    };
    let (steady, evolved) = time_propagated(&preset("rb87-d1-Fg1-Fe2"), &d);
    let diff = max_abs(&(&steady - evolved));
    assert!(diff < 1e-8, "{diff:e}");
    // the reservoir holds population but no coherence
    let n = steady.nrows();
    assert!(steady[(n - 1, n - 1)].re > 1e-4);
    for k in 0..n - 1 {
        assert_eq!(steady[(k, n - 1)], Complex64::ZERO);
    }
}

#[test]
fn two_level_steady_state_matches_closed_form() {
    let scheme = two_level();
    for &(omega_f, detuning) in &[(0.5, 0.0), (2.0, 1.5), (5.0, -3.0), (1.0, 20.0)] {
        let g = build_generator_unchecked(
            &scheme,
            &drive(omega_f, detuning, 0.0),
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let rho = steady_state(&g).unwrap().rho;
        // the σ⁺ amplitude of the default pump is 1/√2
        let omega = omega_f * std::f64::consts::FRAC_1_SQRT_2;
        let denom = detuning * detuning + 0.25 + omega * omega / 2.0;
        let excited = omega * omega / 4.0 / denom;
        let coherence_sq = omega * omega / 4.0 * (detuning * detuning + 0.25) / (denom * denom);
        assert!(
            (rho[(1, 1)].re - excited).abs() < 1e-12,
            "ρ_ee {} vs {excited}",
            rho[(1, 1)].re
        );
        assert!((rho[(1, 0)].norm_sqr() - coherence_sq).abs() < 1e-12);
    }
}

#[test]
fn resonant_two_level_spectrum_has_mollow_sidebands() {
    let scheme = two_level();
    for omega_f in [1.0, 4.0, 12.0] {
        let g = build_generator_unchecked(
            &scheme,
            &drive(omega_f, 0.0, 0.0),
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let omega = omega_f * std::f64::consts::FRAC_1_SQRT_2;
        let mut eig: Vec<Complex64> = g
            .drift_matrix()
            .eigenvalues()
            .unwrap()
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let split = Complex64::new(omega * omega - 1.0 / 16.0, 0.0).sqrt();
        let mut expected = [
            Complex64::new(-0.75, 0.0) - Complex64::i() * split,
            Complex64::new(-0.75, 0.0) + Complex64::i() * split,
            Complex64::new(-0.5, 0.0),
            Complex64::ZERO,
        ];
        expected.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        for (a, b) in eig.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-10, "Ω={omega}: {eig:?} vs {expected:?}");
        }
    }
}

#[test]
fn velocity_shift_is_a_detuning_offset() {
    let scheme = preset("rb87-d1-Fg2");
    let geometry = PolarizationGeometry::default();
    let shifted = build_generator(
        &scheme,
        &drive(20.0, 40.0, 0.01),
        &geometry,
        &GeneratorOptions {
            doppler_shift: 15.0,
        },
    )
    .unwrap();
    let plain = build_generator(
        &scheme,
        &drive(20.0, 25.0, 0.01),
        &geometry,
        &GeneratorOptions::default(),
    )
    .unwrap();
    let diff = max_abs(&(steady_state(&shifted).unwrap().rho - steady_state(&plain).unwrap().rho));
    assert!(diff < 1e-13, "{diff:e}");
}

#[test]
fn ground_level_light_shift_grows_with_intensity() {
    // far off resonance a closed transition pushes the dressed ground level away from
    // the excited level by Ω²/(4Δ)
    let scheme = two_level();
    let detuning = 200.0;
    let mut previous = 0.0;
    for omega_f in [2.0, 4.0, 8.0, 16.0] {
        let g = build_generator_unchecked(
            &scheme,
            &drive(omega_f, detuning, 0.0),
            &PolarizationGeometry::default(),
            &GeneratorOptions::default(),
        )
        .unwrap();
        let h = g.hamiltonian.clone();
        // the pump frame puts the ground level at zero and the excited level at -Δ
        let dressed = h
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let omega = omega_f * std::f64::consts::FRAC_1_SQRT_2;
        let shift = dressed - h[(0, 0)].re;
        let expected = omega * omega / (4.0 * detuning);
        assert!(shift > previous);
        assert!(
            (shift - expected).abs() < 1e-2 * expected,
            "{shift} vs {expected}"
        );
        previous = shift;
    }
}

fn is_positive_semidefinite(rho: &CMatrix, tol: f64) -> bool {
    rho.clone()
        .symmetric_eigenvalues()
        .iter()
        .all(|&x| x > -tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steady_states_are_density_matrices(
        which in 0usize..7,
        omega_f in 0.0f64..40.0,
        detuning in -150.0f64..300.0,
        log_gamma0 in -3.0f64..-1.0,
        open in any::<bool>(),
    ) {
        let names = ["rb87-d1-Fg1", "rb87-d1-Fg2", "rb87-d1-Fg1-Fe1", "rb87-d1-Fg1-Fe2", "rb87-d1-Fg2-Fe1", "rb87-d1-Fg2-Fe2", "four-level-toy"];
        let d = DriveConfig {
            loss_channel: if open { LossChannel::Open } else { LossChannel::Recycle },
            ..drive(omega_f, detuning, 10f64.powf(log_gamma0))
        };
        let g = build_generator(&preset(names[which]), &d, &PolarizationGeometry::default(), &GeneratorOptions::default()).unwrap();
        let rho = steady_state(&g).unwrap().rho;
        prop_assert!((rho.trace() - Complex64::ONE).norm() < 1e-12);
        prop_assert!(max_abs(&(&rho - rho.adjoint())) < 1e-14);
        prop_assert!(is_positive_semidefinite(&rho, 1e-10));
        prop_assert!(max_abs(&g.apply(&rho)) < 1e-10);
    }
}
