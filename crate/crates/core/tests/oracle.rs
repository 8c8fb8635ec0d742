//! Time-domain regression oracle: limits, agreement with the frequency-domain
//! engine, numerical self-consistency and failure modes.

use psr_core::angular::{
    build_scheme, CustomSchemeSpec, HyperfineConstants, LevelScheme, PolarizationGeometry, Preset,
};
use psr_core::dynamics::{
    build_generator, steady_state, vacuum_operator, DriveConfig, GeneratorOptions,
};
use psr_core::noisespec::{PreparedPoint, SidebandCorrelation};
use psr_core::oracle::{
    compare_report, oracle_spectrum, regression_spectrum, RegressionOptions, StepControl,
};
use psr_core::Error;

fn two_level() -> LevelScheme {
    CustomSchemeSpec::from_toml(
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
    .unwrap()
}

fn toy() -> LevelScheme {
    build_scheme(Preset::FourLevelToy, &HyperfineConstants::default()).unwrap()
}

fn drive(omega_f: f64, detuning: f64, gamma0: f64, cooperativity: f64) -> DriveConfig {
    DriveConfig {
        omega_f,
        detuning,
        gamma0,
        cooperativity,
        ..DriveConfig::default()
    }
}

fn engine(scheme: &LevelScheme, d: &DriveConfig, deltas: &[f64]) -> Vec<SidebandCorrelation> {
    let p = PreparedPoint::new(
        scheme,
        d,
        &PolarizationGeometry::default(),
        &GeneratorOptions::default(),
    )
    .unwrap();
    deltas
        .iter()
        .map(|&x| p.correlation(d.cooperativity, x).unwrap())
        .collect()
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn zero_cooperativity_gives_vacuum() {
    let deltas = grid(5, 0.05, 2.0);
    let r = oracle_spectrum(
        &toy(),
        &drive(1.0, 0.0, 0.05, 0.0),
        &PolarizationGeometry::default(),
        &deltas,
        &RegressionOptions::default(),
    )
    .unwrap();
    for c in &r.correlations {
        assert!(c.cn.abs() < 1e-14 && c.ca.norm() < 1e-14, "{c:?}");
        assert!(c.commutator_error() < 1e-14);
    }
}

#[test]
fn weak_drive_two_level_absorption_is_lorentzian() {
    // an almost unexcited atom absorbs the sideband at δ with a Lorentzian
    // centered on the atomic line; transit resets both levels, so the optical
    // coherence decays at Γ/2 + γ₀
    let deltas = grid(12, 0.0, 3.0);
    let d = drive(0.01, 0.0, 0.05, 1.0);
    let width = 0.5 + d.gamma0;
    let r = oracle_spectrum(
        &two_level(),
        &d,
        &PolarizationGeometry::default(),
        &deltas,
        &RegressionOptions::default(),
    )
    .unwrap();
    let shape: Vec<f64> = r
        .drift
        .iter()
        .zip(&deltas)
        .map(|(k, &x)| k[0][(0, 0)].re * (width * width + x * x))
        .collect();
    for s in &shape {
        assert!(s < &0.0, "absorbing medium must attenuate: {shape:?}");
        assert!((s - shape[0]).abs() < 1e-3 * shape[0].abs(), "{shape:?}");
    }
}

#[test]
fn weak_drive_two_level_matches_engine() {
    let deltas = grid(10, 0.01, 2.0);
    let d = drive(0.3, 0.4, 0.05, 20.0);
    let r = oracle_spectrum(
        &two_level(),
        &d,
        &PolarizationGeometry::default(),
        &deltas,
        &RegressionOptions::default(),
    )
    .unwrap();
    let report = compare_report(&r.correlations, &engine(&two_level(), &d, &deltas), 1e-3).unwrap();
    assert!(
        report.pass,
        "max {:e} at {:?}",
        report.max, report.offending
    );
}

#[test]
fn toy_slice_matrices_match_engine() {
    let deltas = [0.05, 0.4, 1.3];
    let d = drive(1.0, 0.0, 0.01, 10.0);
    let scheme = toy();
    let r = oracle_spectrum(
        &scheme,
        &d,
        &PolarizationGeometry::default(),
        &deltas,
        &RegressionOptions::default(),
    )
    .unwrap();
    let p = PreparedPoint::new(
        &scheme,
        &d,
        &PolarizationGeometry::default(),
        &GeneratorOptions::default(),
    )
    .unwrap();
    for (i, &x) in deltas.iter().enumerate() {
        let e = p.response(x).unwrap();
        for s in 0..2 {
            let dk = (r.drift[i][s] - e.drift[s]).norm() / e.drift[s].norm();
            let dq = (r.noise[i][s] - e.noise[s]).norm() / e.noise[s].norm();
            assert!(dk < 1e-6 && dq < 1e-6, "δ={x}: drift {dk:e}, noise {dq:e}");
        }
    }
}

#[test]
fn halving_the_step_cap_does_not_move_the_result() {
    let deltas = grid(6, 0.05, 1.5);
    let d = drive(1.0, 0.0, 0.05, 10.0);
    let run = |max_step: f64| {
        let options = RegressionOptions {
            control: StepControl {
                max_step,
                ..StepControl::default()
            },
            ..RegressionOptions::default()
        };
        oracle_spectrum(
            &toy(),
            &d,
            &PolarizationGeometry::default(),
            &deltas,
            &options,
        )
        .unwrap()
    };
    let coarse = run(0.05);
    let fine = run(0.025);
    assert!(fine.diagnostics.steps.accepted > coarse.diagnostics.steps.accepted);
    let report = compare_report(&coarse.correlations, &fine.correlations, 1e-4).unwrap();
    assert!(report.pass, "max {:e}", report.max);
}

#[test]
fn short_horizon_is_reported() {
    let options = RegressionOptions {
        max_horizon: 50.0,
        ..RegressionOptions::default()
    };
    let err = oracle_spectrum(
        &toy(),
        &drive(1.0, 0.0, 0.01, 10.0),
        &PolarizationGeometry::default(),
        &[0.1],
        &options,
    )
    .unwrap_err();
    assert!(matches!(err, Error::HorizonTooShort(_)), "{err}");

    // ten e-foldings of the slowest mode cannot reach a 1e-12 residual
    let scheme = toy();
    let d = drive(1.0, 0.0, 0.01, 10.0);
    let geometry = PolarizationGeometry::default();
    let g = build_generator(&scheme, &d, &geometry, &GeneratorOptions::default()).unwrap();
    let rho = steady_state(&g).unwrap().rho;
    let vacuum = vacuum_operator(&scheme, &geometry, g.n);
    let options = RegressionOptions {
        horizon_decades: 0.1,
        min_horizon: 0.0,
        decay_tolerance: 1e-12,
        ..RegressionOptions::default()
    };
    let err = regression_spectrum(&g, &rho, &vacuum, 10.0, &[0.1], &options).unwrap_err();
    assert!(matches!(err, Error::HorizonTooShort(_)), "{err}");
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = [
        SidebandCorrelation::vacuum(0.1),
        SidebandCorrelation::vacuum(0.2),
    ];
    let b = [
        SidebandCorrelation::vacuum(0.1),
        SidebandCorrelation::vacuum(0.3),
    ];
    assert!(matches!(
        compare_report(&a, &b, 1e-3),
        Err(Error::GridMismatch(_))
    ));
    assert!(matches!(
        compare_report(&a, &b[..1], 1e-3),
        Err(Error::GridMismatch(_))
    ));
}
