//! Scan orchestration with per-row error isolation.
//!
//! Rows are computed independently and collected in grid order, so the
//! output does not depend on the number of worker threads (the caller
//! chooses the thread pool).

use crate::angular::{LevelScheme, PolarizationGeometry};
use crate::dynamics::{DriveConfig, GeneratorOptions};
use crate::ensemble::{doppler_scan_responses, mix_responses, node_responses, VelocityEnsemble};
use crate::error::{Error, Result};
use crate::noisespec::{sideband_from_response, PreparedPoint, SliceResponse};
use crate::oracle::{compare_report, oracle_spectrum};

use super::config::{ScanKind, ScanSpec};
use super::table::{Coordinates, ResultRow, ResultTable, TableMetadata};

/// Default δ grid of the oracle check: 40 points over `[0.01, 2]`.
pub fn oracle_default_deltas() -> Vec<f64> {
    (0..40)
        .map(|k| 0.01 + (2.0 - 0.01) * k as f64 / 39.0)
        .collect()
}

/// Per-unit-cooperativity slice responses of one drive on a δ grid.
fn slice_responses(
    scheme: &LevelScheme,
    drive: &DriveConfig,
    geometry: &PolarizationGeometry,
    ensemble: Option<&VelocityEnsemble>,
    deltas: &[f64],
) -> Result<Vec<SliceResponse>> {
    match ensemble {
        None => {
            let point = PreparedPoint::new(scheme, drive, geometry, &GeneratorOptions::default())?;
            deltas.iter().map(|&d| point.response(d)).collect()
        }
        Some(ens) => {
            let per_node = node_responses(scheme, drive, geometry, ens, deltas)?;
            let views: Vec<&[SliceResponse]> = per_node.iter().map(|r| r.as_slice()).collect();
            mix_responses(&views, ens)
        }
    }
}

struct Context {
    scheme: LevelScheme,
    geometry: PolarizationGeometry,
    ensemble: Option<VelocityEnsemble>,
    doppler: f64,
}

impl Context {
    fn coords(&self, drive: &DriveConfig, delta: f64) -> Coordinates {
        Coordinates {
            detuning: drive.detuning,
            delta,
            omega_f: drive.omega_f,
            cooperativity: drive.cooperativity,
            gamma0: drive.gamma0,
            doppler: self.doppler,
        }
    }

    /// Rows for one drive over δ and cooperativity lists (δ fastest).
    fn rows(
        &self,
        drive: &DriveConfig,
        deltas: &[f64],
        coops: &[f64],
        responses: &Result<Vec<SliceResponse>>,
    ) -> Vec<ResultRow> {
        let mut rows = Vec::with_capacity(deltas.len() * coops.len());
        for &c in coops {
            let d = DriveConfig {
                cooperativity: c,
                ..drive.clone()
            };
            for (k, &delta) in deltas.iter().enumerate() {
                let coords = self.coords(&d, delta);
                let row = match responses {
                    Ok(r) => ResultRow::new(coords, &sideband_from_response(&r[k], c)),
                    Err(e) => ResultRow::failed(coords, e),
                };
                rows.push(row);
            }
        }
        rows
    }

    fn responses(&self, drive: &DriveConfig, deltas: &[f64]) -> Result<Vec<SliceResponse>> {
        slice_responses(
            &self.scheme,
            drive,
            &self.geometry,
            self.ensemble.as_ref(),
            deltas,
        )
    }
}

fn kind_name(kind: ScanKind) -> &'static str {
    match kind {
        ScanKind::SinglePoint => "single-point",
        ScanKind::Detuning => "detuning",
        ScanKind::NoiseFrequency => "noise-frequency",
        ScanKind::PowerDensity2d => "power-density-2d",
        ScanKind::OracleCheck => "oracle-check",
    }
}

/// Evaluate a scan. Engine failures become rows with an error status;
/// configuration problems are returned as errors.
pub fn run_scan(spec: &ScanSpec) -> Result<ResultTable> {
    spec.validate()?;
    let scheme = spec.build_scheme()?;
    let drive = spec.drive.drive();
    let reference = drive
        .reference
        .clone()
        .unwrap_or_else(|| scheme.default_reference.clone());
    let reference_line = scheme
        .line_frequency(&reference)
        .map_err(|e| Error::Config(e.to_string()))?;
    let ensemble = if spec.kind == ScanKind::OracleCheck {
        None
    } else {
        spec.doppler.ensemble(spec.physics.gamma_mhz)?
    };
    let ctx = Context {
        doppler: ensemble.as_ref().map_or(0.0, |e| e.width),
        scheme,
        geometry: spec.geometry(),
        ensemble,
    };

    let mut metadata = TableMetadata::new(
        kind_name(spec.kind),
        &ctx.scheme.name,
        &reference.to_string(),
        reference_line,
    );
    metadata.config = Some(serde_json::to_value(spec).map_err(|e| Error::Config(e.to_string()))?);

    let rows = match spec.kind {
        ScanKind::SinglePoint => {
            let deltas = spec.deltas()?;
            ctx.rows(
                &drive,
                &deltas,
                &[drive.cooperativity],
                &ctx.responses(&drive, &deltas),
            )
        }
        ScanKind::NoiseFrequency => {
            let deltas = spec.deltas()?;
            ctx.rows(
                &drive,
                &deltas,
                &[drive.cooperativity],
                &ctx.responses(&drive, &deltas),
            )
        }
        ScanKind::Detuning => {
            let detunings = spec
                .grid
                .detuning
                .as_ref()
                .expect("validated")
                .validate("detuning")?;
            let deltas = spec.deltas()?;
            let drives: Vec<DriveConfig> = detunings
                .iter()
                .map(|&d| DriveConfig {
                    detuning: d,
                    ..drive.clone()
                })
                .collect();
            let responses: Vec<Result<Vec<SliceResponse>>> = match &ctx.ensemble {
                // share single-atom responses between detunings
                Some(ens) => doppler_scan_responses(
                    &ctx.scheme,
                    &drive,
                    &ctx.geometry,
                    ens,
                    &detunings,
                    &deltas,
                ),
                None => crate::map_maybe_parallel(&drives, |d| ctx.responses(d, &deltas)),
            };
            drives
                .iter()
                .zip(&responses)
                .flat_map(|(d, r)| ctx.rows(d, &deltas, &[d.cooperativity], r))
                .collect()
        }
        ScanKind::PowerDensity2d => {
            let omegas = spec
                .grid
                .omega_f
                .as_ref()
                .expect("validated")
                .validate("omega_f")?;
            let coops = spec
                .grid
                .cooperativity
                .as_ref()
                .expect("validated")
                .validate("cooperativity")?;
            let deltas = spec.deltas()?;
            let drives: Vec<DriveConfig> = omegas
                .iter()
                .map(|&w| DriveConfig {
                    omega_f: w,
                    ..drive.clone()
                })
                .collect();
            // one preparation per Ω; every cooperativity reuses the slice response
            let responses: Vec<Result<Vec<SliceResponse>>> = match ctx.ensemble {
                Some(_) => drives.iter().map(|d| ctx.responses(d, &deltas)).collect(),
                None => crate::map_maybe_parallel(&drives, |d| ctx.responses(d, &deltas)),
            };
            drives
                .iter()
                .zip(&responses)
                .flat_map(|(d, r)| ctx.rows(d, &deltas, &coops, r))
                .collect()
        }
        ScanKind::OracleCheck => {
            let deltas = match &spec.grid.delta {
                Some(g) => g.validate("delta")?,
                None => oracle_default_deltas(),
            };
            let responses = ctx.responses(&drive, &deltas);
            let mut rows = ctx.rows(&drive, &deltas, &[drive.cooperativity], &responses);
            let oracle = oracle_spectrum(
                &ctx.scheme,
                &drive,
                &ctx.geometry,
                &deltas,
                &spec.oracle.options(),
            );
            let engine: Result<Vec<_>> = responses.and_then(|r| {
                r.iter()
                    .map(|s| sideband_from_response(s, drive.cooperativity))
                    .collect()
            });
            match (oracle, engine) {
                (Ok(o), Ok(e)) => {
                    let report = compare_report(&o.correlations, &e, spec.oracle.tolerance)?;
                    for (row, dev) in rows.iter_mut().zip(&report.rows) {
                        if !(dev.worst() <= report.tolerance) {
                            row.status = "oracle_mismatch".into();
                            row.message = Some(format!("oracle deviation {:.3e}", dev.worst()));
                        }
                    }
                    metadata.oracle = Some(report);
                }
                (Err(e), _) => {
                    for row in rows.iter_mut().filter(|r| r.is_ok()) {
                        row.status = e.code().into();
                        row.message = Some(format!("oracle: {e}"));
                    }
                }
                (Ok(_), Err(_)) => {}
            }
            rows
        }
    };
    Ok(ResultTable { metadata, rows })
}
