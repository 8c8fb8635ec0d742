//! Browser bindings: single points and the two line scans of the noise
//! engine, for stationary atoms. Results are returned as JSON strings.

use psr_core::angular::{build_scheme, HyperfineConstants, PolarizationGeometry, Preset};
use psr_core::dynamics::{DriveConfig, GeneratorOptions};
use psr_core::noisespec::{PreparedPoint, QuadraturePoint};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2001;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    if !(1..=MAX_POINTS).contains(&steps) || !start.is_finite() || !stop.is_finite() {
        return Err(err(format!(
            "need 1..={MAX_POINTS} points on a finite range"
        )));
    }
    Ok(match steps {
        1 => vec![start],
        _ => (0..steps)
            .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
            .collect(),
    })
}

struct Setup {
    scheme: psr_core::angular::LevelScheme,
    geometry: PolarizationGeometry,
}

impl Setup {
    fn new(preset: &str) -> Result<Self, JsValue> {
        let preset: Preset = preset.parse().map_err(err)?;
        Ok(Setup {
            scheme: build_scheme(preset, &HyperfineConstants::default()).map_err(err)?,
            geometry: PolarizationGeometry::default(),
        })
    }

    fn prepare(&self, omega_f: f64, detuning: f64, gamma0: f64) -> psr_core::Result<PreparedPoint> {
        let drive = DriveConfig {
            omega_f,
            detuning,
            gamma0,
            ..DriveConfig::default()
        };
        PreparedPoint::new(
            &self.scheme,
            &drive,
            &self.geometry,
            &GeneratorOptions::default(),
        )
    }
}

fn point_json(x: f64, r: psr_core::Result<psr_core::noisespec::SidebandCorrelation>) -> Value {
    match r {
        Ok(c) => {
            let q = QuadraturePoint::from_correlation(&c);
            json!({
                "x": x,
                "s_min_db": q.s_min_db(),
                "s_max_db": q.s_max_db(),
                "theta_min": q.theta_min,
                "cn": c.cn,
                "ca_abs": c.ca.norm(),
            })
        }
        Err(e) => json!({ "x": x, "error": e.code(), "message": e.to_string() }),
    }
}

/// Quadrature extrema at one drive and sideband frequency.
#[wasm_bindgen]
pub fn spectrum_point(
    preset: &str,
    omega_f: f64,
    detuning: f64,
    gamma0: f64,
    cooperativity: f64,
    delta: f64,
) -> Result<String, JsValue> {
    let setup = Setup::new(preset)?;
    let r = setup
        .prepare(omega_f, detuning, gamma0)
        .and_then(|p| p.correlation(cooperativity, delta));
    Ok(point_json(delta, r).to_string())
}

/// Extrema versus pump detuning at fixed sideband frequency.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn detuning_scan(
    preset: &str,
    omega_f: f64,
    gamma0: f64,
    cooperativity: f64,
    delta: f64,
    start: f64,
    stop: f64,
    steps: usize,
) -> Result<String, JsValue> {
    let setup = Setup::new(preset)?;
    let rows: Vec<Value> = grid(start, stop, steps)?
        .into_iter()
        .map(|d| {
            let r = setup
                .prepare(omega_f, d, gamma0)
                .and_then(|p| p.correlation(cooperativity, delta));
            point_json(d, r)
        })
        .collect();
    Ok(Value::Array(rows).to_string())
}

/// Extrema versus sideband frequency at fixed drive.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn noise_scan(
    preset: &str,
    omega_f: f64,
    detuning: f64,
    gamma0: f64,
    cooperativity: f64,
    start: f64,
    stop: f64,
    steps: usize,
) -> Result<String, JsValue> {
    let setup = Setup::new(preset)?;
    let deltas = grid(start, stop, steps)?;
    let rows: Vec<Value> = match setup.prepare(omega_f, detuning, gamma0) {
        Ok(p) => deltas
            .iter()
            .map(|&d| point_json(d, p.correlation(cooperativity, d)))
            .collect(),
        Err(e) => deltas
            .iter()
            .map(|&d| json!({ "x": d, "error": e.code(), "message": e.to_string() }))
            .collect(),
    };
    Ok(Value::Array(rows).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shot_noise_at_zero_cooperativity() {
        let v: Value = serde_json::from_str(
            &spectrum_point("four-level-toy", 1.0, 0.0, 0.01, 0.0, 0.3).unwrap(),
        )
        .unwrap();
        assert_eq!(v["s_min_db"], 0.0);
        assert_eq!(v["s_max_db"], 0.0);
    }

    #[test]
    fn scans_have_requested_length() {
        let v: Value = serde_json::from_str(
            &noise_scan("rb87-d1-Fg2", 30.0, 0.0, 0.01, 100.0, 0.05, 1.0, 7).unwrap(),
        )
        .unwrap();
        assert_eq!(v.as_array().unwrap().len(), 7);
        let v: Value = serde_json::from_str(
            &detuning_scan("four-level-toy", 1.0, 0.01, 10.0, 0.2, -5.0, 5.0, 5).unwrap(),
        )
        .unwrap();
        assert_eq!(v.as_array().unwrap().len(), 5);
    }
}
