use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noisespec::SidebandCorrelation;

/// Values below this are treated as zero when forming relative deviations.
const ABS_FLOOR: f64 = 1e-14;

/// Deviations at one sideband frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub delta: f64,
    /// `|ΔC_N| / max(|C_N|)`
    pub cn: f64,
    /// `|Δ|C_A|| / max(|C_A|)`
    pub ca_abs: f64,
    /// Wrapped phase difference of `C_A` in radians.
    pub ca_arg: f64,
    /// `|ΔC_A| / max(|C_A|)` as complex numbers.
    pub ca: f64,
}

impl Deviation {
    /// Largest of the deviations.
    pub fn worst(&self) -> f64 {
        self.cn.max(self.ca_abs).max(self.ca_arg).max(self.ca)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub tolerance: f64,
    pub rows: Vec<Deviation>,
    pub max: f64,
    pub rms: f64,
    pub pass: bool,
    /// Sideband frequencies where some deviation exceeds the tolerance.
    pub offending: Vec<f64>,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < ABS_FLOOR {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compare oracle output against engine output on the same δ grid.
pub fn compare_report(
    oracle: &[SidebandCorrelation],
    engine: &[SidebandCorrelation],
    tolerance: f64,
) -> Result<CompareReport> {
    if oracle.len() != engine.len() {
        return Err(Error::GridMismatch(format!(
            "{} oracle points vs {} engine points",
            oracle.len(),
            engine.len()
        )));
    }
    let mut rows = Vec::with_capacity(oracle.len());
    for (o, e) in oracle.iter().zip(engine) {
        if (o.delta - e.delta).abs() > 1e-12 * o.delta.abs().max(1.0) {
            return Err(Error::GridMismatch(format!(
                "delta {} vs {}",
                o.delta, e.delta
            )));
        }
        let ca_scale = o.ca.norm().max(e.ca.norm());
        let (ca, ca_arg) = if ca_scale < ABS_FLOOR {
            (0.0, 0.0)
        } else {
            let d = (o.ca.arg() - e.ca.arg()).rem_euclid(2.0 * PI);
            ((o.ca - e.ca).norm() / ca_scale, d.min(2.0 * PI - d))
        };
        rows.push(Deviation {
            delta: o.delta,
            cn: relative(o.cn, e.cn),
            ca_abs: relative(o.ca.norm(), e.ca.norm()),
            ca_arg,
            ca,
        });
    }
    let max = rows.iter().map(Deviation::worst).fold(0.0, f64::max);
    let rms = if rows.is_empty() {
        0.0
    } else {
        (rows.iter().map(|r| r.worst().powi(2)).sum::<f64>() / rows.len() as f64).sqrt()
    };
    let offending: Vec<f64> = rows
        .iter()
        .filter(|r| !(r.worst() <= tolerance))
        .map(|r| r.delta)
        .collect();
    Ok(CompareReport {
        tolerance,
        pass: offending.is_empty(),
        rows,
        max,
        rms,
        offending,
    })
}
