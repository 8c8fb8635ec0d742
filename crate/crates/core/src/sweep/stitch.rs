//! Joining the two ground-manifold scans into one absolute frequency axis.

use crate::angular::HyperfineConstants;
use crate::error::{Error, Result};

use super::table::{ResultRow, ResultTable, StitchBoundary, StitchInfo, TableMetadata};

/// Coordinates other than the detuning; both tables must share them.
fn shape_key(r: &ResultRow) -> [u64; 5] {
    let c = &r.coords;
    [c.delta, c.omega_f, c.cooperativity, c.gamma0, c.doppler].map(f64::to_bits)
}

fn keys(t: &ResultTable) -> Vec<[u64; 5]> {
    let mut k: Vec<[u64; 5]> = t.rows.iter().map(shape_key).collect();
    k.sort_unstable();
    k.dedup();
    k
}

/// Concatenate two per-manifold scans on the absolute axis (laser frequency
/// measured from the `F=2 → F'=1` line). Each table must lie entirely on
/// its side of the split at the middle of the ground hyperfine gap,
/// `(ground + excited splitting) / 2`, and both must share the non-detuning
/// coordinates.
pub fn stitch_manifolds(
    a: &ResultTable,
    b: &ResultTable,
    constants: &HyperfineConstants,
) -> Result<ResultTable> {
    let split = 0.5 * (constants.ground_splitting + constants.excited_splitting);
    let absolute = |t: &ResultTable| -> Vec<ResultRow> {
        t.rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.coords.detuning += t.metadata.reference_line;
                r
            })
            .collect()
    };
    let (ra, rb) = (absolute(a), absolute(b));
    if ra.is_empty() || rb.is_empty() {
        return Err(Error::Table("cannot stitch an empty table".into()));
    }
    let side = |rows: &[ResultRow]| -> Option<bool> {
        if rows.iter().all(|r| r.coords.detuning < split) {
            Some(false)
        } else if rows.iter().all(|r| r.coords.detuning >= split) {
            Some(true)
        } else {
            None
        }
    };
    let (lower, upper, lower_t, upper_t) = match (side(&ra), side(&rb)) {
        (Some(false), Some(true)) => (ra, rb, a, b),
        (Some(true), Some(false)) => (rb, ra, b, a),
        _ => {
            return Err(Error::Table(format!(
                "scans overlap on the absolute axis; each must lie on one side of {split:.3} Γ"
            )))
        }
    };
    if keys(a) != keys(b) {
        return Err(Error::Table(
            "scans are misaligned: δ / Ω / C / γ₀ / Doppler coordinates differ".into(),
        ));
    }

    let boundaries = keys(a)
        .iter()
        .map(|k| {
            let last = lower
                .iter()
                .filter(|r| shape_key(r) == *k)
                .max_by(|x, y| x.coords.detuning.total_cmp(&y.coords.detuning))
                .expect("key present");
            let first = upper
                .iter()
                .filter(|r| shape_key(r) == *k)
                .min_by(|x, y| x.coords.detuning.total_cmp(&y.coords.detuning))
                .expect("key present");
            let jump = |f: fn(&super::table::RowValues) -> f64| match (&last.values, &first.values)
            {
                (Some(l), Some(u)) => Some(f(u) - f(l)),
                _ => None,
            };
            StitchBoundary {
                delta: last.coords.delta,
                omega_f: last.coords.omega_f,
                cooperativity: last.coords.cooperativity,
                lower_last_detuning: last.coords.detuning,
                upper_first_detuning: first.coords.detuning,
                s_min_db_jump: jump(|v| v.s_min_db),
                s_max_db_jump: jump(|v| v.s_max_db),
            }
        })
        .collect();

    let mut metadata = TableMetadata::new(
        "stitched",
        &format!("{}+{}", lower_t.metadata.scheme, upper_t.metadata.scheme),
        "F=2->F'=1",
        0.0,
    );
    metadata.config = Some(serde_json::json!({
        "lower": lower_t.metadata.config,
        "upper": upper_t.metadata.config,
    }));
    metadata.stitch = Some(StitchInfo {
        split,
        lower_scheme: lower_t.metadata.scheme.clone(),
        upper_scheme: upper_t.metadata.scheme.clone(),
        boundaries,
    });
    let mut rows = lower;
    rows.extend(upper);
    Ok(ResultTable { metadata, rows })
}
