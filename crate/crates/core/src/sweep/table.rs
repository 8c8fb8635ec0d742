//! Result rows, run metadata, and CSV / JSON persistence.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noisespec::{to_db, QuadraturePoint, SidebandCorrelation};
use crate::oracle::CompareReport;

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 13] = [
    "detuning_Gamma",
    "delta_Gamma",
    "Omega_f_Gamma",
    "C",
    "gamma0_Gamma",
    "doppler",
    "S_min_dB",
    "S_max_dB",
    "theta_min_rad",
    "CN",
    "CA_abs",
    "CA_arg",
    "status",
];

pub const STATUS_OK: &str = "ok";

/// Scan coordinates of one row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub detuning: f64,
    pub delta: f64,
    pub omega_f: f64,
    pub cooperativity: f64,
    pub gamma0: f64,
    /// Doppler width in Γ; 0 for stationary atoms.
    pub doppler: f64,
}

/// Spectrum values of one successful row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowValues {
    pub s_min: f64,
    pub s_max: f64,
    pub s_min_db: f64,
    pub s_max_db: f64,
    pub theta_min: f64,
    pub cn: f64,
    pub ca_abs: f64,
    pub ca_arg: f64,
    pub commutator_error: f64,
}

impl RowValues {
    pub fn from_correlation(c: &SidebandCorrelation) -> Self {
        let q = QuadraturePoint::from_correlation(c);
        RowValues {
            s_min: q.s_min,
            s_max: q.s_max,
            s_min_db: to_db(q.s_min),
            s_max_db: to_db(q.s_max),
            theta_min: q.theta_min,
            cn: c.cn,
            ca_abs: c.ca.norm(),
            ca_arg: c.ca.arg(),
            commutator_error: c.commutator_error(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(flatten)]
    pub coords: Coordinates,
    /// `ok` or an error code.
    pub status: String,
    pub values: Option<RowValues>,
    /// Error message of a failed row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ResultRow {
    pub fn new(coords: Coordinates, result: &Result<SidebandCorrelation>) -> Self {
        match result {
            Ok(c) => ResultRow {
                coords,
                status: STATUS_OK.into(),
                values: Some(RowValues::from_correlation(c)),
                message: None,
            },
            Err(e) => ResultRow::failed(coords, e),
        }
    }

    pub fn failed(coords: Coordinates, e: &Error) -> Self {
        ResultRow {
            coords,
            status: e.code().into(),
            values: None,
            message: Some(e.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

/// Boundary of a stitched table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StitchBoundary {
    pub delta: f64,
    pub omega_f: f64,
    pub cooperativity: f64,
    pub lower_last_detuning: f64,
    pub upper_first_detuning: f64,
    /// Jumps across the boundary (upper minus lower); `None` if a side failed.
    pub s_min_db_jump: Option<f64>,
    pub s_max_db_jump: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StitchInfo {
    /// Split point on the absolute axis, in Γ.
    pub split: f64,
    pub lower_scheme: String,
    pub upper_scheme: String,
    pub boundaries: Vec<StitchBoundary>,
}

/// Everything needed to reproduce a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub engine: String,
    pub version: String,
    /// RFC 3339 UTC time of the run.
    pub timestamp: String,
    pub kind: String,
    pub scheme: String,
    /// Transition the detuning axis is measured from.
    pub reference: String,
    /// Frequency of the reference transition on the scheme's absolute axis
    /// (the `F=2 → F'=1` line of the ⁸⁷Rb presets sits at 0), in Γ.
    pub reference_line: f64,
    /// The resolved configuration of the run.
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<CompareReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stitch: Option<StitchInfo>,
}

impl TableMetadata {
    pub fn new(kind: &str, scheme: &str, reference: &str, reference_line: f64) -> Self {
        TableMetadata {
            engine: "psr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string(),
            kind: kind.into(),
            scheme: scheme.into(),
            reference: reference.into(),
            reference_line,
            config: None,
            oracle: None,
            stitch: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: TableMetadata,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// CSV with the fixed column set; floats in shortest round-trip form,
    /// empty value fields on failed rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let table_err = |e: csv::Error| Error::Table(e.to_string());
        w.write_record(CSV_COLUMNS).map_err(table_err)?;
        for r in &self.rows {
            let c = &r.coords;
            let mut rec: Vec<String> = [
                c.detuning,
                c.delta,
                c.omega_f,
                c.cooperativity,
                c.gamma0,
                c.doppler,
            ]
            .iter()
            .map(|x| x.to_string())
            .collect();
            match &r.values {
                Some(v) => rec.extend(
                    [
                        v.s_min_db,
                        v.s_max_db,
                        v.theta_min,
                        v.cn,
                        v.ca_abs,
                        v.ca_arg,
                    ]
                    .iter()
                    .map(|x| x.to_string()),
                ),
                None => rec.extend(std::iter::repeat_n(String::new(), 6)),
            }
            rec.push(r.status.clone());
            w.write_record(&rec).map_err(table_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Table(e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Table(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Table(format!("result table JSON: {e}")))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub coords: Coordinates,
    /// `S_min_dB, S_max_dB, theta_min_rad, CN, CA_abs, CA_arg`, absent on failed rows.
    pub values: Option<[f64; 6]>,
    pub status: String,
}

/// Parse a CSV written by [`ResultTable::write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let table_err = |e: csv::Error| Error::Table(e.to_string());
    let header = rdr.headers().map_err(table_err)?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Table(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::Table(format!("bad number `{s}`: {e}")))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(table_err)?;
        let f: Vec<&str> = rec.iter().collect();
        let coords = Coordinates {
            detuning: num(f[0])?,
            delta: num(f[1])?,
            omega_f: num(f[2])?,
            cooperativity: num(f[3])?,
            gamma0: num(f[4])?,
            doppler: num(f[5])?,
        };
        let values = if f[6..12].iter().all(|s| s.is_empty()) {
            None
        } else {
            let mut v = [0.0; 6];
            for (slot, s) in v.iter_mut().zip(&f[6..12]) {
                *slot = num(s)?;
            }
            Some(v)
        };
        rows.push(CsvRow {
            coords,
            values,
            status: f[12].to_string(),
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotFormat {
    Csv,
    Json,
}

/// Write the table as plot data; returns the files written.
pub fn emit_plotdata(
    table: &ResultTable,
    targets: &[(PlotFormat, PathBuf)],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (format, path) in targets {
        let text = match format {
            PlotFormat::Csv => table.to_csv_string()?,
            PlotFormat::Json => table.to_json_string()? + "\n",
        };
        std::fs::write(path, text).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        written.push(path.clone());
    }
    Ok(written)
}
