//! Scan configuration, orchestration, and result persistence.

mod config;
mod run;
mod stitch;
mod table;

pub use config::{
    DopplerSpec, DriveSpec, GridSpec, GridsSpec, OracleSpec, OutputSpec, PhysicsSpec, ScanKind,
    ScanSpec,
};
pub use run::{oracle_default_deltas, run_scan};
pub use stitch::stitch_manifolds;
pub use table::{
    emit_plotdata, read_csv, Coordinates, CsvRow, PlotFormat, ResultRow, ResultTable, RowValues,
    StitchBoundary, StitchInfo, TableMetadata, CSV_COLUMNS, STATUS_OK,
};
