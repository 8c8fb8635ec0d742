//! `psr`: squeezing and excess-noise spectra of the vacuum polarization
//! after a pumped atomic vapor.
//!
//! Exit status: 0 success, 1 some rows failed, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psr_core::sweep::{
    emit_plotdata, run_scan, stitch_manifolds, PlotFormat, ResultTable, ScanKind, ScanSpec,
};
use psr_core::Error;

#[derive(Parser)]
#[command(
    name = "psr",
    version,
    about = "Quadrature noise spectra of the vacuum polarization after a pumped vapor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One drive, one or more sideband frequencies.
    Point(ScanArgs),
    /// Scan the pump detuning.
    ScanDetuning(ScanArgs),
    /// Scan the noise sideband frequency.
    ScanNoiseFreq(ScanArgs),
    /// Map over Rabi frequency × cooperativity.
    #[command(name = "scan-2d")]
    Scan2d(ScanArgs),
    /// Join an F=1 and an F=2 detuning scan (JSON tables) on one absolute axis.
    Stitch(StitchArgs),
    /// Compare the engine against the time-domain regression oracle.
    OracleCheck(ScanArgs),
}

/// `start:stop:steps`
fn range(s: &str) -> Result<String, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, steps] = parts[..] else {
        return Err(format!("`{s}` must look like start:stop:steps"));
    };
    let f = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let n = steps
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("`{steps}`: {e}"))?;
    Ok(format!(
        "{{start={:?},stop={:?},steps={n}}}",
        f(start)?,
        f(stop)?
    ))
}

#[derive(Args, Clone, Default)]
struct ScanArgs {
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set drive.omega_f=10` (repeatable, applied last).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Scheme preset (rb87-d1-Fg1, rb87-d1-Fg2, rb87-d1-Fg{1,2}-Fe{1,2}, four-level-toy).
    #[arg(long)]
    scheme: Option<String>,
    /// Custom scheme TOML file.
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// Reduced Rabi frequency Ω_f in Γ.
    #[arg(long)]
    omega: Option<f64>,
    /// Pump detuning Δ in Γ from the reference transition.
    #[arg(long, allow_negative_numbers = true)]
    detuning: Option<f64>,
    /// Reference transition, e.g. "F=1->F'=1".
    #[arg(long)]
    reference: Option<String>,
    /// Noise sideband frequency δ in Γ.
    #[arg(long)]
    delta: Option<f64>,
    /// Ground-state decoherence γ₀ in Γ.
    #[arg(long)]
    gamma0: Option<f64>,
    /// Cooperativity C.
    #[arg(short = 'C', long)]
    cooperativity: Option<f64>,
    /// Detuning grid `start:stop:steps`.
    #[arg(long, value_parser = range, allow_hyphen_values = true)]
    detunings: Option<String>,
    /// Sideband frequency grid `start:stop:steps`.
    #[arg(long, value_parser = range, allow_hyphen_values = true)]
    deltas: Option<String>,
    /// Rabi frequency grid `start:stop:steps`.
    #[arg(long, value_parser = range, allow_hyphen_values = true)]
    omegas: Option<String>,
    /// Cooperativity grid `start:stop:steps`.
    #[arg(long, value_parser = range, allow_hyphen_values = true)]
    cooperativities: Option<String>,
    /// Average over the thermal velocity distribution.
    #[arg(long)]
    doppler: bool,
    /// Number of velocity classes.
    #[arg(long)]
    classes: Option<usize>,
    /// Worker threads (0 = all cores); the output does not depend on it.
    #[arg(short = 'j', long)]
    workers: Option<usize>,
    /// CSV output path (CSV goes to stdout when neither output is given).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON output path (rows plus run metadata).
    #[arg(long)]
    json: Option<PathBuf>,
}

impl ScanArgs {
    fn overrides(&self, kind: ScanKind) -> Vec<String> {
        let kind = match kind {
            ScanKind::SinglePoint => "single-point",
            ScanKind::Detuning => "detuning",
            ScanKind::NoiseFrequency => "noise-frequency",
            ScanKind::PowerDensity2d => "power-density-2d",
            ScanKind::OracleCheck => "oracle-check",
        };
        let quote = |s: &str| format!("{s:?}");
        let mut o = vec![format!("kind={}", quote(kind))];
        let mut push = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push(format!("{key}={v}"));
            }
        };
        push("scheme", self.scheme.as_deref().map(quote));
        push(
            "scheme_file",
            self.scheme_file
                .as_ref()
                .map(|p| quote(&p.display().to_string())),
        );
        push("drive.omega_f", self.omega.map(|x| format!("{x:?}")));
        push("drive.detuning", self.detuning.map(|x| format!("{x:?}")));
        push("drive.reference", self.reference.as_deref().map(quote));
        push("drive.delta", self.delta.map(|x| format!("{x:?}")));
        push("drive.gamma0", self.gamma0.map(|x| format!("{x:?}")));
        push(
            "drive.cooperativity",
            self.cooperativity.map(|x| format!("{x:?}")),
        );
        push("grid.detuning", self.detunings.clone());
        push("grid.delta", self.deltas.clone());
        push("grid.omega_f", self.omegas.clone());
        push("grid.cooperativity", self.cooperativities.clone());
        push("doppler.enabled", self.doppler.then(|| "true".into()));
        push("doppler.classes", self.classes.map(|x| x.to_string()));
        push("workers", self.workers.map(|x| x.to_string()));
        push(
            "output.csv",
            self.csv.as_ref().map(|p| quote(&p.display().to_string())),
        );
        push(
            "output.json",
            self.json.as_ref().map(|p| quote(&p.display().to_string())),
        );
        o.extend(self.set.iter().cloned());
        o
    }

    fn spec(&self, kind: ScanKind) -> psr_core::Result<ScanSpec> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
            None => String::new(),
        };
        ScanSpec::from_toml_with_overrides(&text, &self.overrides(kind))
    }
}

#[derive(Args)]
struct StitchArgs {
    /// Two JSON result tables of detuning scans (one per ground manifold).
    #[arg(num_args = 2, required = true)]
    tables: Vec<PathBuf>,
    /// TOML configuration supplying the physics constants.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Rows(String),
}

fn write_outputs(
    table: &ResultTable,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut targets = Vec::new();
    if let Some(p) = csv {
        targets.push((PlotFormat::Csv, p));
    }
    if let Some(p) = json {
        targets.push((PlotFormat::Json, p));
    }
    if targets.is_empty() {
        let text = table
            .to_csv_string()
            .map_err(|e| Failure::Config(e.to_string()))?;
        print!("{text}");
        return Ok(());
    }
    emit_plotdata(table, &targets).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(())
}

fn summarize(table: &ResultTable) -> Result<(), Failure> {
    if let Some(report) = &table.metadata.oracle {
        eprintln!(
            "oracle: max deviation {:.3e}, rms {:.3e}, tolerance {:.1e} -> {}",
            report.max,
            report.rms,
            report.tolerance,
            if report.pass { "pass" } else { "FAIL" }
        );
        if !report.offending.is_empty() {
            eprintln!("oracle: offending delta values {:?}", report.offending);
        }
    }
    let failed = table.failed_rows();
    if failed > 0 {
        let mut codes: Vec<&str> = table
            .rows
            .iter()
            .filter(|r| !r.is_ok())
            .map(|r| r.status.as_str())
            .collect();
        codes.sort_unstable();
        codes.dedup();
        return Err(Failure::Rows(format!(
            "{failed} of {} rows failed ({})",
            table.rows.len(),
            codes.join(", ")
        )));
    }
    Ok(())
}

fn scan(args: &ScanArgs, kind: ScanKind) -> Result<(), Failure> {
    let spec = args
        .spec(kind)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    let table = pool
        .install(|| run_scan(&spec))
        .map_err(|e| Failure::Config(e.to_string()))?;
    write_outputs(&table, spec.output.csv.clone(), spec.output.json.clone())?;
    summarize(&table)
}

fn stitch(args: &StitchArgs) -> Result<(), Failure> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let spec = ScanSpec::from_toml_with_overrides(&text, &args.set)
        .map_err(|e| Failure::Config(e.to_string()))?;
    let constants = spec
        .physics
        .constants()
        .map_err(|e| Failure::Config(e.to_string()))?;
    let load = |p: &PathBuf| {
        ResultTable::load_json(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
    };
    let a = load(&args.tables[0])?;
    let b = load(&args.tables[1])?;
    let table = stitch_manifolds(&a, &b, &constants).map_err(|e| Failure::Config(e.to_string()))?;
    write_outputs(&table, args.csv.clone(), args.json.clone())?;
    summarize(&table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Point(a) => scan(a, ScanKind::SinglePoint),
        Command::ScanDetuning(a) => scan(a, ScanKind::Detuning),
        Command::ScanNoiseFreq(a) => scan(a, ScanKind::NoiseFrequency),
        Command::Scan2d(a) => scan(a, ScanKind::PowerDensity2d),
        Command::OracleCheck(a) => scan(a, ScanKind::OracleCheck),
        Command::Stitch(a) => stitch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rows(msg)) => {
            eprintln!("psr: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("psr: {msg}");
            ExitCode::from(2)
        }
    }
}
