//! Scan configuration, read from TOML with dotted-key overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::angular::{
    build_scheme, CustomSchemeSpec, HyperfineConstants, LevelScheme, PolarizationGeometry, Preset,
    Transition, DEFAULT_GAMMA_MHZ, RB87_D1_EXCITED_SPLITTING_MHZ, RB87_GROUND_SPLITTING_MHZ,
};
use crate::dynamics::{DriveConfig, LossChannel};
use crate::ensemble::{
    doppler_width, velocity_grid_with_resolution, CooperativityShare, VelocityEnsemble,
    DEFAULT_RESOLUTION, RB87_D1_WAVELENGTH_NM, RB87_MASS_AMU,
};
use crate::error::{Error, Result};
use crate::oracle::{RegressionOptions, StepControl};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanKind {
    #[default]
    SinglePoint,
    Detuning,
    NoiseFrequency,
    #[serde(rename = "power-density-2d")]
    PowerDensity2d,
    OracleCheck,
}

/// A one-dimensional grid: `{ start, stop, steps }` (inclusive, evenly
/// spaced), `{ values = [...] }` or a bare list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Range { start: f64, stop: f64, steps: usize },
    List { values: Vec<f64> },
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::List { values } | GridSpec::Values(values) => values.clone(),
            GridSpec::Range { start, stop, steps } => match steps {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*steps)
                    .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
                    .collect(),
            },
        }
    }

    /// Non-empty, finite and strictly monotone.
    pub fn validate(&self, name: &str) -> Result<Vec<f64>> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::Config(format!("grid `{name}` is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "grid `{name}` has non-finite values"
            )));
        }
        let up = v.windows(2).all(|w| w[1] > w[0]);
        let down = v.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config(format!(
                "grid `{name}` must be strictly monotone"
            )));
        }
        Ok(v)
    }
}

/// Physical constants; every default is listed in the config template.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSpec {
    /// Γ/2π in MHz, the unit of every frequency.
    pub gamma_mhz: f64,
    pub ground_splitting_mhz: f64,
    pub excited_splitting_mhz: f64,
    pub nuclear_spin: f64,
    /// Excited-state splitting of the four-level toy, in Γ.
    pub toy_splitting: f64,
}

impl Default for PhysicsSpec {
    fn default() -> Self {
        PhysicsSpec {
            gamma_mhz: DEFAULT_GAMMA_MHZ,
            ground_splitting_mhz: RB87_GROUND_SPLITTING_MHZ,
            excited_splitting_mhz: RB87_D1_EXCITED_SPLITTING_MHZ,
            nuclear_spin: 1.5,
            toy_splitting: 50.0,
        }
    }
}

impl PhysicsSpec {
    pub fn constants(&self) -> Result<HyperfineConstants> {
        let vals = [
            self.gamma_mhz,
            self.ground_splitting_mhz,
            self.excited_splitting_mhz,
            self.nuclear_spin,
            self.toy_splitting,
        ];
        if vals.iter().any(|x| !x.is_finite()) || !(self.gamma_mhz > 0.0) {
            return Err(Error::Config(
                "physics constants must be finite and gamma_mhz > 0".into(),
            ));
        }
        Ok(HyperfineConstants {
            ground_splitting: self.ground_splitting_mhz / self.gamma_mhz,
            excited_splitting: self.excited_splitting_mhz / self.gamma_mhz,
            nuclear_spin: self.nuclear_spin,
            toy_splitting: self.toy_splitting,
        })
    }
}

/// Drive defaults; scan grids override the scanned coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSpec {
    pub omega_f: f64,
    pub detuning: f64,
    pub reference: Option<Transition>,
    pub gamma0: f64,
    pub cooperativity: f64,
    pub loss_channel: LossChannel,
    /// Noise sideband frequency when it is not scanned.
    pub delta: f64,
    /// Pump polarization angle from `x` in radians.
    pub pump_angle: f64,
}

impl Default for DriveSpec {
    fn default() -> Self {
        DriveSpec {
            omega_f: 30.0,
            detuning: 0.0,
            reference: None,
            gamma0: 0.01,
            cooperativity: 100.0,
            loss_channel: LossChannel::Recycle,
            delta: 0.2,
            pump_angle: 0.0,
        }
    }
}

impl DriveSpec {
    pub fn drive(&self) -> DriveConfig {
        DriveConfig {
            omega_f: self.omega_f,
            detuning: self.detuning,
            reference: self.reference.clone(),
            gamma0: self.gamma0,
            cooperativity: self.cooperativity,
            loss_channel: self.loss_channel,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsSpec {
    pub detuning: Option<GridSpec>,
    pub delta: Option<GridSpec>,
    pub omega_f: Option<GridSpec>,
    pub cooperativity: Option<GridSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DopplerSpec {
    pub enabled: bool,
    pub temperature_c: f64,
    /// Doppler width `k σ_v` in Γ; computed from the temperature when absent.
    pub width: Option<f64>,
    pub mass_amu: f64,
    pub wavelength_nm: f64,
    pub classes: usize,
    /// Spacing of the velocity quadrature lattice in Γ.
    pub resolution: f64,
    pub share: CooperativityShare,
}

impl Default for DopplerSpec {
    fn default() -> Self {
        DopplerSpec {
            enabled: false,
            temperature_c: 59.0,
            width: None,
            mass_amu: RB87_MASS_AMU,
            wavelength_nm: RB87_D1_WAVELENGTH_NM,
            classes: 40,
            resolution: DEFAULT_RESOLUTION,
            share: CooperativityShare::Boltzmann,
        }
    }
}

impl DopplerSpec {
    pub fn resolved_width(&self, gamma_mhz: f64) -> f64 {
        self.width.unwrap_or_else(|| {
            doppler_width(
                self.temperature_c,
                self.wavelength_nm,
                self.mass_amu,
                gamma_mhz,
            )
        })
    }

    /// Velocity ensemble, or `None` for stationary atoms.
    pub fn ensemble(&self, gamma_mhz: f64) -> Result<Option<VelocityEnsemble>> {
        if !self.enabled {
            return Ok(None);
        }
        let width = self.resolved_width(gamma_mhz);
        Ok(Some(
            velocity_grid_with_resolution(width, self.classes, self.resolution)?
                .with_share(self.share),
        ))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    /// Pass threshold on the relative deviation.
    pub tolerance: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            tolerance: 1e-3,
            rtol: 1e-9,
            atol: 1e-13,
        }
    }
}

impl OracleSpec {
    pub fn options(&self) -> RegressionOptions {
        RegressionOptions {
            control: StepControl {
                rtol: self.rtol,
                atol: self.atol,
                ..StepControl::default()
            },
            ..RegressionOptions::default()
        }
    }
}

/// Complete description of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default)]
    pub kind: ScanKind,
    /// Preset name; ignored when `scheme_file` is given.
    #[serde(default = "default_scheme")]
    pub scheme: String,
    /// Custom scheme description (TOML).
    #[serde(default)]
    pub scheme_file: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub physics: PhysicsSpec,
    #[serde(default)]
    pub drive: DriveSpec,
    #[serde(default)]
    pub grid: GridsSpec,
    #[serde(default)]
    pub doppler: DopplerSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

fn default_scheme() -> String {
    "rb87-d1-Fg2".into()
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            kind: ScanKind::default(),
            scheme: default_scheme(),
            scheme_file: None,
            workers: 0,
            physics: PhysicsSpec::default(),
            drive: DriveSpec::default(),
            grid: GridsSpec::default(),
            doppler: DopplerSpec::default(),
            output: OutputSpec::default(),
            oracle: OracleSpec::default(),
        }
    }
}

/// Set `path` (dot separated) in a TOML table, creating tables on the way.
fn set_path(root: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| Error::Config(format!("empty key in override `{path}`")))?;
    let mut table = root;
    for p in parts {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` in override `{path}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Parse an override value as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

impl ScanSpec {
    /// Parse a config with `key.path=value` overrides applied on top.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut root: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("config: {e}")))?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` must look like key=value")))?;
            set_path(&mut root, k.trim(), parse_value(v.trim()))?;
        }
        let spec: ScanSpec = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    /// Structural checks that do not need the engine.
    pub fn validate(&self) -> Result<()> {
        self.physics.constants()?;
        self.drive
            .drive()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !self.drive.delta.is_finite() || !self.drive.pump_angle.is_finite() {
            return Err(Error::Config(
                "drive.delta and drive.pump_angle must be finite".into(),
            ));
        }
        let g = &self.grid;
        for (name, grid) in [
            ("detuning", &g.detuning),
            ("delta", &g.delta),
            ("omega_f", &g.omega_f),
            ("cooperativity", &g.cooperativity),
        ] {
            if let Some(grid) = grid {
                grid.validate(name)?;
            }
        }
        let need = |grid: &Option<GridSpec>, name: &str| {
            if grid.is_none() {
                Err(Error::Config(format!("this scan needs grid.{name}")))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ScanKind::SinglePoint | ScanKind::OracleCheck => {}
            ScanKind::Detuning => need(&g.detuning, "detuning")?,
            ScanKind::NoiseFrequency => need(&g.delta, "delta")?,
            ScanKind::PowerDensity2d => {
                need(&g.omega_f, "omega_f")?;
                need(&g.cooperativity, "cooperativity")?;
            }
        }
        if self.doppler.enabled {
            let w = self.doppler.resolved_width(self.physics.gamma_mhz);
            if !(w >= 0.0 && w.is_finite())
                || self.doppler.classes == 0
                || !(self.doppler.resolution > 0.0)
            {
                return Err(Error::Config(
                    "doppler needs a finite width >= 0, classes >= 1 and resolution > 0".into(),
                ));
            }
        }
        if !(self.oracle.tolerance > 0.0) {
            return Err(Error::Config("oracle.tolerance must be > 0".into()));
        }
        Ok(())
    }

    pub fn build_scheme(&self) -> Result<LevelScheme> {
        match &self.scheme_file {
            Some(path) => CustomSchemeSpec::load(path)?.build(),
            None => build_scheme(self.scheme.parse::<Preset>()?, &self.physics.constants()?),
        }
    }

    pub fn geometry(&self) -> PolarizationGeometry {
        PolarizationGeometry::linear(self.drive.pump_angle)
    }

    /// Sideband frequencies: the δ grid, or the single drive value.
    pub fn deltas(&self) -> Result<Vec<f64>> {
        match &self.grid.delta {
            Some(g) => g.validate("delta"),
            None => Ok(vec![self.drive.delta]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(ScanSpec::from_toml("").unwrap(), ScanSpec::default());
    }

    #[test]
    fn overrides_create_nested_keys() {
        let s = ScanSpec::from_toml_with_overrides(
            "kind = \"detuning\"\n[grid.detuning]\nstart = -10.0\nstop = 10.0\nsteps = 5\n",
            &[
                "drive.omega_f=12.5".into(),
                "doppler.enabled=true".into(),
                "drive.reference=F=2->F'=2".into(),
            ],
        )
        .unwrap();
        assert_eq!(s.drive.omega_f, 12.5);
        assert!(s.doppler.enabled);
        assert_eq!(s.drive.reference, Some(Transition::new("F=2", "F'=2")));
        assert_eq!(
            s.grid.detuning.unwrap().values(),
            vec![-10.0, -5.0, 0.0, 5.0, 10.0]
        );
    }

    #[test]
    fn rejects_bad_grids_and_keys() {
        assert!(ScanSpec::from_toml("bogus = 1").is_err());
        assert!(ScanSpec::from_toml("kind = \"detuning\"").is_err());
        let non_monotone = "kind = \"noise-frequency\"\n[grid.delta]\nvalues = [0.1, 0.3, 0.2]\n";
        assert!(ScanSpec::from_toml(non_monotone).is_err());
        let empty = "kind = \"noise-frequency\"\n[grid.delta]\nvalues = []\n";
        assert!(ScanSpec::from_toml(empty).is_err());
        assert!(ScanSpec::from_toml_with_overrides("", &["drive.gamma0=0".into()]).is_err());
        assert!(ScanSpec::from_toml_with_overrides("", &["novalue".into()]).is_err());
    }

    #[test]
    fn commensurate_range_is_exact() {
        let g = GridSpec::Range {
            start: -150.0,
            stop: 300.0,
            steps: 451,
        };
        assert!(g.values().iter().all(|x| x.fract() == 0.0));
    }
}
