//! Atomic level schemes: hyperfine manifolds, Zeeman sublevels and the
//! dipole coupling tensor between them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::wigner::{doubled, wigner3j, wigner6j};
use crate::error::{Error, Result};

/// Tolerance used when checking branching sums and quantum-number validity.
const SUM_RULE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Ground,
    Excited,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifold {
    pub label: String,
    pub kind: ManifoldKind,
    pub f: f64,
    /// Energy in units of Γ. Optical transition frequencies are differences
    /// `E(excited) - E(ground)` measured from an arbitrary common origin.
    pub energy: f64,
    /// Whether the manifold's sublevels are part of the simulated state space.
    pub modeled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub manifold: usize,
    pub f: f64,
    pub m: f64,
    pub energy: f64,
}

/// Dimensionless dipole weights `d_q[excited][ground]` relative to the
/// reduced fine-structure matrix element.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTensor {
    /// Level indices of the excited sublevels (row order).
    pub excited: Vec<usize>,
    /// Level indices of the ground sublevels (column order).
    pub ground: Vec<usize>,
    /// Indexed by `q + 1`.
    pub weights: [DMatrix<f64>; 3],
}

impl CouplingTensor {
    pub fn weight(&self, q: i32, excited_pos: usize, ground_pos: usize) -> f64 {
        self.weights[(q + 1) as usize][(excited_pos, ground_pos)]
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.iter().filter(|x| **x != 0.0).count())
            .sum()
    }

    /// Total branching from an excited sublevel into the modeled ground sublevels.
    pub fn branching(&self, excited_pos: usize) -> f64 {
        self.weights
            .iter()
            .map(|w| w.row(excited_pos).iter().map(|x| x * x).sum::<f64>())
            .sum()
    }
}

/// An optical transition named by its ground and excited manifold labels,
/// written `"F=2->F'=1"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Transition {
    pub ground: String,
    pub excited: String,
}

impl Transition {
    pub fn new(ground: impl Into<String>, excited: impl Into<String>) -> Self {
        Transition {
            ground: ground.into(),
            excited: excited.into(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.ground, self.excited)
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (g, e) = s
            .split_once("->")
            .ok_or_else(|| Error::Config(format!("transition `{s}` must look like `F=2->F'=1`")))?;
        Ok(Transition::new(g.trim(), e.trim()))
    }
}

impl TryFrom<String> for Transition {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Transition> for String {
    fn from(t: Transition) -> String {
        t.to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelScheme {
    pub name: String,
    pub manifolds: Vec<Manifold>,
    pub levels: Vec<Level>,
    /// Excited-state decay rate in units of Γ (1 for physical schemes).
    pub gamma: f64,
    pub coupling: CouplingTensor,
    pub default_reference: Transition,
}

impl LevelScheme {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn ground_levels(&self) -> &[usize] {
        &self.coupling.ground
    }

    pub fn excited_levels(&self) -> &[usize] {
        &self.coupling.excited
    }

    /// Fraction of the decay of an excited sublevel that leaves the modeled
    /// ground sublevels.
    pub fn loss_fraction(&self, excited_pos: usize) -> f64 {
        (1.0 - self.coupling.branching(excited_pos)).max(0.0)
    }

    pub fn manifold(&self, label: &str) -> Result<&Manifold> {
        self.manifolds
            .iter()
            .find(|m| m.label == label)
            .ok_or_else(|| {
                Error::InvalidScheme(format!("no manifold labelled `{label}` in {}", self.name))
            })
    }

    /// Frequency of a transition in units of Γ on the scheme's common axis.
    pub fn line_frequency(&self, t: &Transition) -> Result<f64> {
        let g = self.manifold(&t.ground)?;
        let e = self.manifold(&t.excited)?;
        if g.kind != ManifoldKind::Ground || e.kind != ManifoldKind::Excited {
            return Err(Error::InvalidScheme(format!(
                "transition {t} must go from a ground to an excited manifold"
            )));
        }
        Ok(e.energy - g.energy)
    }

    /// Check the structural invariants of the scheme.
    pub fn validate(&self) -> Result<()> {
        if self.coupling.ground.is_empty() || self.coupling.excited.is_empty() {
            return Err(Error::InvalidScheme(
                "a scheme needs at least one ground and one excited sublevel".into(),
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidScheme(format!(
                "decay rate {} is invalid",
                self.gamma
            )));
        }
        for (i, lvl) in self.levels.iter().enumerate() {
            let man = self.manifolds.get(lvl.manifold).ok_or_else(|| {
                Error::InvalidScheme(format!("level {i} refers to a missing manifold"))
            })?;
            let (Some(tf), Some(tm)) = (doubled(lvl.f), doubled(lvl.m)) else {
                return Err(Error::InvalidScheme(format!(
                    "level {i}: F={} m={} are not half-integers",
                    lvl.f, lvl.m
                )));
            };
            if tf < 0 || tm.abs() > tf || (tf - tm) % 2 != 0 {
                return Err(Error::InvalidScheme(format!(
                    "level {i}: m_F={} incompatible with F={}",
                    lvl.m, lvl.f
                )));
            }
            if lvl.f != man.f || lvl.energy != man.energy || !man.modeled {
                return Err(Error::InvalidScheme(format!(
                    "level {i} is inconsistent with manifold `{}`",
                    man.label
                )));
            }
        }
        let ne = self.coupling.excited.len();
        let ng = self.coupling.ground.len();
        for w in &self.coupling.weights {
            if w.nrows() != ne || w.ncols() != ng {
                return Err(Error::InvalidScheme(
                    "coupling tensor has wrong shape".into(),
                ));
            }
        }
        for (a, &ie) in self.coupling.excited.iter().enumerate() {
            if self.manifolds[self.levels[ie].manifold].kind != ManifoldKind::Excited {
                return Err(Error::InvalidScheme(format!(
                    "level {ie} listed as excited"
                )));
            }
            for (b, &ig) in self.coupling.ground.iter().enumerate() {
                for q in -1..=1 {
                    let w = self.coupling.weight(q, a, b);
                    if !w.is_finite() {
                        return Err(Error::InvalidScheme("non-finite coupling weight".into()));
                    }
                    let dm = self.levels[ie].m - self.levels[ig].m;
                    if w != 0.0 && (dm - q as f64).abs() > 1e-9 {
                        return Err(Error::InvalidScheme(format!(
                            "coupling {ig}->{ie} with q={q} violates m_e = m_g + q"
                        )));
                    }
                }
            }
            let b = self.coupling.branching(a);
            if b > 1.0 + SUM_RULE_TOL {
                return Err(Error::InvalidScheme(format!(
                    "excited level {ie} has total branching {b} > 1"
                )));
            }
        }
        for &ig in &self.coupling.ground {
            if self.manifolds[self.levels[ig].manifold].kind != ManifoldKind::Ground {
                return Err(Error::InvalidScheme(format!("level {ig} listed as ground")));
            }
        }
        if self.coupling.ground.len() + self.coupling.excited.len() != self.levels.len() {
            return Err(Error::InvalidScheme(
                "every level must be ground or excited".into(),
            ));
        }
        self.line_frequency(&self.default_reference)?;
        Ok(())
    }
}

/// Dipole weight of `|F_g m_g> -> |F_e m_e>` for spherical component `q`,
/// relative to the reduced fine-structure matrix element, normalized so that
/// the total decay branching of every excited sublevel into the complete
/// ground fine-structure level is 1.
#[allow(clippy::too_many_arguments)]
pub fn dipole_weight(
    f_g: f64,
    m_g: f64,
    f_e: f64,
    m_e: f64,
    q: i32,
    nuclear_spin: f64,
    j_g: f64,
    j_e: f64,
) -> f64 {
    if !(-1..=1).contains(&q) || (m_e - m_g - q as f64).abs() > 1e-9 {
        return 0.0;
    }
    let zeeman = phase(f_e - m_e) * wigner3j(f_e, 1.0, f_g, -m_e, q as f64, m_g);
    if zeeman == 0.0 {
        return 0.0;
    }
    let hyperfine = phase(j_e + nuclear_spin + f_g + 1.0)
        * ((2.0 * f_e + 1.0) * (2.0 * f_g + 1.0)).sqrt()
        * wigner6j(j_e, f_e, nuclear_spin, f_g, j_g, 1.0);
    zeeman * hyperfine * (2.0 * j_e + 1.0).sqrt()
}

fn phase(x: f64) -> f64 {
    if (x.round() as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Physical constants of the hyperfine presets, all frequencies in units of Γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfineConstants {
    pub ground_splitting: f64,
    pub excited_splitting: f64,
    pub nuclear_spin: f64,
    /// Energy of `e₂` above `e₁` in the four-level toy.
    pub toy_splitting: f64,
}

impl HyperfineConstants {
    /// ⁸⁷Rb D1 values converted with the given Γ/2π in MHz.
    pub fn rb87_d1(gamma_mhz: f64) -> Self {
        HyperfineConstants {
            ground_splitting: RB87_GROUND_SPLITTING_MHZ / gamma_mhz,
            excited_splitting: RB87_D1_EXCITED_SPLITTING_MHZ / gamma_mhz,
            nuclear_spin: 1.5,
            toy_splitting: 50.0,
        }
    }
}

impl Default for HyperfineConstants {
    fn default() -> Self {
        Self::rb87_d1(DEFAULT_GAMMA_MHZ)
    }
}

pub const RB87_GROUND_SPLITTING_MHZ: f64 = 6_834.682_610_904;
pub const RB87_D1_EXCITED_SPLITTING_MHZ: f64 = 814.5;
/// Γ/2π used to convert between MHz and units of Γ.
pub const DEFAULT_GAMMA_MHZ: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExcitedSelection {
    Both,
    Only(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Rb87D1 {
        ground_f: u8,
        excited: ExcitedSelection,
    },
    FourLevelToy,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let preset = match s {
            "four-level-toy" => Preset::FourLevelToy,
            _ => {
                let rest = s
                    .strip_prefix("rb87-d1-Fg")
                    .ok_or_else(|| Error::Config(format!("unknown scheme preset `{s}`")))?;
                let (g, e) = match rest.split_once("-Fe") {
                    Some((g, e)) => (g, Some(e)),
                    None => (rest, None),
                };
                let ground_f = match g {
                    "1" => 1,
                    "2" => 2,
                    _ => return Err(Error::Config(format!("unknown scheme preset `{s}`"))),
                };
                let excited = match e {
                    None => ExcitedSelection::Both,
                    Some("1") => ExcitedSelection::Only(1),
                    Some("2") => ExcitedSelection::Only(2),
                    Some(_) => return Err(Error::Config(format!("unknown scheme preset `{s}`"))),
                };
                Preset::Rb87D1 { ground_f, excited }
            }
        };
        Ok(preset)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::FourLevelToy => write!(f, "four-level-toy"),
            Preset::Rb87D1 { ground_f, excited } => {
                write!(f, "rb87-d1-Fg{ground_f}")?;
                if let ExcitedSelection::Only(fe) = excited {
                    write!(f, "-Fe{fe}")?;
                }
                Ok(())
            }
        }
    }
}

fn sublevels(f: f64) -> impl Iterator<Item = f64> {
    let n = (2.0 * f).round() as i64 + 1;
    (0..n).map(move |k| -f + k as f64)
}

struct Builder {
    manifolds: Vec<Manifold>,
    levels: Vec<Level>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            manifolds: Vec::new(),
            levels: Vec::new(),
        }
    }

    fn manifold(
        &mut self,
        label: &str,
        kind: ManifoldKind,
        f: f64,
        energy: f64,
        m: Option<&[f64]>,
    ) {
        let idx = self.manifolds.len();
        let modeled = m.is_none_or(|ms| !ms.is_empty());
        self.manifolds.push(Manifold {
            label: label.to_string(),
            kind,
            f,
            energy,
            modeled,
        });
        if !modeled {
            return;
        }
        let ms: Vec<f64> = match m {
            Some(ms) => ms.to_vec(),
            None => sublevels(f).collect(),
        };
        for m in ms {
            self.levels.push(Level {
                manifold: idx,
                f,
                m,
                energy,
            });
        }
    }

    fn finish(self) -> (Vec<Manifold>, Vec<Level>, Vec<usize>, Vec<usize>) {
        let kind = |l: &Level| self.manifolds[l.manifold].kind;
        let ground = (0..self.levels.len())
            .filter(|&i| kind(&self.levels[i]) == ManifoldKind::Ground)
            .collect();
        let excited = (0..self.levels.len())
            .filter(|&i| kind(&self.levels[i]) == ManifoldKind::Excited)
            .collect();
        (self.manifolds, self.levels, ground, excited)
    }
}

fn empty_weights(ne: usize, ng: usize) -> [DMatrix<f64>; 3] {
    [
        DMatrix::zeros(ne, ng),
        DMatrix::zeros(ne, ng),
        DMatrix::zeros(ne, ng),
    ]
}

fn computed_weights(
    levels: &[Level],
    excited: &[usize],
    ground: &[usize],
    nuclear_spin: f64,
    j_g: f64,
    j_e: f64,
) -> [DMatrix<f64>; 3] {
    let mut w = empty_weights(excited.len(), ground.len());
    for (a, &ie) in excited.iter().enumerate() {
        for (b, &ig) in ground.iter().enumerate() {
            let (e, g) = (&levels[ie], &levels[ig]);
            for q in -1..=1 {
                w[(q + 1) as usize][(a, b)] =
                    dipole_weight(g.f, g.m, e.f, e.m, q, nuclear_spin, j_g, j_e);
            }
        }
    }
    w
}

/// Build one of the named level schemes.
pub fn build_scheme(preset: Preset, constants: &HyperfineConstants) -> Result<LevelScheme> {
    let scheme = match preset {
        Preset::Rb87D1 { ground_f, excited } => {
            let mut b = Builder::new();
            // F=2 is the upper ground level; F'=1 is the lower excited level.
            let ground_energy = |f: u8| {
                if f == 2 {
                    0.0
                } else {
                    -constants.ground_splitting
                }
            };
            for f in [1u8, 2] {
                let label = format!("F={f}");
                let m = if f == ground_f { None } else { Some(&[][..]) };
                b.manifold(&label, ManifoldKind::Ground, f as f64, ground_energy(f), m);
            }
            for fe in [1u8, 2] {
                let keep = match excited {
                    ExcitedSelection::Both => true,
                    ExcitedSelection::Only(x) => x == fe,
                };
                let energy = if fe == 1 {
                    0.0
                } else {
                    constants.excited_splitting
                };
                let m = if keep { None } else { Some(&[][..]) };
                b.manifold(
                    &format!("F'={fe}"),
                    ManifoldKind::Excited,
                    fe as f64,
                    energy,
                    m,
                );
            }
            let (manifolds, levels, ground, excited_idx) = b.finish();
            let weights = computed_weights(
                &levels,
                &excited_idx,
                &ground,
                constants.nuclear_spin,
                0.5,
                0.5,
            );
            let reference_excited = match excited {
                ExcitedSelection::Only(fe) => fe,
                ExcitedSelection::Both => 1,
            };
            LevelScheme {
                name: preset.to_string(),
                manifolds,
                levels,
                gamma: 1.0,
                coupling: CouplingTensor {
                    excited: excited_idx,
                    ground,
                    weights,
                },
                default_reference: Transition::new(
                    format!("F={ground_f}"),
                    format!("F'={reference_excited}"),
                ),
            }
        }
        Preset::FourLevelToy => four_level_toy(constants.toy_splitting),
    };
    scheme.validate()?;
    Ok(scheme)
}

/// Ground sublevels `m = ∓1` and two excited `m = 0` states. A linearly
/// polarized pump couples one superposition of the ground states to `e₁` and
/// the orthogonal one to `e₂`; the orthogonal (vacuum) polarization couples
/// the cross transitions.
fn four_level_toy(splitting: f64) -> LevelScheme {
    let mut b = Builder::new();
    b.manifold("g", ManifoldKind::Ground, 1.0, 0.0, Some(&[-1.0, 1.0]));
    b.manifold("e1", ManifoldKind::Excited, 0.0, 0.0, None);
    b.manifold("e2", ManifoldKind::Excited, 0.0, splitting, None);
    let (manifolds, levels, ground, excited) = b.finish();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut weights = empty_weights(2, 2);
    // e₁ couples to the symmetric combination, e₂ to the antisymmetric one.
    weights[2][(0, 0)] = s;
    weights[0][(0, 1)] = s;
    weights[2][(1, 0)] = s;
    weights[0][(1, 1)] = -s;
    LevelScheme {
        name: Preset::FourLevelToy.to_string(),
        manifolds,
        levels,
        gamma: 1.0,
        coupling: CouplingTensor {
            excited,
            ground,
            weights,
        },
        default_reference: Transition::new("g", "e1"),
    }
}

/// Custom scheme description, read from TOML.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSchemeSpec {
    #[serde(default = "default_custom_name")]
    pub name: String,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_nuclear_spin")]
    pub nuclear_spin: f64,
    #[serde(default = "half")]
    pub j_ground: f64,
    #[serde(default = "half")]
    pub j_excited: f64,
    /// Compute couplings from angular-momentum algebra before applying overrides.
    #[serde(default = "yes")]
    pub computed_couplings: bool,
    pub reference: Option<Transition>,
    #[serde(rename = "manifold")]
    pub manifolds: Vec<CustomManifold>,
    #[serde(default, rename = "coupling")]
    pub couplings: Vec<CouplingOverride>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CustomManifold {
    pub label: String,
    pub kind: ManifoldKind,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(default)]
    pub energy: f64,
    /// Subset of sublevels to keep; all `2F+1` when absent, none when empty.
    pub m: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingOverride {
    /// `(manifold label, m)` of the excited sublevel.
    pub excited: (String, f64),
    pub ground: (String, f64),
    pub q: i32,
    pub weight: f64,
}

fn default_custom_name() -> String {
    "custom".into()
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn default_nuclear_spin() -> f64 {
    1.5
}

impl CustomSchemeSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("custom scheme: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<LevelScheme> {
        let mut b = Builder::new();
        for m in &self.manifolds {
            if b.manifolds.iter().any(|x| x.label == m.label) {
                return Err(Error::InvalidScheme(format!(
                    "duplicate manifold `{}`",
                    m.label
                )));
            }
            b.manifold(&m.label, m.kind, m.f, m.energy, m.m.as_deref());
        }
        let (manifolds, levels, ground, excited) = b.finish();
        let mut weights = if self.computed_couplings {
            computed_weights(
                &levels,
                &excited,
                &ground,
                self.nuclear_spin,
                self.j_ground,
                self.j_excited,
            )
        } else {
            empty_weights(excited.len(), ground.len())
        };
        let find = |(label, m): &(String, f64), set: &[usize]| -> Result<usize> {
            set.iter()
                .position(|&i| {
                    manifolds[levels[i].manifold].label == *label && (levels[i].m - m).abs() < 1e-9
                })
                .ok_or_else(|| {
                    Error::InvalidScheme(format!(
                        "coupling override refers to unknown sublevel {label} m={m}"
                    ))
                })
        };
        for o in &self.couplings {
            if !(-1..=1).contains(&o.q) {
                return Err(Error::InvalidScheme(format!(
                    "polarization index q={} out of range",
                    o.q
                )));
            }
            let a = find(&o.excited, &excited)?;
            let bpos = find(&o.ground, &ground)?;
            weights[(o.q + 1) as usize][(a, bpos)] = o.weight;
        }
        let reference = match &self.reference {
            Some(r) => r.clone(),
            None => {
                let g = manifolds
                    .iter()
                    .find(|m| m.kind == ManifoldKind::Ground && m.modeled);
                let e = manifolds
                    .iter()
                    .find(|m| m.kind == ManifoldKind::Excited && m.modeled);
                match (g, e) {
                    (Some(g), Some(e)) => Transition::new(g.label.clone(), e.label.clone()),
                    _ => {
                        return Err(Error::InvalidScheme(
                            "scheme needs a ground and an excited manifold".into(),
                        ))
                    }
                }
            }
        };
        let scheme = LevelScheme {
            name: self.name.clone(),
            manifolds,
            levels,
            gamma: self.gamma,
            coupling: CouplingTensor {
                excited,
                ground,
                weights,
            },
            default_reference: reference,
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rb(g: u8) -> LevelScheme {
        build_scheme(
            Preset::Rb87D1 {
                ground_f: g,
                excited: ExcitedSelection::Both,
            },
            &HyperfineConstants::default(),
        )
        .unwrap()
    }

    #[test]
    fn preset_level_counts() {
        assert_eq!(rb(1).len(), 11);
        assert_eq!(rb(2).len(), 13);
        let toy = build_scheme(Preset::FourLevelToy, &HyperfineConstants::default()).unwrap();
        assert_eq!(toy.len(), 4);
        assert_eq!(toy.coupling.nonzero_count(), 4);
    }

    #[test]
    fn forbidden_pi_line_is_exact_zero() {
        assert_eq!(dipole_weight(1.0, 0.0, 1.0, 0.0, 0, 1.5, 0.5, 0.5), 0.0);
        assert_eq!(dipole_weight(1.0, -1.0, 2.0, 1.0, 1, 1.5, 0.5, 0.5), 0.0);
        assert_eq!(dipole_weight(1.0, -1.0, 2.0, 1.0, 2, 1.5, 0.5, 0.5), 0.0);
    }

    #[test]
    fn hyperfine_branching_matches_tabulated_ratios() {
        // F'=1 decays to F=1 with 1/6, F'=2 with 1/2 (D1 line, I=3/2).
        let s = rb(1);
        for (a, &ie) in s.excited_levels().iter().enumerate() {
            let expected = if s.levels[ie].f == 1.0 {
                1.0 / 6.0
            } else {
                0.5
            };
            assert_abs_diff_eq!(s.coupling.branching(a), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(s.loss_fraction(a), 1.0 - expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn preset_names_roundtrip() {
        for name in [
            "rb87-d1-Fg1",
            "rb87-d1-Fg2",
            "rb87-d1-Fg1-Fe2",
            "rb87-d1-Fg2-Fe1",
            "four-level-toy",
        ] {
            assert_eq!(name.parse::<Preset>().unwrap().to_string(), name);
        }
        assert!("rb85-d1".parse::<Preset>().is_err());
        assert!("rb87-d1-Fg3".parse::<Preset>().is_err());
    }

    #[test]
    fn line_frequencies_follow_hyperfine_layout() {
        let c = HyperfineConstants::default();
        let s = rb(1);
        let f = |g: &str, e: &str| s.line_frequency(&Transition::new(g, e)).unwrap();
        assert_abs_diff_eq!(f("F=2", "F'=1"), 0.0);
        assert_abs_diff_eq!(f("F=2", "F'=2"), c.excited_splitting);
        assert_abs_diff_eq!(f("F=1", "F'=1"), c.ground_splitting);
        assert!(s.line_frequency(&Transition::new("F'=1", "F=1")).is_err());
    }

    #[test]
    fn custom_two_level_parses() {
        let text = r#"
            name = "two-level"
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
        let s = CustomSchemeSpec::from_toml(text).unwrap().build().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coupling.nonzero_count(), 1);
        assert_eq!(s.loss_fraction(0), 0.0);
    }

    #[test]
    fn custom_scheme_violating_invariants_is_rejected() {
        let bad_m = r#"
            [[manifold]]
            label = "g"
            kind = "ground"
            F = 1
            m = [2]
            [[manifold]]
            label = "e"
            kind = "excited"
            F = 1
        "#;
        assert!(CustomSchemeSpec::from_toml(bad_m).unwrap().build().is_err());

        let bad_rule = r#"
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
            q = 0
            weight = 1.0
        "#;
        assert!(CustomSchemeSpec::from_toml(bad_rule)
            .unwrap()
            .build()
            .is_err());

        let bad_branching = r#"
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
            weight = 1.2
        "#;
        assert!(CustomSchemeSpec::from_toml(bad_branching)
            .unwrap()
            .build()
            .is_err());
    }
}
