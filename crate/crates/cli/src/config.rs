//! Run configuration: the TOML document, flag overrides and validation.
//!
//! A document looks like
//!
//! ```toml
//! mode = "current"          # branches | critical | solve | current | sweep
//! execution = "parallel"    # or "sequential"
//!
//! [species]
//! kind = "three"            # two | three | four; inferred when omitted
//! g = 1.0
//! z = 20.0
//! q = 1.0                   # default 1
//! z3 = 1.0                  # three species, default 1
//! rho0 = 0.5                # three and four species
//! # g2, z2, q2              # second pair, four species
//!
//! [bvp]
//! epsilon = 1e-2
//! eta = 0.05                # default 0 (Dirichlet)
//! phi0_left = "root"        # number or "root" (default)
//! phi0_right = 0.3
//! n_nodes = 1601            # default from the boundary-layer rule
//! branch = "A"              # A (default) or B
//!
//! [current]
//! x1 = -0.5
//! x2 = 0.5
//! d = [1.0, 2.0, 1.0]       # one per species, default all 1
//! charge_scale = 1.0
//!
//! [branches]
//! points = 201
//!
//! [sweep]
//! mode = "critical"
//! parameter = "z"
//! values = [3.0, 4.0, 5.0]
//!
//! [output]
//! format = "csv"            # csv | json
//! path = "out.csv"          # standard output when omitted
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use pnp_steric::branch_algebra::{BranchId, TwoSpeciesParams};
use pnp_steric::excess_current::DiffusionSet;
use pnp_steric::rhs_assembly::{FourSpeciesConfig, ThreeSpeciesConfig};
use pnp_steric::Execution;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_BRANCH_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Branches,
    Critical,
    Solve,
    Current,
    Sweep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Branches => "branches",
            Mode::Critical => "critical",
            Mode::Solve => "solve",
            Mode::Current => "current",
            Mode::Sweep => "sweep",
        }
    }

    fn needs_bvp(self) -> bool {
        matches!(self, Mode::Solve | Mode::Current)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpeciesKind {
    Two,
    Three,
    Four,
}

impl SpeciesKind {
    pub fn count(self) -> usize {
        match self {
            SpeciesKind::Two => 2,
            SpeciesKind::Three => 3,
            SpeciesKind::Four => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Branch {
    #[serde(alias = "a")]
    #[value(name = "A", alias = "a")]
    A,
    #[serde(alias = "b")]
    #[value(name = "B", alias = "b")]
    B,
}

impl From<Branch> for BranchId {
    fn from(b: Branch) -> Self {
        match b {
            Branch::A => BranchId::A,
            Branch::B => BranchId::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    Sequential,
    #[default]
    Parallel,
}

impl From<ExecutionMode> for Execution {
    fn from(m: ExecutionMode) -> Self {
        match m {
            ExecutionMode::Sequential => Execution::Sequential,
            ExecutionMode::Parallel => Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    G,
    Z,
    Q,
    Z3,
    Rho0,
    G2,
    Z2,
    Q2,
    Epsilon,
    Eta,
    X1,
    X2,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::G => "g",
            SweepParam::Z => "z",
            SweepParam::Q => "q",
            SweepParam::Z3 => "z3",
            SweepParam::Rho0 => "rho0",
            SweepParam::G2 => "g2",
            SweepParam::Z2 => "z2",
            SweepParam::Q2 => "q2",
            SweepParam::Epsilon => "epsilon",
            SweepParam::Eta => "eta",
            SweepParam::X1 => "x1",
            SweepParam::X2 => "x2",
        }
    }
}

/// Boundary datum: a number or the bulk root of the selected branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryRepr", into = "BoundaryRepr")]
pub enum Boundary {
    Root,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundaryRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<BoundaryRepr> for Boundary {
    type Error = String;

    fn try_from(r: BoundaryRepr) -> std::result::Result<Self, String> {
        match r {
            BoundaryRepr::Number(v) => Ok(Boundary::Value(v)),
            BoundaryRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Boundary> for BoundaryRepr {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::Root => BoundaryRepr::Text("root".into()),
            Boundary::Value(v) => BoundaryRepr::Number(v),
        }
    }
}

impl FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("root") {
            return Ok(Boundary::Root);
        }
        s.trim()
            .parse::<f64>()
            .map(Boundary::Value)
            .map_err(|_| format!("expected a number or \"root\", got {s:?}"))
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Root => f.write_str("root"),
            Boundary::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpecies {
    pub kind: Option<SpeciesKind>,
    pub g: Option<f64>,
    pub z: Option<f64>,
    pub q: Option<f64>,
    pub z3: Option<f64>,
    pub rho0: Option<f64>,
    pub g2: Option<f64>,
    pub z2: Option<f64>,
    pub q2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBvp {
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub phi0_left: Option<Boundary>,
    pub phi0_right: Option<Boundary>,
    pub n_nodes: Option<usize>,
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCurrent {
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub d: Option<Vec<f64>>,
    pub charge_scale: Option<f64>,
    /// Per-species overrides from `--d1..--d4`.
    #[serde(skip)]
    pub d_override: [Option<f64>; 4],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBranches {
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub mode: Option<Mode>,
    pub parameter: Option<SweepParam>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// The document as written, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub execution: Option<ExecutionMode>,
    #[serde(default)]
    pub species: RawSpecies,
    #[serde(default)]
    pub bvp: RawBvp,
    #[serde(default)]
    pub current: RawCurrent,
    #[serde(default)]
    pub branches: RawBranches,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub output: RawOutput,
}

pub fn parse_raw(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config document: {e}")))
}

/// Parses and validates a document with every default applied.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_raw(text)?.resolve()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSpec {
    pub kind: SpeciesKind,
    pub g: f64,
    pub z: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
}

/// Species configuration in the form the solver consumes.
#[derive(Debug, Clone, Copy)]
pub enum Species {
    Two(TwoSpeciesParams),
    Three(ThreeSpeciesConfig),
    Four(FourSpeciesConfig),
}

impl Species {
    /// The first (or only) pair.
    pub fn pair(&self) -> TwoSpeciesParams {
        match self {
            Species::Two(p) => *p,
            Species::Three(c) => c.pair,
            Species::Four(c) => c.pair12,
        }
    }
}

fn required(v: Option<f64>, field: &str, kind: SpeciesKind) -> Result<f64> {
    v.ok_or_else(|| CliError::Config(format!("species.{field} required for a {kind:?} species run").to_lowercase()))
}

fn pair(g: f64, z: f64, q: f64, prefix: &str) -> Result<TwoSpeciesParams> {
    TwoSpeciesParams::new(g, z, q).map_err(|e| CliError::Config(format!("species{prefix}: {e}")))
}

impl SpeciesSpec {
    pub fn build(&self) -> Result<Species> {
        let k = self.kind;
        let extra = |present: bool, field: &str| -> Result<()> {
            if present {
                Err(CliError::Config(format!(
                    "species.{field} does not apply to a {} species run",
                    format!("{k:?}").to_lowercase()
                )))
            } else {
                Ok(())
            }
        };
        let p = pair(self.g, self.z, self.q, "")?;
        match k {
            SpeciesKind::Two => {
                extra(self.z3.is_some(), "z3")?;
                extra(self.rho0.is_some(), "rho0")?;
                extra(self.g2.is_some() || self.z2.is_some() || self.q2.is_some(), "g2/z2/q2")?;
                Ok(Species::Two(p))
            }
            SpeciesKind::Three => {
                extra(self.g2.is_some() || self.z2.is_some() || self.q2.is_some(), "g2/z2/q2")?;
                let z3 = required(self.z3, "z3", k)?;
                let rho0 = required(self.rho0, "rho0", k)?;
                if rho0.is_finite() && rho0 <= 0.0 {
                    return Err(CliError::Config(format!(
                        "species.rho0 = {rho0}: a three-species run requires rho0 > 0"
                    )));
                }
                ThreeSpeciesConfig::new(p, z3, rho0)
                    .map(Species::Three)
                    .map_err(|e| CliError::Config(format!("species: {e}")))
            }
            SpeciesKind::Four => {
                extra(self.z3.is_some(), "z3")?;
                let p2 = pair(
                    required(self.g2, "g2", k)?,
                    required(self.z2, "z2", k)?,
                    self.q2.unwrap_or(1.0),
                    " (second pair)",
                )?;
                let rho0 = required(self.rho0, "rho0", k)?;
                FourSpeciesConfig::new(p, p2, rho0)
                    .map(Species::Four)
                    .map_err(|e| CliError::Config(format!("species: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpSpec {
    pub epsilon: f64,
    pub eta: f64,
    pub phi0_left: Boundary,
    pub phi0_right: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<usize>,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSpec {
    pub x1: f64,
    pub x2: f64,
    pub d: Vec<f64>,
    pub charge_scale: f64,
}

impl CurrentSpec {
    pub fn diffusion(&self) -> Result<DiffusionSet> {
        DiffusionSet::new(self.d.clone(), self.charge_scale).map_err(|e| CliError::Config(format!("current: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: Mode,
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// A validated run configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub execution: ExecutionMode,
    pub species: SpeciesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bvp: Option<BvpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<CurrentSpec>,
    pub branch_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub output: OutputSpec,
}

impl RawConfig {
    /// Applies defaults and checks the result.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mode = self.mode.ok_or_else(|| CliError::Config("mode required".into()))?;
        let sweep = if mode == Mode::Sweep {
            let s = &self.sweep;
            let inner = s.mode.ok_or_else(|| CliError::Config("sweep.mode required".into()))?;
            if inner == Mode::Sweep {
                return Err(CliError::Config("sweep.mode cannot itself be sweep".into()));
            }
            let parameter = s
                .parameter
                .ok_or_else(|| CliError::Config("sweep.parameter required".into()))?;
            let values = s.values.clone().unwrap_or_default();
            if values.is_empty() {
                return Err(CliError::Config("sweep.values must list at least one value".into()));
            }
            Some(SweepSpec {
                mode: inner,
                parameter,
                values,
            })
        } else {
            None
        };
        let effective = sweep.as_ref().map_or(mode, |s| s.mode);

        let sp = &self.species;
        let kind = sp.kind.unwrap_or(if sp.g2.is_some() || sp.z2.is_some() || sp.q2.is_some() {
            SpeciesKind::Four
        } else if sp.z3.is_some() || sp.rho0.is_some() {
            SpeciesKind::Three
        } else {
            SpeciesKind::Two
        });
        let g = sp.g.ok_or_else(|| CliError::Config("species.g required".into()))?;
        let z = sp.z.ok_or_else(|| CliError::Config("species.z required".into()))?;
        let species = SpeciesSpec {
            kind,
            g,
            z,
            q: sp.q.unwrap_or(1.0),
            z3: if kind == SpeciesKind::Three { Some(sp.z3.unwrap_or(1.0)) } else { sp.z3 },
            rho0: sp.rho0,
            g2: sp.g2,
            z2: sp.z2,
            q2: if kind == SpeciesKind::Four { Some(sp.q2.unwrap_or(1.0)) } else { sp.q2 },
        };

        let b = &self.bvp;
        let bvp = match b.epsilon {
            Some(epsilon) => Some(BvpSpec {
                epsilon,
                eta: b.eta.unwrap_or(0.0),
                phi0_left: b.phi0_left.unwrap_or(Boundary::Root),
                phi0_right: b.phi0_right.unwrap_or(Boundary::Root),
                n_nodes: b.n_nodes,
                branch: b.branch.unwrap_or(Branch::A),
            }),
            None if effective.needs_bvp() => {
                return Err(CliError::Config(format!("bvp.epsilon required for mode {}", effective.as_str())))
            }
            None => None,
        };

        let c = &self.current;
        let current = match (c.x1, c.x2) {
            (Some(x1), Some(x2)) => {
                let n = kind.count();
                let mut d = c.d.clone().unwrap_or_else(|| vec![1.0; n]);
                if d.len() != n {
                    return Err(CliError::Config(format!(
                        "current.d has {} entries; a {n}-species run needs {n}",
                        d.len()
                    )));
                }
                for (i, v) in c.d_override.iter().enumerate() {
                    if let Some(v) = v {
                        if i >= n {
                            return Err(CliError::Config(format!("--d{} given for a {n}-species run", i + 1)));
                        }
                        d[i] = *v;
                    }
                }
                Some(CurrentSpec {
                    x1,
                    x2,
                    d,
                    charge_scale: c.charge_scale.unwrap_or(1.0),
                })
            }
            _ if effective == Mode::Current => {
                return Err(CliError::Config("current.x1 and current.x2 required for mode current".into()))
            }
            _ => None,
        };

        let config = RunConfig {
            mode,
            execution: self.execution.unwrap_or_default(),
            species,
            bvp,
            current,
            branch_points: self.branches.points.unwrap_or(DEFAULT_BRANCH_POINTS),
            sweep,
            output: OutputSpec {
                format: self.output.format.unwrap_or(Format::Csv),
                path: self.output.path.clone(),
            },
        };
        config.check()?;
        if let Some(s) = &config.sweep {
            for &v in &s.values {
                config.sweep_point(v)?;
            }
        }
        Ok(config)
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    /// The mode that actually produces tables: the sweep's inner mode for a
    /// sweep.
    pub fn effective_mode(&self) -> Mode {
        self.sweep.as_ref().map_or(self.mode, |s| s.mode)
    }

    /// Checks the invariants that do not need a solve.
    pub fn check(&self) -> Result<()> {
        let s = &self.species;
        for (name, v) in [("species.g", Some(s.g)), ("species.z", Some(s.z)), ("species.q", Some(s.q))]
            .into_iter()
            .chain([
                ("species.z3", s.z3),
                ("species.rho0", s.rho0),
                ("species.g2", s.g2),
                ("species.z2", s.z2),
                ("species.q2", s.q2),
            ])
        {
            if let Some(v) = v {
                finite(name, v)?;
            }
        }
        let species = s.build()?;
        let mode = self.effective_mode();
        if mode.needs_bvp() && matches!(species, Species::Two(_)) {
            return Err(CliError::Config(format!(
                "mode {} needs a three- or four-species configuration",
                mode.as_str()
            )));
        }
        if let Some(b) = &self.bvp {
            finite("bvp.epsilon", b.epsilon)?;
            finite("bvp.eta", b.eta)?;
            if b.epsilon <= 0.0 {
                return Err(CliError::Config(format!("bvp.epsilon must be positive, got {}", b.epsilon)));
            }
            if b.eta < 0.0 {
                return Err(CliError::Config(format!("bvp.eta must be non-negative, got {}", b.eta)));
            }
            for (name, v) in [("bvp.phi0_left", b.phi0_left), ("bvp.phi0_right", b.phi0_right)] {
                if let Boundary::Value(v) = v {
                    finite(name, v)?;
                }
            }
            if let Some(n) = b.n_nodes {
                if n < 5 {
                    return Err(CliError::Config(format!("bvp.n_nodes must be at least 5, got {n}")));
                }
            }
        }
        if let Some(c) = &self.current {
            finite("current.x1", c.x1)?;
            finite("current.x2", c.x2)?;
            if !(-1.0 < c.x1 && c.x1 <= c.x2 && c.x2 < 1.0) {
                return Err(CliError::Config(format!(
                    "current window must satisfy -1 < x1 <= x2 < 1, got [{}, {}]",
                    c.x1, c.x2
                )));
            }
            c.diffusion()?;
        }
        if self.branch_points < 2 {
            return Err(CliError::Config("branches.points must be at least 2".into()));
        }
        if let Some(sw) = &self.sweep {
            for &v in &sw.values {
                finite("sweep.values", v)?;
            }
        }
        Ok(())
    }

    pub fn species(&self) -> Result<Species> {
        self.species.build()
    }

    /// The configuration of one sweep point: the inner mode with the swept
    /// parameter set to `value`.
    pub fn sweep_point(&self, value: f64) -> Result<RunConfig> {
        let sw = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("not a sweep configuration".into()))?;
        let mut c = self.clone();
        c.mode = sw.mode;
        c.sweep = None;
        c.execution = ExecutionMode::Sequential;
        c.output.path = None;
        let missing = |section: &str| {
            CliError::Config(format!(
                "sweep parameter {} needs a [{section}] section",
                sw.parameter.as_str()
            ))
        };
        let s = &mut c.species;
        match sw.parameter {
            SweepParam::G => s.g = value,
            SweepParam::Z => s.z = value,
            SweepParam::Q => s.q = value,
            SweepParam::Z3 => s.z3 = Some(value),
            SweepParam::Rho0 => s.rho0 = Some(value),
            SweepParam::G2 => s.g2 = Some(value),
            SweepParam::Z2 => s.z2 = Some(value),
            SweepParam::Q2 => s.q2 = Some(value),
            SweepParam::Epsilon => c.bvp.as_mut().ok_or_else(|| missing("bvp"))?.epsilon = value,
            SweepParam::Eta => c.bvp.as_mut().ok_or_else(|| missing("bvp"))?.eta = value,
            SweepParam::X1 => c.current.as_mut().ok_or_else(|| missing("current"))?.x1 = value,
            SweepParam::X2 => c.current.as_mut().ok_or_else(|| missing("current"))?.x2 = value,
        }
        c.check()
            .map_err(|e| CliError::Config(format!("sweep point {} = {value}: {e}", sw.parameter.as_str())))?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_needs_mode() {
        let e = parse_config("").unwrap_err();
        assert_eq!(e.to_string(), "config error: mode required");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn minimal_critical_document() {
        let c = parse_config("mode = \"critical\"\n[species]\ng = 0.0\nz = 3.0\n").unwrap();
        assert_eq!(c.mode, Mode::Critical);
        assert_eq!(c.species.kind, SpeciesKind::Two);
        assert_eq!(c.species.q, 1.0);
        assert_eq!(c.output.format, Format::Csv);
        assert!(c.output.path.is_none());
        assert!(c.bvp.is_none() && c.current.is_none());
        assert_eq!(c.branch_points, DEFAULT_BRANCH_POINTS);
    }

    #[test]
    fn zero_background_charge_rejected() {
        let doc = "mode = \"solve\"\n[species]\ng = 1.0\nz = 20.0\nz3 = 1.0\nrho0 = 0.0\n[bvp]\nepsilon = 0.01\n";
        let e = parse_config(doc).unwrap_err();
        assert!(e.to_string().contains("rho0 > 0"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let e = parse_config("mode = \"critical\"\n[species]\ng = 0.0\nz = 3.0\nzz = 1.0\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("zz") && msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn boundary_accepts_root_or_number() {
        let doc = "mode = \"solve\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\nphi0_left = \"root\"\nphi0_right = -0.25\n";
        let c = parse_config(doc).unwrap();
        let b = c.bvp.unwrap();
        assert_eq!(b.phi0_left, Boundary::Root);
        assert_eq!(b.phi0_right, Boundary::Value(-0.25));
        assert_eq!(b.branch, Branch::A);
        assert_eq!(c.species.z3, Some(1.0));
        assert!(parse_config(&doc.replace("\"root\"", "\"bulk\"")).is_err());
    }

    #[test]
    fn solve_needs_epsilon_and_three_species() {
        let e = parse_config("mode = \"solve\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n").unwrap_err();
        assert!(e.to_string().contains("bvp.epsilon"), "{e}");
        let e = parse_config("mode = \"solve\"\n[species]\ng = 1\nz = 20\n[bvp]\nepsilon = 0.01\n").unwrap_err();
        assert!(e.to_string().contains("three- or four-species"), "{e}");
    }

    #[test]
    fn sweep_points_are_validated_up_front() {
        let doc = "mode = \"sweep\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[sweep]\nmode = \"critical\"\nparameter = \"rho0\"\nvalues = [0.5, 0.0]\n";
        let e = parse_config(doc).unwrap_err();
        assert!(e.to_string().contains("sweep point rho0 = 0"), "{e}");
        let ok = parse_config(&doc.replace("0.0]", "1.0]")).unwrap();
        let p = ok.sweep_point(1.0).unwrap();
        assert_eq!(p.mode, Mode::Critical);
        assert_eq!(p.species.rho0, Some(1.0));
        assert_eq!(p.execution, ExecutionMode::Sequential);
    }

    #[test]
    fn diffusion_length_must_match() {
        let doc = "mode = \"current\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\n[current]\nx1 = -0.5\nx2 = 0.5\nd = [1.0, 2.0]\n";
        assert!(parse_config(doc).is_err());
        let c = parse_config(&doc.replace("d = [1.0, 2.0]\n", "")).unwrap();
        assert_eq!(c.current.unwrap().d, vec![1.0; 3]);
    }

    #[test]
    fn echo_round_trips_through_json() {
        let doc = "mode = \"current\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\nphi0_left = 0.1\n[current]\nx1 = -0.5\nx2 = 0.5\n";
        let c = parse_config(doc).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
