use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_raw, Boundary, Branch, ExecutionMode, Format, Mode, RawConfig, RunConfig, SpeciesKind, SweepParam,
};
use crate::error::{CliError, Result};

pub const OUT_DIR_ENV: &str = "PNP_STERIC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "pnp-steric", version, about = "Steady PNP-steric branches, boundary-value solves and currents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate concentrations and both branch potentials over a Sigma grid.
    Branches(CommonArgs),
    /// Critical constants, plus the bulk roots for three or four species.
    Critical(CommonArgs),
    /// Solve the boundary-value problem on one branch.
    Solve(CommonArgs),
    /// Solve, then compute the excess current and both window integrals.
    Current(CommonArgs),
    /// Repeat a mode over a list of parameter values.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub species: Option<SpeciesKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z3: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Left boundary datum: a number or `root`.
    #[arg(long = "phi0-left", allow_negative_numbers = true)]
    pub phi0_left: Option<Boundary>,
    /// Right boundary datum: a number or `root`.
    #[arg(long = "phi0-right", allow_negative_numbers = true)]
    pub phi0_right: Option<Boundary>,
    #[arg(long = "n-nodes")]
    pub n_nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub branch: Option<Branch>,
    #[arg(long, allow_negative_numbers = true)]
    pub x1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d3: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d4: Option<f64>,
    #[arg(long = "charge-scale", allow_negative_numbers = true)]
    pub charge_scale: Option<f64>,
    /// Number of Sigma points in a branch table.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub execution: Option<ExecutionMode>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (a directory for `sweep`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Default output directory when `--out` is absent.
    #[arg(long = "out-dir", env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mode repeated at each value.
    #[arg(long = "sweep-mode", value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub parameter: Option<SweepParam>,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Option<Vec<f64>>,
}

fn set<T: Copy>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl CommonArgs {
    /// Overlays the flags that were given on `raw`.
    pub fn apply(&self, raw: &mut RawConfig) {
        let s = &mut raw.species;
        set(&mut s.kind, self.species);
        set(&mut s.g, self.g);
        set(&mut s.z, self.z);
        set(&mut s.q, self.q);
        set(&mut s.z3, self.z3);
        set(&mut s.rho0, self.rho0);
        set(&mut s.g2, self.g2);
        set(&mut s.z2, self.z2);
        set(&mut s.q2, self.q2);
        let b = &mut raw.bvp;
        set(&mut b.epsilon, self.epsilon);
        set(&mut b.eta, self.eta);
        set(&mut b.phi0_left, self.phi0_left);
        set(&mut b.phi0_right, self.phi0_right);
        set(&mut b.n_nodes, self.n_nodes);
        set(&mut b.branch, self.branch);
        let c = &mut raw.current;
        set(&mut c.x1, self.x1);
        set(&mut c.x2, self.x2);
        set(&mut c.charge_scale, self.charge_scale);
        for (slot, flag) in c.d_override.iter_mut().zip([self.d1, self.d2, self.d3, self.d4]) {
            set(slot, flag);
        }
        set(&mut raw.branches.points, self.points);
        set(&mut raw.execution, self.execution);
        set(&mut raw.output.format, self.format);
        if self.out.is_some() {
            raw.output.path = self.out.clone();
        }
    }

    fn load(&self) -> Result<RawConfig> {
        match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_raw(&text).map_err(|e| match e {
                    CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                    other => other,
                })
            }
            None => Ok(RawConfig::default()),
        }
    }
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Branches(a) | Command::Critical(a) | Command::Solve(a) | Command::Current(a) => a,
            Command::Sweep(s) => &s.common,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Command::Branches(_) => Mode::Branches,
            Command::Critical(_) => Mode::Critical,
            Command::Solve(_) => Mode::Solve,
            Command::Current(_) => Mode::Current,
            Command::Sweep(_) => Mode::Sweep,
        }
    }

    /// The configuration file (if any) with every flag applied on top.
    pub fn config(&self) -> Result<RunConfig> {
        let common = self.common();
        let mut raw = common.load()?;
        raw.mode = Some(self.mode());
        common.apply(&mut raw);
        if let Command::Sweep(s) = self {
            set(&mut raw.sweep.mode, s.mode);
            set(&mut raw.sweep.parameter, s.parameter);
            if s.values.is_some() {
                raw.sweep.values = s.values.clone();
            }
        }
        raw.resolve()
    }
}
