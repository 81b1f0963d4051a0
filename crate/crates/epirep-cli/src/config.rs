//! Run configuration: JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use epirep::hamiltonians::{by_id, Coefficient, HamiltonianSpec, KNOWN_IDS};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub dx: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub u_radii: Option<usize>,
    pub u_angles: Option<usize>,
    /// Uniform samples of interval control sets.
    pub u_count: Option<usize>,
    pub cap_vertices: Option<usize>,
    pub v_count: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OpcConfig {
    pub eta: Option<f64>,
    pub r: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub inclusion: Option<f64>,
    pub coverage: Option<f64>,
    pub representation: Option<f64>,
}

/// Contents of a `--config` file; every field is optional.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub hamiltonian: Option<String>,
    pub alpha: Option<Coefficient>,
    pub beta: Option<Coefficient>,
    pub gamma: Option<f64>,
    pub n: Option<u32>,
    pub grid: GridConfig,
    pub sampling: SamplingConfig,
    pub opc: OpcConfig,
    pub tolerances: ToleranceConfig,
    pub t_samples: Option<Vec<f64>>,
    pub checks: Option<Vec<String>>,
    pub n_list: Option<Vec<u32>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Library id: ex35, ex51, ex33, ex34 or abs.
    #[arg(long, global = true)]
    pub hamiltonian: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Family index; omit for the limit Hamiltonian.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Comma-separated checks: hH, opc, vic, bH, classH.
    #[arg(long, global = true, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, global = true)]
    pub dx: Option<f64>,
    #[arg(long, global = true)]
    pub u_radii: Option<usize>,
    #[arg(long, global = true)]
    pub u_angles: Option<usize>,
    #[arg(long, global = true)]
    pub u_count: Option<usize>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub m: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunConfig {
    pub hamiltonian: String,
    pub alpha: Coefficient,
    pub beta: Coefficient,
    pub gamma: f64,
    pub n: Option<u32>,
    pub t_max: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub u_radii: usize,
    pub u_angles: usize,
    pub u_count: usize,
    pub cap_vertices: usize,
    pub v_count: usize,
    pub eta: f64,
    pub r: f64,
    pub m: f64,
    pub inclusion_tol: f64,
    pub coverage_tol: f64,
    pub representation_tol: f64,
    pub t_samples: Vec<f64>,
    pub checks: Vec<String>,
    pub n_list: Vec<u32>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Per-command window defaults.
#[derive(Clone, Copy, Debug)]
pub struct Defaults {
    pub id: &'static str,
    pub t_max: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
}

impl Defaults {
    pub const VALUE: Self = Self { id: "ex35", t_max: 10.0, dt: 0.05, x_min: -3.0, x_max: 0.0, dx: 0.05 };
    pub const STABILITY: Self = Self { id: "ex51", t_max: 5.0, dt: 0.1, x_min: -2.0, x_max: 0.0, dx: 0.1 };
    pub const SAMPLED: Self = Self { id: "ex35", t_max: 10.0, dt: 0.05, x_min: -2.0, x_max: 0.0, dx: 0.5 };
}

pub const KNOWN_CHECKS: [&str; 5] = ["hH", "opc", "vic", "bH", "classH"];

fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Default boundary-correction parameters per library id.
fn opc_defaults(id: &str, n: Option<u32>) -> (f64, f64, f64) {
    match (id, n) {
        ("ex51", Some(n)) => (1.0, 1.0 / n as f64, 1.0),
        ("ex51", None) => (1.0, 1.0, 1.0),
        ("abs" | "ex34", _) => (1.0, 1.0, 2.0),
        _ => (1.0, 1.0, 3.0),
    }
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, d: Defaults) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => load(p)?,
            None => ConfigFile::default(),
        };
        let hamiltonian = args.hamiltonian.clone().or(file.hamiltonian).unwrap_or_else(|| d.id.into());
        if !KNOWN_IDS.contains(&hamiltonian.as_str()) {
            return Err(CliError::Unknown(format!("hamiltonian id '{hamiltonian}'")));
        }
        let n = args.n.or(file.n);
        let (eta0, r0, m0) = opc_defaults(&hamiltonian, n);
        let checks = args.checks.clone().or(file.checks).unwrap_or_else(|| vec!["hH".into(), "opc".into(), "bH".into()]);
        if let Some(c) = checks.iter().find(|c| !KNOWN_CHECKS.contains(&c.as_str())) {
            return Err(CliError::Unknown(format!("check '{c}'")));
        }
        let cfg = Self {
            hamiltonian,
            alpha: args.alpha.map(Coefficient::from).or(file.alpha).unwrap_or(1.0.into()),
            beta: args.beta.map(Coefficient::from).or(file.beta).unwrap_or(1.0.into()),
            gamma: args.gamma.or(file.gamma).unwrap_or(1.0),
            n,
            t_max: args.t_max.or(file.grid.t_max).unwrap_or(d.t_max),
            dt: args.dt.or(file.grid.dt).unwrap_or(d.dt),
            x_min: args.x_min.or(file.grid.x_min).unwrap_or(d.x_min),
            x_max: args.x_max.or(file.grid.x_max).unwrap_or(d.x_max),
            dx: args.dx.or(file.grid.dx).unwrap_or(d.dx),
            u_radii: args.u_radii.or(file.sampling.u_radii).unwrap_or(21),
            u_angles: args.u_angles.or(file.sampling.u_angles).unwrap_or(72),
            u_count: args.u_count.or(file.sampling.u_count).unwrap_or(1001),
            cap_vertices: file.sampling.cap_vertices.unwrap_or(epirep::convex_core::CAP_VERTICES),
            v_count: file.sampling.v_count.unwrap_or(101),
            eta: args.eta.or(file.opc.eta).unwrap_or(eta0),
            r: args.r.or(file.opc.r).unwrap_or(r0),
            m: args.m.or(file.opc.m).unwrap_or(m0),
            inclusion_tol: file.tolerances.inclusion.unwrap_or(1e-6),
            coverage_tol: file.tolerances.coverage.unwrap_or(1e-2),
            representation_tol: file.tolerances.representation.unwrap_or(5e-2),
            t_samples: file.t_samples.unwrap_or_else(|| vec![0.0, 1.0]),
            checks,
            n_list: file.n_list.unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32, 64]),
            seed: args.seed.or(file.seed).unwrap_or(7),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("epirep-out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.t_max > 0.0) {
            return bad("t_max must be positive");
        }
        if !(self.dt > 0.0 && self.dx > 0.0) {
            return bad("steps must be positive");
        }
        if !(self.x_min < self.x_max) {
            return bad("empty x-range");
        }
        if !(self.inclusion_tol > 0.0 && self.coverage_tol > 0.0 && self.representation_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.u_radii < 2 || self.u_angles < 3 || self.u_count < 2 || self.cap_vertices < 8 || self.v_count < 2 {
            return bad("sampling counts too small");
        }
        if !(self.eta > 0.0 && self.r > 0.0 && self.m >= 0.0) {
            return bad("need eta > 0, r > 0, m >= 0");
        }
        if self.t_samples.is_empty() || self.t_samples.iter().any(|t| !(*t >= 0.0)) {
            return bad("t_samples must be nonempty and nonnegative");
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_list must be increasing positive integers");
        }
        if let Coefficient::Piecewise { breaks, values } = &self.alpha {
            Coefficient::piecewise(breaks.clone(), values.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<HamiltonianSpec, CliError> {
        by_id(&self.hamiltonian, self.alpha.clone(), self.beta.clone(), self.gamma, self.n).map_err(|e| CliError::Config(e.to_string()))
    }

    /// x-nodes of the configured window.
    pub fn x_nodes(&self) -> Vec<f64> {
        let k = ((self.x_max - self.x_min) / self.dx).round() as usize;
        (0..=k).map(|j| self.x_min + j as f64 * self.dx).collect()
    }
}
