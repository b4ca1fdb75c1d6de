//! Experiment configuration, read from TOML with command-line overrides.

use std::path::{Path, PathBuf};

use helmsweep::calibration::DEFAULT_PML_STRENGTH;
use helmsweep::scenario::{Force, Medium, ScenarioSpec};
use helmsweep::GmresConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Table,
    OracleCheck,
    SweepScaling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    /// Points per typical wavelength; `n + 1 = ppw * freq`.
    pub ppw: f64,
    /// Explicit interior points per axis, overriding `ppw`.
    pub n: Option<usize>,
    /// Frequencies `omega / 2 pi`.
    pub frequencies: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 2, ppw: 8.0, n: None, frequencies: vec![16.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub gamma: usize,
    /// Defaults to `gamma`.
    pub gamma_aux: Option<usize>,
    pub b: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { gamma: 9, gamma_aux: None, b: 8 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmlConfig {
    /// Boundary strength `C`; defaults to the calibrated constant times `c_max`.
    pub strength: Option<f64>,
    /// Auxiliary strength; defaults to the boundary strength.
    pub aux_strength: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Factor complex-symmetric scaled subproblems; defaults to true in 3D only.
    pub symmetric: Option<bool>,
    /// Rayon worker threads; unset uses all cores.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub grid: GridConfig,
    pub partition: PartitionConfig,
    pub pml: PmlConfig,
    pub scenario: ScenarioSpec,
    pub gmres: GmresConfig,
    pub solver: SolverConfig,
    pub output: PathBuf,
    /// Write the solution of every run next to the CSV.
    pub dump_fields: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Table,
            grid: GridConfig::default(),
            partition: PartitionConfig::default(),
            pml: PmlConfig::default(),
            scenario: ScenarioSpec { medium: Medium::lens(), force: Force::preset("a").expect("preset exists") },
            gmres: GmresConfig::default(),
            solver: SolverConfig::default(),
            output: PathBuf::from("out"),
            dump_fields: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.grid.dim) {
            return Err(CliError::Config(format!("dim must be 1, 2 or 3, got {}", self.grid.dim)));
        }
        if self.grid.n.is_none() && !(self.grid.ppw > 0.0) {
            return Err(CliError::Config("ppw must be positive".into()));
        }
        if let Some(f) = self.grid.frequencies.iter().find(|f| !(**f > 0.0)) {
            return Err(CliError::Config(format!("frequencies must be positive, got {f}")));
        }
        self.gmres.validate()?;
        Ok(())
    }

    pub fn gamma_aux(&self) -> usize {
        self.partition.gamma_aux.unwrap_or(self.partition.gamma)
    }

    pub fn symmetric(&self) -> bool {
        self.solver.symmetric.unwrap_or(self.grid.dim == 3)
    }

    /// `(boundary, auxiliary)` PML strengths for a medium with maximal velocity `c_max`.
    pub fn strengths(&self, c_max: f64) -> (f64, f64) {
        let boundary = self.pml.strength.unwrap_or(DEFAULT_PML_STRENGTH * c_max);
        (boundary, self.pml.aux_strength.unwrap_or(boundary))
    }

    /// Hex SHA-256 prefix of the canonical JSON form; identical configs share a hash.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}

/// Command-line values that replace configuration fields when given.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub frequencies: Option<Vec<f64>>,
    pub dim: Option<usize>,
    pub gamma: Option<usize>,
    pub b: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(f) = &self.frequencies {
            cfg.grid.frequencies = f.clone();
        }
        if let Some(d) = self.dim {
            cfg.grid.dim = d;
        }
        if let Some(g) = self.gamma {
            cfg.partition.gamma = g;
        }
        if let Some(b) = self.b {
            cfg.partition.b = b;
        }
        if let Some(seed) = self.seed {
            match &mut cfg.scenario.medium {
                Medium::Random { seed: s, .. } => *s = seed,
                other => {
                    return Err(CliError::Config(format!("--seed applies to the random medium, not {}", other.label())))
                }
            }
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Some(t) = self.threads {
            cfg.solver.threads = Some(t);
        }
        cfg.validate()
    }
}
