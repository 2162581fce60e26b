use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bpso::{IdpsoConfig, Strategy};
use crate::error::{Error, Result};
use crate::svm::{KernelParams, SolverConfig};
use crate::synthetic::SplitCounts;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingProtocol {
    /// Questioned genuines per training writer, each paired with every
    /// reference.
    pub genuine_per_writer: usize,
    pub random_forgeries_per_writer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryProtocol {
    pub genuine_queries: usize,
    pub skilled_queries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferTarget {
    pub name: String,
    pub dataset: PathBuf,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
}

/// Experiment description, read from TOML. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Reference signatures per writer.
    pub references: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    pub split: SplitCounts,
    pub training: TrainingProtocol,
    pub queries: QueryProtocol,
    #[serde(default)]
    pub idpso: IdpsoConfig,
    #[serde(default)]
    pub kernel: KernelParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub transfer: Vec<TransferTarget>,
}

fn default_replications() -> usize {
    5
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut config.dataset);
        fix(&mut config.output_dir);
        if let Some(m) = config.manifest.as_mut() {
            fix(m);
        }
        for t in &mut config.transfer {
            fix(&mut t.dataset);
            if let Some(m) = t.manifest.as_mut() {
                fix(m);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.references == 0 {
            return Err(Error::Config("references must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategy list is empty".into()));
        }
        let s = &self.split;
        for (name, n) in [
            ("train", s.train),
            ("optimization", s.optimization),
            ("selection", s.selection),
            ("exploitation", s.exploitation),
        ] {
            if n == 0 {
                return Err(Error::Config(format!(
                    "split part {name} must not be empty"
                )));
            }
        }
        let mut names: Vec<&str> = self.transfer.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("transfer target names must be unique".into()));
        }
        self.kernel.validate()?;
        self.idpso.validate()
    }

    /// Seed of replication `r`: master seed plus index.
    pub fn replication_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }
}
