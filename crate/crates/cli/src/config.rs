//! Run configuration and lattice files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thetavoa::lattice::{validate, EvenLattice};

use crate::error::{CliError, Result};

/// Suites that accept a tolerance override.
pub const SUITES: [&str; 5] = ["special-functions", "theta-classical", "combinatorics", "npoint", "main-theorem"];

/// `(name, default, max)` for every recognised cutoff.
pub const CUTOFFS: [(&str, u64, u64); 11] = [
    ("points", 20, 1000),
    ("fit_samples", 8, 200),
    ("holdout", 20, 1000),
    ("words", 5, 50),
    ("word_length", 6, 30),
    ("fock_grade", 6, 12),
    ("x_span", 4, 16),
    ("sign_lemma_n", 8, 12),
    ("count_n", 12, 12),
    ("multinomial", 30, 60),
    ("regroup_degree", 12, 20),
];

pub fn default_tolerance(suite: &str) -> f64 {
    match suite {
        "special-functions" => 1e-9,
        "theta-classical" => 1e-10,
        "npoint" => 1e-9,
        "main-theorem" => 1e-7,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice_file: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
    pub cutoffs: BTreeMap<String, u64>,
    pub seed: u64,
    pub im_tau_floor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lattice_file: None,
            tolerances: BTreeMap::new(),
            cutoffs: BTreeMap::new(),
            seed: 0,
            im_tau_floor: 0.05,
        }
    }
}

impl RunConfig {
    /// Reads a JSON config. A relative `lattice_file` is taken relative to
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(file), Some(dir)) = (&cfg.lattice_file, path.parent()) {
            if file.is_relative() {
                cfg.lattice_file = Some(dir.join(file));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (suite, tol) in &self.tolerances {
            if !SUITES.contains(&suite.as_str()) {
                return Err(CliError::Config(format!("unknown suite in tolerances: {suite}")));
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(CliError::Config(format!("tolerance for {suite} must be positive, got {tol}")));
            }
        }
        for (name, value) in &self.cutoffs {
            let Some(&(_, _, max)) = CUTOFFS.iter().find(|(n, _, _)| n == name) else {
                return Err(CliError::Config(format!("unknown cutoff: {name}")));
            };
            if *value == 0 || *value > max {
                return Err(CliError::Config(format!("cutoff {name} = {value} outside 1..={max}")));
            }
        }
        if !(self.im_tau_floor.is_finite() && self.im_tau_floor > 0.0) {
            return Err(CliError::Config(format!("im_tau_floor must be positive, got {}", self.im_tau_floor)));
        }
        Ok(())
    }

    pub fn tolerance(&self, suite: &str) -> f64 {
        self.tolerances.get(suite).copied().unwrap_or_else(|| default_tolerance(suite))
    }

    /// Samples for a transition-matrix fit: the `fit_samples` cutoff, but
    /// never fewer than twice the number of modules.
    pub fn fit_samples(&self, lattice: &EvenLattice) -> usize {
        self.cutoff("fit_samples").max(2 * lattice.discriminant_order())
    }

    pub fn cutoff(&self, name: &str) -> usize {
        let default = CUTOFFS
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|&(_, d, _)| d)
            .expect("cutoff name is registered");
        self.cutoffs.get(name).copied().unwrap_or(default) as usize
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    name: String,
    gram: Vec<Vec<i64>>,
}

/// A validated lattice together with its display name.
#[derive(Clone, Debug)]
pub struct NamedLattice {
    pub name: String,
    pub lattice: EvenLattice,
}

impl NamedLattice {
    /// The rank-one lattice `[[4]]`, used when no lattice is given.
    pub fn default_rank_one() -> Self {
        Self {
            name: "[[4]]".into(),
            lattice: validate(vec![vec![4]]).expect("[[4]] is even and positive definite"),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let err = |reason: String| CliError::LatticeFile {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let file: LatticeFile = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        let lattice = validate(file.gram).map_err(|e| err(e.to_string()))?;
        Ok(Self { name: file.name, lattice })
    }
}
