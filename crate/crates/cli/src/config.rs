//! Run configuration file and config hashing.

use std::path::Path;

use anyhow::Result;
use bjbench::optim::{CemConfig, PgConfig, SpsaConfig};
use bjbench::{Error, Rules, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Betting defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetConfig {
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub hands_per_bet: u64,
    pub starting_bankroll: f64,
    pub hands_per_trial: u64,
    pub trials: u64,
    pub monotonicity_trials: u64,
    pub monotonicity_bets: Vec<f64>,
}

impl Default for BetConfig {
    fn default() -> Self {
        BetConfig {
            grid_min: 1.0,
            grid_max: 100.0,
            grid_points: 100,
            hands_per_bet: 2_000,
            starting_bankroll: 10_000.0,
            hands_per_trial: 5_000,
            trials: 30,
            monotonicity_trials: 100,
            monotonicity_bets: vec![1.0, 50.5, 100.0],
        }
    }
}

/// Contents of a `--config` file. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub rules: Option<Rules>,
    pub seed: Option<u64>,
    pub pg: PgConfig,
    pub spsa: SpsaConfig,
    pub cem: CemConfig,
    pub bet: BetConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&src).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.preset.is_some() && cfg.rules.is_some() {
            return Err(Error::Config("config sets both `preset` and `[rules]`; choose one".into()).into());
        }
        Ok(cfg)
    }
}

/// Resolve ruleset flags. Command-line choices win over the config file.
pub fn resolve_rules(preset: Option<&str>, rules_file: Option<&Path>, cfg: &RunConfig) -> Result<(String, Rules)> {
    if let Some(path) = rules_file {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        let rules =
            Rules::from_toml_str(&src).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        rules.validate().map_err(|e| Error::Config(e.to_string()))?;
        return Ok((path.display().to_string(), rules));
    }
    let name = preset.map(str::to_string).or_else(|| cfg.preset.clone());
    if let Some(name) = name {
        let v: Variant = name.parse()?;
        return Ok((v.name().to_string(), v.rules()));
    }
    if let Some(rules) = cfg.rules {
        rules.validate().map_err(|e| Error::Config(e.to_string()))?;
        return Ok(("config".to_string(), rules));
    }
    Ok((Variant::Benchmark.name().to_string(), Variant::Benchmark.rules()))
}

/// Sha256 of the canonical JSON form of the effective configuration.
pub fn config_hash<T: Serialize>(effective: &T) -> Result<String> {
    let bytes = serde_json::to_vec(effective)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Explicit seed, else the config's, else a fresh one that is printed.
pub fn resolve_seed(flag: Option<u64>, cfg: &RunConfig) -> u64 {
    flag.or(cfg.seed).unwrap_or_else(|| {
        let t = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        let seed = bjbench::rng::mix64(t ^ u64::from(std::process::id()));
        eprintln!("no seed given; using seed {seed}");
        seed
    })
}
