//! TOML configuration with `CPSIM_<SECTION>__<KEY>` environment overrides.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use priority_cp::experiments::{ExperimentConfig, InitialState};
use priority_cp::renorm::Side;
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "CPSIM_";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Shared by every subcommand: `experiment.seed` is the master seed.
    pub experiment: ExperimentConfig,
    pub simulate: SimulateConfig,
    pub edge_speed: EdgeSpeedConfig,
    pub barrier: BarrierConfig,
    pub renorm: RenormConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub lambda: f64,
    pub range: u32,
    pub n: i32,
    pub t_max: f64,
    pub initial: InitialState,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            range: 1,
            n: 10,
            t_max: 100.0,
            initial: InitialState::Reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeSpeedConfig {
    pub lambda: f64,
    pub range: u32,
    pub t_max: f64,
    pub replicas: usize,
}

impl Default for EdgeSpeedConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            range: 1,
            t_max: 100.0,
            replicas: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierConfig {
    pub lambda: f64,
    pub range: u32,
    pub n: i32,
    pub n_hat: u32,
    pub k_hat: u32,
    /// Estimated with the `edge_speed` settings when absent.
    pub alpha_hat: Option<f64>,
    pub side: Side,
    /// Defaults to `A₂` for the right side and `A₄` for the left.
    pub sites: Option<Vec<i32>>,
    pub replicas: u64,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            range: 2,
            n: 40,
            n_hat: 1,
            k_hat: 1,
            alpha_hat: None,
            side: Side::Right,
            sites: None,
            replicas: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenormConfig {
    pub lambda: f64,
    pub range: u32,
    pub n_hat: u32,
    pub k_hat: u32,
    /// Estimated with the `edge_speed` settings when absent.
    pub alpha_hat: Option<f64>,
    pub m_lo: i32,
    pub m_hi: i32,
    pub rows: u32,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            range: 1,
            n_hat: 10,
            k_hat: 2,
            alpha_hat: None,
            m_lo: -4,
            m_hi: 4,
            rows: 4,
        }
    }
}

/// Reads the config file (if any), applies environment overrides and deserializes.
pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<Config> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            text.parse::<toml::Table>()
                .map_err(|e| anyhow!("{}: {}", p.display(), e.message()))?
        }
        None => toml::Table::new(),
    };
    apply_env(&mut table, env)?;
    Config::deserialize(toml::Value::Table(table)).map_err(|e| anyhow!("{}", e.message()))
}

/// `CPSIM_EXPERIMENT__N_LIST="[10, 20]"` sets `experiment.n_list`. Values are
/// parsed as TOML literals and fall back to plain strings. Variables with the
/// prefix but without `__` are not overrides and are ignored.
fn apply_env(table: &mut toml::Table, env: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    let mut vars: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX) && k.contains("__"))
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..].split("__").map(str::to_lowercase).collect();
        if path.iter().any(String::is_empty) {
            bail!("malformed override variable {key}");
        }
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or(toml::Value::String(raw));
        let (last, parents) = path.split_last().expect("non-empty");
        let mut node = &mut *table;
        for p in parents {
            node = node
                .entry(p.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| anyhow!("override {key}: `{p}` is not a table"))?;
        }
        node.insert(last.clone(), value);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_without_file() {
        assert_eq!(load(None, vec![]).unwrap(), Config::default());
    }

    #[test]
    fn env_overrides_nested_keys() {
        let c = load(
            None,
            env(&[
                ("CPSIM_EXPERIMENT__LAMBDA", "3.5"),
                ("CPSIM_EXPERIMENT__N_LIST", "[5, 6]"),
                ("CPSIM_EXPERIMENT__SCHEDULE__A_N", "100.0"),
                ("CPSIM_SIMULATE__INITIAL", "swapped"),
                ("CPSIM_ACCEPTANCE_STRICT", "1"),
                ("HOME", "/root"),
            ]),
        )
        .unwrap();
        assert_eq!(c.experiment.lambda, 3.5);
        assert_eq!(c.experiment.n_list, vec![5, 6]);
        assert_eq!(c.experiment.schedule.a_n, Some(100.0));
        assert_eq!(c.simulate.initial, InitialState::Swapped);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = load(None, env(&[("CPSIM_EXPERIMENT__LAMDA", "2")])).unwrap_err().to_string();
        assert!(e.contains("lamda") && e.contains("lambda"), "{e}");
        let e = load(None, env(&[("CPSIM_PLOTS__X", "2")])).unwrap_err().to_string();
        assert!(e.contains("plots"), "{e}");
    }
}
