//! Run defaults. Every field has a built-in default; a TOML file may
//! override any subset and command-line flags override the file.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use tacsim_core::opponents::{AdapterEndpoint, OpponentConfig};
use tacsim_planner::PlannerConfig;
use tacsim_verify::dataset::{DatasetConfig, EvaConfig};
use tacsim_verify::{MetricWeights, RubricWeights};

/// Environment variable naming the external opponent adapter: an
/// `http://` or `https://` base URL, or a command line for a stdio adapter.
pub const OPPONENT_ENDPOINT_VAR: &str = "TACSIM_OPPONENT_ENDPOINT";
/// Environment variable naming an external plan generator base URL.
pub const PLAN_ENDPOINT_VAR: &str = "TACSIM_PLAN_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OpponentKind {
    Nobrain,
    Predictive,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Inclusive seed range `a..b`, or a comma-separated list.
    pub seeds: String,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub opponent: OpponentKind,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { seeds: "1..100".into(), workers: 0, opponent: OpponentKind::Nobrain }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpponentSettings {
    /// Prediction horizon of the predictive opponent, in ticks.
    pub h_pred: usize,
    pub w_b: f64,
    pub w_f: f64,
    /// Per-call timeout of the external adapter.
    pub timeout_ms: u64,
    /// State-history ticks sent to the external adapter.
    pub history_tail: usize,
    /// External adapter endpoint; the environment variable takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

impl Default for OpponentSettings {
    fn default() -> Self {
        OpponentSettings { h_pred: 20, w_b: 2.0, w_f: 1.0, timeout_ms: 2000, history_tail: 20, endpoint: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSettings {
    /// Candidates requested per `plan` run.
    pub candidates: usize,
}

impl Default for PlanSettings {
    fn default() -> Self {
        PlanSettings { candidates: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub plan: PlanSettings,
    pub planner: PlannerConfig,
    pub verify: VerifySettings,
    pub opponent: OpponentSettings,
    pub metrics: MetricWeights,
    pub rubric: RubricWeights,
    pub dataset: DatasetConfig,
    pub eva: EvaConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let config: Config = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        config.metrics.check()?;
        config.eva.check()?;
        Ok(config)
    }

    pub fn digest(&self) -> String {
        tacsim_core::canonical::digest(self).expect("config serializes")
    }

    pub fn opponent_config(&self, kind: OpponentKind) -> Result<OpponentConfig> {
        let o = &self.opponent;
        Ok(match kind {
            OpponentKind::Nobrain => OpponentConfig::NoBrain,
            OpponentKind::Predictive => OpponentConfig::Predictive { h_pred: o.h_pred, w_b: o.w_b, w_f: o.w_f },
            OpponentKind::External => {
                let text = std::env::var(OPPONENT_ENDPOINT_VAR).ok().or_else(|| o.endpoint.clone());
                let Some(text) = text else {
                    bail!("the external opponent needs {OPPONENT_ENDPOINT_VAR} or opponent.endpoint in the config");
                };
                OpponentConfig::External { endpoint: parse_endpoint(&text)?, timeout_ms: o.timeout_ms, history_tail: o.history_tail }
            }
        })
    }

    /// Planner settings with the external plan endpoint taken from the
    /// environment when set.
    pub fn planner_config(&self) -> PlannerConfig {
        let mut cfg = self.planner.clone();
        if let Ok(url) = std::env::var(PLAN_ENDPOINT_VAR) {
            cfg.plan_endpoint = Some(url);
        }
        cfg
    }
}

pub fn parse_endpoint(text: &str) -> Result<AdapterEndpoint> {
    let text = text.trim();
    if text.starts_with("http://") || text.starts_with("https://") {
        return Ok(AdapterEndpoint::Http { url: text.to_string() });
    }
    let mut words = text.split_whitespace().map(str::to_string);
    let Some(command) = words.next() else {
        bail!("empty adapter endpoint");
    };
    Ok(AdapterEndpoint::Stdio { command, args: words.collect() })
}

/// Parse `a..b` (inclusive), `a..=b`, a single seed, or a comma list.
pub fn parse_seeds(text: &str) -> std::result::Result<Vec<u64>, String> {
    let text = text.trim();
    let number = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("invalid seed '{}'", s.trim()));
    let seeds = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (number(a)?, number(b.strip_prefix('=').unwrap_or(b))?);
        if a > b {
            return Err(format!("empty seed range {text}"));
        }
        (a..=b).collect()
    } else {
        text.split(',').map(number).collect::<std::result::Result<Vec<_>, _>>()?
    };
    if seeds.is_empty() {
        return Err("no seeds".into());
    }
    Ok(seeds)
}
