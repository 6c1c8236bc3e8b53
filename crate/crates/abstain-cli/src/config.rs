//! Config file loading and flag/file/default resolution.
//!
//! The TOML config mirrors flag names (kebab-case). Precedence everywhere:
//! command-line flag, then config file value, then built-in default. The
//! fully resolved configuration is echoed as JSON next to each primary
//! output so a run can be reproduced from its artifacts alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use abstain_core::synthetic::{task_by_name, SyntheticTask};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    /// Either a catalog task name (string) or a full inline task table.
    pub task: Option<toml::Value>,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub method: Option<String>,
    pub grid: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub l2: Option<f64>,
    pub model: Option<String>,
    pub width: Option<usize>,
    pub offset: Option<f64>,
    pub score_noise: Option<f64>,
    pub fit_on_half_holdout: Option<bool>,
    pub threshold: Option<f64>,
    pub title_policy: Option<String>,
    pub b: Option<f64>,
    pub p: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Core(abstain_core::CoreError::Io(e)))?;
                toml::from_str(&text).map_err(|e| {
                    CliError::Msg(format!("config file {}: {e}", p.display()))
                })
            }
        }
    }

    /// Resolves the configured task: a string is a catalog name, a table is
    /// an inline spec (which must carry its own cost).
    pub fn resolve_task(&self, default_c: f64) -> Result<Option<SyntheticTask>, CliError> {
        match &self.task {
            None => Ok(None),
            Some(toml::Value::String(name)) => task_by_name(name, default_c)
                .map(Some)
                .ok_or_else(|| CliError::Msg(format!("unknown task name {name:?}"))),
            Some(table @ toml::Value::Table(_)) => {
                let task: SyntheticTask = table
                    .clone()
                    .try_into()
                    .map_err(|e| CliError::Msg(format!("task table in config: {e}")))?;
                Ok(Some(task))
            }
            Some(other) => Err(CliError::Msg(format!(
                "task must be a name string or a table, got {other:?}"
            ))),
        }
    }
}

/// Picks flag over config over default.
pub fn pick<T>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

pub fn pick_opt<T>(flag: Option<T>, cfg: Option<T>) -> Option<T> {
    flag.or(cfg)
}

/// The resolved settings of a run, echoed as JSON for provenance. No
/// timestamps: two identical runs produce identical echoes.
#[derive(Debug, Default, Serialize)]
pub struct EffectiveConfig {
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<SyntheticTask>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_on_half_holdout: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title_policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quick: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Writes `<out stem>.config.json` next to the primary output.
pub fn echo_config(effective: &EffectiveConfig, out: &Path) -> Result<(), CliError> {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    let sibling = out.with_file_name(format!("{stem}.config.json"));
    let text = serde_json::to_string_pretty(effective)
        .map_err(|e| CliError::Core(abstain_core::CoreError::Json(e)))?;
    std::fs::write(&sibling, text + "\n")
        .map_err(|e| CliError::Core(abstain_core::CoreError::Io(e)))?;
    Ok(())
}
