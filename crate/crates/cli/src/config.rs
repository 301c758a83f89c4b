//! Run configuration files and command-line overrides.

use std::path::Path;

use laguerre_core::{PipelineConfig, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Contents of a config file: a `[scenario]` table and a `[pipeline]` table.
/// Manifests reuse this layout and add a `[manifest]` table, so a manifest
/// is itself a valid config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub pipeline: PipelineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<toml::Table>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        cfg.manifest = None;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.scenario.validate()?;
        self.pipeline.validate()?;
        Ok(())
    }

    /// Sets `key` (a dotted path such as `pipeline.stage1.delay`, or a short
    /// alias) to a TOML literal.
    pub fn set(&self, key: &str, literal: &str) -> CliResult<Self> {
        let path = resolve_alias(key);
        let mut value =
            toml::Value::try_from(self).map_err(|e| CliError::Usage(format!("cannot represent config: {e}")))?;
        let parsed = parse_literal(literal)?;
        let (parents, leaf) = match path.rsplit_once('.') {
            Some((head, leaf)) => (head.split('.').collect::<Vec<_>>(), leaf),
            None => (Vec::new(), path.as_str()),
        };
        let unknown = || CliError::Usage(format!("unknown config field `{path}`"));
        let mut table = value.as_table_mut().ok_or_else(unknown)?;
        for part in parents {
            table = table
                .get_mut(part)
                .and_then(toml::Value::as_table_mut)
                .ok_or_else(unknown)?;
        }
        let old = table.get(leaf).ok_or_else(unknown)?;
        // integers are accepted where floats are expected
        let new = match (old, parsed) {
            (toml::Value::Float(_), toml::Value::Integer(v)) => toml::Value::Float(v as f64),
            (_, v) => v,
        };
        table.insert(leaf.to_string(), new);
        let cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("`{key} = {literal}`: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        Ok(toml::to_string(self)?)
    }
}

fn resolve_alias(key: &str) -> String {
    match key {
        "qz" => "pipeline.stage1.delay",
        "sigma_z1" => "pipeline.stage1.sigma_z",
        "B1" => "pipeline.stage1.degree",
        "B2" => "pipeline.stage2.degree",
        "sigma_z2" => "pipeline.stage2.sigma_z",
        "psf" => "scenario.psf_std",
        "noise" => "scenario.noise_std",
        "seed" => "scenario.seed",
        "clutter_speed" => "scenario.clutter_speed_factor",
        "clutter_freq" => "scenario.clutter_frequency_factor",
        other => other,
    }
    .to_string()
}

fn parse_literal(literal: &str) -> CliResult<toml::Value> {
    let doc: toml::Table = format!("v = {literal}")
        .parse()
        .or_else(|_| format!("v = \"{literal}\"").parse())
        .map_err(|e: toml::de::Error| CliError::Usage(format!("bad value `{literal}`: {e}")))?;
    Ok(doc["v"].clone())
}

/// Parses `key=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> CliResult<(String, Vec<String>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("sweep `{spec}` is not key=v1,v2,...")))?;
    let values: Vec<String> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect();
    if key.trim().is_empty() || values.is_empty() {
        return Err(CliError::Usage(format!("sweep `{spec}` has no values")));
    }
    Ok((key.trim().to_string(), values))
}
