//! Flat `key = value` experiment files. Keys are long flag names; flags on
//! the command line override file entries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::{ArgMatches, Command};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExperimentConfig {
    pub subcommand: Option<String>,
    pub entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(CliError::Validation(format!("config line {}: empty key", i + 1)));
            }
            if k == "subcommand" {
                cfg.subcommand = Some(v.to_string());
            } else {
                cfg.entries.insert(k.replace('_', "-"), v.to_string());
            }
        }
        Ok(cfg)
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        if let Some(sub) = &self.subcommand {
            let _ = writeln!(s, "subcommand = {sub}");
        }
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Effective values (including defaults) of a parsed subcommand.
    pub fn from_matches(sub: &str, cmd: &Command, m: &ArgMatches) -> Self {
        let mut entries = BTreeMap::new();
        for arg in cmd.get_arguments() {
            let id = arg.get_id().as_str();
            if NON_CONFIG.contains(&id) {
                continue;
            }
            let Some(long) = arg.get_long() else { continue };
            if let Ok(Some(mut vals)) = m.try_get_raw(id) {
                if let Some(v) = vals.next() {
                    entries.insert(long.to_string(), v.to_string_lossy().into_owned());
                }
            }
        }
        ExperimentConfig {
            subcommand: Some(sub.to_string()),
            entries,
        }
    }

    /// Converts entries to `--key value` arguments for `cmd`.
    pub fn to_args(&self, cmd: &Command) -> Result<Vec<String>, CliError> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            let arg = cmd
                .get_arguments()
                .find(|a| a.get_long() == Some(k.as_str()))
                .ok_or_else(|| CliError::Validation(format!("config key '{k}' is not an option of this subcommand")))?;
            if arg.get_action().takes_values() {
                out.push(format!("--{k}"));
                out.push(v.clone());
            } else {
                match v.as_str() {
                    "true" => out.push(format!("--{k}")),
                    "false" => {}
                    _ => return Err(CliError::Validation(format!("config key '{k}' expects true or false"))),
                }
            }
        }
        Ok(out)
    }
}

/// Options that steer a run without being part of the experiment.
const NON_CONFIG: &[&str] = &["config", "dump_config", "out", "help"];
