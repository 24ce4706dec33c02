//! Pipeline settings from a TOML file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use ssn_core::{LaplacianKind, ThresholdConfig};

use crate::error::CliError;

/// Every setting a stage may read. Unset fields fall back to defaults.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub obo: Option<PathBuf>,
    pub gaf: Option<PathBuf>,
    pub organism: Option<String>,
    pub namespace: Option<String>,
    pub measure: Option<String>,
    pub mixer: Option<String>,
    pub matrix: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub alpha_start: Option<f64>,
    pub alpha_step: Option<f64>,
    pub alpha_max: Option<f64>,
    pub tolerance: Option<f64>,
    pub laplacian: Option<String>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    /// Fields set in `flags` win over fields set here.
    pub fn overridden_by(self, flags: PipelineConfig) -> PipelineConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                PipelineConfig { $($f: flags.$f.or(self.$f)),* }
            };
        }
        pick!(
            obo, gaf, organism, namespace, measure, mixer, matrix, network, out, report, format,
            seed, alpha_start, alpha_step, alpha_max, tolerance, laplacian
        )
    }

    pub fn threshold(&self) -> Result<ThresholdConfig, CliError> {
        let d = ThresholdConfig::default();
        let laplacian_kind = match &self.laplacian {
            Some(s) => s.parse::<LaplacianKind>().map_err(CliError::input)?,
            None => d.laplacian_kind,
        };
        let cfg = ThresholdConfig {
            alpha_start: self.alpha_start.unwrap_or(d.alpha_start),
            alpha_step: self.alpha_step.unwrap_or(d.alpha_step),
            alpha_max: self.alpha_max.unwrap_or(d.alpha_max),
            fiedler_tolerance: self.tolerance.unwrap_or(d.fiedler_tolerance),
            laplacian_kind,
        };
        cfg.validate().map_err(|e| CliError::input(e.to_string()))?;
        Ok(cfg)
    }

    pub fn require<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::input(format!("missing --{name} (flag or config file)")))
    }
}
