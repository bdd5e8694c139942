//! Run configuration as read from JSON.

use std::path::Path;

use rgquad_core::{CatalogParams, ModelSpec, DEFAULT_SPIN_CAP};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Seed used when neither the config nor the command line gives one.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSource,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    Catalog(CatalogParams),
    Inline(InlineModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineModel {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub fields: Vec<[f64; 3]>,
    #[serde(rename = "Gamma")]
    pub couplings: Vec<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Integrability scan, coefficient derivation and operator checks.
    pub integrability: f64,
    /// Newton convergence on `||F||`, relative to `max(1, max K)`.
    pub solver: f64,
    /// Tuple deduplication; derived from `K` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dedupe: Option<f64>,
    /// Max-norm distance for oracle matching.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrability: 1e-10,
            solver: 1e-12,
            dedupe: None,
            oracle: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Homotopy,
    Multistart,
    /// Homotopy, or multistart when some field is too small to start from.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: SolverMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            seed: None,
            max_iter: 100,
            sample_count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub enabled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension_cap: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            dimension_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Tsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Include wall-clock timings; off for byte-stable reports.
    pub timings: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: OutputFormat::Json,
            path: None,
            timings: true,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub output: Option<String>,
    pub cap: Option<usize>,
    /// Value of `RGQUAD_CAP`, if set.
    pub env_cap: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        let positive = [
            ("tolerances.integrability", Some(t.integrability)),
            ("tolerances.solver", Some(t.solver)),
            ("tolerances.dedupe", t.dedupe),
            ("tolerances.oracle", Some(t.oracle)),
        ];
        for (name, value) in positive {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Parse(format!("{name} must be a positive number")));
                }
            }
        }
        if let ModelSource::Inline(m) = &self.model {
            if m.fields.len() != m.n || m.couplings.len() != m.n {
                return Err(CliError::Parse(format!(
                    "model.inline: N = {} but B has {} rows and Gamma has {}",
                    m.n,
                    m.fields.len(),
                    m.couplings.len()
                )));
            }
        }
        Ok(())
    }

    /// Applies command-line and environment overrides and fills in defaults,
    /// so that the result reproduces the run on its own.
    pub fn resolve(mut self, overrides: &Overrides) -> Self {
        self.solver.seed = overrides.seed.or(self.solver.seed).or(Some(DEFAULT_SEED));
        if let Some(format) = overrides.format {
            self.output.format = format;
        }
        if let Some(path) = &overrides.output {
            self.output.path = Some(path.clone());
        }
        let cap = overrides
            .cap
            .or(overrides.env_cap)
            .or(self.oracle.dimension_cap)
            .unwrap_or(DEFAULT_SPIN_CAP);
        self.oracle.dimension_cap = Some(cap);
        self
    }

    pub fn seed(&self) -> u64 {
        self.solver.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn cap(&self) -> usize {
        self.oracle.dimension_cap.unwrap_or(DEFAULT_SPIN_CAP)
    }

    pub fn build_model(&self) -> Result<ModelSpec, CliError> {
        let spec = match &self.model {
            ModelSource::Catalog(params) => params.build(),
            ModelSource::Inline(m) => ModelSpec::new(m.fields.clone(), m.couplings.clone()),
        };
        spec.map_err(|e| CliError::Parse(format!("model: {e}")))
    }
}
