//! Campaign configuration: a single JSON file plus flag overrides, with flags
//! winning over the file and the `TRACEINEQ_SEED` environment variable acting
//! only as a seed default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every check section a campaign can run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Monotonicity,
    Dpi,
    ProofChain,
    Superadditivity,
    Homogeneity,
    Concavity,
    GoldenThompson,
    GibbsDuality,
    Curvature,
    ClassHierarchy,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::Monotonicity,
        CheckKind::Dpi,
        CheckKind::ProofChain,
        CheckKind::Superadditivity,
        CheckKind::Homogeneity,
        CheckKind::Concavity,
        CheckKind::GoldenThompson,
        CheckKind::GibbsDuality,
        CheckKind::Curvature,
        CheckKind::ClassHierarchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Monotonicity => "monotonicity",
            CheckKind::Dpi => "dpi",
            CheckKind::ProofChain => "proof_chain",
            CheckKind::Superadditivity => "superadditivity",
            CheckKind::Homogeneity => "homogeneity",
            CheckKind::Concavity => "concavity",
            CheckKind::GoldenThompson => "golden_thompson",
            CheckKind::GibbsDuality => "gibbs_duality",
            CheckKind::Curvature => "curvature",
            CheckKind::ClassHierarchy => "class_hierarchy",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown check '{name}'; expected one of: {}",
                    Self::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }

    /// Default tolerance on the normalized slack. A few checks verify exact
    /// identities and get tighter bounds than the generic 1e-8.
    pub fn default_tol(self) -> f64 {
        match self {
            CheckKind::Homogeneity => 1e-10,
            CheckKind::GoldenThompson => 1e-10,
            CheckKind::Curvature => 1e-6,
            _ => 1e-8,
        }
    }

    /// Stream tag for per-trial RNG derivation.
    pub fn stream(self) -> u64 {
        1000 + Self::ALL.iter().position(|k| *k == self).unwrap() as u64
    }

    pub fn needs_maps(self) -> bool {
        matches!(
            self,
            CheckKind::Monotonicity
                | CheckKind::Dpi
                | CheckKind::ProofChain
                | CheckKind::ClassHierarchy
        )
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Map families a campaign may draw from.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum MapFamily {
    CpUnital,
    PositiveNoncp,
    Transpose,
    BlockEmbed,
}

impl MapFamily {
    pub const ALL: [MapFamily; 4] = [
        MapFamily::CpUnital,
        MapFamily::PositiveNoncp,
        MapFamily::Transpose,
        MapFamily::BlockEmbed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::CpUnital => "cp_unital",
            MapFamily::PositiveNoncp => "positive_noncp",
            MapFamily::Transpose => "transpose",
            MapFamily::BlockEmbed => "block_embed",
        }
    }

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown map family '{name}'; expected one of: {}",
                    Self::ALL.map(|k| k.name()).join(", ")
                ))
            })
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved campaign configuration. Serialized into the report so a
/// report is replayable from its own fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Default trials per enabled check.
    pub trials: usize,
    /// Per-check trial overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub trials_override: BTreeMap<CheckKind, usize>,
    /// Inclusive dimension range for sampled instances.
    pub dim_range: (usize, usize),
    pub spectrum_scale: f64,
    pub condition_cap: f64,
    /// Per-check tolerance overrides on the normalized slack.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tol_override: BTreeMap<CheckKind, f64>,
    /// Checks to run, in report order.
    pub checks: Vec<CheckKind>,
    /// Map families instances may be drawn from.
    pub map_families: Vec<MapFamily>,
    pub report_path: PathBuf,
    pub witness_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 200,
            trials_override: BTreeMap::new(),
            dim_range: (2, 6),
            spectrum_scale: 2.0,
            condition_cap: 1e4,
            tol_override: BTreeMap::new(),
            checks: CheckKind::ALL.to_vec(),
            map_families: MapFamily::ALL.to_vec(),
            report_path: PathBuf::from("campaign-report.json"),
            witness_dir: PathBuf::from("witnesses"),
            csv_path: None,
        }
    }
}

impl CampaignConfig {
    pub fn effective_trials(&self, check: CheckKind) -> usize {
        *self.trials_override.get(&check).unwrap_or(&self.trials)
    }

    pub fn effective_tol(&self, check: CheckKind) -> f64 {
        *self
            .tol_override
            .get(&check)
            .unwrap_or(&check.default_tol())
    }

    /// The sampler view of this config.
    pub fn sampler(&self) -> traceineq_core::SamplerConfig {
        traceineq_core::SamplerConfig {
            seed: self.seed,
            dim_range: self.dim_range,
            spectrum_scale: self.spectrum_scale,
            condition_cap: self.condition_cap,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.sampler()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.checks.is_empty() {
            return Err(CliError::Config(
                "checks: at least one check must be enabled".to_string(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &check in &self.checks {
            if !seen.insert(check) {
                return Err(CliError::Config(format!(
                    "checks: '{check}' is listed more than once"
                )));
            }
        }
        for &check in &self.checks {
            if self.effective_trials(check) == 0 {
                return Err(CliError::Config(format!(
                    "trials: check '{check}' has 0 trials; every enabled check needs at least 1"
                )));
            }
            if self.effective_tol(check) <= 0.0 || self.effective_tol(check).is_nan() {
                return Err(CliError::Config(format!(
                    "tol_override: check '{check}' has a nonpositive tolerance"
                )));
            }
            if check.needs_maps() && self.map_families.is_empty() {
                return Err(CliError::Config(format!(
                    "map_families: check '{check}' needs at least one map family"
                )));
            }
        }
        // Map checks additionally need dimensions the enabled families can
        // realize; with a nonempty family list and a valid range the square
        // pairs always exist, so nothing further to check here.
        Ok(())
    }

    /// Dimensions the campaign sweeps, inclusive.
    pub fn dims(&self) -> Vec<usize> {
        (self.dim_range.0..=self.dim_range.1).collect()
    }
}

/// Config-file shape: every field optional so flag and environment defaults
/// merge cleanly. Unknown fields are rejected with the field name.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub trials_override: Option<BTreeMap<CheckKind, usize>>,
    pub dim_range: Option<(usize, usize)>,
    pub spectrum_scale: Option<f64>,
    pub condition_cap: Option<f64>,
    pub tol_override: Option<BTreeMap<CheckKind, f64>>,
    pub checks: Option<Vec<CheckKind>>,
    pub map_families: Option<Vec<MapFamily>>,
    pub report_path: Option<PathBuf>,
    pub witness_dir: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
}

impl PartialConfig {
    /// Merge onto the builtin defaults (with the environment seed, when set,
    /// replacing the builtin seed default).
    pub fn resolve(self, env_seed: Option<u64>) -> CampaignConfig {
        let mut cfg = CampaignConfig::default();
        if let Some(seed) = env_seed {
            cfg.seed = seed;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.trials_override {
            cfg.trials_override = v;
        }
        if let Some(v) = self.dim_range {
            cfg.dim_range = v;
        }
        if let Some(v) = self.spectrum_scale {
            cfg.spectrum_scale = v;
        }
        if let Some(v) = self.condition_cap {
            cfg.condition_cap = v;
        }
        if let Some(v) = self.tol_override {
            cfg.tol_override = v;
        }
        if let Some(v) = self.checks {
            cfg.checks = v;
        }
        if let Some(v) = self.map_families {
            cfg.map_families = v;
        }
        if let Some(v) = self.report_path {
            cfg.report_path = v;
        }
        if let Some(v) = self.witness_dir {
            cfg.witness_dir = v;
        }
        if let Some(v) = self.csv_path {
            cfg.csv_path = Some(v);
        }
        cfg
    }
}
