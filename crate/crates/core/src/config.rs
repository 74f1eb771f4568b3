//! Run configuration: one TOML document with sections `[structure]`, `[scenario]`,
//! `[cost]`, `[rsm]`, `[ga]` and `[sa]`, plus a global seed from which every
//! seed not set explicitly is derived.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optim::GaConfig;
use crate::scenario::{build_scenario, CostSpec, Scenario, ScenarioSettings, ScenarioSpec, StructureSource};
use crate::surrogate::weight_count;
use crate::updating::{
    ga_update, read_design_csv, rsm_update, rsm_update_from, sa_update, Method, RsmConfig, SaUpdateConfig, UpdateError,
    UpdateReport,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodSelection {
    Rsm,
    Ga,
    Sa,
    #[default]
    All,
}

impl MethodSelection {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodSelection::Rsm => vec![Method::Rsm],
            MethodSelection::Ga => vec![Method::Ga],
            MethodSelection::Sa => vec![Method::Sa],
            MethodSelection::All => vec![Method::Rsm, Method::Ga, Method::Sa],
        }
    }
}

impl std::str::FromStr for MethodSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rsm" => Ok(Self::Rsm),
            "ga" => Ok(Self::Ga),
            "sa" => Ok(Self::Sa),
            "all" => Ok(Self::All),
            _ => Err(format!("unknown method '{s}' (expected rsm, ga, sa or all)")),
        }
    }
}

/// Seeds set explicitly in the document; the rest follow the global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct ExplicitSeeds {
    scenario: bool,
    rsm_sampler: bool,
    rsm_net: bool,
    rsm_ga: bool,
    ga: bool,
    sa: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Global seed.
    pub seed: u64,
    pub method: MethodSelection,
    /// Directory for reports, histories and the comparison table.
    pub out_dir: PathBuf,
    /// Evaluated design from an earlier `sample` run, reused by the response-surface method.
    pub samples_file: Option<PathBuf>,
    pub structure: StructureSource,
    pub scenario: ScenarioSettings,
    pub cost: CostSpec,
    pub rsm: RsmConfig,
    pub ga: GaConfig,
    pub sa: SaUpdateConfig,
    #[serde(skip)]
    explicit: ExplicitSeeds,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = Self {
            seed: 0,
            method: MethodSelection::All,
            out_dir: PathBuf::from("out"),
            samples_file: None,
            structure: StructureSource::default(),
            scenario: ScenarioSettings::default(),
            cost: CostSpec::default(),
            rsm: RsmConfig::default(),
            ga: GaConfig::default(),
            sa: SaUpdateConfig::default(),
            explicit: ExplicitSeeds::default(),
        };
        cfg.reseed(0);
        cfg
    }
}

/// Per-purpose seeds drawn in a fixed order from a generator seeded with the global seed.
fn derived_seeds(global: u64) -> [u64; 6] {
    let mut rng = ChaCha8Rng::seed_from_u64(global);
    std::array::from_fn(|_| rng.next_u64())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a document. Relative paths are kept as written and nothing is validated.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        let table: toml::Table = toml::from_str(text)?;
        let has = |section: &str, key: &str| {
            table
                .get(section)
                .and_then(|s| s.as_table())
                .is_some_and(|s| s.contains_key(key))
        };
        let rsm_ga_seed = table
            .get("rsm")
            .and_then(|s| s.get("ga"))
            .and_then(|s| s.as_table())
            .is_some_and(|s| s.contains_key("seed"));
        cfg.explicit = ExplicitSeeds {
            scenario: has("scenario", "seed"),
            rsm_sampler: has("rsm", "sampler_seed"),
            rsm_net: has("rsm", "net_seed"),
            rsm_ga: rsm_ga_seed,
            ga: has("ga", "seed"),
            sa: has("sa", "seed"),
        };
        cfg.reseed(cfg.seed);
        Ok(cfg)
    }

    /// Sets the global seed and re-derives every seed not set explicitly.
    pub fn reseed(&mut self, global: u64) {
        self.seed = global;
        let d = derived_seeds(global);
        let e = self.explicit;
        let slots: [(&mut u64, bool); 6] = [
            (&mut self.scenario.seed, e.scenario),
            (&mut self.rsm.sampler_seed, e.rsm_sampler),
            (&mut self.rsm.net_seed, e.rsm_net),
            (&mut self.rsm.ga.seed, e.rsm_ga),
            (&mut self.ga.seed, e.ga),
            (&mut self.sa.seed, e.sa),
        ];
        for ((slot, explicit), value) in slots.into_iter().zip(d) {
            if !explicit {
                *slot = value;
            }
        }
    }

    pub fn seeds(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([
            ("global".to_string(), self.seed),
            ("scenario".to_string(), self.scenario.seed),
            ("rsm_sampler".to_string(), self.rsm.sampler_seed),
            ("rsm_net".to_string(), self.rsm.net_seed),
            ("rsm_ga".to_string(), self.rsm.ga.seed),
            ("ga".to_string(), self.ga.seed),
            ("sa".to_string(), self.sa.seed),
        ])
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let StructureSource::File { path } = &mut self.structure {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(p) = &mut self.samples_file {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Checks settings that do not need the structure to be built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: UpdateError| ConfigError::Invalid(e.to_string());
        self.rsm.validate().map_err(invalid)?;
        self.ga
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("[ga] {e}")))?;
        self.sa.validate().map_err(invalid)?;
        if let StructureSource::File { path } = &self.structure {
            if !path.is_file() {
                return Err(ConfigError::Invalid(format!(
                    "structure file {} not found",
                    path.display()
                )));
            }
        }
        if let Some(p) = &self.samples_file {
            if !p.is_file() {
                return Err(ConfigError::Invalid(format!("samples file {} not found", p.display())));
            }
        }
        Ok(())
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            structure: self.structure.clone(),
            settings: self.scenario.clone(),
            cost: self.cost.clone(),
        }
    }

    /// Builds the fixture and checks the settings that depend on it.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let scenario = build_scenario(&self.scenario_spec()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let weights = weight_count(scenario.problem.dim(), self.rsm.hidden_units);
        if self.rsm.n_samples <= weights {
            return Err(ConfigError::Invalid(format!(
                "[rsm] n_samples = {} must exceed the surrogate's {weights} weights",
                self.rsm.n_samples
            )));
        }
        Ok(scenario)
    }

    /// Runs one method on `scenario` and embeds this configuration in the report.
    pub fn run(&self, scenario: &Scenario, method: Method) -> Result<UpdateReport, UpdateError> {
        let problem = &scenario.problem;
        let mut report = match method {
            Method::Rsm => match &self.samples_file {
                Some(path) => {
                    let file = std::fs::File::open(path)
                        .map_err(|e| UpdateError::InvalidConfig(format!("cannot open {}: {e}", path.display())))?;
                    let (design, costs) = read_design_csv(file)?;
                    rsm_update_from(problem, &self.rsm, design, costs)?
                }
                None => rsm_update(problem, &self.rsm)?,
            },
            Method::Ga => ga_update(problem, &self.ga)?,
            Method::Sa => sa_update(problem, &self.sa)?,
        };
        let method_config = std::mem::take(&mut report.config);
        report.config = serde_json::json!({
            "run": self,
            "method": method_config,
        });
        report.seeds = self.seeds();
        Ok(report)
    }
}
