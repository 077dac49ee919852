//! Run configuration loaded from TOML, with every section defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::SuspensionParams;
use crate::error::{Error, Result};
use crate::fuzzy::{FuzzyParams, FuzzySystem, RuleBase};
use crate::pid::PidGains;
use crate::road::RoadSpec;
use crate::sim::{Scenario, SimConfig, TuningConfig};

pub const SEED_ENV: &str = "SUSPLAB_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Label of the scenario the percentage deltas are taken against.
    pub reference: String,
    pub scenarios: Vec<Scenario>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            reference: "passive".into(),
            scenarios: Scenario::default_set(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; drives the road and every tuner. Replaces `road.seed`.
    pub seed: u64,
    pub plant: SuspensionParams,
    pub road: RoadSpec,
    pub fuzzy: FuzzyParams,
    /// Rule table to load instead of the generated one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules_csv: Option<PathBuf>,
    /// Gains used by `simulate` in fuzzy-PID mode.
    pub gains: PidGains,
    pub sim: SimConfig,
    pub tuning: TuningConfig,
    pub compare: CompareConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            plant: SuspensionParams::default(),
            road: RoadSpec::default(),
            fuzzy: FuzzyParams::default(),
            rules_csv: None,
            gains: PidGains::new(2e4, 2e4, 100.0),
            sim: SimConfig::default(),
            tuning: TuningConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

/// Where the resolved seed came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Flag,
    Env,
    Config,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config, or the resolved config of a run manifest (`.json`).
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|x| x.eq_ignore_ascii_case("json")) {
            let m: crate::manifest::RunManifest =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            return Ok(m.config);
        }
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies the seed precedence flag > `SUSPLAB_SEED` > config.
    pub fn resolve_seed(&mut self, flag: Option<u64>, env: Option<&str>) -> Result<SeedSource> {
        let (seed, source) = match (flag, env) {
            (Some(s), _) => (s, SeedSource::Flag),
            (None, Some(v)) => {
                let s = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
                (s, SeedSource::Env)
            }
            (None, None) => (self.seed, SeedSource::Config),
        };
        self.seed = seed;
        self.road.seed = seed;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.road.validate()?;
        self.gains.validate()?;
        self.sim.validate()?;
        self.tuning.validate()
    }

    /// Fuzzy controller with the configured rule table, clamped to the damper bounds.
    pub fn fuzzy_system(&self) -> Result<FuzzySystem> {
        let sys = match &self.rules_csv {
            None => FuzzySystem::from_params(&self.fuzzy)?,
            Some(path) => {
                let f = std::fs::File::open(path)
                    .map_err(|e| Error::Config(format!("cannot read rules {}: {e}", path.display())))?;
                let rules = RuleBase::read_csv(std::io::BufReader::new(f))?;
                FuzzySystem::with_rules(&self.fuzzy, rules)?
            }
        };
        Ok(sys.with_output_clamp(self.plant.f_min, self.plant.f_max))
    }
}
