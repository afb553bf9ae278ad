//! Experiment configuration: a strict JSON schema that round-trips
//! losslessly and rejects unknown fields, plus stable content hashing.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measure::Observable;
use crate::potential::{Family, Potential};
use crate::rates::ExampleCase;

fn one() -> f64 {
    1.0
}

fn default_points() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub family: Family,
    pub dim: usize,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        Potential::new(self.family, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub case: ExampleCase,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    /// Constants `(c, c_inner)` for the two rate functions fed to the
    /// numeric inversion.
    #[serde(default = "one")]
    pub alpha1_c: f64,
    #[serde(default = "one")]
    pub alpha1_c_inner: f64,
    #[serde(default = "one")]
    pub alpha2_c: f64,
    #[serde(default = "one")]
    pub alpha2_c_inner: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub q: f64,
    pub v1: PotentialSpec,
    pub v2: PotentialSpec,
    pub observable: Observable,
    pub times: Vec<f64>,
    pub paths: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Also dump this many invariant-measure samples as `samples.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorLabConfig {
    pub q: f64,
    pub v1: PotentialSpec,
    pub v2: PotentialSpec,
    pub resolution: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Also build at twice the resolution and report residual ratios.
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "default_decay_states")]
    pub decay_states: usize,
}

fn default_trials() -> usize {
    200
}

fn default_decay_states() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckAssumptionsConfig {
    pub potentials: Vec<PotentialSpec>,
    #[serde(default = "one")]
    pub tau: f64,
    pub m_candidate: f64,
    pub radius: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_powers")]
    pub moment_powers: Vec<u32>,
}

fn default_samples() -> usize {
    2000
}

fn default_powers() -> Vec<u32> {
    vec![2, 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    Rates(RatesConfig),
    Simulate(SimulateConfig),
    OperatorLab(OperatorLabConfig),
    CheckAssumptions(CheckAssumptionsConfig),
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Rates(_) => "rates",
            ExperimentSpec::Simulate(_) => "simulate",
            ExperimentSpec::OperatorLab(_) => "operator-lab",
            ExperimentSpec::CheckAssumptions(_) => "check-assumptions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub experiment: ExperimentSpec,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            ExperimentSpec::Rates(c) => {
                c.case.validate()?;
                if !(c.t_min > 0.0 && c.t_max > c.t_min) {
                    return Err(Error::Config("rates needs 0 < t_min < t_max".into()));
                }
                if c.points < 2 {
                    return Err(Error::Config("rates needs at least 2 points".into()));
                }
                if !(c.c1 > 0.0 && c.c2 > 0.0) {
                    return Err(Error::Config("rates constants must be positive".into()));
                }
            }
            ExperimentSpec::Simulate(c) => {
                c.v1.build()?;
                c.v2.build()?;
                if c.times.is_empty() || c.times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("simulate needs increasing times".into()));
                }
                if c.paths < 1000 {
                    return Err(Error::Config("simulate needs at least 1e3 paths".into()));
                }
            }
            ExperimentSpec::OperatorLab(c) => {
                c.v1.build()?;
                c.v2.build()?;
                if c.v1.dim != 1 || c.v2.dim != 1 {
                    return Err(Error::Config("operator-lab runs d1 = d2 = 1".into()));
                }
                if c.resolution < 16 {
                    return Err(Error::Config("operator-lab needs resolution >= 16".into()));
                }
            }
            ExperimentSpec::CheckAssumptions(c) => {
                if c.potentials.is_empty() {
                    return Err(Error::Config("check-assumptions needs potentials".into()));
                }
                for p in &c.potentials {
                    p.build()?;
                }
                if !(c.radius > 0.0) || c.samples == 0 {
                    return Err(Error::Config("check-assumptions needs radius > 0, samples >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        self.experiment.kind()
    }

    /// Stable content hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        hash_json(&serde_json::to_string(self).expect("config serializes"))
    }
}

/// First 16 hex characters of the SHA-256 of a canonical serialization.
pub fn hash_json(s: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(s.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
