//! Declarative experiment configuration: a versioned TOML file with one
//! section per experiment kind. Parsing is strict (unknown fields are
//! rejected) and round-trips through serialization.

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "qmeasure/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Config schema identifier; must equal [`SCHEMA`].
    pub schema: String,
    /// Experiment kind: simulate | ch-sweep | reliability | approximant | verify.
    pub kind: String,
    /// Seed for every randomized model in the run.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(rename = "ch-sweep", default, skip_serializing_if = "Option::is_none")]
    pub ch_sweep: Option<ChSweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<ReliabilityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximant: Option<ApproximantConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

/// Random coupled model diagnostics over a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub levels: usize,
    pub apparatus_dim: usize,
    pub times: Vec<f64>,
    /// System observable: "all-ones" (ones everywhere) or "coherence"
    /// (ones off the diagonal, zero diagonal).
    #[serde(default = "default_observable")]
    pub observable: String,
}

fn default_observable() -> String {
    "all-ones".to_string()
}

/// Error-scaling sweep over chain lengths at a fixed readout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChSweepConfig {
    pub n_sites: Vec<usize>,
    /// Per-site up-probability of the flipping level at readout.
    pub p_up: f64,
    #[serde(default = "default_t_star")]
    pub t_star: f64,
}

fn default_t_star() -> f64 {
    1.0
}

/// Misread probabilities over a grid of (sites, bands) pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityConfig {
    pub grid: Vec<[usize; 2]>,
    /// Target band index; defaults to the middle band of each row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_band: Option<usize>,
}

/// Spectral approximant of a random fine-grid proxy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximantConfig {
    pub grid_dim: usize,
    pub range: [f64; 2],
    pub epsilon: f64,
    /// Representative rule: "midpoint", "left", or "custom".
    #[serde(default = "default_rule")]
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_representatives: Option<Vec<f64>>,
    pub max_denominator: i64,
    /// Apparatus particle count used by the resolution/reliability
    /// trade-off report.
    #[serde(default = "default_apparatus_size")]
    pub apparatus_size: usize,
}

fn default_rule() -> String {
    "midpoint".to_string()
}

fn default_apparatus_size() -> usize {
    1_000_000
}

/// Structural checks of the coefficient tensor on a configured model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub levels: usize,
    pub apparatus_dim: usize,
    pub times: Vec<f64>,
    /// Optionally cross-check an N-site chain against the dense route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_sites: Option<usize>,
    /// Fault injection for self-tests: "sum-rule", "hermiticity", or
    /// "positivity" perturb the computed tensor before checking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject: Option<String>,
}

/// A configuration problem: what is wrong and which field carries it.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// Validate against the subcommand being run.
    pub fn validate(&self, expected_kind: &str) -> Result<(), ConfigError> {
        if self.schema != SCHEMA {
            return Err(err(
                "schema",
                format!("expected \"{SCHEMA}\", found \"{}\"", self.schema),
            ));
        }
        if self.kind != expected_kind {
            return Err(err(
                "kind",
                format!(
                    "config declares \"{}\" but the `{expected_kind}` subcommand was invoked",
                    self.kind
                ),
            ));
        }
        match expected_kind {
            "simulate" => {
                let sim = self
                    .simulate
                    .as_ref()
                    .ok_or_else(|| err("simulate", "section missing"))?;
                if sim.levels < 2 {
                    return Err(err("simulate.levels", "need at least 2 levels"));
                }
                if sim.apparatus_dim < sim.levels {
                    return Err(err(
                        "simulate.apparatus_dim",
                        "apparatus dimension must be at least the level count",
                    ));
                }
                if sim.times.is_empty() {
                    return Err(err("simulate.times", "time grid is empty"));
                }
                if !matches!(sim.observable.as_str(), "all-ones" | "coherence") {
                    return Err(err(
                        "simulate.observable",
                        format!("unknown observable \"{}\"", sim.observable),
                    ));
                }
            }
            "ch-sweep" => {
                let sweep = self
                    .ch_sweep
                    .as_ref()
                    .ok_or_else(|| err("ch-sweep", "section missing"))?;
                if sweep.n_sites.is_empty() {
                    return Err(err("ch-sweep.n_sites", "site list is empty"));
                }
                if !sweep.p_up.is_finite() || sweep.p_up <= 0.0 || sweep.p_up >= 1.0 {
                    return Err(err("ch-sweep.p_up", "need 0 < p_up < 1"));
                }
                if !sweep.t_star.is_finite() || sweep.t_star <= 0.0 {
                    return Err(err("ch-sweep.t_star", "need t_star > 0"));
                }
            }
            "reliability" => {
                let rel = self
                    .reliability
                    .as_ref()
                    .ok_or_else(|| err("reliability", "section missing"))?;
                if rel.grid.is_empty() {
                    return Err(err("reliability.grid", "grid is empty"));
                }
                for &[sites, bands] in &rel.grid {
                    if sites == 0 || bands == 0 || bands > sites + 1 {
                        return Err(err(
                            "reliability.grid",
                            format!("bad grid entry ({sites}, {bands})"),
                        ));
                    }
                }
            }
            "approximant" => {
                let apx = self
                    .approximant
                    .as_ref()
                    .ok_or_else(|| err("approximant", "section missing"))?;
                if apx.grid_dim == 0 {
                    return Err(err("approximant.grid_dim", "need a positive grid dimension"));
                }
                if !apx.range[0].is_finite()
                    || !apx.range[1].is_finite()
                    || apx.range[1] <= apx.range[0]
                {
                    return Err(err("approximant.range", "range must be increasing"));
                }
                if !apx.epsilon.is_finite() || apx.epsilon <= 0.0 {
                    return Err(err("approximant.epsilon", "need epsilon > 0"));
                }
                match apx.rule.as_str() {
                    "midpoint" | "left" => {}
                    "custom" => {
                        if apx.custom_representatives.is_none() {
                            return Err(err(
                                "approximant.custom_representatives",
                                "rule \"custom\" needs explicit representatives",
                            ));
                        }
                    }
                    other => {
                        return Err(err(
                            "approximant.rule",
                            format!("unknown rule \"{other}\""),
                        ));
                    }
                }
                if apx.max_denominator < 1 {
                    return Err(err("approximant.max_denominator", "need at least 1"));
                }
            }
            "verify" => {
                let ver = self
                    .verify
                    .as_ref()
                    .ok_or_else(|| err("verify", "section missing"))?;
                if ver.levels < 2 {
                    return Err(err("verify.levels", "need at least 2 levels"));
                }
                if ver.apparatus_dim < ver.levels {
                    return Err(err(
                        "verify.apparatus_dim",
                        "apparatus dimension must be at least the level count",
                    ));
                }
                if ver.times.is_empty() {
                    return Err(err("verify.times", "time grid is empty"));
                }
                if let Some(sites) = ver.spin_sites {
                    if sites == 0 || sites > 10 {
                        return Err(err("verify.spin_sites", "need 1..=10 sites"));
                    }
                }
                if let Some(inject) = &ver.inject {
                    if !matches!(inject.as_str(), "sum-rule" | "hermiticity" | "positivity") {
                        return Err(err(
                            "verify.inject",
                            format!("unknown fault \"{inject}\""),
                        ));
                    }
                }
            }
            other => {
                return Err(err("kind", format!("unknown kind \"{other}\"")));
            }
        }
        Ok(())
    }

    /// Stable FNV-1a hash of the canonical serialized form.
    pub fn stable_hash(&self) -> String {
        let text = self.to_toml();
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in text.as_bytes() {
            hash ^= *byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: &[(&str, &str)] = &[
        (
            "simulate",
            r#"
schema = "qmeasure/1"
kind = "simulate"
seed = 3
[simulate]
levels = 3
apparatus_dim = 6
times = [0.0, 1.0]
"#,
        ),
        (
            "ch-sweep",
            r#"
schema = "qmeasure/1"
kind = "ch-sweep"
["ch-sweep"]
n_sites = [20, 40]
p_up = 0.9
"#,
        ),
        (
            "reliability",
            r#"
schema = "qmeasure/1"
kind = "reliability"
[reliability]
grid = [[100, 5]]
"#,
        ),
        (
            "approximant",
            r#"
schema = "qmeasure/1"
kind = "approximant"
[approximant]
grid_dim = 8
range = [0.0, 1.0]
epsilon = 0.25
max_denominator = 64
"#,
        ),
        (
            "verify",
            r#"
schema = "qmeasure/1"
kind = "verify"
[verify]
levels = 2
apparatus_dim = 4
times = [0.5]
"#,
        ),
    ];

    #[test]
    fn samples_parse_validate_and_round_trip() {
        for (kind, text) in SAMPLES {
            let parsed = ExperimentConfig::parse(text).unwrap();
            parsed.validate(kind).unwrap();
            let once = parsed.to_toml();
            let reparsed = ExperimentConfig::parse(&once).unwrap();
            assert_eq!(parsed, reparsed, "round trip changed the {kind} config");
            assert_eq!(once, reparsed.to_toml());
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"
schema = "qmeasure/1"
kind = "simulate"
mystery = 1
[simulate]
levels = 2
apparatus_dim = 4
times = [0.0]
"#;
        assert!(ExperimentConfig::parse(text).is_err());
    }

    #[test]
    fn schema_and_kind_are_enforced() {
        let bad_schema = r#"
schema = "qmeasure/0"
kind = "simulate"
[simulate]
levels = 2
apparatus_dim = 4
times = [0.0]
"#;
        let parsed = ExperimentConfig::parse(bad_schema).unwrap();
        assert!(parsed.validate("simulate").is_err());

        let good = ExperimentConfig::parse(SAMPLES[0].1).unwrap();
        assert!(good.validate("ch-sweep").is_err());
    }

    #[test]
    fn hash_is_stable_and_discriminating() {
        let a = ExperimentConfig::parse(SAMPLES[0].1).unwrap();
        let b = ExperimentConfig::parse(SAMPLES[1].1).unwrap();
        assert_eq!(a.stable_hash(), a.stable_hash());
        assert_ne!(a.stable_hash(), b.stable_hash());
    }
}
