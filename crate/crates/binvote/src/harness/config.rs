//! TOML experiment descriptions: which protocol to run, with which sizes,
//! who votes how, who cheats how, how many trials, and which statistical
//! checks to apply to the aggregate outcome.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::StrategyBinding;
use crate::channels::BroadcastRealization;
use crate::protocols::{validate_strategies, ElectionParams, ProtocolKind, VoteAssignment};

/// Aggregate rates a check can test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Fraction of trials that produced a tally at all.
    SuccessRate,
    /// Fraction of trials whose tally accounts for every honest vote and
    /// gives the cheaters exactly their allowed weight.
    CleanSuccessRate,
    /// Fraction of trials that produced a tally which shortchanges honest
    /// voters or overcounts the cheaters.
    CheatSuccessRate,
    /// Fraction of trials that aborted.
    AbortRate,
    /// Fraction of trials in which at least one voter was revoked.
    RevocationRate,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::SuccessRate => "success_rate",
            Metric::CleanSuccessRate => "clean_success_rate",
            Metric::CheatSuccessRate => "cheat_success_rate",
            Metric::AbortRate => "abort_rate",
            Metric::RevocationRate => "revocation_rate",
        }
    }
}

fn default_sigma() -> f64 {
    3.0
}

/// One statistical expectation on an experiment's aggregate outcome.
/// Exactly one of `expect` (two-sided, binomial tolerance), `upper`, or
/// `lower` (one-sided with slack) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub metric: Metric,
    #[serde(default)]
    pub expect: Option<f64>,
    #[serde(default)]
    pub upper: Option<f64>,
    #[serde(default)]
    pub lower: Option<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

impl CheckSpec {
    fn validate(&self) -> Result<(), String> {
        let given = [self.expect, self.upper, self.lower]
            .iter()
            .filter(|b| b.is_some())
            .count();
        if given != 1 {
            return Err(format!(
                "check on {} must set exactly one of expect / upper / lower",
                self.metric.name()
            ));
        }
        let value = self.expect.or(self.upper).or(self.lower).unwrap();
        if !(0.0..=1.0).contains(&value) {
            return Err(format!(
                "check on {} uses the rate {value}, outside [0, 1]",
                self.metric.name()
            ));
        }
        if !(self.sigma > 0.0) {
            return Err("check sigma must be positive".into());
        }
        Ok(())
    }
}

/// How results are presented and whether a trial transcript is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Table,
    Json,
}

impl Default for OutputFormat {
    fn default() -> Self {
        OutputFormat::Table
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    /// Write the full message transcript of one trial to this file
    /// (line-delimited JSON).
    #[serde(default)]
    pub transcript: Option<PathBuf>,
    /// Which trial to transcribe (defaults to the first).
    #[serde(default)]
    pub transcript_trial: u64,
}

fn default_trials() -> u64 {
    1
}

/// A full experiment description, normally loaded from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    pub n: u32,
    pub r: u32,
    #[serde(default)]
    pub t: u32,
    pub s: u32,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub broadcast: BroadcastRealization,
    #[serde(default)]
    pub votes: VoteAssignment,
    #[serde(default, rename = "strategy")]
    pub strategies: Vec<StrategyBinding>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, rename = "check")]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid TOML: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid experiment: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn params(&self) -> ElectionParams {
        ElectionParams {
            n: self.n,
            r: self.r,
            t: self.t,
            s: self.s,
            realization: self.broadcast,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let params = self.params();
        params
            .validate(self.protocol)
            .map_err(ConfigError::Invalid)?;
        self.votes.validate(&params).map_err(ConfigError::Invalid)?;
        validate_strategies(self.protocol, &params, &self.strategies)
            .map_err(ConfigError::Invalid)?;
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be positive".into()));
        }
        if self.output.transcript_trial >= self.trials {
            return Err(ConfigError::Invalid(format!(
                "transcript_trial {} out of range ({} trials)",
                self.output.transcript_trial, self.trials
            )));
        }
        for check in &self.checks {
            check.validate().map_err(ConfigError::Invalid)?;
            if check.metric == Metric::RevocationRate && self.protocol != ProtocolKind::Robust {
                return Err(ConfigError::Invalid(
                    "revocation_rate only applies to the robust protocol".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::Strategy;
    use crate::channels::PartyId;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = ExperimentConfig::from_toml_str(
            r#"
            protocol = "basic"
            n = 3
            r = 2
            s = 1
            "#,
        )
        .unwrap();
        assert_eq!(config.protocol, ProtocolKind::Basic);
        assert_eq!(config.trials, 1);
        assert_eq!(config.seed, 0);
        assert_eq!(config.broadcast, BroadcastRealization::Ideal);
        assert_eq!(config.votes, VoteAssignment::Uniform);
        assert!(config.strategies.is_empty());
        assert!(config.checks.is_empty());
        assert_eq!(config.output.format, OutputFormat::Table);
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
            protocol = "robust"
            n = 4
            r = 2
            t = 3
            s = 2
            trials = 500
            seed = 7
            broadcast = "commit-reveal"

            [votes]
            mode = "fixed"
            candidates = [0, 1, 1, 0]

            [[strategy]]
            party = "voter:2"
            name = "invalid_ballots"
            per_set = 1
            shape = "empty"

            [[strategy]]
            party = "authority:0"
            name = "authority_tamper"

            [[strategy.actions]]
            action = "pre_opening"
            voter = 1
            delta = 2

            [output]
            format = "json"
            transcript = "run.jsonl"
            transcript_trial = 3

            [[check]]
            metric = "revocation_rate"
            lower = 0.9
            sigma = 4.0
        "#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(config.strategies.len(), 2);
        assert_eq!(config.strategies[0].party, PartyId::voter(2));
        assert!(matches!(
            config.strategies[1].strategy,
            Strategy::AuthorityTamper { ref actions } if actions.len() == 1
        ));
        assert_eq!(config.checks[0].lower, Some(0.9));
        assert_eq!(config.checks[0].sigma, 4.0);
        assert_eq!(
            config.output.transcript.as_deref(),
            Some(std::path::Path::new("run.jsonl"))
        );

        let rendered = toml::to_string(&config).unwrap();
        let reparsed = ExperimentConfig::from_toml_str(&rendered).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        // Cheating strategy bound to a party outside the election.
        let err = ExperimentConfig::from_toml_str(
            r#"
            protocol = "basic"
            n = 3
            r = 2
            s = 1

            [[strategy]]
            party = "voter:5"
            name = "honest"
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");

        // A check needs exactly one bound.
        let err = ExperimentConfig::from_toml_str(
            r#"
            protocol = "basic"
            n = 3
            r = 2
            s = 1

            [[check]]
            metric = "abort_rate"
            expect = 0.5
            upper = 0.6
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");

        // Revocations only exist in the robust protocol.
        let err = ExperimentConfig::from_toml_str(
            r#"
            protocol = "basic"
            n = 3
            r = 2
            s = 1

            [[check]]
            metric = "revocation_rate"
            upper = 0.1
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");

        // Unknown keys are caught rather than silently dropped.
        let err = ExperimentConfig::from_toml_str(
            r#"
            protocol = "basic"
            n = 3
            r = 2
            s = 1
            reps = 7
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)), "{err}");

        // The transcribed trial must exist.
        let err = ExperimentConfig::from_toml_str(
            r#"
            protocol = "basic"
            n = 3
            r = 2
            s = 1
            trials = 2

            [output]
            transcript = "t.jsonl"
            transcript_trial = 2
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");
    }
}
