//! Runs many independent trials of one configured election, classifies each
//! outcome, and evaluates the configured statistical checks.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{PartyId, Transcript};
use crate::protocols::{run, ProtocolOutcome, RunStatus, VoteAssignment};

use super::config::{CheckSpec, ExperimentConfig, Metric};
use super::stats::{matches_probability, within_upper_bound};

/// Derives the per-trial seed from the experiment seed. Every trial runs on
/// an independent stream of one seeded generator, so trial `i` can be
/// reproduced alone without replaying the first `i - 1` trials.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.next_u64()
}

/// How a single trial ended, from the honest participants' point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    /// A tally was published, every honest unrevoked vote is in it, and the
    /// corrupt voters got exactly one vote's weight each.
    CleanSuccess,
    /// A tally was published but it shortchanges some honest voter or gives
    /// the cheaters more than their allowed weight.
    CheatSuccess,
    /// The run aborted.
    Aborted,
}

/// Classifies one finished run. `corrupt` flags the voters whose strategy
/// differs from honest behavior; revoked voters are out of the comparison
/// because losing one's own ballot is a sanctioned outcome, not a theft.
pub fn classify(outcome: &ProtocolOutcome, r: u32, corrupt: &[bool]) -> OutcomeClass {
    let tally = match &outcome.status {
        RunStatus::Success { tally } => tally,
        RunStatus::Abort { .. } => return OutcomeClass::Aborted,
    };
    let votes = &outcome.artifacts.planned_votes;
    let mut honest = vec![0u64; r as usize];
    let mut corrupt_live = 0u64;
    for (v, vote) in votes.iter().enumerate() {
        let revoked = outcome
            .revocations
            .as_ref()
            .map_or(false, |flags| flags[v]);
        if revoked {
            continue;
        }
        if corrupt[v] {
            corrupt_live += 1;
        } else {
            honest[vote.candidate as usize] += 1;
        }
    }
    let mut surplus = 0u64;
    for (count, expected) in tally.iter().zip(&honest) {
        if count < expected {
            return OutcomeClass::CheatSuccess;
        }
        surplus += count - expected;
    }
    if surplus == corrupt_live {
        OutcomeClass::CleanSuccess
    } else {
        OutcomeClass::CheatSuccess
    }
}

/// Summary of one trial, kept for every trial of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub class: OutcomeClass,
    pub status: RunStatus,
    pub revocations: Option<Vec<bool>>,
}

/// One evaluated check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub metric: Metric,
    pub observed: f64,
    pub requirement: String,
    pub passed: bool,
}

/// Aggregate results of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: u64,
    pub clean_successes: u64,
    pub cheat_successes: u64,
    pub aborts: u64,
    /// Abort counts by protocol stage.
    pub abort_phases: BTreeMap<String, u64>,
    /// Trials in which at least one voter was revoked.
    pub revoked_trials: u64,
    /// How often each voter was revoked.
    pub revocations_by_voter: Vec<u64>,
    /// Per-candidate tally totals summed over all successful trials.
    pub tally_totals: Vec<u64>,
    pub probe_violations: u64,
    pub checks: Vec<CheckOutcome>,
    pub all_checks_passed: bool,
}

impl ExperimentReport {
    pub fn successes(&self) -> u64 {
        self.clean_successes + self.cheat_successes
    }

    fn count_for(&self, metric: Metric) -> u64 {
        match metric {
            Metric::SuccessRate => self.successes(),
            Metric::CleanSuccessRate => self.clean_successes,
            Metric::CheatSuccessRate => self.cheat_successes,
            Metric::AbortRate => self.aborts,
            Metric::RevocationRate => self.revoked_trials,
        }
    }

    pub fn rate(&self, metric: Metric) -> f64 {
        self.count_for(metric) as f64 / self.trials as f64
    }

    fn evaluate(&self, spec: &CheckSpec) -> CheckOutcome {
        let count = self.count_for(spec.metric);
        let (requirement, passed) = if let Some(p) = spec.expect {
            (
                format!("within {} sigma of {p}", spec.sigma),
                matches_probability(count, self.trials, p, spec.sigma),
            )
        } else if let Some(bound) = spec.upper {
            (
                format!("at most {bound} ({} sigma slack)", spec.sigma),
                within_upper_bound(count, self.trials, bound, spec.sigma),
            )
        } else {
            let bound = spec.lower.expect("validated: one bound present");
            (
                format!("at least {bound} ({} sigma slack)", spec.sigma),
                within_upper_bound(self.trials - count, self.trials, 1.0 - bound, spec.sigma),
            )
        };
        CheckOutcome {
            metric: spec.metric,
            observed: self.rate(spec.metric),
            requirement,
            passed,
        }
    }
}

/// Everything needed to reproduce and verify one trial from its transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub protocol: crate::protocols::ProtocolKind,
    pub params: crate::protocols::ElectionParams,
    pub votes: VoteAssignment,
    pub strategies: Vec<crate::adversary::StrategyBinding>,
    pub seed: u64,
}

/// A finished experiment: the aggregate report, all per-trial records, and
/// (if requested) the transcript of the selected trial.
pub struct ExperimentResult {
    pub report: ExperimentReport,
    pub records: Vec<TrialRecord>,
    pub transcript: Option<(RunHeader, Transcript)>,
}

/// Runs all trials of `config` (in parallel) and aggregates the outcome.
/// The configuration is assumed validated.
pub fn run_experiment(config: &ExperimentConfig) -> ExperimentResult {
    let params = config.params();
    let corrupt: Vec<bool> = (0..config.n)
        .map(|v| {
            config.strategies.iter().any(|b| {
                b.party == PartyId::voter(v)
                    && b.strategy != crate::adversary::Strategy::Honest
            })
        })
        .collect();

    let outcomes: Vec<(TrialRecord, u64)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(config.seed, trial);
            let outcome = run(
                config.protocol,
                &params,
                &config.votes,
                &config.strategies,
                seed,
            );
            let record = TrialRecord {
                trial,
                seed,
                class: classify(&outcome, config.r, &corrupt),
                status: outcome.status,
                revocations: outcome.revocations,
            };
            (record, outcome.probe_violations)
        })
        .collect();

    let mut report = ExperimentReport {
        config: config.clone(),
        trials: config.trials,
        clean_successes: 0,
        cheat_successes: 0,
        aborts: 0,
        abort_phases: BTreeMap::new(),
        revoked_trials: 0,
        revocations_by_voter: vec![0; config.n as usize],
        tally_totals: vec![0; config.r as usize],
        probe_violations: 0,
        checks: Vec::new(),
        all_checks_passed: true,
    };
    let mut records = Vec::with_capacity(outcomes.len());
    for (record, violations) in outcomes {
        report.probe_violations += violations;
        match record.class {
            OutcomeClass::CleanSuccess => report.clean_successes += 1,
            OutcomeClass::CheatSuccess => report.cheat_successes += 1,
            OutcomeClass::Aborted => report.aborts += 1,
        }
        match &record.status {
            RunStatus::Success { tally } => {
                for (total, count) in report.tally_totals.iter_mut().zip(tally) {
                    *total += count;
                }
            }
            RunStatus::Abort { phase, .. } => {
                *report
                    .abort_phases
                    .entry(phase.name().to_string())
                    .or_insert(0) += 1;
            }
        }
        if let Some(flags) = &record.revocations {
            if flags.iter().any(|&f| f) {
                report.revoked_trials += 1;
            }
            for (count, &flag) in report.revocations_by_voter.iter_mut().zip(flags) {
                if flag {
                    *count += 1;
                }
            }
        }
        records.push(record);
    }
    report.checks = config.checks.iter().map(|c| report.evaluate(c)).collect();
    report.all_checks_passed = report.checks.iter().all(|c| c.passed);

    let transcript = config.output.transcript.as_ref().map(|_| {
        let trial = config.output.transcript_trial;
        let seed = trial_seed(config.seed, trial);
        let outcome = run(
            config.protocol,
            &params,
            &config.votes,
            &config.strategies,
            seed,
        );
        let header = RunHeader {
            protocol: config.protocol,
            params,
            votes: config.votes.clone(),
            strategies: config.strategies.clone(),
            seed,
        };
        (header, outcome.transcript)
    });

    ExperimentResult {
        report,
        records,
        transcript,
    }
}
