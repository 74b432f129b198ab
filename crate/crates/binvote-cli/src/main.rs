//! Command-line driver: run configured election experiments, audit traffic
//! against the closed-form model, print reference probabilities, and replay
//! recorded transcripts.
//!
//! Exit codes: 0 on success, 1 on runtime errors (unreadable files, invalid
//! configurations), 2 on command-line usage errors, 3 when a requested
//! verification fails (a statistical check, an audit line, or a replay
//! divergence).

use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use binvote::channels::BroadcastRealization;
use binvote::harness::audit::audit_run;
use binvote::harness::config::{ExperimentConfig, OutputFormat};
use binvote::harness::experiment::run_experiment;
use binvote::harness::oracles;
use binvote::harness::report::{
    render_audit_table, render_json, render_report_table, replay_transcript, write_transcript,
};
use binvote::protocols::{ElectionParams, ProtocolKind};

#[derive(Parser)]
#[command(name = "binvote", version, about = "Simulate and analyze bin-voting elections built on additive secret sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Basic,
    Delegated,
    Robust,
}

impl From<ProtocolArg> for ProtocolKind {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Basic => ProtocolKind::Basic,
            ProtocolArg::Delegated => ProtocolKind::Delegated,
            ProtocolArg::Robust => ProtocolKind::Robust,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BroadcastArg {
    Ideal,
    CommitReveal,
}

impl From<BroadcastArg> for BroadcastRealization {
    fn from(b: BroadcastArg) -> Self {
        match b {
            BroadcastArg::Ideal => BroadcastRealization::Ideal,
            BroadcastArg::CommitReveal => BroadcastRealization::CommitReveal,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials described by a TOML experiment file and report
    /// aggregate statistics; exits 3 if a configured check fails.
    Run {
        /// Path to the experiment description.
        config: PathBuf,
        /// Override the experiment seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<u64>,
        /// Write one trial's transcript to this file (line-delimited JSON).
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Which trial to transcribe.
        #[arg(long)]
        transcript_trial: Option<u64>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run one honest election and verify its recorded traffic against the
    /// closed-form model, message for message; exits 3 on any mismatch.
    Audit {
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Number of voters.
        #[arg(short)]
        n: u32,
        /// Number of candidates.
        #[arg(short)]
        r: u32,
        /// Number of authorities.
        #[arg(short, default_value_t = 0)]
        t: u32,
        /// Number of repetition batches.
        #[arg(short)]
        s: u32,
        #[arg(long, value_enum, default_value = "ideal")]
        broadcast: BroadcastArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print a reference probability in exact and decimal form.
    Oracle {
        #[command(subcommand)]
        quantity: OracleCommand,
        #[arg(long, global = true)]
        json: bool,
    },
    /// Re-run the election stored in a transcript and compare every record;
    /// exits 3 at the first divergence.
    Replay {
        /// Path to a transcript written by `run --transcript`.
        transcript: PathBuf,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Probability that a fixed bin receives none of the other voters'
    /// marks: ((n-1)/n)^(n-1).
    EmptyBin {
        #[arg(long)]
        voters: u64,
    },
    /// Probability that opening half of each batch misses all `bad` invalid
    /// ballots hidden in one batch of 2s: C(2s-bad, s) / C(2s, s).
    OpeningMiss {
        #[arg(long)]
        batches: u64,
        #[arg(long)]
        bad: u64,
    },
    /// Complement of opening-miss: the chance at least one invalid ballot
    /// is opened.
    OpeningCatch {
        #[arg(long)]
        batches: u64,
        #[arg(long)]
        bad: u64,
    },
    /// Upper bound on a lone cheater's success against s repetitions:
    /// (2/3)^s.
    CheatBound {
        #[arg(long)]
        batches: u64,
    },
    /// Upper bound on unequal values passing all s equality rounds: 2^(-s).
    FalseEqual {
        #[arg(long)]
        batches: u64,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            transcript,
            transcript_trial,
            json,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_toml_str(&text)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            if let Some(path) = transcript {
                cfg.output.transcript = Some(path);
            }
            if let Some(trial) = transcript_trial {
                cfg.output.transcript_trial = trial;
            }
            cfg.validate().context("after command-line overrides")?;

            let result = run_experiment(&cfg);
            if let (Some(path), Some((header, transcript))) =
                (&cfg.output.transcript, &result.transcript)
            {
                let file = fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                write_transcript(BufWriter::new(file), header, transcript)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if json || cfg.output.format == OutputFormat::Json {
                println!("{}", render_json(&result.report));
            } else {
                print!("{}", render_report_table(&result.report));
            }
            Ok(exit_when(result.report.all_checks_passed))
        }
        Command::Audit {
            protocol,
            n,
            r,
            t,
            s,
            broadcast,
            seed,
            json,
        } => {
            let kind = ProtocolKind::from(protocol);
            let params = ElectionParams {
                n,
                r,
                t,
                s,
                realization: broadcast.into(),
            };
            params
                .validate(kind)
                .map_err(|e| anyhow::anyhow!("invalid sizes: {e}"))?;
            let report = audit_run(kind, &params, seed);
            if json {
                println!("{}", render_json(&report));
            } else {
                print!("{}", render_audit_table(&report));
            }
            Ok(exit_when(report.ok))
        }
        Command::Oracle { quantity, json } => {
            let (name, value) = match quantity {
                OracleCommand::EmptyBin { voters } => {
                    anyhow::ensure!(voters >= 2, "need at least two voters");
                    ("empty_bin", oracles::empty_bin_probability(voters))
                }
                OracleCommand::OpeningMiss { batches, bad } => {
                    anyhow::ensure!(batches >= 1, "need at least one batch");
                    ("opening_miss", oracles::opening_miss_probability(batches, bad))
                }
                OracleCommand::OpeningCatch { batches, bad } => {
                    anyhow::ensure!(batches >= 1, "need at least one batch");
                    ("opening_catch", oracles::opening_catch_probability(batches, bad))
                }
                OracleCommand::CheatBound { batches } => {
                    anyhow::ensure!(batches >= 1, "need at least one batch");
                    ("cheat_bound", oracles::cheat_success_bound(batches))
                }
                OracleCommand::FalseEqual { batches } => {
                    anyhow::ensure!(batches >= 1, "need at least one batch");
                    ("false_equal", oracles::false_equal_bound(batches))
                }
            };
            let decimal = oracles::rational_to_f64(&value);
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "quantity": name,
                        "exact": value.to_string(),
                        "decimal": decimal,
                    })
                );
            } else {
                println!("{name} = {value} = {decimal}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { transcript } => {
            let text = fs::read_to_string(&transcript)
                .with_context(|| format!("reading {}", transcript.display()))?;
            let report = replay_transcript(&text)?;
            match &report.divergence {
                None => {
                    println!("replayed {} records: all match", report.records_checked);
                }
                Some(d) => {
                    println!(
                        "divergence at line {} (after {} matching records)",
                        d.line, report.records_checked
                    );
                    println!("  stored:   {}", d.stored.as_deref().unwrap_or("<missing>"));
                    println!(
                        "  replayed: {}",
                        d.replayed.as_deref().unwrap_or("<missing>")
                    );
                }
            }
            Ok(exit_when(report.ok))
        }
    }
}

fn exit_when(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
