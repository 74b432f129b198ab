//! Renders experiment and audit results as text or JSON, and writes / replays
//! run transcripts (line-delimited JSON: one header, then one line per
//! recorded message or broadcast).

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use thiserror::Error;

use crate::channels::Transcript;
use crate::protocols::{run, validate_strategies};

use super::audit::AuditReport;
use super::experiment::{ExperimentReport, RunHeader};

/// Serializes any report as pretty JSON.
pub fn render_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn percent(count: u64, total: u64) -> String {
    format!("{:.2}%", 100.0 * count as f64 / total as f64)
}

/// Renders an experiment report as an aligned key/value table.
pub fn render_report_table(report: &ExperimentReport) -> String {
    fn line(out: &mut String, label: &str, value: String) {
        let _ = writeln!(out, "{label:<18} {value}");
    }
    let mut out = String::new();
    let config = &report.config;
    line(
        &mut out,
        "protocol",
        format!("{} ({:?} broadcasts)", config.protocol.name(), config.broadcast),
    );
    line(
        &mut out,
        "sizes",
        format!(
            "n={} voters, r={} candidates, t={} authorities, s={} repetitions",
            config.n, config.r, config.t, config.s
        ),
    );
    line(&mut out, "trials", format!("{} (seed {})", report.trials, config.seed));
    line(
        &mut out,
        "clean successes",
        format!(
            "{} ({})",
            report.clean_successes,
            percent(report.clean_successes, report.trials)
        ),
    );
    line(
        &mut out,
        "cheat successes",
        format!(
            "{} ({})",
            report.cheat_successes,
            percent(report.cheat_successes, report.trials)
        ),
    );
    line(
        &mut out,
        "aborts",
        format!("{} ({})", report.aborts, percent(report.aborts, report.trials)),
    );
    for (phase, count) in &report.abort_phases {
        let _ = writeln!(out, "  in {phase:<15} {count}");
    }
    if config.protocol == crate::protocols::ProtocolKind::Robust {
        line(&mut out, "revoked trials", report.revoked_trials.to_string());
        for (v, count) in report.revocations_by_voter.iter().enumerate() {
            if *count > 0 {
                let _ = writeln!(out, "  voter:{v:<12} revoked in {count} trials");
            }
        }
    }
    if report.successes() > 0 {
        let means: Vec<String> = report
            .tally_totals
            .iter()
            .enumerate()
            .map(|(c, &total)| format!("c{c}={:.3}", total as f64 / report.successes() as f64))
            .collect();
        line(
            &mut out,
            "mean tally",
            format!("{} (over {} successes)", means.join(" "), report.successes()),
        );
    }
    line(&mut out, "probe violations", report.probe_violations.to_string());
    if !report.checks.is_empty() {
        let _ = writeln!(out, "checks");
        for check in &report.checks {
            let _ = writeln!(
                out,
                "  [{}] {} = {:.4}, required {}",
                if check.passed { "pass" } else { "FAIL" },
                check.metric.name(),
                check.observed,
                check.requirement
            );
        }
        line(
            &mut out,
            "overall",
            if report.all_checks_passed {
                "PASS".into()
            } else {
                "FAIL".into()
            },
        );
    }
    out
}

/// Renders an audit report as one line per checked fact.
pub fn render_audit_table(report: &AuditReport) -> String {
    let mut out = String::new();
    let p = &report.params;
    let _ = writeln!(
        out,
        "audit {} n={} r={} t={} s={} ({:?})",
        report.protocol.name(),
        p.n,
        p.r,
        p.t,
        p.s,
        p.realization
    );
    for line in &report.lines {
        if line.ok {
            let _ = writeln!(out, "  [ok]   {}: {}", line.label, line.actual);
        } else {
            let _ = writeln!(
                out,
                "  [FAIL] {}: expected {}, got {}",
                line.label, line.expected, line.actual
            );
        }
    }
    let _ = writeln!(out, "result: {}", if report.ok { "PASS" } else { "FAIL" });
    out
}

/// The transcript file lines: a header naming the exact run, then one line
/// per record. Replaying the header reproduces the records bit for bit.
pub fn transcript_lines(header: &RunHeader, transcript: &Transcript) -> Vec<String> {
    let mut lines = Vec::with_capacity(transcript.records.len() + 1);
    lines.push(serde_json::to_string(header).expect("headers serialize"));
    for record in &transcript.records {
        lines.push(serde_json::to_string(record).expect("records serialize"));
    }
    lines
}

pub fn write_transcript<W: io::Write>(
    mut w: W,
    header: &RunHeader,
    transcript: &Transcript,
) -> io::Result<()> {
    for line in transcript_lines(header, transcript) {
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("transcript is empty")]
    Empty,
    #[error("bad header line: {0}")]
    Header(#[from] serde_json::Error),
    #[error("header describes an invalid run: {0}")]
    Invalid(String),
}

/// Where a replay first disagreed with the stored transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    /// 1-based line number in the transcript file.
    pub line: usize,
    pub stored: Option<String>,
    pub replayed: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub records_checked: usize,
    pub divergence: Option<Divergence>,
    pub ok: bool,
}

/// Re-runs the election described by a transcript's header and compares the
/// regenerated records against the stored ones, line by line.
pub fn replay_transcript(text: &str) -> Result<ReplayReport, ReplayError> {
    let mut stored = text.lines().filter(|l| !l.trim().is_empty());
    let header_line = stored.next().ok_or(ReplayError::Empty)?;
    let header: RunHeader = serde_json::from_str(header_line)?;
    header
        .params
        .validate(header.protocol)
        .map_err(ReplayError::Invalid)?;
    header
        .votes
        .validate(&header.params)
        .map_err(ReplayError::Invalid)?;
    validate_strategies(header.protocol, &header.params, &header.strategies)
        .map_err(ReplayError::Invalid)?;

    let outcome = run(
        header.protocol,
        &header.params,
        &header.votes,
        &header.strategies,
        header.seed,
    );
    let replayed = transcript_lines(&header, &outcome.transcript);
    let mut records_checked = 0;
    let mut divergence = None;
    let mut replayed_iter = replayed.iter().skip(1);
    let mut line_no = 1usize;
    loop {
        line_no += 1;
        match (stored.next(), replayed_iter.next()) {
            (None, None) => break,
            (stored_line, replayed_line) => {
                let matches = stored_line == replayed_line.map(String::as_str);
                if !matches {
                    divergence = Some(Divergence {
                        line: line_no,
                        stored: stored_line.map(str::to_string),
                        replayed: replayed_line.cloned(),
                    });
                    break;
                }
                records_checked += 1;
            }
        }
    }
    Ok(ReplayReport {
        records_checked,
        divergence: divergence.clone(),
        ok: divergence.is_none(),
    })
}
