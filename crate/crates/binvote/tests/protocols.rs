//! End-to-end runs of all three protocol variants: honest tallies, cheating
//! outcomes, revocation paths, abort paths, and traffic shape.

use binvote::adversary::{InvalidShape, Strategy, StrategyBinding, TamperAction};
use binvote::channels::{BroadcastKind, BroadcastRealization, PartyId, Phase};
use binvote::procedures::AbortPhase;
use binvote::protocols::{
    run, ElectionParams, ProtocolKind, ProtocolOutcome, RunStatus, VoteAssignment,
};

fn params(n: u32, r: u32, t: u32, s: u32) -> ElectionParams {
    ElectionParams {
        n,
        r,
        t,
        s,
        realization: BroadcastRealization::Ideal,
    }
}

fn bind(party: PartyId, strategy: Strategy) -> StrategyBinding {
    StrategyBinding { party, strategy }
}

fn histogram(outcome: &ProtocolOutcome, r: u32) -> Vec<u64> {
    let mut counts = vec![0u64; r as usize];
    for vote in &outcome.artifacts.planned_votes {
        counts[vote.candidate as usize] += 1;
    }
    counts
}

fn tally(outcome: &ProtocolOutcome) -> &[u64] {
    match &outcome.status {
        RunStatus::Success { tally } => tally,
        RunStatus::Abort { phase, culprits } => {
            panic!("expected success, aborted in {phase:?} (culprits {culprits:?})")
        }
    }
}

#[test]
fn honest_runs_count_every_vote() {
    for kind in [
        ProtocolKind::Basic,
        ProtocolKind::Delegated,
        ProtocolKind::Robust,
    ] {
        for (n, r, t, s) in [(2, 1, 1, 1), (3, 2, 2, 2), (5, 3, 3, 2), (4, 2, 1, 3)] {
            for seed in 0..5u64 {
                let p = params(n, r, t, s);
                let outcome = run(kind, &p, &VoteAssignment::Uniform, &[], seed);
                assert_eq!(outcome.probe_violations, 0);
                let expect = histogram(&outcome, r);
                assert_eq!(
                    tally(&outcome),
                    expect,
                    "{} n={n} r={r} t={t} s={s} seed={seed}",
                    kind.name()
                );
                match kind {
                    ProtocolKind::Robust => {
                        assert_eq!(outcome.revocations, Some(vec![false; n as usize]));
                    }
                    _ => assert_eq!(outcome.revocations, None),
                }
            }
        }
    }
}

#[test]
fn fixed_assignment_controls_the_tally() {
    let assignment = VoteAssignment::Fixed {
        candidates: vec![0, 1, 1, 2, 1],
    };
    for kind in [
        ProtocolKind::Basic,
        ProtocolKind::Delegated,
        ProtocolKind::Robust,
    ] {
        let outcome = run(kind, &params(5, 3, 2, 2), &assignment, &[], 7);
        assert_eq!(tally(&outcome), &[1, 3, 1], "{}", kind.name());
    }
}

#[test]
fn variants_agree_on_the_same_seed() {
    // The planned votes are drawn from each voter's own stream before any
    // protocol-specific randomness, so for one seed every variant elects the
    // same result, and both broadcast realizations match event for event on
    // the protocol content.
    for seed in 0..10u64 {
        let p = params(4, 3, 2, 2);
        let basic = run(ProtocolKind::Basic, &p, &VoteAssignment::Uniform, &[], seed);
        let delegated = run(ProtocolKind::Delegated, &p, &VoteAssignment::Uniform, &[], seed);
        let robust = run(ProtocolKind::Robust, &p, &VoteAssignment::Uniform, &[], seed);
        assert_eq!(
            basic.artifacts.planned_votes,
            delegated.artifacts.planned_votes
        );
        assert_eq!(
            basic.artifacts.planned_votes,
            robust.artifacts.planned_votes
        );
        assert_eq!(tally(&basic), tally(&delegated));
        assert_eq!(tally(&basic), tally(&robust));

        let committed = ElectionParams {
            realization: BroadcastRealization::CommitReveal,
            ..p
        };
        for kind in [
            ProtocolKind::Basic,
            ProtocolKind::Delegated,
            ProtocolKind::Robust,
        ] {
            let ideal = run(kind, &p, &VoteAssignment::Uniform, &[], seed);
            let real = run(kind, &committed, &VoteAssignment::Uniform, &[], seed);
            assert_eq!(ideal.status, real.status, "{} seed={seed}", kind.name());
            assert_eq!(ideal.revocations, real.revocations);
        }
    }
}

#[test]
fn a_double_vote_always_aborts_the_one_grid_protocols() {
    for kind in [ProtocolKind::Basic, ProtocolKind::Delegated] {
        for seed in 0..20u64 {
            let p = params(4, 2, 2, 1);
            let zero_extra = run(
                kind,
                &p,
                &VoteAssignment::Uniform,
                &[bind(PartyId::voter(2), Strategy::MultiVote { extra_votes: 0 })],
                seed,
            );
            let expect = histogram(&zero_extra, 2);
            assert_eq!(tally(&zero_extra), expect);

            let cheating = run(
                kind,
                &p,
                &VoteAssignment::Uniform,
                &[bind(PartyId::voter(2), Strategy::MultiVote { extra_votes: 1 })],
                seed,
            );
            // One extra mark pushes the grand total to n + 1; the opened sums
            // can never explain that away.
            match cheating.status {
                RunStatus::Abort {
                    phase: AbortPhase::SumInconsistency,
                    ..
                } => {}
                other => panic!("expected a sum abort, got {other:?}"),
            }
        }
    }
}

#[test]
fn a_negative_mark_risks_an_empty_bin() {
    // Three honest voters back candidate 1; the fourth erases one of those
    // votes and adds two marks for candidate 0. The theft succeeds exactly
    // when some honest voter landed in the attacked bin, and otherwise the
    // negative residue is exposed when the sums are opened.
    let assignment = VoteAssignment::Fixed {
        candidates: vec![1, 1, 1, 1],
    };
    let strategy = [bind(
        PartyId::voter(3),
        Strategy::NegativeVote {
            target: Some((1, 0)),
            extra: (0, 0),
        },
    )];
    let mut successes = 0;
    let mut aborts = 0;
    for seed in 0..60u64 {
        let outcome = run(
            ProtocolKind::Basic,
            &params(4, 2, 0, 1),
            &assignment,
            &strategy,
            seed,
        );
        match &outcome.status {
            RunStatus::Success { tally } => {
                assert_eq!(tally, &[2, 2], "seed {seed}");
                successes += 1;
            }
            RunStatus::Abort {
                phase: AbortPhase::SumInconsistency,
                ..
            } => aborts += 1,
            other => panic!("unexpected outcome {other:?}"),
        }
    }
    assert!(successes > 0 && aborts > 0, "{successes} / {aborts}");
}

#[test]
fn robust_traffic_has_the_documented_shape() {
    let (n, r, t, s) = (3u32, 2u32, 2u32, 2u32);
    let outcome = run(
        ProtocolKind::Robust,
        &params(n, r, t, s),
        &VoteAssignment::Uniform,
        &[],
        11,
    );
    assert!(outcome.status.is_success());

    let simultaneous = outcome
        .ledger
        .broadcasts
        .iter()
        .filter(|b| b.kind == BroadcastKind::Simultaneous)
        .count() as u32;
    assert_eq!(simultaneous, 2 * r * n * s + 4);
    let unanimous = outcome
        .ledger
        .broadcasts
        .iter()
        .filter(|b| b.kind == BroadcastKind::Unanimous)
        .count() as u32;
    assert_eq!(unanimous, n + 1);

    // Private traffic: one batched ballot message and one shift message per
    // (voter, authority) pair.
    assert_eq!(outcome.ledger.private.len(), 2 * (n * t) as usize);
    let share_bits = 3; // modulus 7
    let ballot_bits = u64::from(2 * s * s) * u64::from(r * n) * share_bits;
    let shift_bits = u64::from(s * s) * 3; // ceil(log2(r * n)) = 3
    let expected_private_bits = u64::from(n * t) * (ballot_bits + shift_bits);
    assert_eq!(outcome.ledger.totals().private_bits, expected_private_bits);

    // Audit samples: every opened ballot of an honest run is a valid mark.
    assert_eq!(
        outcome.artifacts.opened_positions.len(),
        (n * s * s) as usize
    );
    assert!(outcome
        .artifacts
        .opened_positions
        .iter()
        .all(|&p| p < u64::from(r * n)));
    // Honest equality checks open nothing but zeros.
    assert_eq!(
        outcome.artifacts.equality_records.len(),
        (n * r * s) as usize
    );
    for record in &outcome.artifacts.equality_records {
        assert!(record.equal);
        assert!(record.opened.iter().all(|&y| y == 0));
    }
}

#[test]
fn robust_revokes_misbehaving_voters_and_finishes() {
    let assignment = VoteAssignment::Fixed {
        candidates: vec![0, 1, 1],
    };
    let p = params(3, 2, 2, 2);
    let cases: Vec<(&str, Strategy)> = vec![
        (
            "all ballots empty",
            Strategy::InvalidBallots {
                per_set: 4,
                shape: InvalidShape::Empty,
            },
        ),
        (
            "all ballots double-marked",
            Strategy::InvalidBallots {
                per_set: 4,
                shape: InvalidShape::DoubleVote,
            },
        ),
        ("malformed shifts", Strategy::MalformedShifts),
        (
            "withheld shifts",
            Strategy::RefuseBroadcast {
                phase: Phase::ShiftDelivery,
            },
        ),
        ("inconsistent candidates", Strategy::InconsistentCandidates),
    ];
    for (label, strategy) in cases {
        let outcome = run(
            ProtocolKind::Robust,
            &p,
            &assignment,
            &[bind(PartyId::voter(0), strategy)],
            5,
        );
        let revocations = outcome.revocations.clone().expect("robust run");
        assert!(revocations[0], "{label}: cheater not revoked");
        assert_eq!(revocations[1..], [false, false], "{label}");
        assert_eq!(tally(&outcome), &[0, 2], "{label}");
    }
}

#[test]
fn a_tampering_authority_can_only_disenfranchise_one_voter() {
    let assignment = VoteAssignment::Fixed {
        candidates: vec![0, 1, 1],
    };
    let p = params(3, 2, 2, 2);
    for (label, action) in [
        (
            "corrupted audit share",
            TamperAction::PreOpening { voter: 0, delta: 1 },
        ),
        (
            "corrupted equality share",
            TamperAction::PreEquality {
                input_index: 0,
                delta: 1,
            },
        ),
    ] {
        let outcome = run(
            ProtocolKind::Robust,
            &p,
            &assignment,
            &[bind(
                PartyId::authority(0),
                Strategy::AuthorityTamper {
                    actions: vec![action],
                },
            )],
            3,
        );
        let revocations = outcome.revocations.clone().expect("robust run");
        assert_eq!(revocations, vec![true, false, false], "{label}");
        // The poll still completes; only the framed voter's ballot is lost.
        assert_eq!(tally(&outcome), &[0, 2], "{label}");
    }
}

#[test]
fn disagreeing_authorities_abort_and_are_named() {
    let assignment = VoteAssignment::Fixed {
        candidates: vec![0, 1, 1],
    };
    let p = params(3, 2, 3, 1);
    let revocation = run(
        ProtocolKind::Robust,
        &p,
        &assignment,
        &[bind(
            PartyId::authority(0),
            Strategy::AuthorityTamper {
                actions: vec![TamperAction::RevocationBit { voter: 1 }],
            },
        )],
        2,
    );
    assert_eq!(
        revocation.status,
        RunStatus::Abort {
            phase: AbortPhase::NonUnanimousRevocation,
            culprits: vec![PartyId::authority(0)],
        }
    );

    let publication = run(
        ProtocolKind::Delegated,
        &p,
        &assignment,
        &[bind(
            PartyId::authority(2),
            Strategy::AuthorityTamper {
                actions: vec![TamperAction::Publication {
                    candidate: 0,
                    delta: 1,
                }],
            },
        )],
        2,
    );
    assert_eq!(
        publication.status,
        RunStatus::Abort {
            phase: AbortPhase::NonUnanimousPublication,
            culprits: vec![PartyId::authority(2)],
        }
    );
}

#[test]
fn sum_tampering_by_an_authority_aborts() {
    for kind in [ProtocolKind::Delegated, ProtocolKind::Robust] {
        let outcome = run(
            kind,
            &params(3, 2, 2, 1),
            &VoteAssignment::Uniform,
            &[bind(
                PartyId::authority(1),
                Strategy::AuthorityTamper {
                    actions: vec![TamperAction::PreSum {
                        candidate: 0,
                        bin: 0,
                        delta: 1,
                    }],
                },
            )],
            4,
        );
        match outcome.status {
            RunStatus::Abort {
                phase: AbortPhase::SumInconsistency,
                ..
            } => {}
            other => panic!("{}: expected a sum abort, got {other:?}", kind.name()),
        }
    }
}

#[test]
fn refusing_to_broadcast_names_the_refuser() {
    let outcome = run(
        ProtocolKind::Delegated,
        &params(3, 2, 2, 1),
        &VoteAssignment::Uniform,
        &[bind(
            PartyId::authority(1),
            Strategy::RefuseBroadcast {
                phase: Phase::SumOpening,
            },
        )],
        9,
    );
    assert_eq!(
        outcome.status,
        RunStatus::Abort {
            phase: AbortPhase::BroadcastRefusal,
            culprits: vec![PartyId::authority(1)],
        }
    );
}

#[test]
fn equivocation_is_caught_only_by_the_commitment_realization() {
    let strategy = [bind(
        PartyId::authority(0),
        Strategy::EquivocateCommit {
            phase: Phase::SumOpening,
        },
    )];
    let ideal = run(
        ProtocolKind::Delegated,
        &params(3, 2, 2, 1),
        &VoteAssignment::Uniform,
        &strategy,
        6,
    );
    // An idealized simultaneous channel has no commitment to contradict, so
    // the committed value simply gets delivered.
    assert!(ideal.status.is_success());

    let committed = run(
        ProtocolKind::Delegated,
        &ElectionParams {
            realization: BroadcastRealization::CommitReveal,
            ..params(3, 2, 2, 1)
        },
        &VoteAssignment::Uniform,
        &strategy,
        6,
    );
    assert_eq!(
        committed.status,
        RunStatus::Abort {
            phase: AbortPhase::CommitMismatch,
            culprits: vec![PartyId::authority(0)],
        }
    );
}
