//! The misbehavior-tolerant protocol. Each voter submits, per repetition
//! batch, `2s` displacement-encrypted single-mark grids shared among the
//! authorities. Half of every batch is opened and checked; the voter then
//! reveals the displacements of the surviving grids, and equality checks on
//! shared row sums verify that all survivors encode one and the same vote.
//! Voters caught misbehaving are revoked rather than aborting the election;
//! one surviving ballot per batch is drawn for each remaining voter and the
//! batch sums are opened and tallied as in the simpler variants.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::ballots::{is_valid_opened_ballot, make_ballot, reconstruct_grid, BinGrid, SharedGrid, ShiftPair, VoteSpec};
use crate::channels::{PartyId, Phase, Value};
use crate::procedures::{equality_check, random_joint, ProtocolAbort, SimCtx};
use crate::sharing::binomial;

use super::common::{apply_presum_tampers, open_sums_and_tally, plan_votes, publish_tally};
use super::{Completed, ElectionParams, EqualityRecord, OpeningCatch, RunArtifacts, VoteAssignment};

pub(super) fn run(
    ctx: &mut SimCtx,
    params: &ElectionParams,
    assignment: &VoteAssignment,
) -> Completed {
    let mut artifacts = RunArtifacts::default();
    let mut revocations = None;
    let result = run_inner(ctx, params, assignment, &mut artifacts, &mut revocations);
    Completed {
        result,
        revocations,
        artifacts,
    }
}

fn run_inner(
    ctx: &mut SimCtx,
    params: &ElectionParams,
    assignment: &VoteAssignment,
    artifacts: &mut RunArtifacts,
    revocations: &mut Option<Vec<bool>>,
) -> Result<Vec<u64>, ProtocolAbort> {
    let (n, r, s) = (params.n, params.r, params.s);
    let modulus = params.modulus();
    let voters = params.voters();
    let authorities = params.authorities();
    let two_s = (2 * s) as usize;
    let s_us = s as usize;

    let votes = plan_votes(params, assignment, ctx.rngs, ctx.adversary);
    artifacts.planned_votes = voters.iter().map(|p| votes[p].clone()).collect();

    // Ballot delivery: every voter sends each authority its share grids of
    // all 2s^2 encrypted ballots in one private message.
    ctx.net.advance_round();
    let mut ballots: Vec<Vec<Vec<(SharedGrid, ShiftPair)>>> = Vec::with_capacity(n as usize);
    for v in 0..n {
        let dealer = PartyId::voter(v);
        let planned = votes[&dealer].clone();
        let mut sets = Vec::with_capacity(s_us);
        for k in 0..s {
            let mut batch = Vec::with_capacity(two_s);
            for b in 0..2 * s {
                let shift = ShiftPair::random(r, n, ctx.rngs.protocol(dealer));
                let vote = VoteSpec {
                    candidate: planned.candidate,
                    bin: planned.bins[k as usize],
                };
                let enc_vote = vote.shifted(shift, r, n);
                let grid = ctx
                    .adversary
                    .robust_grid(dealer, k, b, r, n, modulus, &planned, enc_vote, shift)
                    .unwrap_or_else(|| {
                        make_ballot(r, n, modulus, enc_vote).expect("shifted vote in range")
                    });
                let shared = SharedGrid::from_plain(&grid, &authorities, ctx.rngs.protocol(dealer))
                    .expect("authority set is valid");
                batch.push((shared, shift));
            }
            sets.push(batch);
        }
        for &a in &authorities {
            let value = Value::Tuple(
                sets.iter()
                    .flat_map(|batch| batch.iter().map(|(g, _)| g.share_grid(a).to_value()))
                    .collect(),
            );
            ctx.net.send_private(dealer, a, &value);
        }
        ballots.push(sets);
    }
    artifacts.share_view_sample = authorities
        .iter()
        .map(|&a| ballots[0][0][0].0.cell(0, 0).share_value(a))
        .collect();

    // Jointly draw, for every (voter, batch), which half of the batch to
    // open: one number below C(2s, s)^(n*s), one subset rank per digit.
    let subset_count = binomial(u64::from(2 * s), u64::from(s));
    let draw_bound = subset_count.pow(n * s);
    let mut rest = random_joint(ctx, Phase::OpenHalfDraw, &authorities, &draw_bound)?;
    let mut opened_idx: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n as usize);
    let mut survivors: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n as usize);
    for _v in 0..n {
        let mut opened_sets = Vec::with_capacity(s_us);
        let mut surviving_sets = Vec::with_capacity(s_us);
        for _k in 0..s {
            let digit = &rest % &subset_count;
            rest /= &subset_count;
            let opened = crate::sharing::unrank_subset(&digit, two_s, s_us)
                .expect("digit below subset count");
            let mut is_open = vec![false; two_s];
            for &i in &opened {
                is_open[i] = true;
            }
            let surviving = (0..two_s).filter(|&i| !is_open[i]).collect();
            opened_sets.push(opened);
            surviving_sets.push(surviving);
        }
        opened_idx.push(opened_sets);
        survivors.push(surviving_sets);
    }

    // Authority tampering window between the draw and the opening.
    for &a in &authorities {
        for (voter, delta) in ctx.adversary.preopening_tampers(a) {
            if voter < n {
                let first = opened_idx[voter as usize][0][0];
                ballots[voter as usize][0][first].0.add_to_share(0, 0, a, delta);
            }
        }
    }

    // Open the selected ballots: every authority broadcasts its share grids
    // of all of them in one simultaneous broadcast, then everyone checks
    // that each opened grid is a well-formed single mark.
    let delivered = {
        let ballots = &ballots;
        let opened_idx = &opened_idx;
        ctx.simultaneous(Phase::BallotOpening, &authorities, &mut |a| {
            let mut items = Vec::new();
            for v in 0..n as usize {
                for k in 0..s_us {
                    for &idx in &opened_idx[v][k] {
                        items.push(ballots[v][k][idx].0.share_grid(a).to_value());
                    }
                }
            }
            Value::Tuple(items)
        })?
    };
    let mut revoked = vec![false; n as usize];
    let mut flat = 0usize;
    for v in 0..n as usize {
        for k in 0..s_us {
            let mut caught = false;
            for _ in &opened_idx[v][k] {
                let per_party: Vec<(PartyId, BinGrid)> = authorities
                    .iter()
                    .map(|&a| {
                        let grid = match &delivered[&a] {
                            Value::Tuple(items) if flat < items.len() => {
                                BinGrid::from_value(&items[flat], r, n, modulus)
                                    .unwrap_or_else(|| BinGrid::zero(r, n, modulus))
                            }
                            _ => BinGrid::zero(r, n, modulus),
                        };
                        (a, grid)
                    })
                    .collect();
                flat += 1;
                let opened = reconstruct_grid(&authorities, modulus, r, n, &per_party)
                    .expect("one grid per authority");
                if is_valid_opened_ballot(&opened) {
                    let mark = opened
                        .cells()
                        .iter()
                        .position(|&c| c == 1)
                        .expect("valid ballot has a mark") as u64;
                    artifacts.opened_positions.push(mark);
                } else {
                    caught = true;
                }
            }
            artifacts.opening_catches.push(OpeningCatch {
                voter: v as u32,
                set: k as u32,
                caught,
            });
            if caught {
                revoked[v] = true;
            }
        }
    }
    *revocations = Some(revoked.clone());

    // Every voter (revoked or not) announces the displacements of its
    // surviving ballots to all authorities; missing or malformed
    // announcements revoke the voter.
    ctx.net.advance_round();
    let code_range = u64::from(r) * u64::from(n);
    let mut voter_shifts: Vec<Option<Vec<ShiftPair>>> = vec![None; n as usize];
    for v in 0..n as usize {
        let dealer = PartyId::voter(v as u32);
        let honest: Vec<u64> = (0..s_us)
            .flat_map(|k| {
                survivors[v][k]
                    .iter()
                    .map(move |&idx| (k, idx))
            })
            .map(|(k, idx)| ballots[v][k][idx].1.encode(n))
            .collect();
        match ctx.adversary.shift_codes(dealer, honest, code_range) {
            None => {
                revoked[v] = true;
            }
            Some(codes) => {
                let value = Value::Counts {
                    values: codes.clone(),
                    range: code_range,
                };
                for &a in &authorities {
                    ctx.net.send_private(dealer, a, &value);
                }
                let decoded: Option<Vec<ShiftPair>> = if codes.len() == s_us * s_us {
                    codes.iter().map(|&c| ShiftPair::decode(c, r, n)).collect()
                } else {
                    None
                };
                match decoded {
                    Some(shifts) => voter_shifts[v] = Some(shifts),
                    None => revoked[v] = true,
                }
            }
        }
    }
    *revocations = Some(revoked.clone());

    // Undo the displacements locally: every authority can rearrange its own
    // share grids once the shifts are public.
    let mut unshifted: Vec<Option<Vec<Vec<SharedGrid>>>> = vec![None; n as usize];
    for v in 0..n as usize {
        if revoked[v] {
            continue;
        }
        let shifts = voter_shifts[v].as_ref().expect("non-revoked voter sent shifts");
        let per_set = (0..s_us)
            .map(|k| {
                survivors[v][k]
                    .iter()
                    .enumerate()
                    .map(|(i, &idx)| ballots[v][k][idx].0.unshifted(shifts[k * s_us + i]))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        unshifted[v] = Some(per_set);
    }

    // Equality stage: for every remaining voter, candidate, and batch pair
    // (k, k+1 mod s), check that the shared row sums of all 2s surviving
    // grids agree. Any failed check revokes the voter.
    let mut first_equality = true;
    for v in 0..n as usize {
        if revoked[v] {
            continue;
        }
        let sets = unshifted[v].as_ref().expect("built above");
        'candidates: for c in 0..r {
            for j in 0..s_us {
                let next = (j + 1) % s_us;
                let mut inputs: Vec<_> = sets[j]
                    .iter()
                    .chain(sets[next].iter())
                    .map(|g| g.row_sum_shared(c))
                    .collect();
                if first_equality {
                    for &a in &authorities {
                        for (idx, delta) in ctx.adversary.preequality_tampers(a) {
                            if idx < inputs.len() {
                                inputs[idx].add_to_share(a, delta);
                            }
                        }
                    }
                    first_equality = false;
                }
                let verdict = equality_check(ctx, &authorities, &inputs)?;
                artifacts.equality_records.push(EqualityRecord {
                    voter: v as u32,
                    candidate: c,
                    round: j as u32,
                    opened: verdict.opened.clone(),
                    equal: verdict.equal,
                });
                if !verdict.equal {
                    revoked[v] = true;
                    break 'candidates;
                }
            }
        }
    }
    *revocations = Some(revoked.clone());

    // Revocation notices: one unanimity broadcast per voter.
    for v in 0..n {
        let values: BTreeMap<PartyId, Value> = authorities
            .iter()
            .map(|&a| {
                let bit = ctx.adversary.revocation_bit(a, v, revoked[v as usize]);
                (a, Value::Bit(bit))
            })
            .collect();
        ctx.unanimous(
            Phase::RevocationNotice,
            &authorities,
            &[PartyId::voter(v)],
            &values,
            crate::procedures::AbortPhase::NonUnanimousRevocation,
        )?;
    }

    // Jointly pick one surviving ballot per (voter, batch).
    let survivor_bound = BigUint::from(u64::from(s)).pow(n * s);
    let mut rest = random_joint(ctx, Phase::SurvivorDraw, &authorities, &survivor_bound)?;
    let s_big = BigUint::from(u64::from(s));
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(n as usize);
    for _v in 0..n {
        let mut per_set = Vec::with_capacity(s_us);
        for _k in 0..s {
            let digit = &rest % &s_big;
            rest /= &s_big;
            per_set.push(u64::try_from(digit).expect("digit below s") as usize);
        }
        chosen.push(per_set);
    }

    // Final tally: per batch, sum the chosen grids of the remaining voters
    // (each authority adds its own share grids) and open as usual.
    let expected: u64 = revoked.iter().filter(|&&x| !x).count() as u64;
    let mut summed: BTreeMap<PartyId, Vec<BinGrid>> = authorities
        .iter()
        .map(|&a| {
            let per_set = (0..s_us)
                .map(|k| {
                    let mut acc = BinGrid::zero(r, n, modulus);
                    for v in 0..n as usize {
                        if revoked[v] {
                            continue;
                        }
                        let grid =
                            &unshifted[v].as_ref().expect("non-revoked")[k][chosen[v][k]];
                        acc = acc.add(&grid.share_grid(a)).expect("same shape");
                    }
                    acc
                })
                .collect();
            (a, per_set)
        })
        .collect();
    apply_presum_tampers(ctx.adversary, &mut summed, modulus);
    let (tally, grids) = open_sums_and_tally(ctx, &authorities, &summed, params, expected)?;
    artifacts.public_sums = grids;

    publish_tally(ctx, &authorities, &voters, &tally, u64::from(n))
}
