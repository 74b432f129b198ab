//! Steps shared by the protocol variants: vote planning, ballot dealing,
//! sum opening with consistency checks, and tally publication.

use std::collections::BTreeMap;

use rand::Rng;

use crate::adversary::{AdversaryRuntime, PlannedVote};
use crate::ballots::{make_ballot, reconstruct_grid, BinGrid, SharedGrid, VoteSpec};
use crate::channels::{PartyId, PartyRngs, Phase, Value};
use crate::procedures::{AbortPhase, ProtocolAbort, SimCtx};
use crate::sharing::Modulus;

use super::{ElectionParams, VoteAssignment};

/// Resolves every voter's planned vote: the candidate comes from the
/// assignment (or the voter's own uniform draw), bins are drawn uniformly
/// per repetition, and strategies may override the result.
pub fn plan_votes(
    params: &ElectionParams,
    assignment: &VoteAssignment,
    rngs: &mut PartyRngs,
    adversary: &mut AdversaryRuntime,
) -> BTreeMap<PartyId, PlannedVote> {
    let mut votes = BTreeMap::new();
    for v in 0..params.n {
        let party = PartyId::voter(v);
        let rng = rngs.protocol(party);
        let candidate = match assignment {
            VoteAssignment::Uniform => rng.gen_range(0..params.r),
            VoteAssignment::Fixed { candidates } => candidates[v as usize],
        };
        let bins = (0..params.s).map(|_| rng.gen_range(0..params.n)).collect();
        votes.insert(party, PlannedVote { candidate, bins });
    }
    adversary.resolve_votes(&mut votes);
    votes
}

/// Everything dealt in the ballot round of the one-grid protocols: per
/// dealer, one shared grid per repetition.
pub(super) struct DealtBallots {
    pub grids: BTreeMap<PartyId, Vec<SharedGrid>>,
}

/// One synchronous round in which every voter shares its `s` ballot grids
/// among `holders` and sends each other holder its share grids in a single
/// private message.
pub(super) fn deal_ballots(
    ctx: &mut SimCtx,
    params: &ElectionParams,
    holders: &[PartyId],
    votes: &BTreeMap<PartyId, PlannedVote>,
) -> DealtBallots {
    let modulus = params.modulus();
    ctx.net.advance_round();
    let mut grids = BTreeMap::new();
    for v in 0..params.n {
        let dealer = PartyId::voter(v);
        let planned = votes[&dealer].clone();
        let mut reps = Vec::with_capacity(params.s as usize);
        for j in 0..params.s as usize {
            let grid = ctx
                .adversary
                .cast_grid(dealer, j, params.r, params.n, modulus, &planned)
                .unwrap_or_else(|| {
                    let vote = VoteSpec {
                        candidate: planned.candidate,
                        bin: planned.bins[j],
                    };
                    make_ballot(params.r, params.n, modulus, vote).expect("planned vote in range")
                });
            let shared = SharedGrid::from_plain(&grid, holders, ctx.rngs.protocol(dealer))
                .expect("holder set is valid");
            reps.push(shared);
        }
        for &h in holders {
            if h == dealer {
                continue;
            }
            let value = Value::Tuple(reps.iter().map(|g| g.share_grid(h).to_value()).collect());
            ctx.net.send_private(dealer, h, &value);
        }
        grids.insert(dealer, reps);
    }
    DealtBallots { grids }
}

/// Each holder's shares of voter 0's first ballot grid, cell (0, 0) — the
/// sample used by privacy measurements.
pub(super) fn share_view_sample(grids: &BTreeMap<PartyId, Vec<SharedGrid>>, holders: &[PartyId]) -> Vec<u64> {
    let first = &grids[&PartyId::voter(0)][0];
    holders.iter().map(|&h| first.cell(0, 0).share_value(h)).collect()
}

/// Applies share-level sum tampers declared by authority strategies.
pub(super) fn apply_presum_tampers(
    adversary: &AdversaryRuntime,
    summed: &mut BTreeMap<PartyId, Vec<BinGrid>>,
    modulus: Modulus,
) {
    for (&party, grids) in summed.iter_mut() {
        for (candidate, bin, delta) in adversary.presum_tampers(party) {
            for g in grids.iter_mut() {
                if candidate < g.rows() && bin < g.cols() {
                    let bumped = modulus.add(g.get(candidate, bin), delta);
                    g.set(candidate, bin, bumped);
                }
            }
        }
    }
}

/// One simultaneous broadcast in which every opener publishes its summed
/// share grids, followed by reconstruction, the consistency check (no
/// negative cell, total equal to the ballot count) and the cross-repetition
/// tally agreement check.
pub(super) fn open_sums_and_tally(
    ctx: &mut SimCtx,
    openers: &[PartyId],
    summed: &BTreeMap<PartyId, Vec<BinGrid>>,
    params: &ElectionParams,
    expected_total: u64,
) -> Result<(Vec<u64>, Vec<BinGrid>), ProtocolAbort> {
    let modulus = params.modulus();
    let (r, n) = (params.r, params.n);
    let delivered = ctx.simultaneous(Phase::SumOpening, openers, &mut |p| {
        Value::Tuple(summed[&p].iter().map(BinGrid::to_value).collect())
    })?;
    let mut sum_grids = Vec::with_capacity(params.s as usize);
    for j in 0..params.s as usize {
        let per_party: Vec<(PartyId, BinGrid)> = openers
            .iter()
            .map(|&p| {
                let grid = match &delivered[&p] {
                    Value::Tuple(items) if j < items.len() => {
                        BinGrid::from_value(&items[j], r, n, modulus)
                            .unwrap_or_else(|| BinGrid::zero(r, n, modulus))
                    }
                    _ => BinGrid::zero(r, n, modulus),
                };
                (p, grid)
            })
            .collect();
        let sum = reconstruct_grid(openers, modulus, r, n, &per_party)
            .expect("one share grid per opener");
        if !sum.is_sum_consistent(expected_total) {
            return Err(ProtocolAbort {
                phase: AbortPhase::SumInconsistency,
                culprits: Vec::new(),
            });
        }
        sum_grids.push(sum);
    }
    let tally = sum_grids[0].tally();
    if sum_grids.iter().any(|g| g.tally() != tally) {
        return Err(ProtocolAbort {
            phase: AbortPhase::RepetitionMismatch,
            culprits: Vec::new(),
        });
    }
    Ok((tally, sum_grids))
}

/// Unanimous publication of the final counts from the authorities to the
/// voters. Any disagreement names the deviating authorities and aborts.
pub(super) fn publish_tally(
    ctx: &mut SimCtx,
    senders: &[PartyId],
    receivers: &[PartyId],
    tally: &[u64],
    count_range: u64,
) -> Result<Vec<u64>, ProtocolAbort> {
    let values: BTreeMap<PartyId, Value> = senders
        .iter()
        .map(|&a| {
            let counts = ctx.adversary.publication_counts(a, tally.to_vec());
            (
                a,
                Value::Counts {
                    values: counts,
                    range: count_range,
                },
            )
        })
        .collect();
    let agreed = ctx.unanimous(
        Phase::Publication,
        senders,
        receivers,
        &values,
        AbortPhase::NonUnanimousPublication,
    )?;
    match agreed {
        Value::Counts { values, .. } => Ok(values),
        _ => unreachable!("publication values are counts"),
    }
}
