//! The voters-only protocol: every voter shares its ballot grids with all
//! voters over the complete private-channel graph, everyone broadcasts
//! summed shares, and everyone computes the tally locally. There is no
//! recovery: any inconsistency or refusal ends the election.

use std::collections::BTreeMap;

use crate::ballots::BinGrid;
use crate::channels::PartyId;
use crate::procedures::SimCtx;

use super::common::{deal_ballots, open_sums_and_tally, plan_votes, share_view_sample};
use super::{Completed, ElectionParams, RunArtifacts, VoteAssignment};

pub(super) fn run(
    ctx: &mut SimCtx,
    params: &ElectionParams,
    assignment: &VoteAssignment,
) -> Completed {
    let voters = params.voters();
    let votes = plan_votes(params, assignment, ctx.rngs, ctx.adversary);
    let mut artifacts = RunArtifacts {
        planned_votes: voters.iter().map(|p| votes[p].clone()).collect(),
        ..RunArtifacts::default()
    };

    let dealt = deal_ballots(ctx, params, &voters, &votes);
    artifacts.share_view_sample = share_view_sample(&dealt.grids, &voters);

    // Each voter sums, per repetition, its shares of all dealt ballots.
    let summed: BTreeMap<PartyId, Vec<BinGrid>> = voters
        .iter()
        .map(|&h| {
            let per_rep = (0..params.s as usize)
                .map(|j| {
                    voters
                        .iter()
                        .map(|d| dealt.grids[d][j].share_grid(h))
                        .reduce(|a, b| a.add(&b).expect("same shape"))
                        .expect("at least two voters")
                })
                .collect();
            (h, per_rep)
        })
        .collect();

    let result = open_sums_and_tally(ctx, &voters, &summed, params, u64::from(params.n));
    let result = result.map(|(tally, grids)| {
        artifacts.public_sums = grids;
        tally
    });
    Completed {
        result,
        revocations: None,
        artifacts,
    }
}
