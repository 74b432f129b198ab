//! The authority-assisted protocol: voters split their ballot grids among
//! `t` tallying authorities, the authorities open the summed shares among
//! themselves, check consistency, and announce the counts to the voters
//! unanimously. Voters never talk to each other; privacy holds as long as
//! at least one authority keeps its shares to itself.

use std::collections::BTreeMap;

use crate::ballots::BinGrid;
use crate::channels::PartyId;
use crate::procedures::SimCtx;

use super::common::{
    apply_presum_tampers, deal_ballots, open_sums_and_tally, plan_votes, publish_tally,
    share_view_sample,
};
use super::{Completed, ElectionParams, RunArtifacts, VoteAssignment};

pub(super) fn run(
    ctx: &mut SimCtx,
    params: &ElectionParams,
    assignment: &VoteAssignment,
) -> Completed {
    let voters = params.voters();
    let authorities = params.authorities();
    let votes = plan_votes(params, assignment, ctx.rngs, ctx.adversary);
    let mut artifacts = RunArtifacts {
        planned_votes: voters.iter().map(|p| votes[p].clone()).collect(),
        ..RunArtifacts::default()
    };

    let dealt = deal_ballots(ctx, params, &authorities, &votes);
    artifacts.share_view_sample = share_view_sample(&dealt.grids, &authorities);

    let mut summed: BTreeMap<PartyId, Vec<BinGrid>> = authorities
        .iter()
        .map(|&a| {
            let per_rep = (0..params.s as usize)
                .map(|j| {
                    voters
                        .iter()
                        .map(|d| dealt.grids[d][j].share_grid(a))
                        .reduce(|x, y| x.add(&y).expect("same shape"))
                        .expect("at least two voters")
                })
                .collect();
            (a, per_rep)
        })
        .collect();
    apply_presum_tampers(ctx.adversary, &mut summed, params.modulus());

    let result = (|| {
        let (tally, grids) =
            open_sums_and_tally(ctx, &authorities, &summed, params, u64::from(params.n))?;
        artifacts.public_sums = grids;
        publish_tally(ctx, &authorities, &voters, &tally, u64::from(params.n))
    })();
    Completed {
        result,
        revocations: None,
        artifacts,
    }
}
