//! Joint subroutines built on the simultaneous broadcast: shared randomness
//! nobody can bias before seeing others' inputs, and an equality check on
//! additively shared values that opens only random balanced differences.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use serde::Serialize;

use crate::adversary::AdversaryRuntime;
use crate::channels::{
    BroadcastResult, Network, PartyId, PartyRngs, Phase, UnanimousResult, Value,
};
use crate::sharing::{
    binomial, binomial_u64, reconstruct, sum_shared, unrank_subset, Modulus, Share, SharedSecret,
};

/// Why a run stopped before producing a tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortPhase {
    /// A participant sent nothing into a broadcast.
    BroadcastRefusal,
    /// A commit-reveal opening failed verification.
    CommitMismatch,
    /// An opened sum grid had a negative cell or a wrong total.
    SumInconsistency,
    /// Parallel repetitions produced different tallies.
    RepetitionMismatch,
    /// Revocation announcements disagreed.
    NonUnanimousRevocation,
    /// Tally announcements disagreed.
    NonUnanimousPublication,
}

impl AbortPhase {
    pub fn name(self) -> &'static str {
        match self {
            AbortPhase::BroadcastRefusal => "broadcast_refusal",
            AbortPhase::CommitMismatch => "commit_mismatch",
            AbortPhase::SumInconsistency => "sum_inconsistency",
            AbortPhase::RepetitionMismatch => "repetition_mismatch",
            AbortPhase::NonUnanimousRevocation => "non_unanimous_revocation",
            AbortPhase::NonUnanimousPublication => "non_unanimous_publication",
        }
    }
}

/// An abort with whoever could be blamed for it (possibly nobody).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProtocolAbort {
    pub phase: AbortPhase,
    pub culprits: Vec<PartyId>,
}

/// Mutable context threaded through one protocol run.
pub struct SimCtx<'a> {
    pub net: &'a mut Network,
    pub rngs: &'a mut PartyRngs,
    pub adversary: &'a mut AdversaryRuntime,
}

impl SimCtx<'_> {
    /// One simultaneous broadcast with adversary filtering and abort
    /// mapping. `honest` yields each participant's honest input.
    pub fn simultaneous(
        &mut self,
        phase: Phase,
        participants: &[PartyId],
        honest: &mut dyn FnMut(PartyId) -> Value,
    ) -> Result<BTreeMap<PartyId, Value>, ProtocolAbort> {
        let adversary = &mut *self.adversary;
        let mut provide = |p: PartyId| adversary.broadcast_input(p, phase, honest(p));
        let result = self
            .net
            .simultaneous_broadcast(self.rngs, phase, participants, &mut provide);
        match result {
            BroadcastResult::Delivered(values) => {
                self.adversary.observe_broadcast();
                Ok(values)
            }
            BroadcastResult::Refused { refusers } => Err(ProtocolAbort {
                phase: AbortPhase::BroadcastRefusal,
                culprits: refusers,
            }),
            BroadcastResult::CommitMismatch { cheaters } => Err(ProtocolAbort {
                phase: AbortPhase::CommitMismatch,
                culprits: cheaters,
            }),
        }
    }

    /// One unanimity broadcast; `values` holds each sender's announcement
    /// (already tampered where a strategy says so). Disagreement aborts with
    /// `disagree_phase`; withholding aborts as a refusal.
    pub fn unanimous(
        &mut self,
        phase: Phase,
        senders: &[PartyId],
        receivers: &[PartyId],
        values: &BTreeMap<PartyId, Value>,
        disagree_phase: AbortPhase,
    ) -> Result<Value, ProtocolAbort> {
        let adversary = &*self.adversary;
        let result = self
            .net
            .broadcast_unanimous(phase, senders, receivers, &mut |p| {
                if adversary.refuses_unanimous(p, phase) {
                    None
                } else {
                    Some(values[&p].clone())
                }
            });
        match result {
            UnanimousResult::Agreed(v) => Ok(v),
            UnanimousResult::Disagreed { culprits } => Err(ProtocolAbort {
                phase: disagree_phase,
                culprits,
            }),
            UnanimousResult::Refused { refusers } => Err(ProtocolAbort {
                phase: AbortPhase::BroadcastRefusal,
                culprits: refusers,
            }),
        }
    }
}

fn decode_contributions(value: &Value, bound: &BigUint, count: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); count];
    if let Value::Tuple(items) = value {
        for (i, item) in items.iter().take(count).enumerate() {
            if let Value::BigResidue { value, .. } = item {
                out[i] = value % bound;
            }
        }
    }
    out
}

/// `count` jointly random values in `[0, bound)`, produced in a single
/// simultaneous broadcast: every participant contributes uniform values and
/// the results are the component-wise sums mod `bound`. Because inputs are
/// collected before any output is released, one honest participant suffices
/// for uniformity; malformed or out-of-range contributions are reduced
/// (treating absent components as zero), which cannot help the sender.
pub fn random_joint_vec(
    ctx: &mut SimCtx,
    phase: Phase,
    participants: &[PartyId],
    bound: &BigUint,
    count: usize,
) -> Result<Vec<BigUint>, ProtocolAbort> {
    assert!(!bound.is_zero(), "bound must be positive");
    // Contributions are drawn up front from each party's own stream; the
    // broadcast then collects them all before releasing any.
    let honest: BTreeMap<PartyId, Value> = participants
        .iter()
        .map(|&p| {
            let rng = ctx.rngs.protocol(p);
            let items = (0..count)
                .map(|_| Value::BigResidue {
                    value: rng.gen_biguint_below(bound),
                    bound: bound.clone(),
                })
                .collect();
            (p, Value::Tuple(items))
        })
        .collect();
    let delivered = ctx.simultaneous(phase, participants, &mut |p| honest[&p].clone())?;
    let mut sums = vec![BigUint::zero(); count];
    for value in delivered.values() {
        for (i, c) in decode_contributions(value, bound, count).into_iter().enumerate() {
            sums[i] = (&sums[i] + c) % bound;
        }
    }
    Ok(sums)
}

/// One jointly random value in `[0, bound)`.
pub fn random_joint(
    ctx: &mut SimCtx,
    phase: Phase,
    participants: &[PartyId],
    bound: &BigUint,
) -> Result<BigUint, ProtocolAbort> {
    Ok(random_joint_vec(ctx, phase, participants, bound, 1)?.pop().expect("count 1"))
}

/// Result of an equality check on shared values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualityVerdict {
    pub equal: bool,
    /// The opened differences, one per repetition; all zero when `equal`.
    pub opened: Vec<u64>,
}

/// Checks whether `2k` additively shared values are all equal, without
/// opening any of them. Runs `k` repetitions; each draws a random balanced
/// partition of the inputs into halves P and Q and opens only the shared
/// difference sum(P) - sum(Q), which is zero whenever the values are all
/// equal and nonzero with probability bounded away from zero otherwise. The
/// partition draws for all repetitions ride in one broadcast, and so do all
/// the difference openings.
pub fn equality_check(
    ctx: &mut SimCtx,
    participants: &[PartyId],
    inputs: &[SharedSecret],
) -> Result<EqualityVerdict, ProtocolAbort> {
    let len = inputs.len();
    assert!(len >= 2 && len % 2 == 0, "need an even number of inputs");
    let modulus = inputs[0].modulus();
    for h in inputs {
        assert_eq!(h.modulus().get(), modulus.get());
        assert_eq!(h.parties(), participants, "inputs must be shared among the checkers");
    }
    let reps = len / 2;
    let bound = binomial(len as u64, reps as u64);
    let ranks = random_joint_vec(
        ctx,
        Phase::EqualityPartitionDraw,
        participants,
        &bound,
        reps,
    )?;

    let mut differences = Vec::with_capacity(reps);
    for rank in &ranks {
        let subset = unrank_subset(rank, len, reps).expect("rank below bound");
        let mut in_p = vec![false; len];
        for &i in &subset {
            in_p[i] = true;
        }
        let terms: Vec<SharedSecret> = inputs
            .iter()
            .enumerate()
            .map(|(i, h)| if in_p[i] { h.clone() } else { h.negated() })
            .collect();
        differences.push(sum_shared(terms.iter()).expect("nonempty term list"));
    }

    let delivered = ctx.simultaneous(Phase::EqualityOpening, participants, &mut |p| {
        Value::ResidueSeq {
            modulus: modulus.get(),
            values: differences.iter().map(|d| d.share_value(p)).collect(),
        }
    })?;

    let mut opened = Vec::with_capacity(reps);
    for rep in 0..reps {
        let shares: Vec<Share> = participants
            .iter()
            .map(|&p| {
                let value = match &delivered[&p] {
                    Value::ResidueSeq { values, .. } if rep < values.len() => {
                        values[rep] % modulus.get()
                    }
                    _ => 0,
                };
                Share { owner: p, value }
            })
            .collect();
        opened.push(
            reconstruct(participants, modulus, &shares).expect("one share per participant"),
        );
    }
    let equal = opened.iter().all(|&y| y == 0);
    Ok(EqualityVerdict { equal, opened })
}

/// Exhaustive statistics of the balanced-partition difference over one
/// multiset of values: how many of the `C(2k, k)` equally likely subset
/// choices yield a zero difference, and the same count over distinct
/// value-multiset partitions (each counted once).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionStats {
    pub sampled_zero: u64,
    pub sampled_total: u64,
    pub distinct_zero: u64,
    pub distinct_total: u64,
}

pub fn partition_difference_stats(values: &[u64], modulus: Modulus) -> PartitionStats {
    let len = values.len();
    assert!(len >= 2 && len % 2 == 0, "need an even number of values");
    let k = len / 2;
    let total = binomial_u64(len as u64, k as u64);
    let mut stats = PartitionStats {
        sampled_zero: 0,
        sampled_total: total,
        distinct_zero: 0,
        distinct_total: 0,
    };
    let mut seen: BTreeSet<(Vec<u64>, Vec<u64>)> = BTreeSet::new();
    for rank in 0..total {
        let subset = unrank_subset(&BigUint::from(rank), len, k).expect("rank below total");
        let mut in_p = vec![false; len];
        for &i in &subset {
            in_p[i] = true;
        }
        let mut y = 0u64;
        let mut p_vals = Vec::with_capacity(k);
        let mut q_vals = Vec::with_capacity(k);
        for (i, &v) in values.iter().enumerate() {
            if in_p[i] {
                y = modulus.add(y, v);
                p_vals.push(v);
            } else {
                y = modulus.sub(y, v);
                q_vals.push(v);
            }
        }
        let zero = y == 0;
        if zero {
            stats.sampled_zero += 1;
        }
        p_vals.sort_unstable();
        q_vals.sort_unstable();
        let key = if p_vals <= q_vals {
            (p_vals, q_vals)
        } else {
            (q_vals, p_vals)
        };
        if seen.insert(key) {
            stats.distinct_total += 1;
            if zero {
                stats.distinct_zero += 1;
            }
        }
    }
    stats
}
