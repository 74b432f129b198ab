//! The three election protocol variants and their shared run interface.

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryRuntime, PlannedVote, Strategy, StrategyBinding, TamperAction};
use crate::ballots::BinGrid;
use crate::channels::{
    BroadcastRealization, Network, PartyId, PartyRngs, Phase, Topology, TrafficLedger, Transcript,
};
use crate::procedures::{AbortPhase, ProtocolAbort, SimCtx};
use crate::sharing::Modulus;

mod basic;
mod common;
mod delegated;
mod robust;

pub use common::plan_votes;

/// Which protocol variant to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Voters only, complete private-channel graph; any misbehavior aborts.
    Basic,
    /// Shares go to tallying authorities instead of other voters.
    Delegated,
    /// Batched ballot audits and share-equality checks let the run survive
    /// misbehaving voters by revoking them.
    Robust,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Basic => "basic",
            ProtocolKind::Delegated => "delegated",
            ProtocolKind::Robust => "robust",
        }
    }

    pub fn topology(self) -> Topology {
        match self {
            ProtocolKind::Basic => Topology::VotersComplete,
            _ => Topology::VotersToAuthorities,
        }
    }

    pub fn uses_authorities(self) -> bool {
        self != ProtocolKind::Basic
    }
}

/// Election-wide sizes: `n` voters, `r` candidates, `t` authorities (unused
/// by the basic protocol), `s` parallel repetitions / audit batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionParams {
    pub n: u32,
    pub r: u32,
    #[serde(default)]
    pub t: u32,
    pub s: u32,
    #[serde(default)]
    pub realization: BroadcastRealization,
}

impl ElectionParams {
    /// Working modulus `2n + 1`: large enough that `n` marks can never wrap,
    /// with an upper residue half free to represent negative cheating marks.
    pub fn modulus(&self) -> Modulus {
        Modulus::for_voters(u64::from(self.n))
    }

    /// Bits per share: `ceil(log2(2n + 1))`.
    pub fn share_bits(&self) -> u64 {
        self.modulus().bits()
    }

    pub fn voters(&self) -> Vec<PartyId> {
        (0..self.n).map(PartyId::voter).collect()
    }

    pub fn authorities(&self) -> Vec<PartyId> {
        (0..self.t).map(PartyId::authority).collect()
    }

    pub fn validate(&self, kind: ProtocolKind) -> Result<(), String> {
        if self.n < 2 {
            return Err("need at least two voters".into());
        }
        if self.r < 1 {
            return Err("need at least one candidate".into());
        }
        if self.s < 1 {
            return Err("need at least one repetition".into());
        }
        if kind.uses_authorities() && self.t < 1 {
            return Err(format!("protocol {:?} needs at least one authority", kind));
        }
        Ok(())
    }
}

/// Who votes for whom.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VoteAssignment {
    /// Every voter picks a uniformly random candidate.
    #[default]
    Uniform,
    /// Candidates are pinned per voter; bins stay random.
    Fixed { candidates: Vec<u32> },
}

impl VoteAssignment {
    pub fn validate(&self, params: &ElectionParams) -> Result<(), String> {
        if let VoteAssignment::Fixed { candidates } = self {
            if candidates.len() != params.n as usize {
                return Err(format!(
                    "fixed votes list {} candidates for {} voters",
                    candidates.len(),
                    params.n
                ));
            }
            if let Some(c) = candidates.iter().find(|&&c| c >= params.r) {
                return Err(format!("candidate {c} out of range (r = {})", params.r));
            }
        }
        Ok(())
    }
}

/// How one run ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Success {
        tally: Vec<u64>,
    },
    Abort {
        phase: AbortPhase,
        culprits: Vec<PartyId>,
    },
}

impl RunStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Success { .. })
    }
}

/// One equality check's public outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualityRecord {
    pub voter: u32,
    pub candidate: u32,
    pub round: u32,
    pub opened: Vec<u64>,
    pub equal: bool,
}

/// Whether the ballot audit of one batch caught an invalid grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpeningCatch {
    pub voter: u32,
    pub set: u32,
    pub caught: bool,
}

/// Measurement hooks filled during a run; everything here is derived from
/// values that were legitimately visible to some participant.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunArtifacts {
    /// Final planned vote per voter (candidate plus per-repetition bins).
    pub planned_votes: Vec<PlannedVote>,
    /// Each shareholder's share of voter 0's first ballot grid, cell (0, 0).
    pub share_view_sample: Vec<u64>,
    /// Mark positions (candidate * cols + bin) of valid audited ballots.
    pub opened_positions: Vec<u64>,
    /// All equality-check outcomes, in execution order.
    pub equality_records: Vec<EqualityRecord>,
    /// Audit outcome per (voter, batch).
    pub opening_catches: Vec<OpeningCatch>,
    /// The opened sum grids, one per repetition.
    pub public_sums: Vec<BinGrid>,
}

/// Everything one protocol run produces.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolOutcome {
    pub status: RunStatus,
    /// Per-voter revocation flags (robust protocol only).
    pub revocations: Option<Vec<bool>>,
    pub ledger: TrafficLedger,
    pub transcript: Transcript,
    /// Broadcast events where an input was requested after outputs existed;
    /// always zero unless the channel implementation regresses.
    pub probe_violations: u64,
    pub artifacts: RunArtifacts,
}

pub(crate) struct Completed {
    pub result: Result<Vec<u64>, ProtocolAbort>,
    pub revocations: Option<Vec<bool>>,
    pub artifacts: RunArtifacts,
}

/// Runs one election end to end. Parameters and strategies are assumed
/// validated (see [`validate_strategies`]); internal misuse panics.
pub fn run(
    kind: ProtocolKind,
    params: &ElectionParams,
    assignment: &VoteAssignment,
    bindings: &[StrategyBinding],
    seed: u64,
) -> ProtocolOutcome {
    params.validate(kind).expect("invalid election parameters");
    assignment.validate(params).expect("invalid vote assignment");
    let mut net = Network::new(kind.topology(), params.realization);
    let mut rngs = PartyRngs::new(seed);
    let mut adversary = AdversaryRuntime::new(bindings);
    let completed = {
        let mut ctx = SimCtx {
            net: &mut net,
            rngs: &mut rngs,
            adversary: &mut adversary,
        };
        match kind {
            ProtocolKind::Basic => basic::run(&mut ctx, params, assignment),
            ProtocolKind::Delegated => delegated::run(&mut ctx, params, assignment),
            ProtocolKind::Robust => robust::run(&mut ctx, params, assignment),
        }
    };
    let (ledger, transcript, probe) = net.into_parts();
    let status = match completed.result {
        Ok(tally) => RunStatus::Success { tally },
        Err(ProtocolAbort { phase, culprits }) => RunStatus::Abort { phase, culprits },
    };
    ProtocolOutcome {
        status,
        revocations: completed.revocations,
        ledger,
        transcript,
        probe_violations: probe.violations(),
        artifacts: completed.artifacts,
    }
}

fn validate_voter_cell(params: &ElectionParams, cell: (u32, u32)) -> Result<(), String> {
    if cell.0 >= params.r {
        return Err(format!("candidate {} out of range (r = {})", cell.0, params.r));
    }
    if cell.1 >= params.n {
        return Err(format!("bin {} out of range (n = {})", cell.1, params.n));
    }
    Ok(())
}

/// Checks that one strategy binding makes sense for the protocol and sizes.
pub fn validate_strategy(
    kind: ProtocolKind,
    params: &ElectionParams,
    binding: &StrategyBinding,
) -> Result<(), String> {
    let party = binding.party;
    let in_election = if party.is_voter() {
        party.index < params.n
    } else {
        kind.uses_authorities() && party.index < params.t
    };
    if !in_election {
        return Err(format!("{party} does not participate in this election"));
    }
    let voter_only = |what: &str| -> Result<(), String> {
        if party.is_voter() {
            Ok(())
        } else {
            Err(format!("{what} is a voter strategy, bound to {party}"))
        }
    };
    match &binding.strategy {
        Strategy::Honest => Ok(()),
        Strategy::FixedBin { candidate, bin } => {
            voter_only("fixed_bin")?;
            validate_voter_cell(params, (*candidate, *bin))
        }
        Strategy::NegativeVote { target, extra } => {
            voter_only("negative_vote")?;
            if kind == ProtocolKind::Robust {
                return Err("negative_vote applies to the one-grid protocols only".into());
            }
            if let Some(t) = target {
                validate_voter_cell(params, *t)?;
            }
            validate_voter_cell(params, *extra)
        }
        Strategy::MultiVote { .. } => {
            voter_only("multi_vote")?;
            if kind == ProtocolKind::Robust {
                return Err("multi_vote applies to the one-grid protocols only".into());
            }
            Ok(())
        }
        Strategy::InvalidBallots { per_set, .. } => {
            voter_only("invalid_ballots")?;
            if kind != ProtocolKind::Robust {
                return Err("invalid_ballots needs the robust protocol".into());
            }
            if *per_set > 2 * params.s {
                return Err(format!(
                    "per_set {} exceeds batch size {}",
                    per_set,
                    2 * params.s
                ));
            }
            Ok(())
        }
        Strategy::InconsistentCandidates => {
            voter_only("inconsistent_candidates")?;
            if kind != ProtocolKind::Robust {
                return Err("inconsistent_candidates needs the robust protocol".into());
            }
            if params.r < 2 {
                return Err("inconsistent_candidates needs at least two candidates".into());
            }
            Ok(())
        }
        Strategy::MalformedShifts => {
            voter_only("malformed_shifts")?;
            if kind != ProtocolKind::Robust {
                return Err("malformed_shifts needs the robust protocol".into());
            }
            Ok(())
        }
        Strategy::RefuseBroadcast { phase } => {
            if phase_available(kind, party, *phase, false) {
                Ok(())
            } else {
                Err(format!(
                    "{party} sends nothing in phase {phase:?} of the {} protocol",
                    kind.name()
                ))
            }
        }
        Strategy::EquivocateCommit { phase } => {
            if phase_available(kind, party, *phase, true) {
                Ok(())
            } else {
                Err(format!(
                    "{party} makes no commitment in phase {phase:?} of the {} protocol",
                    kind.name()
                ))
            }
        }
        Strategy::AuthorityTamper { actions } => {
            if party.is_voter() {
                return Err("authority_tamper is an authority strategy".into());
            }
            for action in actions {
                match action {
                    TamperAction::PreSum { candidate, bin, .. } => {
                        validate_voter_cell(params, (*candidate, *bin))?;
                    }
                    TamperAction::Publication { candidate, .. } => {
                        if *candidate >= params.r {
                            return Err(format!("candidate {candidate} out of range"));
                        }
                    }
                    TamperAction::PreEquality { input_index, .. } => {
                        if kind != ProtocolKind::Robust {
                            return Err("pre_equality needs the robust protocol".into());
                        }
                        if *input_index >= 2 * params.s as usize {
                            return Err(format!(
                                "input_index {} exceeds the equality width {}",
                                input_index,
                                2 * params.s
                            ));
                        }
                    }
                    TamperAction::PreOpening { voter, .. } => {
                        if kind != ProtocolKind::Robust {
                            return Err("pre_opening needs the robust protocol".into());
                        }
                        if *voter >= params.n {
                            return Err(format!("voter {voter} out of range"));
                        }
                    }
                    TamperAction::RevocationBit { voter } => {
                        if kind != ProtocolKind::Robust {
                            return Err("revocation_bit needs the robust protocol".into());
                        }
                        if *voter >= params.n {
                            return Err(format!("voter {voter} out of range"));
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

/// Phases in which `party` sends into a broadcast of the given protocol.
/// `needs_commitment` restricts to simultaneous (committing) broadcasts.
fn phase_available(
    kind: ProtocolKind,
    party: PartyId,
    phase: Phase,
    needs_commitment: bool,
) -> bool {
    use Phase::*;
    match (kind, party.is_voter()) {
        (ProtocolKind::Basic, true) => phase == SumOpening,
        (ProtocolKind::Basic, false) => false,
        (ProtocolKind::Delegated, true) => false,
        (ProtocolKind::Delegated, false) => {
            phase == SumOpening || (!needs_commitment && phase == Publication)
        }
        (ProtocolKind::Robust, true) => !needs_commitment && phase == ShiftDelivery,
        (ProtocolKind::Robust, false) => match phase {
            OpenHalfDraw | BallotOpening | EqualityPartitionDraw | EqualityOpening
            | SurvivorDraw | SumOpening => true,
            RevocationNotice | Publication => !needs_commitment,
            BallotDelivery | ShiftDelivery => false,
        },
    }
}

/// Validates a whole strategy list: participants exist, no party is bound
/// twice, strategies fit the protocol, and collusion references resolve.
pub fn validate_strategies(
    kind: ProtocolKind,
    params: &ElectionParams,
    bindings: &[StrategyBinding],
) -> Result<(), String> {
    let mut seen = std::collections::BTreeSet::new();
    for b in bindings {
        if !seen.insert(b.party) {
            return Err(format!("{} is bound to two strategies", b.party));
        }
        validate_strategy(kind, params, b)?;
    }
    for b in bindings {
        if let Strategy::NegativeVote { target: None, .. } = b.strategy {
            let has_partner = bindings.iter().any(|other| {
                other.party != b.party
                    && other.party.is_voter()
                    && matches!(other.strategy, Strategy::FixedBin { .. })
            });
            if !has_partner {
                return Err(format!(
                    "{} casts a targetless negative vote but no partner pins a vote (bind another voter to fixed_bin)",
                    b.party
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::InvalidShape;

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

    #[test]
    fn params_validation() {
        assert!(params(2, 1, 0, 1).validate(ProtocolKind::Basic).is_ok());
        assert!(params(1, 1, 0, 1).validate(ProtocolKind::Basic).is_err());
        assert!(params(2, 0, 0, 1).validate(ProtocolKind::Basic).is_err());
        assert!(params(2, 1, 0, 0).validate(ProtocolKind::Basic).is_err());
        assert!(params(2, 1, 0, 1).validate(ProtocolKind::Delegated).is_err());
        assert!(params(2, 1, 1, 1).validate(ProtocolKind::Robust).is_ok());
        assert_eq!(params(4, 2, 1, 1).modulus().get(), 9);
        assert_eq!(params(4, 2, 1, 1).share_bits(), 4);
    }

    #[test]
    fn vote_assignment_validation() {
        let p = params(3, 2, 1, 1);
        assert!(VoteAssignment::Uniform.validate(&p).is_ok());
        assert!(VoteAssignment::Fixed {
            candidates: vec![0, 1, 1]
        }
        .validate(&p)
        .is_ok());
        assert!(VoteAssignment::Fixed {
            candidates: vec![0, 1]
        }
        .validate(&p)
        .is_err());
        assert!(VoteAssignment::Fixed {
            candidates: vec![0, 1, 2]
        }
        .validate(&p)
        .is_err());
    }

    #[test]
    fn strategy_applicability_matrix() {
        let p = params(4, 2, 2, 2);
        let neg = Strategy::NegativeVote {
            target: Some((1, 0)),
            extra: (0, 0),
        };
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::voter(3), neg.clone())).is_ok());
        assert!(validate_strategy(ProtocolKind::Robust, &p, &bind(PartyId::voter(3), neg.clone())).is_err());
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::authority(0), neg)).is_err());

        let invalid = Strategy::InvalidBallots {
            per_set: 2,
            shape: InvalidShape::Empty,
        };
        assert!(validate_strategy(ProtocolKind::Robust, &p, &bind(PartyId::voter(0), invalid.clone())).is_ok());
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::voter(0), invalid)).is_err());
        assert!(validate_strategy(
            ProtocolKind::Robust,
            &p,
            &bind(
                PartyId::voter(0),
                Strategy::InvalidBallots {
                    per_set: 5,
                    shape: InvalidShape::Empty
                }
            )
        )
        .is_err());

        let refuse_shift = Strategy::RefuseBroadcast {
            phase: Phase::ShiftDelivery,
        };
        assert!(validate_strategy(ProtocolKind::Robust, &p, &bind(PartyId::voter(1), refuse_shift.clone())).is_ok());
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::voter(1), refuse_shift)).is_err());

        let refuse_sum = Strategy::RefuseBroadcast {
            phase: Phase::SumOpening,
        };
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::voter(1), refuse_sum.clone())).is_ok());
        assert!(validate_strategy(ProtocolKind::Delegated, &p, &bind(PartyId::authority(1), refuse_sum.clone())).is_ok());
        assert!(validate_strategy(ProtocolKind::Delegated, &p, &bind(PartyId::voter(1), refuse_sum)).is_err());

        // Unanimity broadcasts carry no commitment to equivocate on.
        let equiv_pub = Strategy::EquivocateCommit {
            phase: Phase::Publication,
        };
        assert!(validate_strategy(ProtocolKind::Delegated, &p, &bind(PartyId::authority(0), equiv_pub)).is_err());
        let equiv_sum = Strategy::EquivocateCommit {
            phase: Phase::SumOpening,
        };
        assert!(validate_strategy(ProtocolKind::Delegated, &p, &bind(PartyId::authority(0), equiv_sum)).is_ok());

        let tamper = Strategy::AuthorityTamper {
            actions: vec![TamperAction::PreOpening { voter: 0, delta: 1 }],
        };
        assert!(validate_strategy(ProtocolKind::Robust, &p, &bind(PartyId::authority(0), tamper.clone())).is_ok());
        assert!(validate_strategy(ProtocolKind::Delegated, &p, &bind(PartyId::authority(0), tamper)).is_err());

        // Nonexistent participants are rejected.
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::voter(4), Strategy::Honest)).is_err());
        assert!(validate_strategy(ProtocolKind::Basic, &p, &bind(PartyId::authority(0), Strategy::Honest)).is_err());
        assert!(validate_strategy(ProtocolKind::Robust, &p, &bind(PartyId::authority(2), Strategy::Honest)).is_err());
    }

    #[test]
    fn collusion_reference_must_resolve() {
        let p = params(4, 2, 0, 1);
        let lone = [bind(
            PartyId::voter(3),
            Strategy::NegativeVote {
                target: None,
                extra: (0, 0),
            },
        )];
        assert!(validate_strategies(ProtocolKind::Basic, &p, &lone).is_err());
        let paired = [
            bind(
                PartyId::voter(1),
                Strategy::FixedBin {
                    candidate: 1,
                    bin: 2,
                },
            ),
            bind(
                PartyId::voter(3),
                Strategy::NegativeVote {
                    target: None,
                    extra: (0, 0),
                },
            ),
        ];
        assert!(validate_strategies(ProtocolKind::Basic, &p, &paired).is_ok());
        let duplicated = [
            bind(PartyId::voter(1), Strategy::Honest),
            bind(PartyId::voter(1), Strategy::Honest),
        ];
        assert!(validate_strategies(ProtocolKind::Basic, &p, &duplicated).is_err());
    }
}
