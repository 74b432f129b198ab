//! Misbehavior catalog and the runtime that injects it into protocol runs.
//!
//! Every way a participant can deviate is a [`Strategy`] bound to one party.
//! Honest code paths never branch on corruption; instead the protocols ask
//! the [`AdversaryRuntime`] at well-defined interception points (ballot
//! construction, broadcast inputs, share tampering) and get either the
//! honest default or the strategy's replacement.
//!
//! Colluding parties share a [`CollusionView`]; notably, broadcast outcomes
//! are appended to it only after the broadcast has released its outputs, so
//! no strategy can base its input on the same event's other inputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ballots::{make_ballot, BinGrid, ShiftPair, VoteSpec};
use crate::channels::{BroadcastInput, PartyId, Phase, Value};
use crate::sharing::Modulus;

/// Shape of a deliberately malformed single-mark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidShape {
    /// No mark at all.
    Empty,
    /// Two marks instead of one.
    DoubleVote,
}

/// A share-level or announcement-level manipulation by a tallying authority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum TamperAction {
    /// Add `delta` to this authority's share of the summed grid cell
    /// (candidate, bin), in every repetition, before the sums are opened.
    PreSum { candidate: u32, bin: u32, delta: u64 },
    /// Add `delta` to this authority's share of equality-check input
    /// `input_index`, in the first equality check of the run.
    PreEquality { input_index: usize, delta: u64 },
    /// Add `delta` to this authority's share of cell (0, 0) of the first
    /// ballot selected for opening from `voter`'s first batch, after the
    /// selection is drawn but before the opening broadcast.
    PreOpening { voter: u32, delta: u64 },
    /// Add `delta` to one candidate's count in the final announcement.
    Publication { candidate: u32, delta: u64 },
    /// Flip the announced revocation bit for `voter`.
    RevocationBit { voter: u32 },
}

/// One participant's scripted deviation from the protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Strategy {
    /// Follow the protocol (useful to pin a party in configs).
    Honest,
    /// A legal vote with a chosen candidate and bin instead of random ones.
    FixedBin { candidate: u32, bin: u32 },
    /// Grid with +2 marks at `extra` and a -1 mark at `target`, cancelling
    /// someone else's expected mark. With no explicit target, the cell is
    /// read from a colluding partner's planned vote.
    NegativeVote {
        target: Option<(u32, u32)>,
        extra: (u32, u32),
    },
    /// A legal-looking grid carrying `extra_votes` additional marks.
    MultiVote { extra_votes: u32 },
    /// In every ballot batch, the first `per_set` grids are malformed.
    InvalidBallots { per_set: u32, shape: InvalidShape },
    /// Batch k encodes candidate (true + k) mod r: batches disagree.
    InconsistentCandidates,
    /// Announce out-of-range displacement codes for surviving ballots.
    MalformedShifts,
    /// Send nothing in the named phase.
    RefuseBroadcast { phase: Phase },
    /// Under commit-reveal, open a value different from the committed one
    /// in the named phase. Under the ideal channel this degenerates to
    /// honestly sending the committed value.
    EquivocateCommit { phase: Phase },
    /// Authority-side manipulations.
    AuthorityTamper { actions: Vec<TamperAction> },
}

/// Binds one strategy to one party; configs carry a list of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyBinding {
    pub party: PartyId,
    #[serde(flatten)]
    pub strategy: Strategy,
}

/// The planned vote of one voter: a candidate and one bin per repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedVote {
    pub candidate: u32,
    pub bins: Vec<u32>,
}

/// State shared by all corrupt parties. Broadcast outcomes are appended
/// only after release, so collusion cannot simulate rushing.
#[derive(Debug, Clone, Default)]
pub struct CollusionView {
    planned: BTreeMap<PartyId, PlannedVote>,
    broadcasts_seen: u64,
}

impl CollusionView {
    pub fn planned_vote(&self, party: PartyId) -> Option<&PlannedVote> {
        self.planned.get(&party)
    }

    pub fn broadcasts_seen(&self) -> u64 {
        self.broadcasts_seen
    }
}

/// Runtime that answers every protocol interception point.
#[derive(Debug, Clone, Default)]
pub struct AdversaryRuntime {
    bindings: BTreeMap<PartyId, Strategy>,
    view: CollusionView,
}

impl AdversaryRuntime {
    pub fn new(bindings: &[StrategyBinding]) -> Self {
        let mut map = BTreeMap::new();
        for b in bindings {
            let prev = map.insert(b.party, b.strategy.clone());
            assert!(prev.is_none(), "two strategies bound to {}", b.party);
        }
        AdversaryRuntime {
            bindings: map,
            view: CollusionView::default(),
        }
    }

    pub fn honest() -> Self {
        Self::default()
    }

    pub fn strategy(&self, party: PartyId) -> Option<&Strategy> {
        self.bindings.get(&party)
    }

    pub fn is_corrupt(&self, party: PartyId) -> bool {
        matches!(self.bindings.get(&party), Some(s) if *s != Strategy::Honest)
    }

    pub fn corrupt_parties(&self) -> Vec<PartyId> {
        self.bindings
            .iter()
            .filter(|(_, s)| **s != Strategy::Honest)
            .map(|(&p, _)| p)
            .collect()
    }

    pub fn view(&self) -> &CollusionView {
        &self.view
    }

    /// Applies vote overrides and records corrupt parties' planned votes in
    /// the collusion view. Called once, after honest votes are drawn.
    pub fn resolve_votes(&mut self, votes: &mut BTreeMap<PartyId, PlannedVote>) {
        for (&party, strategy) in &self.bindings {
            if let Strategy::FixedBin { candidate, bin } = strategy {
                if let Some(v) = votes.get_mut(&party) {
                    v.candidate = *candidate;
                    v.bins = vec![*bin; v.bins.len()];
                }
            }
        }
        for &party in self.bindings.keys() {
            if let Some(v) = votes.get(&party) {
                self.view.planned.insert(party, v.clone());
            }
        }
    }

    /// The colluding partner whose planned vote a targetless negative vote
    /// cancels: the lowest-index other bound voter with a pinned vote.
    fn partner_vote(&self, of: PartyId) -> Option<&PlannedVote> {
        self.bindings
            .iter()
            .find(|(p, s)| **p != of && p.is_voter() && matches!(s, Strategy::FixedBin { .. }))
            .and_then(|(p, _)| self.view.planned.get(p))
    }

    /// The grid a voter deals for repetition `rep` (one-grid protocols).
    /// `None` means the honest single-mark ballot.
    pub fn cast_grid(
        &self,
        voter: PartyId,
        rep: usize,
        rows: u32,
        cols: u32,
        modulus: Modulus,
        planned: &PlannedVote,
    ) -> Option<BinGrid> {
        match self.bindings.get(&voter)? {
            Strategy::NegativeVote { target, extra } => {
                let (tc, tb) = match target {
                    Some(cell) => *cell,
                    None => {
                        let partner = self
                            .partner_vote(voter)
                            .expect("targetless negative vote needs a pinned partner");
                        (partner.candidate, partner.bins[rep])
                    }
                };
                let mut grid = BinGrid::zero(rows, cols, modulus);
                grid.set(extra.0, extra.1, 2);
                let cancel = modulus.sub(grid.get(tc, tb), 1);
                grid.set(tc, tb, cancel);
                Some(grid)
            }
            Strategy::MultiVote { extra_votes } => {
                let vote = VoteSpec {
                    candidate: planned.candidate,
                    bin: planned.bins[rep],
                };
                let mut grid = make_ballot(rows, cols, modulus, vote).expect("planned vote fits");
                for i in 0..*extra_votes {
                    let bin = (vote.bin + 1 + i) % cols;
                    let bumped = modulus.add(grid.get(vote.candidate, bin), 1);
                    grid.set(vote.candidate, bin, bumped);
                }
                Some(grid)
            }
            _ => None,
        }
    }

    /// The encrypted grid a voter puts in batch `set`, position `ballot`
    /// (batched-audit protocol). `enc_vote` is the honest mark position
    /// after applying `shift`. `None` means the honest grid.
    pub fn robust_grid(
        &self,
        voter: PartyId,
        set: u32,
        ballot: u32,
        rows: u32,
        cols: u32,
        modulus: Modulus,
        planned: &PlannedVote,
        enc_vote: VoteSpec,
        shift: ShiftPair,
    ) -> Option<BinGrid> {
        match self.bindings.get(&voter)? {
            Strategy::InvalidBallots { per_set, shape } if ballot < *per_set => match shape {
                InvalidShape::Empty => Some(BinGrid::zero(rows, cols, modulus)),
                InvalidShape::DoubleVote => {
                    let mut grid =
                        make_ballot(rows, cols, modulus, enc_vote).expect("vote fits grid");
                    grid.set(enc_vote.candidate, (enc_vote.bin + 1) % cols, 1);
                    Some(grid)
                }
            },
            Strategy::InconsistentCandidates => {
                let skewed = VoteSpec {
                    candidate: (planned.candidate + set) % rows,
                    bin: planned.bins[set as usize],
                };
                let enc = skewed.shifted(shift, rows, cols);
                Some(make_ballot(rows, cols, modulus, enc).expect("vote fits grid"))
            }
            _ => None,
        }
    }

    /// The displacement codes a voter announces for its surviving ballots.
    /// `None` means the voter sends nothing at all.
    pub fn shift_codes(
        &self,
        voter: PartyId,
        honest: Vec<u64>,
        code_range: u64,
    ) -> Option<Vec<u64>> {
        match self.bindings.get(&voter) {
            Some(Strategy::MalformedShifts) => Some(vec![code_range; honest.len()]),
            Some(Strategy::RefuseBroadcast { phase }) if *phase == Phase::ShiftDelivery => None,
            _ => Some(honest),
        }
    }

    /// Filters a party's input to a simultaneous broadcast.
    pub fn broadcast_input(&self, party: PartyId, phase: Phase, default: Value) -> BroadcastInput {
        match self.bindings.get(&party) {
            Some(Strategy::RefuseBroadcast { phase: p }) if *p == phase => BroadcastInput::Refuse,
            Some(Strategy::EquivocateCommit { phase: p }) if *p == phase => {
                let reveal = tweak_value(&default);
                BroadcastInput::Equivocate {
                    commit: default,
                    reveal,
                }
            }
            _ => BroadcastInput::Value(default),
        }
    }

    /// Appends a released broadcast to the collusion view.
    pub fn observe_broadcast(&mut self) {
        self.view.broadcasts_seen += 1;
    }

    /// True when the party withholds its unanimity announcement.
    pub fn refuses_unanimous(&self, party: PartyId, phase: Phase) -> bool {
        matches!(
            self.bindings.get(&party),
            Some(Strategy::RefuseBroadcast { phase: p }) if *p == phase
        )
    }

    fn tamper_actions(&self, party: PartyId) -> &[TamperAction] {
        match self.bindings.get(&party) {
            Some(Strategy::AuthorityTamper { actions }) => actions,
            _ => &[],
        }
    }

    /// (candidate, bin, delta) tampers this party applies to its share of
    /// the summed grids before they open.
    pub fn presum_tampers(&self, party: PartyId) -> Vec<(u32, u32, u64)> {
        self.tamper_actions(party)
            .iter()
            .filter_map(|a| match a {
                TamperAction::PreSum {
                    candidate,
                    bin,
                    delta,
                } => Some((*candidate, *bin, *delta)),
                _ => None,
            })
            .collect()
    }

    /// (input_index, delta) tampers on the run's first equality check.
    pub fn preequality_tampers(&self, party: PartyId) -> Vec<(usize, u64)> {
        self.tamper_actions(party)
            .iter()
            .filter_map(|a| match a {
                TamperAction::PreEquality { input_index, delta } => Some((*input_index, *delta)),
                _ => None,
            })
            .collect()
    }

    /// (voter, delta) tampers on the first opened ballot.
    pub fn preopening_tampers(&self, party: PartyId) -> Vec<(u32, u64)> {
        self.tamper_actions(party)
            .iter()
            .filter_map(|a| match a {
                TamperAction::PreOpening { voter, delta } => Some((*voter, *delta)),
                _ => None,
            })
            .collect()
    }

    /// Applies announcement tampers to a tally this party is publishing.
    pub fn publication_counts(&self, party: PartyId, mut counts: Vec<u64>) -> Vec<u64> {
        for a in self.tamper_actions(party) {
            if let TamperAction::Publication { candidate, delta } = a {
                let c = *candidate as usize;
                if c < counts.len() {
                    counts[c] += delta;
                }
            }
        }
        counts
    }

    /// The revocation bit this party announces for `voter`.
    pub fn revocation_bit(&self, party: PartyId, voter: u32, honest: bool) -> bool {
        let flip = self
            .tamper_actions(party)
            .iter()
            .any(|a| matches!(a, TamperAction::RevocationBit { voter: v } if *v == voter));
        honest ^ flip
    }
}

/// A value of the same shape and bit width but different content; what an
/// equivocating party opens instead of its commitment.
pub fn tweak_value(v: &Value) -> Value {
    match v {
        Value::Residue { value, modulus } => Value::Residue {
            value: (value + 1) % modulus,
            modulus: *modulus,
        },
        Value::ResidueSeq { modulus, values } => {
            let mut values = values.clone();
            if let Some(first) = values.first_mut() {
                *first = (*first + 1) % modulus;
            }
            Value::ResidueSeq {
                modulus: *modulus,
                values,
            }
        }
        Value::Grid {
            rows,
            cols,
            modulus,
            cells,
        } => {
            let mut cells = cells.clone();
            if let Some(first) = cells.first_mut() {
                *first = (*first + 1) % modulus;
            }
            Value::Grid {
                rows: *rows,
                cols: *cols,
                modulus: *modulus,
                cells,
            }
        }
        Value::BigResidue { value, bound } => {
            let next = (value + 1u32) % bound.clone().max(num_bigint::BigUint::from(1u32));
            Value::BigResidue {
                value: next,
                bound: bound.clone(),
            }
        }
        Value::Bit(b) => Value::Bit(!b),
        Value::Counts { values, range } => {
            let mut values = values.clone();
            if let Some(first) = values.first_mut() {
                *first = (*first + 1) % range.max(&1);
            }
            Value::Counts {
                values,
                range: *range,
            }
        }
        Value::Commitment { digest_bits, digest } => {
            let mut digest = *digest;
            digest[0] ^= 1;
            Value::Commitment {
                digest_bits: *digest_bits,
                digest,
            }
        }
        Value::Opening {
            nonce_bits,
            nonce,
            value,
        } => Value::Opening {
            nonce_bits: *nonce_bits,
            nonce: *nonce,
            value: Box::new(tweak_value(value)),
        },
        Value::Tuple(items) => {
            let mut items = items.clone();
            if let Some(first) = items.first_mut() {
                *first = tweak_value(first);
            }
            Value::Tuple(items)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m5() -> Modulus {
        Modulus::new(5).unwrap()
    }

    fn bind(party: PartyId, strategy: Strategy) -> StrategyBinding {
        StrategyBinding { party, strategy }
    }

    #[test]
    fn honest_runtime_overrides_nothing() {
        let adv = AdversaryRuntime::honest();
        let planned = PlannedVote {
            candidate: 0,
            bins: vec![1],
        };
        assert!(adv
            .cast_grid(PartyId::voter(0), 0, 2, 2, m5(), &planned)
            .is_none());
        assert!(!adv.is_corrupt(PartyId::voter(0)));
        assert!(adv.corrupt_parties().is_empty());
        match adv.broadcast_input(PartyId::voter(0), Phase::SumOpening, Value::Bit(true)) {
            BroadcastInput::Value(Value::Bit(true)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_vote_grid_shape() {
        let adv = AdversaryRuntime::new(&[bind(
            PartyId::voter(3),
            Strategy::NegativeVote {
                target: Some((1, 0)),
                extra: (0, 0),
            },
        )]);
        let planned = PlannedVote {
            candidate: 0,
            bins: vec![0],
        };
        // n = 4 voters, modulus 9: -1 is 8.
        let m9 = Modulus::for_voters(4);
        let grid = adv
            .cast_grid(PartyId::voter(3), 0, 2, 4, m9, &planned)
            .unwrap();
        assert_eq!(grid.get(0, 0), 2);
        assert_eq!(grid.get(1, 0), 8);
        // Residue total reduces to 1 vote: 2 + 8 = 10 = 1 mod 9.
        assert_eq!(m9.reduce(grid.total()), 1);
    }

    #[test]
    fn targetless_negative_vote_reads_partner_plan() {
        let mut adv = AdversaryRuntime::new(&[
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
        ]);
        let mut votes = BTreeMap::new();
        for i in 0..4 {
            votes.insert(
                PartyId::voter(i),
                PlannedVote {
                    candidate: 0,
                    bins: vec![0],
                },
            );
        }
        adv.resolve_votes(&mut votes);
        assert_eq!(votes[&PartyId::voter(1)].candidate, 1);
        assert_eq!(votes[&PartyId::voter(1)].bins, vec![2]);
        let m9 = Modulus::for_voters(4);
        let grid = adv
            .cast_grid(
                PartyId::voter(3),
                0,
                2,
                4,
                m9,
                &votes[&PartyId::voter(3)].clone(),
            )
            .unwrap();
        // Cancels exactly the partner's planned cell (1, 2).
        assert_eq!(grid.get(1, 2), 8);
        assert_eq!(grid.get(0, 0), 2);
    }

    #[test]
    fn multi_vote_adds_marks() {
        let adv = AdversaryRuntime::new(&[bind(
            PartyId::voter(0),
            Strategy::MultiVote { extra_votes: 2 },
        )]);
        let planned = PlannedVote {
            candidate: 1,
            bins: vec![0],
        };
        let grid = adv
            .cast_grid(PartyId::voter(0), 0, 2, 3, Modulus::new(7).unwrap(), &planned)
            .unwrap();
        assert_eq!(grid.total(), 3);
        assert_eq!(grid.row_total(1), 3);
        // Zero extra votes reproduces the honest ballot exactly.
        let adv0 = AdversaryRuntime::new(&[bind(
            PartyId::voter(0),
            Strategy::MultiVote { extra_votes: 0 },
        )]);
        let honest = adv0
            .cast_grid(PartyId::voter(0), 0, 2, 3, Modulus::new(7).unwrap(), &planned)
            .unwrap();
        assert_eq!(
            honest,
            make_ballot(2, 3, Modulus::new(7).unwrap(), VoteSpec { candidate: 1, bin: 0 })
                .unwrap()
        );
    }

    #[test]
    fn invalid_ballots_affect_only_leading_positions() {
        let adv = AdversaryRuntime::new(&[bind(
            PartyId::voter(0),
            Strategy::InvalidBallots {
                per_set: 1,
                shape: InvalidShape::Empty,
            },
        )]);
        let planned = PlannedVote {
            candidate: 0,
            bins: vec![0, 0],
        };
        let shift = ShiftPair {
            candidate_shift: 0,
            bin_shift: 0,
        };
        let enc = VoteSpec { candidate: 0, bin: 0 };
        let m5 = Modulus::new(5).unwrap();
        let first = adv.robust_grid(PartyId::voter(0), 0, 0, 2, 2, m5, &planned, enc, shift);
        assert_eq!(first, Some(BinGrid::zero(2, 2, m5)));
        let second = adv.robust_grid(PartyId::voter(0), 0, 1, 2, 2, m5, &planned, enc, shift);
        assert!(second.is_none());
    }

    #[test]
    fn inconsistent_candidates_skew_by_set() {
        let adv =
            AdversaryRuntime::new(&[bind(PartyId::voter(0), Strategy::InconsistentCandidates)]);
        let planned = PlannedVote {
            candidate: 0,
            bins: vec![1, 1],
        };
        let shift = ShiftPair {
            candidate_shift: 0,
            bin_shift: 0,
        };
        let enc = VoteSpec { candidate: 0, bin: 1 };
        let m5 = Modulus::new(5).unwrap();
        let set0 = adv
            .robust_grid(PartyId::voter(0), 0, 0, 2, 2, m5, &planned, enc, shift)
            .unwrap();
        let set1 = adv
            .robust_grid(PartyId::voter(0), 1, 0, 2, 2, m5, &planned, enc, shift)
            .unwrap();
        assert_eq!(set0.get(0, 1), 1);
        assert_eq!(set1.get(1, 1), 1);
    }

    #[test]
    fn shift_code_overrides() {
        let malformed =
            AdversaryRuntime::new(&[bind(PartyId::voter(0), Strategy::MalformedShifts)]);
        assert_eq!(
            malformed.shift_codes(PartyId::voter(0), vec![0, 1], 4),
            Some(vec![4, 4])
        );
        let silent = AdversaryRuntime::new(&[bind(
            PartyId::voter(0),
            Strategy::RefuseBroadcast {
                phase: Phase::ShiftDelivery,
            },
        )]);
        assert_eq!(silent.shift_codes(PartyId::voter(0), vec![0, 1], 4), None);
        let honest = AdversaryRuntime::honest();
        assert_eq!(
            honest.shift_codes(PartyId::voter(0), vec![0, 1], 4),
            Some(vec![0, 1])
        );
    }

    #[test]
    fn broadcast_filters() {
        let refuse = AdversaryRuntime::new(&[bind(
            PartyId::voter(0),
            Strategy::RefuseBroadcast {
                phase: Phase::SumOpening,
            },
        )]);
        assert!(matches!(
            refuse.broadcast_input(PartyId::voter(0), Phase::SumOpening, Value::Bit(true)),
            BroadcastInput::Refuse
        ));
        // Other phases unaffected.
        assert!(matches!(
            refuse.broadcast_input(PartyId::voter(0), Phase::OpenHalfDraw, Value::Bit(true)),
            BroadcastInput::Value(_)
        ));
        let equivocate = AdversaryRuntime::new(&[bind(
            PartyId::voter(1),
            Strategy::EquivocateCommit {
                phase: Phase::SumOpening,
            },
        )]);
        match equivocate.broadcast_input(PartyId::voter(1), Phase::SumOpening, Value::Bit(true)) {
            BroadcastInput::Equivocate { commit, reveal } => {
                assert_eq!(commit, Value::Bit(true));
                assert_eq!(reveal, Value::Bit(false));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tamper_queries() {
        let adv = AdversaryRuntime::new(&[bind(
            PartyId::authority(1),
            Strategy::AuthorityTamper {
                actions: vec![
                    TamperAction::PreSum {
                        candidate: 0,
                        bin: 1,
                        delta: 3,
                    },
                    TamperAction::Publication {
                        candidate: 1,
                        delta: 2,
                    },
                    TamperAction::RevocationBit { voter: 2 },
                ],
            },
        )]);
        assert_eq!(adv.presum_tampers(PartyId::authority(1)), vec![(0, 1, 3)]);
        assert!(adv.presum_tampers(PartyId::authority(0)).is_empty());
        assert_eq!(
            adv.publication_counts(PartyId::authority(1), vec![4, 1]),
            vec![4, 3]
        );
        assert_eq!(
            adv.publication_counts(PartyId::authority(0), vec![4, 1]),
            vec![4, 1]
        );
        assert!(adv.revocation_bit(PartyId::authority(1), 2, false));
        assert!(!adv.revocation_bit(PartyId::authority(1), 1, false));
        assert!(!adv.revocation_bit(PartyId::authority(0), 2, false));
    }

    #[test]
    fn tweaked_values_differ_but_keep_width() {
        let samples = [
            Value::Residue { value: 6, modulus: 7 },
            Value::ResidueSeq {
                modulus: 5,
                values: vec![4, 0],
            },
            Value::Grid {
                rows: 1,
                cols: 2,
                modulus: 5,
                cells: vec![0, 3],
            },
            Value::Bit(true),
            Value::Counts {
                values: vec![3],
                range: 4,
            },
            Value::Tuple(vec![Value::Bit(false), Value::Bit(false)]),
        ];
        for v in samples {
            let t = tweak_value(&v);
            assert_ne!(t, v, "tweak must change {v:?}");
            assert_eq!(t.bits(), v.bits());
        }
    }

    #[test]
    fn strategy_toml_round_trip() {
        let toml_text = r#"
            party = "voter:3"
            name = "negative_vote"
            target = [1, 0]
            extra = [0, 0]
        "#;
        let binding: StrategyBinding = toml::from_str(toml_text).unwrap();
        assert_eq!(binding.party, PartyId::voter(3));
        assert_eq!(
            binding.strategy,
            Strategy::NegativeVote {
                target: Some((1, 0)),
                extra: (0, 0)
            }
        );
        let tamper_text = r#"
            party = "authority:0"
            name = "authority_tamper"
            [[actions]]
            action = "pre_opening"
            voter = 0
            delta = 1
        "#;
        let binding: StrategyBinding = toml::from_str(tamper_text).unwrap();
        assert_eq!(
            binding.strategy,
            Strategy::AuthorityTamper {
                actions: vec![TamperAction::PreOpening { voter: 0, delta: 1 }]
            }
        );
    }
}
