//! Simulated communication substrate: private authenticated channels, a
//! simultaneous broadcast channel, and unanimity broadcasts.
//!
//! Every message is accounted bit-exactly in a [`TrafficLedger`] and hashed
//! into an append-only [`Transcript`]. The simultaneous broadcast collects
//! every participant's input before releasing any output; an
//! [`OrderingProbe`] records the collect/release sequence so tests can assert
//! that no input was requested after outputs became visible.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::sharing::ceil_log2;

/// Simulation role of a participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Voter,
    Authority,
}

/// Identity of one participant. Ordered voters-first, then by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyId {
    pub role: Role,
    pub index: u32,
}

impl PartyId {
    pub fn voter(index: u32) -> Self {
        PartyId {
            role: Role::Voter,
            index,
        }
    }

    pub fn authority(index: u32) -> Self {
        PartyId {
            role: Role::Authority,
            index,
        }
    }

    pub fn is_voter(self) -> bool {
        self.role == Role::Voter
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Voter => write!(f, "voter:{}", self.index),
            Role::Authority => write!(f, "authority:{}", self.index),
        }
    }
}

impl FromStr for PartyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (role, idx) = s
            .split_once(':')
            .ok_or_else(|| format!("expected role:index, got {s:?}"))?;
        let index: u32 = idx
            .parse()
            .map_err(|_| format!("bad participant index {idx:?}"))?;
        match role {
            "voter" => Ok(PartyId::voter(index)),
            "authority" => Ok(PartyId::authority(index)),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

impl Serialize for PartyId {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Protocol phase a message belongs to; used for ledger labels, transcript
/// records and adversary triggers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Private delivery of ballot shares.
    BallotDelivery,
    /// Broadcast of summed share grids.
    SumOpening,
    /// Joint randomness selecting which ballot halves to open.
    OpenHalfDraw,
    /// Broadcast of the opened ballots' shares.
    BallotOpening,
    /// Private delivery of the surviving ballots' shift values.
    ShiftDelivery,
    /// Joint randomness selecting equality-check partitions.
    EqualityPartitionDraw,
    /// Broadcast of equality-check differences.
    EqualityOpening,
    /// Joint randomness selecting one surviving ballot per set.
    SurvivorDraw,
    /// Unanimous per-voter revocation notice.
    RevocationNotice,
    /// Unanimous publication of the tally.
    Publication,
}

/// A message payload. Each variant fixes how many bits its wire encoding
/// occupies, which is what the ledger accounts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Value {
    /// One residue in `[0, modulus)`.
    Residue { value: u64, modulus: u64 },
    /// A run of residues sharing one modulus.
    ResidueSeq { modulus: u64, values: Vec<u64> },
    /// A candidate-by-bin matrix of residues, row-major.
    Grid {
        rows: u32,
        cols: u32,
        modulus: u64,
        cells: Vec<u64>,
    },
    /// One value in `[0, bound)` for bounds beyond u64.
    BigResidue { value: BigUint, bound: BigUint },
    /// A single bit.
    Bit(bool),
    /// Small counters, each in `[0, range]`, transmitted in
    /// `ceil(log2(range))` bits apiece.
    Counts { values: Vec<u64>, range: u64 },
    /// Commit phase of a commit-reveal broadcast.
    Commitment { digest_bits: u32, digest: [u8; 32] },
    /// Reveal phase of a commit-reveal broadcast.
    Opening {
        nonce_bits: u32,
        nonce: u128,
        value: Box<Value>,
    },
    /// Concatenation of payloads.
    Tuple(Vec<Value>),
}

impl Value {
    /// Exact wire size in bits.
    pub fn bits(&self) -> u64 {
        match self {
            Value::Residue { modulus, .. } => crate::sharing::ceil_log2_u64(*modulus),
            Value::ResidueSeq { modulus, values } => {
                values.len() as u64 * crate::sharing::ceil_log2_u64(*modulus)
            }
            Value::Grid {
                rows,
                cols,
                modulus,
                ..
            } => u64::from(*rows) * u64::from(*cols) * crate::sharing::ceil_log2_u64(*modulus),
            Value::BigResidue { bound, .. } => ceil_log2(bound),
            Value::Bit(_) => 1,
            Value::Counts { values, range } => {
                values.len() as u64 * crate::sharing::ceil_log2_u64(*range)
            }
            Value::Commitment { digest_bits, .. } => u64::from(*digest_bits),
            Value::Opening {
                nonce_bits, value, ..
            } => u64::from(*nonce_bits) + value.bits(),
            Value::Tuple(items) => items.iter().map(Value::bits).sum(),
        }
    }

    /// Deterministic byte encoding used for digests and commitments.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut Vec<u8>) {
        match self {
            Value::Residue { value, modulus } => {
                out.push(1);
                out.extend_from_slice(&value.to_le_bytes());
                out.extend_from_slice(&modulus.to_le_bytes());
            }
            Value::ResidueSeq { modulus, values } => {
                out.push(2);
                out.extend_from_slice(&modulus.to_le_bytes());
                out.extend_from_slice(&(values.len() as u64).to_le_bytes());
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Value::Grid {
                rows,
                cols,
                modulus,
                cells,
            } => {
                out.push(3);
                out.extend_from_slice(&rows.to_le_bytes());
                out.extend_from_slice(&cols.to_le_bytes());
                out.extend_from_slice(&modulus.to_le_bytes());
                for v in cells {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Value::BigResidue { value, bound } => {
                out.push(4);
                let vb = value.to_bytes_le();
                let bb = bound.to_bytes_le();
                out.extend_from_slice(&(vb.len() as u64).to_le_bytes());
                out.extend_from_slice(&vb);
                out.extend_from_slice(&(bb.len() as u64).to_le_bytes());
                out.extend_from_slice(&bb);
            }
            Value::Bit(b) => {
                out.push(5);
                out.push(u8::from(*b));
            }
            Value::Counts { values, range } => {
                out.push(6);
                out.extend_from_slice(&range.to_le_bytes());
                out.extend_from_slice(&(values.len() as u64).to_le_bytes());
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Value::Commitment { digest_bits, digest } => {
                out.push(7);
                out.extend_from_slice(&digest_bits.to_le_bytes());
                out.extend_from_slice(digest);
            }
            Value::Opening {
                nonce_bits,
                nonce,
                value,
            } => {
                out.push(8);
                out.extend_from_slice(&nonce_bits.to_le_bytes());
                out.extend_from_slice(&nonce.to_le_bytes());
                value.write_canonical(out);
            }
            Value::Tuple(items) => {
                out.push(9);
                out.extend_from_slice(&(items.len() as u64).to_le_bytes());
                for it in items {
                    it.write_canonical(out);
                }
            }
        }
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.canonical_bytes());
        h.finalize().into()
    }
}

/// How the simultaneous broadcast channel is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BroadcastRealization {
    /// Trusted primitive: inputs are collected, then all outputs released.
    #[default]
    Ideal,
    /// Hash commitments exchanged first, values opened in the next round.
    CommitReveal,
}

/// Bit widths used by the commit-reveal realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitParams {
    pub digest_bits: u32,
    pub nonce_bits: u32,
}

impl Default for CommitParams {
    fn default() -> Self {
        CommitParams {
            digest_bits: 256,
            nonce_bits: 128,
        }
    }
}

/// Which directed private channels exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Complete graph over voters (no authorities).
    VotersComplete,
    /// Voters may send to authorities; authorities talk among themselves.
    VotersToAuthorities,
}

impl Topology {
    pub fn allows(self, from: PartyId, to: PartyId) -> bool {
        if from == to {
            return false;
        }
        match self {
            Topology::VotersComplete => from.is_voter() && to.is_voter(),
            Topology::VotersToAuthorities => match (from.role, to.role) {
                (Role::Voter, Role::Authority) => true,
                (Role::Authority, Role::Authority) => true,
                _ => false,
            },
        }
    }
}

/// One private message, as accounted by the ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrivateRecord {
    pub round: u32,
    pub from: PartyId,
    pub to: PartyId,
    pub bits: u64,
}

/// Broadcast flavor recorded in the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadcastKind {
    Simultaneous,
    SimultaneousCommit,
    SimultaneousReveal,
    Unanimous,
}

/// One broadcast event, as accounted by the ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BroadcastStat {
    pub round: u32,
    pub phase: Phase,
    pub kind: BroadcastKind,
    pub senders: Vec<PartyId>,
    /// Receivers beyond the senders themselves (unanimity broadcasts).
    pub receivers: Vec<PartyId>,
    /// Bits sent by each sender, aligned with `senders`.
    pub bits: Vec<u64>,
}

/// Exact per-message traffic accounting for one protocol run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TrafficLedger {
    pub private: Vec<PrivateRecord>,
    pub broadcasts: Vec<BroadcastStat>,
}

/// Aggregate ledger counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LedgerTotals {
    pub private_messages: u64,
    pub private_bits: u64,
    pub simultaneous_events: u64,
    pub simultaneous_bits: u64,
    pub unanimous_events: u64,
    pub unanimous_bits: u64,
}

impl TrafficLedger {
    pub fn totals(&self) -> LedgerTotals {
        let mut t = LedgerTotals::default();
        for p in &self.private {
            t.private_messages += 1;
            t.private_bits += p.bits;
        }
        for b in &self.broadcasts {
            let bits: u64 = b.bits.iter().sum();
            if b.kind == BroadcastKind::Unanimous {
                t.unanimous_events += 1;
                t.unanimous_bits += bits;
            } else {
                t.simultaneous_events += 1;
                t.simultaneous_bits += bits;
            }
        }
        t
    }
}

/// What one event in the transcript was.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Private {
        from: PartyId,
        to: PartyId,
    },
    Broadcast {
        phase: Phase,
        kind: BroadcastKind,
        senders: Vec<PartyId>,
    },
}

/// One line of the exportable transcript: who talked, how many bits, and a
/// digest of the payload. Values themselves are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub index: u64,
    pub round: u32,
    #[serde(flatten)]
    pub kind: EventKind,
    pub bits: u64,
    pub digest: String,
}

/// Ordered log of every message and broadcast of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
}

/// Records the order in which broadcast inputs were collected and outputs
/// released. A violation would mean some input was requested after the same
/// event's outputs were already visible.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OrderingProbe {
    clock: u64,
    events: Vec<ProbeEvent>,
}

#[derive(Debug, Clone, Serialize)]
struct ProbeEvent {
    broadcast: u64,
    collected: Vec<u64>,
    released: Option<u64>,
}

impl OrderingProbe {
    fn begin(&mut self, broadcast: u64) {
        self.events.push(ProbeEvent {
            broadcast,
            collected: Vec::new(),
            released: None,
        });
    }

    fn collect(&mut self) {
        self.clock += 1;
        let c = self.clock;
        self.events.last_mut().expect("begin() first").collected.push(c);
    }

    fn release(&mut self) {
        self.clock += 1;
        let c = self.clock;
        self.events.last_mut().expect("begin() first").released = Some(c);
    }

    /// Number of broadcast events where some input was collected at or after
    /// the moment outputs were released.
    pub fn violations(&self) -> u64 {
        self.events
            .iter()
            .filter(|e| match e.released {
                Some(r) => e.collected.iter().any(|&c| c >= r),
                None => false,
            })
            .count() as u64
    }

    pub fn broadcasts_observed(&self) -> u64 {
        self.events.len() as u64
    }
}

/// A participant's input to one simultaneous broadcast.
#[derive(Debug, Clone)]
pub enum BroadcastInput {
    Value(Value),
    /// Send nothing; identified as a refusal by everyone.
    Refuse,
    /// Commit to one value and open another. Under the ideal realization the
    /// committed value simply is the input; under commit-reveal the opening
    /// fails verification and names this party.
    Equivocate { commit: Value, reveal: Value },
}

/// Result of a simultaneous broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BroadcastResult {
    Delivered(BTreeMap<PartyId, Value>),
    Refused { refusers: Vec<PartyId> },
    CommitMismatch { cheaters: Vec<PartyId> },
}

/// Result of a unanimity broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnanimousResult {
    Agreed(Value),
    Disagreed { culprits: Vec<PartyId> },
    Refused { refusers: Vec<PartyId> },
}

/// Per-party deterministic randomness. Every party gets independent ChaCha
/// streams; the commitment stream is separate from the protocol stream so
/// that switching broadcast realizations does not perturb protocol draws.
pub struct PartyRngs {
    seed: u64,
    streams: BTreeMap<(PartyId, u8), ChaCha12Rng>,
}

const STREAM_PROTOCOL: u8 = 0;
const STREAM_COMMITMENT: u8 = 1;
const STREAM_ADVERSARY: u8 = 2;

impl PartyRngs {
    pub fn new(seed: u64) -> Self {
        PartyRngs {
            seed,
            streams: BTreeMap::new(),
        }
    }

    fn stream(&mut self, party: PartyId, kind: u8) -> &mut ChaCha12Rng {
        let seed = self.seed;
        self.streams.entry((party, kind)).or_insert_with(|| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let role_bit = match party.role {
                Role::Voter => 0u64,
                Role::Authority => 1u64,
            };
            rng.set_stream(role_bit << 40 | u64::from(party.index) << 8 | u64::from(kind));
            rng
        })
    }

    /// Stream for protocol-visible draws (bins, shares, shifts, randomness
    /// contributions).
    pub fn protocol(&mut self, party: PartyId) -> &mut ChaCha12Rng {
        self.stream(party, STREAM_PROTOCOL)
    }

    /// Stream for commitment nonces only.
    pub fn commitment(&mut self, party: PartyId) -> &mut ChaCha12Rng {
        self.stream(party, STREAM_COMMITMENT)
    }

    /// Stream for adversarial choices, so corrupting a party does not shift
    /// any honest draw.
    pub fn adversary(&mut self, party: PartyId) -> &mut ChaCha12Rng {
        self.stream(party, STREAM_ADVERSARY)
    }
}

/// The simulated network for one protocol run.
pub struct Network {
    topology: Topology,
    realization: BroadcastRealization,
    commit_params: CommitParams,
    round: u32,
    broadcast_count: u64,
    pub ledger: TrafficLedger,
    transcript: Transcript,
    probe: OrderingProbe,
}

impl Network {
    pub fn new(topology: Topology, realization: BroadcastRealization) -> Self {
        Network {
            topology,
            realization,
            commit_params: CommitParams::default(),
            round: 0,
            broadcast_count: 0,
            ledger: TrafficLedger::default(),
            transcript: Transcript::default(),
            probe: OrderingProbe::default(),
        }
    }

    pub fn with_commit_params(mut self, params: CommitParams) -> Self {
        self.commit_params = params;
        self
    }

    pub fn realization(&self) -> BroadcastRealization {
        self.realization
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    /// Starts the next synchronous round and returns its number.
    pub fn advance_round(&mut self) -> u32 {
        self.round += 1;
        self.round
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn probe(&self) -> &OrderingProbe {
        &self.probe
    }

    pub fn into_parts(self) -> (TrafficLedger, Transcript, OrderingProbe) {
        (self.ledger, self.transcript, self.probe)
    }

    fn record_event(&mut self, round: u32, kind: EventKind, bits: u64, digest: [u8; 32]) {
        let index = self.transcript.records.len() as u64;
        self.transcript.records.push(TranscriptRecord {
            index,
            round,
            kind,
            bits,
            digest: hex::encode(digest),
        });
    }

    /// Sends one private authenticated message in the current round. Using a
    /// channel the topology does not provide is a harness bug and panics.
    pub fn send_private(&mut self, from: PartyId, to: PartyId, value: &Value) {
        assert!(
            self.topology.allows(from, to),
            "no private channel {from} -> {to} under {:?}",
            self.topology
        );
        let bits = value.bits();
        self.ledger.private.push(PrivateRecord {
            round: self.round,
            from,
            to,
            bits,
        });
        self.record_event(
            self.round,
            EventKind::Private { from, to },
            bits,
            value.digest(),
        );
    }

    fn digest_broadcast(inputs: &BTreeMap<PartyId, Value>) -> [u8; 32] {
        let mut h = Sha256::new();
        for (p, v) in inputs {
            h.update(p.to_string().as_bytes());
            h.update(v.canonical_bytes());
        }
        h.finalize().into()
    }

    /// Runs one simultaneous broadcast among `participants`. `provide` is
    /// called once per participant, in order, before any output exists; the
    /// outcome map is only assembled after every input has been collected.
    pub fn simultaneous_broadcast(
        &mut self,
        rngs: &mut PartyRngs,
        phase: Phase,
        participants: &[PartyId],
        provide: &mut dyn FnMut(PartyId) -> BroadcastInput,
    ) -> BroadcastResult {
        self.broadcast_count += 1;
        self.probe.begin(self.broadcast_count);
        let mut inputs: Vec<(PartyId, BroadcastInput)> = Vec::with_capacity(participants.len());
        for &p in participants {
            self.probe.collect();
            inputs.push((p, provide(p)));
        }
        let result = match self.realization {
            BroadcastRealization::Ideal => self.ideal_broadcast(phase, participants, inputs),
            BroadcastRealization::CommitReveal => {
                self.commit_reveal_broadcast(rngs, phase, participants, inputs)
            }
        };
        self.probe.release();
        result
    }

    fn ideal_broadcast(
        &mut self,
        phase: Phase,
        participants: &[PartyId],
        inputs: Vec<(PartyId, BroadcastInput)>,
    ) -> BroadcastResult {
        let round = self.advance_round();
        let mut refusers = Vec::new();
        let mut values = BTreeMap::new();
        let mut bits = Vec::with_capacity(participants.len());
        for (p, input) in inputs {
            match input {
                BroadcastInput::Value(v) | BroadcastInput::Equivocate { commit: v, .. } => {
                    bits.push(v.bits());
                    values.insert(p, v);
                }
                BroadcastInput::Refuse => {
                    bits.push(0);
                    refusers.push(p);
                }
            }
        }
        self.ledger.broadcasts.push(BroadcastStat {
            round,
            phase,
            kind: BroadcastKind::Simultaneous,
            senders: participants.to_vec(),
            receivers: Vec::new(),
            bits,
        });
        let total: u64 = values.values().map(Value::bits).sum();
        self.record_event(
            round,
            EventKind::Broadcast {
                phase,
                kind: BroadcastKind::Simultaneous,
                senders: participants.to_vec(),
            },
            total,
            Self::digest_broadcast(&values),
        );
        if refusers.is_empty() {
            BroadcastResult::Delivered(values)
        } else {
            BroadcastResult::Refused { refusers }
        }
    }

    fn commit_reveal_broadcast(
        &mut self,
        rngs: &mut PartyRngs,
        phase: Phase,
        participants: &[PartyId],
        inputs: Vec<(PartyId, BroadcastInput)>,
    ) -> BroadcastResult {
        let params = self.commit_params;
        let nonce_mask = if params.nonce_bits >= 128 {
            u128::MAX
        } else {
            (1u128 << params.nonce_bits) - 1
        };
        struct Pending {
            party: PartyId,
            revealed: Value,
            nonce: u128,
            digest: [u8; 32],
        }
        let mut refusers = Vec::new();
        let mut pending = Vec::new();
        for (p, input) in inputs {
            let (committed, revealed) = match input {
                BroadcastInput::Value(v) => (v.clone(), v),
                BroadcastInput::Equivocate { commit, reveal } => (commit, reveal),
                BroadcastInput::Refuse => {
                    refusers.push(p);
                    continue;
                }
            };
            let nonce = rngs.commitment(p).gen::<u128>() & nonce_mask;
            let digest = commitment_digest(&committed, nonce);
            pending.push(Pending {
                party: p,
                revealed,
                nonce,
                digest,
            });
        }

        // Commit round.
        let commit_round = self.advance_round();
        let mut commit_values = BTreeMap::new();
        let mut commit_bits = Vec::with_capacity(participants.len());
        for &p in participants {
            match pending.iter().find(|q| q.party == p) {
                Some(q) => {
                    commit_bits.push(u64::from(params.digest_bits));
                    commit_values.insert(
                        p,
                        Value::Commitment {
                            digest_bits: params.digest_bits,
                            digest: q.digest,
                        },
                    );
                }
                None => commit_bits.push(0),
            }
        }
        self.ledger.broadcasts.push(BroadcastStat {
            round: commit_round,
            phase,
            kind: BroadcastKind::SimultaneousCommit,
            senders: participants.to_vec(),
            receivers: Vec::new(),
            bits: commit_bits,
        });
        let total: u64 = commit_values.values().map(Value::bits).sum();
        self.record_event(
            commit_round,
            EventKind::Broadcast {
                phase,
                kind: BroadcastKind::SimultaneousCommit,
                senders: participants.to_vec(),
            },
            total,
            Self::digest_broadcast(&commit_values),
        );
        if !refusers.is_empty() {
            return BroadcastResult::Refused { refusers };
        }

        // Reveal round.
        let reveal_round = self.advance_round();
        let mut reveal_values = BTreeMap::new();
        let mut reveal_bits = Vec::with_capacity(participants.len());
        let mut cheaters = Vec::new();
        let mut delivered = BTreeMap::new();
        for q in &pending {
            let opening = Value::Opening {
                nonce_bits: params.nonce_bits,
                nonce: q.nonce,
                value: Box::new(q.revealed.clone()),
            };
            reveal_bits.push(opening.bits());
            reveal_values.insert(q.party, opening);
            if commitment_digest(&q.revealed, q.nonce) != q.digest {
                cheaters.push(q.party);
            } else {
                delivered.insert(q.party, q.revealed.clone());
            }
        }
        self.ledger.broadcasts.push(BroadcastStat {
            round: reveal_round,
            phase,
            kind: BroadcastKind::SimultaneousReveal,
            senders: participants.to_vec(),
            receivers: Vec::new(),
            bits: reveal_bits,
        });
        let total: u64 = reveal_values.values().map(Value::bits).sum();
        self.record_event(
            reveal_round,
            EventKind::Broadcast {
                phase,
                kind: BroadcastKind::SimultaneousReveal,
                senders: participants.to_vec(),
            },
            total,
            Self::digest_broadcast(&reveal_values),
        );
        if !cheaters.is_empty() {
            BroadcastResult::CommitMismatch { cheaters }
        } else {
            BroadcastResult::Delivered(delivered)
        }
    }

    /// One unanimity broadcast: every sender publishes its value to all
    /// receivers, who compare them. Disagreement names the senders that
    /// deviate from the plurality value.
    pub fn broadcast_unanimous(
        &mut self,
        phase: Phase,
        senders: &[PartyId],
        receivers: &[PartyId],
        provide: &mut dyn FnMut(PartyId) -> Option<Value>,
    ) -> UnanimousResult {
        let round = self.advance_round();
        let mut values: BTreeMap<PartyId, Value> = BTreeMap::new();
        let mut refusers = Vec::new();
        let mut bits = Vec::with_capacity(senders.len());
        for &p in senders {
            match provide(p) {
                Some(v) => {
                    bits.push(v.bits());
                    values.insert(p, v);
                }
                None => {
                    bits.push(0);
                    refusers.push(p);
                }
            }
        }
        self.ledger.broadcasts.push(BroadcastStat {
            round,
            phase,
            kind: BroadcastKind::Unanimous,
            senders: senders.to_vec(),
            receivers: receivers.to_vec(),
            bits,
        });
        let total: u64 = values.values().map(Value::bits).sum();
        self.record_event(
            round,
            EventKind::Broadcast {
                phase,
                kind: BroadcastKind::Unanimous,
                senders: senders.to_vec(),
            },
            total,
            Self::digest_broadcast(&values),
        );
        if !refusers.is_empty() {
            return UnanimousResult::Refused { refusers };
        }
        // Plurality value; ties broken by canonical bytes for determinism.
        let mut tally: Vec<(Vec<u8>, Value, usize)> = Vec::new();
        for v in values.values() {
            let key = v.canonical_bytes();
            match tally.iter_mut().find(|(k, _, _)| *k == key) {
                Some((_, _, c)) => *c += 1,
                None => tally.push((key, v.clone(), 1)),
            }
        }
        tally.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
        let winner = tally[0].1.clone();
        let culprits: Vec<PartyId> = values
            .iter()
            .filter(|(_, v)| **v != winner)
            .map(|(&p, _)| p)
            .collect();
        if culprits.is_empty() {
            UnanimousResult::Agreed(winner)
        } else {
            UnanimousResult::Disagreed { culprits }
        }
    }
}

/// Commitment digest: SHA-256 over the canonical value bytes followed by the
/// nonce.
pub fn commitment_digest(value: &Value, nonce: u128) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(value.canonical_bytes());
    h.update(nonce.to_le_bytes());
    h.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residue(v: u64) -> Value {
        Value::Residue {
            value: v,
            modulus: 7,
        }
    }

    #[test]
    fn bit_widths() {
        assert_eq!(residue(3).bits(), 3);
        let grid = Value::Grid {
            rows: 2,
            cols: 3,
            modulus: 7,
            cells: vec![0; 6],
        };
        assert_eq!(grid.bits(), 18);
        assert_eq!(
            Value::ResidueSeq {
                modulus: 5,
                values: vec![1, 2, 3]
            }
            .bits(),
            9
        );
        assert_eq!(Value::Bit(true).bits(), 1);
        assert_eq!(
            Value::Counts {
                values: vec![2, 0],
                range: 4
            }
            .bits(),
            4
        );
        let big = Value::BigResidue {
            value: BigUint::from(3u32),
            bound: BigUint::from(70u32).pow(20),
        };
        assert_eq!(big.bits(), 123);
        assert_eq!(
            Value::Tuple(vec![residue(1), Value::Bit(false)]).bits(),
            4
        );
        assert_eq!(
            Value::BigResidue {
                value: BigUint::from(0u32),
                bound: BigUint::from(1u32)
            }
            .bits(),
            0
        );
    }

    #[test]
    fn party_id_round_trips_text() {
        let p = PartyId::authority(3);
        assert_eq!(p.to_string(), "authority:3");
        assert_eq!("authority:3".parse::<PartyId>().unwrap(), p);
        assert_eq!("voter:0".parse::<PartyId>().unwrap(), PartyId::voter(0));
        assert!("chair:1".parse::<PartyId>().is_err());
        assert!(PartyId::voter(1) < PartyId::authority(0));
    }

    #[test]
    #[should_panic(expected = "no private channel")]
    fn topology_forbids_voter_to_voter_with_authorities() {
        let mut net = Network::new(Topology::VotersToAuthorities, BroadcastRealization::Ideal);
        net.advance_round();
        net.send_private(PartyId::voter(0), PartyId::voter(1), &residue(0));
    }

    #[test]
    fn ledger_counts_private_bits() {
        let mut net = Network::new(Topology::VotersComplete, BroadcastRealization::Ideal);
        net.advance_round();
        net.send_private(PartyId::voter(0), PartyId::voter(1), &residue(6));
        let t = net.ledger.totals();
        assert_eq!(t.private_messages, 1);
        assert_eq!(t.private_bits, 3);
    }

    fn run_broadcast(
        realization: BroadcastRealization,
        inputs: Vec<BroadcastInput>,
    ) -> (BroadcastResult, Network) {
        let mut net = Network::new(Topology::VotersComplete, realization);
        let mut rngs = PartyRngs::new(11);
        let parties: Vec<PartyId> = (0..inputs.len() as u32).map(PartyId::voter).collect();
        let mut iter = inputs.into_iter();
        let result = net.simultaneous_broadcast(&mut rngs, Phase::SumOpening, &parties, &mut |_| {
            iter.next().unwrap()
        });
        (result, net)
    }

    #[test]
    fn ideal_broadcast_delivers_all_inputs() {
        let (result, net) = run_broadcast(
            BroadcastRealization::Ideal,
            vec![
                BroadcastInput::Value(residue(1)),
                BroadcastInput::Value(residue(5)),
            ],
        );
        match result {
            BroadcastResult::Delivered(values) => {
                assert_eq!(values[&PartyId::voter(0)], residue(1));
                assert_eq!(values[&PartyId::voter(1)], residue(5));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(net.probe().violations(), 0);
        assert_eq!(net.ledger.totals().simultaneous_events, 1);
        assert_eq!(net.ledger.totals().simultaneous_bits, 6);
    }

    #[test]
    fn refusal_is_attributed() {
        let (result, _) = run_broadcast(
            BroadcastRealization::Ideal,
            vec![
                BroadcastInput::Value(residue(1)),
                BroadcastInput::Refuse,
            ],
        );
        assert_eq!(
            result,
            BroadcastResult::Refused {
                refusers: vec![PartyId::voter(1)]
            }
        );
    }

    #[test]
    fn commit_reveal_matches_ideal_for_honest_inputs() {
        let (ideal, _) = run_broadcast(
            BroadcastRealization::Ideal,
            vec![
                BroadcastInput::Value(residue(2)),
                BroadcastInput::Value(residue(3)),
            ],
        );
        let (cr, net) = run_broadcast(
            BroadcastRealization::CommitReveal,
            vec![
                BroadcastInput::Value(residue(2)),
                BroadcastInput::Value(residue(3)),
            ],
        );
        assert_eq!(ideal, cr);
        // Two ledger rounds: commitments then openings.
        assert_eq!(net.ledger.broadcasts.len(), 2);
        assert_eq!(net.ledger.broadcasts[0].kind, BroadcastKind::SimultaneousCommit);
        assert_eq!(net.ledger.broadcasts[1].kind, BroadcastKind::SimultaneousReveal);
        assert_ne!(
            net.ledger.broadcasts[0].round,
            net.ledger.broadcasts[1].round
        );
        assert_eq!(net.ledger.broadcasts[0].bits, vec![256, 256]);
        assert_eq!(net.ledger.broadcasts[1].bits, vec![131, 131]);
    }

    #[test]
    fn equivocation_caught_under_commit_reveal_only() {
        let equivocate = || BroadcastInput::Equivocate {
            commit: residue(2),
            reveal: residue(4),
        };
        let (ideal, _) = run_broadcast(
            BroadcastRealization::Ideal,
            vec![BroadcastInput::Value(residue(1)), equivocate()],
        );
        match ideal {
            BroadcastResult::Delivered(values) => {
                assert_eq!(values[&PartyId::voter(1)], residue(2));
            }
            other => panic!("unexpected {other:?}"),
        }
        let (cr, _) = run_broadcast(
            BroadcastRealization::CommitReveal,
            vec![BroadcastInput::Value(residue(1)), equivocate()],
        );
        assert_eq!(
            cr,
            BroadcastResult::CommitMismatch {
                cheaters: vec![PartyId::voter(1)]
            }
        );
    }

    #[test]
    fn unanimity_flags_deviating_sender() {
        let mut net = Network::new(Topology::VotersToAuthorities, BroadcastRealization::Ideal);
        let senders = [PartyId::authority(0), PartyId::authority(1), PartyId::authority(2)];
        let receivers = [PartyId::voter(0)];
        let agreed = net.broadcast_unanimous(Phase::Publication, &senders, &receivers, &mut |_| {
            Some(residue(2))
        });
        assert_eq!(agreed, UnanimousResult::Agreed(residue(2)));
        let mixed = net.broadcast_unanimous(Phase::Publication, &senders, &receivers, &mut |p| {
            Some(if p.index == 1 { residue(6) } else { residue(2) })
        });
        assert_eq!(
            mixed,
            UnanimousResult::Disagreed {
                culprits: vec![PartyId::authority(1)]
            }
        );
    }

    #[test]
    fn joint_randomness_stays_uniform_with_constant_contribution() {
        // One party pins its contribution; the sum mod 7 of pinned + honest
        // is still uniform because the honest draw is.
        let mut counts = [0u64; 7];
        let mut rngs = PartyRngs::new(5);
        for _ in 0..70_000 {
            let honest = rngs.protocol(PartyId::voter(0)).gen_range(0..7u64);
            counts[((honest + 3) % 7) as usize] += 1;
        }
        let chi = crate::harness::stats::chi_square_uniform(&counts, 4.0);
        assert!(chi.pass);
    }

    #[test]
    fn digests_are_stable_per_payload() {
        let a = residue(3).digest();
        let b = residue(3).digest();
        let c = residue(4).digest();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
