//! Simulator and analysis toolkit for self-tallying elections built on
//! additive secret sharing over a prime-free odd modulus.
//!
//! Votes are cast by placing a single mark in a candidate-by-bin grid and
//! splitting that grid into additive shares, one per receiving participant.
//! Summing everyone's shares cell-wise and opening only the sums reveals the
//! tally — and nothing else. Three protocol variants trade infrastructure
//! for robustness:
//!
//! * [`protocols::ProtocolKind::Basic`] — voters only; any misbehavior
//!   aborts the election.
//! * [`protocols::ProtocolKind::Delegated`] — shares go to independent
//!   authorities instead of other voters.
//! * [`protocols::ProtocolKind::Robust`] — cut-and-choose ballot audits,
//!   shift-encrypted ballots and share-equality checks let the election
//!   survive misbehaving voters by revoking them.
//!
//! The [`channels`] module provides the simulated network (private
//! authenticated channels plus a simultaneous broadcast), with bit-exact
//! traffic accounting and an input-ordering probe. The [`harness`] module
//! runs repeated randomized elections, compares observed statistics against
//! exact closed-form oracles, and audits message complexity.

pub mod adversary;
pub mod ballots;
pub mod channels;
pub mod guide;
pub mod harness;
pub mod procedures;
pub mod protocols;
pub mod sharing;
