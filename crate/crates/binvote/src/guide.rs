//! A guided tour of the crate, mirrored verbatim from the book in `book/`.
//!
//! Each module below includes one chapter of the rendered guide
//! (`mdbook build book/`), so the prose shown there and the doc-tests run
//! by `cargo test --doc` are the same bytes and cannot drift apart. Start
//! with [`overview`] and read in order, or jump to the topic you need.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/ballots.md")]
pub mod ballot_grids {}

#[doc = include_str!("../../../book/src/sharing.md")]
pub mod secret_sharing {}

#[doc = include_str!("../../../book/src/channels.md")]
pub mod channels_and_broadcasts {}

#[doc = include_str!("../../../book/src/protocols.md")]
pub mod election_protocols {}

#[doc = include_str!("../../../book/src/adversaries.md")]
pub mod misbehavior {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod checks_and_audits {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/auditing.md")]
pub mod traffic_accounting {}
