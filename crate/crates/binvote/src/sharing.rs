//! Additive secret sharing over a small odd modulus.
//!
//! A value is split into one share per participant so that the shares sum to
//! the value modulo `m`. Every strict subset of the shares is jointly uniform,
//! so it carries no information about the value. Elections with `n` voters
//! work modulo `m = 2n + 1`, which leaves room to detect "negative" residues
//! (values above `m/2`) that cannot arise from honest vote counts.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::PartyId;

/// Errors from share construction, aggregation and reconstruction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SharingError {
    #[error("modulus must be odd and at least 3, got {0}")]
    BadModulus(u64),
    #[error("secret {secret} out of range for modulus {modulus}")]
    SecretOutOfRange { secret: u64, modulus: u64 },
    #[error("participant set is empty")]
    EmptyPartySet,
    #[error("duplicate participant {0}")]
    DuplicateParty(PartyId),
    #[error("share sets cover different participants")]
    PartySetMismatch,
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("missing share for participant {0}")]
    MissingShare(PartyId),
    #[error("unexpected share from {0}")]
    UnexpectedShare(PartyId),
    #[error("nothing to sum")]
    EmptySum,
    #[error("rank {rank} out of range for {k}-subsets of {universe} elements")]
    RankOutOfRange {
        rank: BigUint,
        universe: usize,
        k: usize,
    },
}

/// An odd modulus `m >= 3`. Residues are kept canonical in `[0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(m: u64) -> Result<Self, SharingError> {
        if m < 3 || m % 2 == 0 {
            return Err(SharingError::BadModulus(m));
        }
        Ok(Modulus(m))
    }

    /// Modulus used by an election with `n` voters: `2n + 1`.
    pub fn for_voters(n: u64) -> Self {
        Modulus(2 * n + 1)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Bits needed to transmit one canonical residue.
    pub fn bits(self) -> u64 {
        ceil_log2_u64(self.0)
    }

    pub fn reduce(self, v: u64) -> u64 {
        v % self.0
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        (a % self.0 + b % self.0) % self.0
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        (a % self.0 + self.0 - b % self.0) % self.0
    }

    pub fn neg(self, a: u64) -> u64 {
        (self.0 - a % self.0) % self.0
    }
}

/// One participant's additive share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub owner: PartyId,
    pub value: u64,
}

/// A value additively shared among an ordered set of participants.
///
/// The handle tracks every participant's share because the simulator plays
/// all roles; protocol code only ever reads the slice belonging to the party
/// it is currently acting for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedSecret {
    parties: Vec<PartyId>,
    modulus: Modulus,
    shares: BTreeMap<PartyId, u64>,
}

impl SharedSecret {
    /// All-zero sharing of zero.
    pub fn zero(parties: &[PartyId], modulus: Modulus) -> Result<Self, SharingError> {
        check_parties(parties)?;
        Ok(SharedSecret {
            parties: parties.to_vec(),
            modulus,
            shares: parties.iter().map(|&p| (p, 0)).collect(),
        })
    }

    pub fn parties(&self) -> &[PartyId] {
        &self.parties
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// The share held by `party`. Panics if the party is not a participant;
    /// that is a harness bug, not a protocol condition.
    pub fn share_value(&self, party: PartyId) -> u64 {
        *self
            .shares
            .get(&party)
            .unwrap_or_else(|| panic!("no share for {party}"))
    }

    pub fn share(&self, party: PartyId) -> Option<Share> {
        self.shares.get(&party).map(|&value| Share {
            owner: party,
            value,
        })
    }

    pub fn shares(&self) -> impl Iterator<Item = Share> + '_ {
        self.shares.iter().map(|(&owner, &value)| Share { owner, value })
    }

    /// Adds `delta` to one participant's share. This changes the shared value
    /// by `delta`; it exists so corrupted parties can tamper with the slice
    /// they hold.
    pub fn add_to_share(&mut self, party: PartyId, delta: u64) {
        let m = self.modulus;
        let v = self
            .shares
            .get_mut(&party)
            .unwrap_or_else(|| panic!("no share for {party}"));
        *v = m.add(*v, delta);
    }

    /// Share-wise negation: reconstructs to `m - v`.
    pub fn negated(&self) -> SharedSecret {
        let m = self.modulus;
        SharedSecret {
            parties: self.parties.clone(),
            modulus: m,
            shares: self.shares.iter().map(|(&p, &v)| (p, m.neg(v))).collect(),
        }
    }

    /// Sum of all shares; the simulator-side view of the secret.
    pub fn reveal(&self) -> u64 {
        self.shares
            .values()
            .fold(0, |acc, &v| self.modulus.add(acc, v))
    }
}

fn check_parties(parties: &[PartyId]) -> Result<(), SharingError> {
    if parties.is_empty() {
        return Err(SharingError::EmptyPartySet);
    }
    let mut seen = BTreeMap::new();
    for &p in parties {
        if seen.insert(p, ()).is_some() {
            return Err(SharingError::DuplicateParty(p));
        }
    }
    Ok(())
}

/// Splits `secret` into uniform additive shares for `parties`.
///
/// Every share except the last participant's is drawn independently and
/// uniformly from `[0, m)`; the final participant of the ordered set holds
/// the adjusting share. A single participant therefore holds the secret
/// itself.
pub fn share_secret<R: Rng + ?Sized>(
    parties: &[PartyId],
    secret: u64,
    modulus: Modulus,
    rng: &mut R,
) -> Result<SharedSecret, SharingError> {
    check_parties(parties)?;
    let m = modulus.get();
    if secret >= m {
        return Err(SharingError::SecretOutOfRange {
            secret,
            modulus: m,
        });
    }
    let mut shares = BTreeMap::new();
    let mut acc = 0u64;
    for &p in &parties[..parties.len() - 1] {
        let v = rng.gen_range(0..m);
        acc = modulus.add(acc, v);
        shares.insert(p, v);
    }
    shares.insert(parties[parties.len() - 1], modulus.sub(secret, acc));
    Ok(SharedSecret {
        parties: parties.to_vec(),
        modulus,
        shares,
    })
}

/// Share-wise sum of several sharings over the same participants. Purely
/// local: every participant adds the shares it already holds, so no messages
/// are exchanged.
pub fn sum_shared<'a, I>(terms: I) -> Result<SharedSecret, SharingError>
where
    I: IntoIterator<Item = &'a SharedSecret>,
{
    let mut iter = terms.into_iter();
    let first = iter.next().ok_or(SharingError::EmptySum)?;
    let mut acc = first.clone();
    for t in iter {
        if t.parties != acc.parties {
            return Err(SharingError::PartySetMismatch);
        }
        if t.modulus != acc.modulus {
            return Err(SharingError::ModulusMismatch(
                acc.modulus.get(),
                t.modulus.get(),
            ));
        }
        for (p, v) in acc.shares.iter_mut() {
            *v = acc.modulus.add(*v, t.shares[p]);
        }
    }
    Ok(acc)
}

/// Recombines exactly one share per participant of `parties` into the secret.
pub fn reconstruct(
    parties: &[PartyId],
    modulus: Modulus,
    shares: &[Share],
) -> Result<u64, SharingError> {
    check_parties(parties)?;
    let mut seen: BTreeMap<PartyId, u64> = BTreeMap::new();
    for s in shares {
        if !parties.contains(&s.owner) {
            return Err(SharingError::UnexpectedShare(s.owner));
        }
        if seen.insert(s.owner, s.value).is_some() {
            return Err(SharingError::DuplicateParty(s.owner));
        }
    }
    for &p in parties {
        if !seen.contains_key(&p) {
            return Err(SharingError::MissingShare(p));
        }
    }
    Ok(seen.values().fold(0, |acc, &v| modulus.add(acc, v)))
}

/// Whether a canonical residue encodes a negative value, i.e. lies in the
/// upper half `(m/2, m)`. With `m = 2n + 1` honest tallies never exceed `n`,
/// so any negative residue betrays a subtracted vote.
pub fn is_negative(value: u64, modulus: Modulus) -> bool {
    2 * (value % modulus.get()) > modulus.get()
}

/// `ceil(log2(x))` for `x >= 1`; 0 for `x <= 1`.
pub fn ceil_log2_u64(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// `ceil(log2(x))` with arbitrary precision.
pub fn ceil_log2(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

// Pascal's triangle for n <= 64; every entry fits in u64.
fn small_binomials() -> &'static Vec<Vec<u64>> {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t: Vec<Vec<u64>> = Vec::with_capacity(65);
        for n in 0..=64usize {
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = t[n - 1][k - 1] + t[n - 1][k];
            }
            t.push(row);
        }
        t
    })
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n <= 64 {
        return BigUint::from(small_binomials()[n as usize][k as usize]);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Product of i+1 consecutive integers is divisible by (i+1)!, so the
        // running division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(n, k)` when it is known to fit in u64 (any `n <= 64`).
pub fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    assert!(n <= 64, "binomial_u64 supports n <= 64");
    small_binomials()[n as usize][k as usize]
}

/// The `rank`-th `k`-element subset of `{0, .., universe-1}` in
/// colexicographic order. Inverse of [`rank_subset`].
pub fn unrank_subset(
    rank: &BigUint,
    universe: usize,
    k: usize,
) -> Result<Vec<usize>, SharingError> {
    let total = binomial(universe as u64, k as u64);
    if rank >= &total {
        return Err(SharingError::RankOutOfRange {
            rank: rank.clone(),
            universe,
            k,
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if universe <= 64 {
        // Fast path: ranks below C(64, 32) fit comfortably in u64.
        let mut rest: u64 = rank.try_into().expect("rank below C(64,k) fits u64");
        let mut out = vec![0usize; k];
        let mut c = universe as u64;
        for i in (1..=k as u64).rev() {
            c -= 1;
            while binomial_u64(c, i) > rest {
                c -= 1;
            }
            rest -= binomial_u64(c, i);
            out[i as usize - 1] = c as usize;
        }
        return Ok(out);
    }
    let mut rest = rank.clone();
    let mut out = vec![0usize; k];
    let mut c = universe as u64;
    for i in (1..=k as u64).rev() {
        c -= 1;
        while binomial(c, i) > rest {
            c -= 1;
        }
        rest -= binomial(c, i);
        out[i as usize - 1] = c as usize;
    }
    Ok(out)
}

/// Colexicographic rank of a strictly increasing subset.
pub fn rank_subset(subset: &[usize]) -> BigUint {
    let mut rank = BigUint::zero();
    for (i, &c) in subset.iter().enumerate() {
        rank += binomial(c as u64, i as u64 + 1);
    }
    rank
}
