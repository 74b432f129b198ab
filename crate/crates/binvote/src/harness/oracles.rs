//! Exact closed-form probabilities that experiments are checked against.
//!
//! Everything here is computed with arbitrary-precision rationals and
//! independent of the protocol implementation, so the simulator cannot
//! "agree with itself" by construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::sharing::binomial;

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

/// Probability that a fixed bin stays empty when `n - 1` honest ballots each
/// land in one of `n` bins independently and uniformly:
/// `((n-1)/n)^(n-1)`.
pub fn empty_bin_probability(n: u64) -> BigRational {
    assert!(n >= 2);
    let base = ratio(big(n - 1), big(n));
    let mut acc = BigRational::one();
    for _ in 0..(n - 1) {
        acc *= base.clone();
    }
    acc
}

/// Probability that opening `s` ballots chosen without replacement from a
/// batch of `2s` misses all `bad` defective ones:
/// `C(2s - bad, s) / C(2s, s)`.
pub fn opening_miss_probability(s: u64, bad: u64) -> BigRational {
    assert!(s >= 1);
    if bad > s {
        // Fewer than s good ballots remain; every choice hits one.
        return BigRational::zero();
    }
    let num = BigInt::from(binomial(2 * s - bad, s));
    let den = BigInt::from(binomial(2 * s, s));
    ratio(num, den)
}

/// Complement of [`opening_miss_probability`].
pub fn opening_catch_probability(s: u64, bad: u64) -> BigRational {
    BigRational::one() - opening_miss_probability(s, bad)
}

/// Upper bound on the probability that a vote outside the agreed range goes
/// undetected across `s` repetitions: `(2/3)^s`.
pub fn cheat_success_bound(s: u64) -> BigRational {
    let base = ratio(big(2), big(3));
    let mut acc = BigRational::one();
    for _ in 0..s {
        acc *= base.clone();
    }
    acc
}

/// Upper bound on the probability that `s` rounds of the equality check all
/// pass on unequal inputs: `2^-s`.
pub fn false_equal_bound(s: u64) -> BigRational {
    ratio(BigInt::one(), BigInt::from(2u64).pow(s as u32))
}

/// Lossy conversion for reporting and tolerance arithmetic.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}
