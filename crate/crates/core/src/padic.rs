//! 2-adic arithmetic primitives: binary digit sums, 2-adic orders, and the
//! digit-sum identities for factorial and binomial valuations.
//!
//! Everything here is exact. Machine-word arguments take bit-trick fast paths
//! (`count_ones`, `trailing_zeros`); big integers go through their limb
//! representation, so no quantity is ever materialized just to count its
//! trailing zeros.

use num_bigint::{BigInt, BigUint};
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// The 2-adic order of an integer: finite for nonzero values, infinite for 0.
///
/// The ordering places every finite value below `Infinite`, which makes the
/// side conditions of the valuation case tables (`v2(a) <= k` and friends)
/// come out right when the argument happens to be 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// True when the valuation is finite and at most `bound`.
    pub fn at_most(self, bound: u64) -> bool {
        matches!(self, Valuation::Finite(v) if v <= bound)
    }

    /// True when the valuation is at least `bound` (infinite always qualifies).
    pub fn at_least(self, bound: u64) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }
}

impl From<u64> for Valuation {
    fn from(v: u64) -> Self {
        Valuation::Finite(v)
    }
}

/// v2(x * y) = v2(x) + v2(y), with 0 absorbing.
impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Largest v with 2^v dividing x; the sign of x is ignored.
///
/// Errors on x = 0, which has no finite order; callers wanting the sentinel
/// use [`v2_or_infinite`].
pub fn v2(x: &BigInt) -> Result<u64> {
    x.trailing_zeros().ok_or(Error::ZeroValuation)
}

/// 2-adic order with the zero case mapped to [`Valuation::Infinite`].
pub fn v2_or_infinite(x: &BigInt) -> Valuation {
    match x.trailing_zeros() {
        Some(v) => Valuation::Finite(v),
        None => Valuation::Infinite,
    }
}

/// Word-sized 2-adic order, infinite for 0.
pub fn v2_u64(x: u64) -> Valuation {
    if x == 0 {
        Valuation::Infinite
    } else {
        Valuation::Finite(u64::from(x.trailing_zeros()))
    }
}

/// Word-sized signed 2-adic order of |x|, infinite for 0.
pub fn v2_i64(x: i64) -> Valuation {
    v2_u64(x.unsigned_abs())
}

/// Binary digit sum: the number of ones in the binary expansion of n.
pub fn s2_u64(n: u64) -> u64 {
    u64::from(n.count_ones())
}

/// Binary digit sum of an arbitrary-precision nonnegative integer.
pub fn s2(n: &BigUint) -> u64 {
    n.count_ones()
}

/// 2-adic order of n!, computed as n - s2(n) without forming the factorial.
pub fn v2_factorial(n: u64) -> u64 {
    n - s2_u64(n)
}

/// 2-adic order of the binomial coefficient C(m, n), computed as
/// s2(n) + s2(m - n) - s2(m): the number of carries when adding n and m - n
/// in binary. Never materializes the coefficient, so m may be far beyond
/// big-product feasibility.
pub fn v2_binomial(m: u64, n: u64) -> Result<u64> {
    if n > m {
        return Err(Error::BinomialDomain { m, n });
    }
    Ok(s2_u64(n) + s2_u64(m - n) - s2_u64(m))
}
