//! Closed-form evaluation of sequence terms as finite alternating binomial
//! sums, plus the short piecewise expressions for basis terms with small n.
//!
//! Each function here is contractually equal to the recurrence engine on its
//! whole domain; the verification suites assert that equality exhaustively.
//! Two sum families cover everything:
//!
//! * the S-family, with terms (-1)^i C(n-ik, i-1) 2^{n+1-i(k+1)} for
//!   1 <= i <= floor((n+1)/(k+1)),
//! * the shifted basis family, with terms (-1)^i C(n-j-1-ik, i-1) 2^{n-j-i(k+1)}
//!   for 1 <= i <= floor((n-j)/(k+1)).
//!
//! An upper bound below the lower bound means an empty sum, which is what
//! makes the all-ones form return 1 and the basis form return 0 ahead of the
//! first boundary.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::engine::SequenceSpec;
use crate::error::{Error, Result};

/// Exact binomial coefficient by multiplicative descent: the running product
/// after step i is C(top - bottom + i, i), so every division is exact and no
/// factorial is ever formed. Returns 0 when bottom > top.
pub fn binomial(top: u64, bottom: u64) -> BigUint {
    if bottom > top {
        return BigUint::zero();
    }
    let bottom = bottom.min(top - bottom);
    let mut acc = BigUint::one();
    for i in 1..=bottom {
        acc *= top - bottom + i;
        acc /= i;
    }
    acc
}

/// One term of an alternating binomial sum: sign * C(binom_top, binom_bottom) * 2^pow2_exp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialSumTerm {
    /// Summation index, starting at 1.
    pub i: u64,
    /// (-1)^i: -1 for odd i, +1 for even i.
    pub sign: i8,
    pub binom_top: u64,
    pub binom_bottom: u64,
    pub pow2_exp: u64,
}

impl BinomialSumTerm {
    pub fn eval(&self) -> BigInt {
        let value = BigInt::from(binomial(self.binom_top, self.binom_bottom)) << self.pow2_exp;
        if self.sign < 0 {
            -value
        } else {
            value
        }
    }
}

fn sign_of(i: u64) -> i8 {
    if i % 2 == 1 {
        -1
    } else {
        1
    }
}

/// Terms of the S-family sum for order k at index n.
pub fn s_sum_terms(k: usize, n: u64) -> impl Iterator<Item = BinomialSumTerm> {
    let k = k as u64;
    let upper = (n + 1) / (k + 1);
    (1..=upper).map(move |i| BinomialSumTerm {
        i,
        sign: sign_of(i),
        binom_top: n - i * k,
        binom_bottom: i - 1,
        pow2_exp: n + 1 - i * (k + 1),
    })
}

/// Terms of the shifted basis-family sum for order k, basis index j, at index n.
/// Requires n >= j so the bound arithmetic stays nonnegative.
pub fn basis_sum_terms(k: usize, j: usize, n: u64) -> impl Iterator<Item = BinomialSumTerm> {
    let (k, j) = (k as u64, j as u64);
    debug_assert!(n >= j);
    let upper = (n - j) / (k + 1);
    (1..=upper).map(move |i| BinomialSumTerm {
        i,
        sign: sign_of(i),
        binom_top: n - j - 1 - i * k,
        binom_bottom: i - 1,
        pow2_exp: n - j - i * (k + 1),
    })
}

fn sum_terms(terms: impl Iterator<Item = BinomialSumTerm>) -> BigInt {
    let mut acc = BigInt::zero();
    for t in terms {
        acc += t.eval();
    }
    acc
}

/// Closed form for the all-ones sequence:
/// S_n = 1 - (k-1) * sum of the S-family terms.
pub fn s_closed(k: usize, n: u64) -> Result<BigInt> {
    if k < 2 {
        return Err(Error::OrderTooSmall(k));
    }
    let inner = sum_terms(s_sum_terms(k, n));
    Ok(BigInt::one() - inner * BigInt::from(k as u64 - 1))
}

/// Closed form for a basis term, valid for n >= j+1:
/// B_n(k, j) = -(S-family sum) + (shifted basis-family sum).
pub fn b_closed(k: usize, j: usize, n: u64) -> Result<BigInt> {
    if k < 2 {
        return Err(Error::OrderTooSmall(k));
    }
    if j >= k {
        return Err(Error::BasisIndex { k, j });
    }
    if n < j as u64 + 1 {
        return Err(Error::IndexDomain {
            op: "b_closed",
            n: n as i64,
        });
    }
    Ok(sum_terms(basis_sum_terms(k, j, n)) - sum_terms(s_sum_terms(k, n)))
}

/// Closed form for an arbitrary sequence, valid for n >= k:
/// F_n = -F_k * (S-family sum) + sum_j F_j * (shifted family sum for j),
/// where F_k is recomputed as the sum of the initial values.
pub fn f_closed(spec: &SequenceSpec, n: u64) -> Result<BigInt> {
    let k = spec.k();
    if n < k as u64 {
        return Err(Error::IndexDomain {
            op: "f_closed",
            n: n as i64,
        });
    }
    let mut acc = -spec.first_recurrent_term() * sum_terms(s_sum_terms(k, n));
    for (j, coeff) in spec.init().iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        acc += coeff * sum_terms(basis_sum_terms(k, j, n));
    }
    Ok(acc)
}

fn pow2(exp: u64) -> BigInt {
    BigInt::one() << exp
}

/// Piecewise basis-term values on the five ranges that cover k <= n <= 3k+j+2.
/// The ranges are contiguous and non-overlapping; branches are tried in order.
pub fn b_piecewise(k: usize, j: usize, n: u64) -> Result<BigInt> {
    if k < 2 {
        return Err(Error::OrderTooSmall(k));
    }
    if j >= k {
        return Err(Error::BasisIndex { k, j });
    }
    let (k, j) = (k as u64, j as u64);
    if n < k || n > 3 * k + j + 2 {
        return Err(Error::IndexDomain {
            op: "b_piecewise",
            n: n as i64,
        });
    }
    if n <= k + j {
        return Ok(pow2(n - k));
    }
    let two_band = pow2(n - k) - pow2(n - k - j - 1);
    if n <= 2 * k {
        return Ok(two_band);
    }
    let three_band = two_band - BigInt::from(n - 2 * k) * pow2(n - 2 * k - 1);
    if n <= 2 * k + j + 1 {
        return Ok(three_band);
    }
    let four_band = three_band + BigInt::from(n - 2 * k - j - 1) * pow2(n - 2 * k - j - 2);
    if n <= 3 * k + 1 {
        return Ok(four_band);
    }
    // (n-3k-1)(n-3k) is a product of consecutive integers, so the half is exact.
    let pair = (n - 3 * k - 1) * (n - 3 * k) / 2;
    Ok(four_band + BigInt::from(pair) * pow2(n - 3 * k - 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{generate, SequenceSpec};

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(10, 5), BigUint::from(252u32));
        assert_eq!(binomial(7, 0), BigUint::one());
        assert_eq!(binomial(7, 7), BigUint::one());
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn binomial_matches_pascal() {
        let mut row: Vec<BigUint> = vec![BigUint::one()];
        for m in 1..=60u64 {
            let mut next = vec![BigUint::one()];
            for n in 1..m as usize {
                next.push(&row[n - 1] + &row[n]);
            }
            next.push(BigUint::one());
            row = next;
            for (n, expected) in row.iter().enumerate() {
                assert_eq!(&binomial(m, n as u64), expected, "C({m}, {n})");
            }
        }
    }

    #[test]
    fn s_closed_examples() {
        assert_eq!(s_closed(3, 2).unwrap(), BigInt::one());
        assert_eq!(s_closed(3, 7).unwrap(), BigInt::from(31));
        assert_eq!(s_closed(2, 5).unwrap(), BigInt::from(8));
    }

    #[test]
    fn b_closed_examples() {
        assert_eq!(b_closed(3, 0, 1).unwrap(), BigInt::zero());
        assert_eq!(b_closed(3, 0, 9).unwrap(), BigInt::from(24));
        assert_eq!(b_closed(4, 2, 5).unwrap(), BigInt::from(2));
        assert!(b_closed(3, 1, 1).is_err());
    }

    #[test]
    fn f_closed_examples() {
        let spec = SequenceSpec::new(2, vec![BigInt::from(2), BigInt::from(5)]).unwrap();
        assert_eq!(f_closed(&spec, 5).unwrap(), BigInt::from(31));

        let ones = SequenceSpec::ones(3).unwrap();
        assert_eq!(f_closed(&ones, 7).unwrap(), s_closed(3, 7).unwrap());

        let basis = SequenceSpec::basis(3, 0).unwrap();
        assert_eq!(f_closed(&basis, 9).unwrap(), b_closed(3, 0, 9).unwrap());

        assert!(f_closed(&ones, 2).is_err());
    }

    #[test]
    fn b_piecewise_examples() {
        assert_eq!(b_piecewise(4, 2, 5).unwrap(), BigInt::from(2));
        assert_eq!(b_piecewise(3, 0, 5).unwrap(), BigInt::from(2));
        assert_eq!(b_piecewise(3, 1, 8).unwrap(), BigInt::from(20));
        assert!(b_piecewise(3, 1, 2).is_err());
        assert!(b_piecewise(3, 1, 13).is_err());
    }

    #[test]
    fn closed_forms_match_engine_small_sweep() {
        for k in 2..=5usize {
            let ones = SequenceSpec::ones(k).unwrap();
            let w = generate(&ones, 80).unwrap();
            for n in 0..=80u64 {
                assert_eq!(
                    &s_closed(k, n).unwrap(),
                    w.get(n as i64).unwrap(),
                    "S, k = {k}, n = {n}"
                );
            }
            for j in 0..k {
                let basis = SequenceSpec::basis(k, j).unwrap();
                let w = generate(&basis, 80).unwrap();
                for n in (j as u64 + 1)..=80 {
                    assert_eq!(
                        &b_closed(k, j, n).unwrap(),
                        w.get(n as i64).unwrap(),
                        "B, k = {k}, j = {j}, n = {n}"
                    );
                }
                for n in k as u64..=(3 * k + j + 2) as u64 {
                    assert_eq!(
                        &b_piecewise(k, j, n).unwrap(),
                        w.get(n as i64).unwrap(),
                        "piecewise, k = {k}, j = {j}, n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn sum_term_shape() {
        for t in s_sum_terms(3, 30) {
            assert_eq!(t.sign, if t.i % 2 == 1 { -1 } else { 1 });
            assert_eq!(t.pow2_exp, 30 + 1 - t.i * 4);
            assert!(t.binom_top >= t.binom_bottom);
        }
        assert_eq!(s_sum_terms(3, 2).count(), 0);
        assert_eq!(basis_sum_terms(3, 0, 1).count(), 0);
    }
}
