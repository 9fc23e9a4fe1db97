//! The recurrence engine: ground truth for every closed form and valuation
//! prediction in this crate.
//!
//! A k-order sequence satisfies F_n = F_{n-1} + ... + F_{n-k} and is fixed by
//! its first k terms. The engine generates windows of exact terms (negative
//! indices included, via the recurrence run backwards), streams terms with
//! O(k) memory for long scans, and carries the small linear-algebra facts the
//! rest of the crate leans on: the basis decomposition, the doubling and
//! telescoped forms of the recurrence, and the (S_n - S_{n-j-1})/(k-1)
//! identity for basis terms.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::cell::Cell;
use std::collections::VecDeque;

use crate::error::{Error, Result};

thread_local! {
    static TERM_ALLOCS: Cell<u64> = const { Cell::new(0) };
}

/// Number of sequence terms materialized by the engine on this thread.
///
/// The valuation predictors are contractually term-free; tests snapshot this
/// counter around a prediction to prove the fast path never touches terms.
pub fn term_alloc_count() -> u64 {
    TERM_ALLOCS.with(|c| c.get())
}

fn note_terms(n: u64) {
    TERM_ALLOCS.with(|c| c.set(c.get() + n));
}

/// Order k plus the k initial terms; defines one k-order sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    k: usize,
    init: Vec<BigInt>,
}

impl SequenceSpec {
    pub fn new(k: usize, init: Vec<BigInt>) -> Result<Self> {
        if k < 2 {
            return Err(Error::OrderTooSmall(k));
        }
        if init.len() != k {
            return Err(Error::InitLength {
                expected: k,
                got: init.len(),
            });
        }
        Ok(SequenceSpec { k, init })
    }

    /// The j-th standard basis sequence: all initial terms zero except a 1
    /// in position j.
    pub fn basis(k: usize, j: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::OrderTooSmall(k));
        }
        if j >= k {
            return Err(Error::BasisIndex { k, j });
        }
        let mut init = vec![BigInt::zero(); k];
        init[j] = BigInt::one();
        Ok(SequenceSpec { k, init })
    }

    /// The all-ones sequence S.
    pub fn ones(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::OrderTooSmall(k));
        }
        Ok(SequenceSpec {
            k,
            init: vec![BigInt::one(); k],
        })
    }

    /// The classical k-step sequence T, with initial terms (0, 1, ..., 1).
    pub fn k_step(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::OrderTooSmall(k));
        }
        let mut init = vec![BigInt::one(); k];
        init[0] = BigInt::zero();
        Ok(SequenceSpec { k, init })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn init(&self) -> &[BigInt] {
        &self.init
    }

    /// Coefficients of the sequence over the standard basis. By linearity
    /// these are exactly the initial terms: F_n = sum_j init[j] * B_n(k, j).
    pub fn decompose(&self) -> Vec<BigInt> {
        self.init.clone()
    }

    /// The term F_k, which the recurrence forces to be the sum of the
    /// initial values.
    pub fn first_recurrent_term(&self) -> BigInt {
        self.init.iter().sum()
    }

    /// Stream terms F_0, F_1, ... with O(k) memory.
    pub fn terms(&self) -> TermStream {
        TermStream {
            spec: self.clone(),
            window: VecDeque::with_capacity(self.k),
            sum: BigInt::zero(),
            next: 0,
        }
    }
}

/// Streaming term generator. Keeps only the last k terms plus their running
/// sum, so scans to large n never hold the whole sequence.
pub struct TermStream {
    spec: SequenceSpec,
    window: VecDeque<BigInt>,
    sum: BigInt,
    next: u64,
}

impl Iterator for TermStream {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        let term = if (self.next as usize) < self.spec.k {
            self.spec.init[self.next as usize].clone()
        } else {
            self.sum.clone()
        };
        self.sum += &term;
        if self.window.len() == self.spec.k {
            let oldest = self.window.pop_front().expect("window is non-empty");
            self.sum -= oldest;
        }
        self.window.push_back(term.clone());
        self.next += 1;
        note_terms(1);
        Some(term)
    }
}

/// A contiguous run of exact terms, possibly starting at a negative index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceWindow {
    spec: SequenceSpec,
    start: i64,
    terms: Vec<BigInt>,
}

impl SequenceWindow {
    /// Generate the terms F_from ... F_to. Indices below zero are reached by
    /// running the recurrence backwards: F_{n-k} = F_n - F_{n-1} - ... - F_{n-k+1}.
    pub fn generate(spec: &SequenceSpec, from: i64, to: i64) -> Result<Self> {
        if from > to {
            return Err(Error::EmptyRange { from, to });
        }
        let k = spec.k as i64;
        let lo = from.min(0);
        let hi = to.max(k - 1);
        let len = (hi - lo + 1) as usize;

        // Assemble over [lo, hi] with the init block in place, then trim.
        let mut terms = vec![BigInt::zero(); len];
        let pos = |n: i64| (n - lo) as usize;
        for (j, v) in spec.init.iter().enumerate() {
            terms[pos(j as i64)] = v.clone();
        }
        for m in (lo..0).rev() {
            // F_m = F_{m+k} - F_{m+k-1} - ... - F_{m+1}
            let mut t = terms[pos(m + k)].clone();
            for i in 1..k {
                t -= &terms[pos(m + i)];
            }
            terms[pos(m)] = t;
        }
        if hi >= k {
            let mut sum: BigInt = terms[pos(0)..pos(k)].iter().sum();
            for n in k..=hi {
                let t = sum.clone();
                sum += &t;
                sum -= &terms[pos(n - k)];
                terms[pos(n)] = t;
            }
        }
        note_terms(len as u64);

        let first = pos(from);
        let last = pos(to);
        let terms = terms[first..=last].to_vec();
        Ok(SequenceWindow {
            spec: spec.clone(),
            start: from,
            terms,
        })
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.terms.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<&BigInt> {
        if n < self.start || n > self.end() {
            None
        } else {
            Some(&self.terms[(n - self.start) as usize])
        }
    }

    fn require(&self, n: i64) -> Result<&BigInt> {
        self.get(n).ok_or(Error::WindowRange {
            start: self.start,
            end: self.end(),
            index: n,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms
            .iter()
            .enumerate()
            .map(move |(i, t)| (self.start + i as i64, t))
    }
}

/// Terms F_0 ... F_n_max of the sequence.
pub fn generate(spec: &SequenceSpec, n_max: u64) -> Result<SequenceWindow> {
    SequenceWindow::generate(spec, 0, n_max as i64)
}

/// Terms F_{-depth} ... F_{k-1}, extending the sequence to negative indices.
///
/// For the all-ones sequence this yields S_{-1} = -(k-2) and
/// S_{-2} = ... = S_{-k} = 1.
pub fn extend_backward(spec: &SequenceSpec, depth: u64) -> Result<SequenceWindow> {
    if depth == 0 {
        return Err(Error::IndexDomain {
            op: "extend_backward",
            n: 0,
        });
    }
    SequenceWindow::generate(spec, -(depth as i64), spec.k() as i64 - 1)
}

/// Evaluate sum_j coeffs[j] * B_n(k, j), the basis recomposition of a term.
pub fn recompose(k: usize, coeffs: &[BigInt], n: u64) -> Result<BigInt> {
    if coeffs.len() != k {
        return Err(Error::InitLength {
            expected: k,
            got: coeffs.len(),
        });
    }
    let mut acc = BigInt::zero();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let basis = SequenceSpec::basis(k, j)?;
        let window = generate(&basis, n)?;
        acc += c * window.require(n as i64)?;
    }
    Ok(acc)
}

/// The doubling form of the recurrence: F_n = 2 F_{n-1} - F_{n-k-1},
/// valid for n >= k+1.
pub fn doubling_term(window: &SequenceWindow, n: i64) -> Result<BigInt> {
    let k = window.spec.k as i64;
    if n < k + 1 {
        return Err(Error::IndexDomain {
            op: "doubling_term",
            n,
        });
    }
    let prev = window.require(n - 1)?;
    let dropped = window.require(n - k - 1)?;
    Ok((prev << 1u32) - dropped)
}

/// The telescoped form: F_n = 2^{n-m+1} F_{m-1} - sum_{i=m-k-1}^{n-k-1} 2^{n-k-1-i} F_i,
/// valid for n >= m >= k+1.
pub fn telescoped_term(window: &SequenceWindow, n: i64, m: i64) -> Result<BigInt> {
    let k = window.spec.k as i64;
    if m < k + 1 || n < m {
        return Err(Error::IndexDomain {
            op: "telescoped_term",
            n,
        });
    }
    let mut acc: BigInt = window.require(m - 1)? << ((n - m + 1) as u32);
    for i in (m - k - 1)..=(n - k - 1) {
        acc -= window.require(i)? << ((n - k - 1 - i) as u32);
    }
    Ok(acc)
}

/// Basis term from the all-ones sequence: B_n(k, j) = (S_n - S_{n-j-1}) / (k-1),
/// valid for n >= j+1. The lower index may be negative; the backward extension
/// supplies it. The division is exact; a nonzero remainder is an internal bug.
pub fn b_via_s(k: usize, j: usize, n: i64) -> Result<BigInt> {
    if k < 2 {
        return Err(Error::OrderTooSmall(k));
    }
    if j >= k {
        return Err(Error::BasisIndex { k, j });
    }
    let lower = n - j as i64 - 1;
    if lower < -(k as i64) {
        return Err(Error::IndexDomain { op: "b_via_s", n });
    }
    let ones = SequenceSpec::ones(k)?;
    let window = SequenceWindow::generate(&ones, lower.min(0), n.max(k as i64 - 1))?;
    let diff = window.require(n)? - window.require(lower)?;
    let divisor = BigInt::from(k as u64 - 1);
    let quotient = &diff / &divisor;
    if &quotient * &divisor != diff {
        return Err(Error::InexactDivision {
            divisor: k as u64 - 1,
        });
    }
    Ok(quotient)
}

/// The canonical writing n = a(k+1) + r with -1 <= r <= k-1.
///
/// Unique for every n >= 0; this is the coordinate system of every valuation
/// case table, and this function is its single authority.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexDecomp {
    pub a: u64,
    pub r: i64,
}

pub fn index_decomp(k: usize, n: u64) -> IndexDecomp {
    debug_assert!(k >= 2);
    let modulus = k as u64 + 1;
    let (q, rem) = (n / modulus, n % modulus);
    if rem == k as u64 {
        IndexDecomp { a: q + 1, r: -1 }
    } else {
        IndexDecomp {
            a: q,
            r: rem as i64,
        }
    }
}
