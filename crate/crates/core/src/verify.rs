//! Exhaustive verification sweeps: every closed form, identity, congruence
//! and valuation prediction in this crate checked against the recurrence
//! engine over explicit ranges.
//!
//! The sweeps are data-parallel over indices and over (k, j) pairs. With the
//! `parallel` feature (on by default) they fan out through rayon; setting
//! [`VerifyOptions::parallel`] to false, or building without the feature,
//! runs the identical checks sequentially. Oracle windows are generated once
//! per task and shared read-only.

use num_bigint::BigInt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::closed_form::{b_closed, b_piecewise, f_closed, s_closed};
use crate::engine::{
    b_via_s, doubling_term, extend_backward, generate, recompose, telescoped_term, SequenceSpec,
};
use crate::error::Result;
use crate::padic::{s2_u64, v2_binomial, v2_or_infinite, v2_u64, Valuation};
use crate::valuation::{
    applicable_f_rules, applicable_rules, b_residual, f_residual, predict_b_table,
    table_uncovered_expected,
};

/// Knobs for the verification sweeps. `k_max` and `n_max` bound the scans;
/// the spot ranges fixed by the identity statements themselves (digit-sum
/// identities, binomial agreement) are constants inside the suites.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub k_max: usize,
    pub n_max: u64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            k_max: 8,
            n_max: 400,
            seed: 0x67666962_2d636f72,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

fn map_range<R, F>(range: std::ops::Range<u64>, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return range.into_par_iter().map(&f).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    range.map(f).collect()
}

fn map_items<T, R, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.into_par_iter().map(&f).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    items.into_iter().map(f).collect()
}

/// Outcome of one suite: a check count, the failures (each one formatted with
/// the offending (k, j, n)), and free-form notes such as coverage statistics.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport {
            name,
            checks: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn absorb(&mut self, checked: u64, failures: Vec<String>) {
        self.checks += checked;
        self.failures.extend(failures);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Per-predictor outcome counts for one (k, j) scan.
#[derive(Debug, Clone, Default)]
pub struct PredictorTally {
    pub predicted_correct: u64,
    /// (n, detail) for every prediction that disagreed with the engine.
    /// Non-empty means a soundness bug.
    pub wrong: Vec<(u64, String)>,
    /// Indices where the predictor declined to answer.
    pub uncovered: Vec<u64>,
}

impl PredictorTally {
    pub fn coverage(&self, total: u64) -> f64 {
        if total == 0 {
            1.0
        } else {
            self.predicted_correct as f64 / total as f64
        }
    }
}

/// Result of scanning one basis sequence: the generic rule chain checked at
/// every index, plus the fixed case table when k is 3 or 4.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub k: usize,
    pub j: usize,
    pub n_max: u64,
    pub general: PredictorTally,
    pub table: Option<PredictorTally>,
    /// Table refusals outside the residue classes the printed side conditions
    /// leave open. Non-empty means the implemented table is narrower than the
    /// printed one.
    pub table_uncovered_unexpected: Vec<u64>,
}

/// Scan all n <= n_max for one basis sequence, checking every applicable
/// prediction rule against the exact term. See [`verify_range`].
pub fn verify_range_opts(k: usize, j: usize, n_max: u64, parallel: bool) -> Result<CoverageReport> {
    let spec = SequenceSpec::basis(k, j)?;
    let truths: Vec<Valuation> = spec
        .terms()
        .take(n_max as usize + 1)
        .map(|t| v2_or_infinite(&t))
        .collect();

    struct PerN {
        n: u64,
        general_covered: bool,
        general_wrong: Vec<String>,
        table_covered: Option<bool>,
        table_wrong: Option<String>,
        table_refusal_unexpected: bool,
    }

    let rows = map_range(0..n_max + 1, parallel, |n| {
        let truth = truths[n as usize];
        let rules = applicable_rules(k, j, n).expect("k and j validated");
        let general_wrong: Vec<String> = rules
            .iter()
            .filter(|&&(_, value)| value != truth)
            .map(|(rule, value)| format!("rule {rule} predicted {value}, engine has {truth}"))
            .collect();
        let general_covered = !rules.is_empty();

        let (table_covered, table_wrong, table_refusal_unexpected) = match predict_b_table(k, j, n)
        {
            Some(p) => {
                let p = p.expect("j validated");
                match p.value() {
                    Some(value) => {
                        let wrong = (value != truth).then(|| {
                            format!(
                                "table rule {} predicted {value}, engine has {truth}",
                                p.rule().expect("covered prediction carries its rule")
                            )
                        });
                        (Some(true), wrong, false)
                    }
                    None => {
                        let expected =
                            table_uncovered_expected(k, j, n).expect("table orders only");
                        (Some(false), None, !expected)
                    }
                }
            }
            None => (None, None, false),
        };

        PerN {
            n,
            general_covered,
            general_wrong,
            table_covered,
            table_wrong,
            table_refusal_unexpected,
        }
    });

    let mut general = PredictorTally::default();
    let mut table = predict_b_table(k, j, 0).map(|_| PredictorTally::default());
    let mut table_uncovered_unexpected = Vec::new();
    for row in rows {
        if row.general_wrong.is_empty() && row.general_covered {
            general.predicted_correct += 1;
        }
        for detail in row.general_wrong {
            general.wrong.push((row.n, detail));
        }
        if !row.general_covered {
            general.uncovered.push(row.n);
        }
        if let (Some(t), Some(covered)) = (table.as_mut(), row.table_covered) {
            match (covered, row.table_wrong) {
                (true, None) => t.predicted_correct += 1,
                (true, Some(detail)) => t.wrong.push((row.n, detail)),
                (false, _) => t.uncovered.push(row.n),
            }
            if row.table_refusal_unexpected {
                table_uncovered_unexpected.push(row.n);
            }
        }
    }

    Ok(CoverageReport {
        k,
        j,
        n_max,
        general,
        table,
        table_uncovered_unexpected,
    })
}

/// [`verify_range_opts`] with the build's default parallelism.
pub fn verify_range(k: usize, j: usize, n_max: u64) -> Result<CoverageReport> {
    verify_range_opts(k, j, n_max, cfg!(feature = "parallel"))
}

// -- deterministic pseudo-random sequence specs -------------------------------

struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn in_range(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }
}

/// Deterministic random specs with orders cycling through [k_lo, k_hi] and
/// initial values in [-9, 9].
pub fn random_specs(seed: u64, count: usize, k_lo: usize, k_hi: usize) -> Vec<SequenceSpec> {
    let mut rng = SplitMix64(seed);
    (0..count)
        .map(|i| {
            let k = k_lo + i % (k_hi - k_lo + 1);
            let init = (0..k).map(|_| BigInt::from(rng.in_range(-9, 9))).collect();
            SequenceSpec::new(k, init).expect("k >= 2 and init length k by construction")
        })
        .collect()
}

// -- suites -------------------------------------------------------------------

/// Closed forms against the engine: the all-ones form, the basis form, the
/// general form on random specs (with its linearity over the basis forms),
/// the piecewise small-n values, and the closed-vs-quotient triangle.
pub fn closedform_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("closedform");
    let n_max = opts.n_max;

    for k in 2..=opts.k_max {
        let ones = SequenceSpec::ones(k)?;
        let w = generate(&ones, n_max)?;
        let fails = map_range(0..n_max + 1, opts.parallel, |n| {
            let got = s_closed(k, n).expect("k >= 2");
            (&got != w.get(n as i64).expect("window covers n"))
                .then(|| format!("(k={k}, n={n}): s_closed = {got}, engine differs"))
        });
        rep.absorb(n_max + 1, fails.into_iter().flatten().collect());

        for j in 0..k {
            let basis = SequenceSpec::basis(k, j)?;
            let w = generate(&basis, n_max)?;
            let tri_max = n_max.min(300);
            let fails = map_range(j as u64 + 1..n_max + 1, opts.parallel, |n| {
                let mut errs = Vec::new();
                let closed = b_closed(k, j, n).expect("n >= j+1");
                if &closed != w.get(n as i64).expect("window covers n") {
                    errs.push(format!(
                        "(k={k}, j={j}, n={n}): b_closed disagrees with engine"
                    ));
                }
                if n >= k as u64 && n <= (3 * k + j + 2) as u64 {
                    let piecewise = b_piecewise(k, j, n).expect("n in piecewise range");
                    if piecewise != closed {
                        errs.push(format!(
                            "(k={k}, j={j}, n={n}): b_piecewise disagrees with b_closed"
                        ));
                    }
                }
                if n <= tri_max {
                    let via_s = b_via_s(k, j, n as i64).expect("n >= j+1");
                    if via_s != closed {
                        errs.push(format!(
                            "(k={k}, j={j}, n={n}): b_via_s disagrees with b_closed"
                        ));
                    }
                }
                errs
            });
            rep.absorb(n_max - j as u64, fails.into_iter().flatten().collect());
        }
    }

    // General form on random specs, plus linearity over the basis forms.
    let specs = random_specs(opts.seed, 50, 2, opts.k_max.min(8));
    let fails = map_items(specs, opts.parallel, |spec| {
        let k = spec.k();
        let w = generate(&spec, n_max).expect("valid spec");
        let mut errs = Vec::new();
        for n in k as u64..=n_max {
            let closed = f_closed(&spec, n).expect("n >= k");
            if &closed != w.get(n as i64).expect("window covers n") {
                errs.push(format!(
                    "(k={k}, n={n}, init={:?}): f_closed disagrees with engine",
                    spec.init()
                ));
            }
            if n % 7 == 0 {
                let linear: BigInt = spec
                    .init()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * b_closed(k, j, n).expect("n >= k > j"))
                    .sum();
                if linear != closed {
                    errs.push(format!(
                        "(k={k}, n={n}): f_closed is not the init-weighted sum of b_closed"
                    ));
                }
            }
        }
        (n_max + 1 - k as u64, errs)
    });
    for (checked, errs) in fails {
        rep.absorb(checked, errs);
    }

    Ok(rep)
}

/// Digit-sum and valuation identities, plus the linear-algebra facts of the
/// engine: decomposition/recomposition, the T/S summation identities, the
/// quotient identity for basis terms, backward extension values, and the
/// doubling/telescoped recurrence forms.
pub fn identities_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("identities");

    // s2(m - n) = s2(m) + v2(m) - s2(n) - v2(n) for 1 <= n < 2^v2(m)
    let fails = map_range(1..100_001, opts.parallel, |m| {
        let vm = v2_u64(m).finite().expect("m > 0");
        let mut errs = Vec::new();
        for n in 1..(1u64 << vm) {
            let vn = v2_u64(n).finite().expect("n > 0");
            if s2_u64(m - n) + s2_u64(n) + vn != s2_u64(m) + vm {
                errs.push(format!(
                    "digit-sum difference identity fails at (m={m}, n={n})"
                ));
            }
        }
        errs
    });
    rep.absorb(100_000, fails.into_iter().flatten().collect());

    // s2(n - 1) = s2(n) + v2(n) - 1 for n > 0
    let fails = map_range(1..100_001, opts.parallel, |n| {
        let vn = v2_u64(n).finite().expect("n > 0");
        (s2_u64(n - 1) + 1 != s2_u64(n) + vn)
            .then(|| format!("digit-sum predecessor identity fails at n={n}"))
    });
    rep.absorb(100_000, fails.into_iter().flatten().collect());

    // s2(n) - s2(m) = n - m - sum_{i=m+1}^{n} v2(i) for m < n <= 10^4
    const PAIR_MAX: u64 = 10_000;
    let mut v2_prefix = vec![0u64; PAIR_MAX as usize + 1];
    for i in 1..=PAIR_MAX {
        v2_prefix[i as usize] = v2_prefix[i as usize - 1] + v2_u64(i).finite().expect("i > 0");
    }
    let fails = map_range(1..PAIR_MAX + 1, opts.parallel, |n| {
        let mut errs = Vec::new();
        for m in 0..n {
            let lhs = s2_u64(n) as i64 - s2_u64(m) as i64;
            let rhs = (n - m) as i64 - (v2_prefix[n as usize] - v2_prefix[m as usize]) as i64;
            if lhs != rhs {
                errs.push(format!(
                    "digit-sum telescoping identity fails at (m={m}, n={n})"
                ));
            }
        }
        errs
    });
    rep.absorb(
        PAIR_MAX * (PAIR_MAX + 1) / 2,
        fails.into_iter().flatten().collect(),
    );

    // v2(C(m, n)) by digit sums against exact binomials built additively.
    const BINOM_MAX: u64 = 2000;
    let mut row: Vec<BigInt> = vec![BigInt::from(1)];
    let mut binom_checks = 0u64;
    for m in 0..=BINOM_MAX {
        if m > 0 {
            let mut next = vec![BigInt::from(1)];
            for i in 1..m as usize {
                next.push(&row[i - 1] + &row[i]);
            }
            next.push(BigInt::from(1));
            row = next;
        }
        let fails = map_range(0..m + 1, opts.parallel, |n| {
            let expected = v2_or_infinite(&row[n as usize]);
            let got = Valuation::Finite(v2_binomial(m, n).expect("n <= m"));
            (got != expected).then(|| format!("binomial valuation fails at (m={m}, n={n})"))
        });
        binom_checks += m + 1;
        rep.absorb(0, fails.into_iter().flatten().collect());
    }
    rep.checks += binom_checks;

    // v2(x * y) = v2(x) + v2(y) on pseudo-random pairs.
    let mut rng = SplitMix64(opts.seed ^ 0xA5A5_A5A5);
    let mut mult_fails = Vec::new();
    for _ in 0..2000 {
        let x = BigInt::from(rng.in_range(1, 1 << 20)) << (rng.next_u64() % 12) as u32;
        let y = BigInt::from(rng.in_range(1, 1 << 20)) << (rng.next_u64() % 12) as u32;
        let lhs = v2_or_infinite(&(&x * &y));
        let rhs = v2_or_infinite(&x) + v2_or_infinite(&y);
        if lhs != rhs {
            mult_fails.push(format!("v2({x} * {y}) is not additive"));
        }
    }
    rep.absorb(2000, mult_fails);

    // Recomposition: F_n = sum_j init_j B_n(k, j) for random specs.
    let specs = random_specs(opts.seed ^ 0x7E0, 100, 2, 6);
    let fails = map_items(specs, opts.parallel, |spec| {
        let k = spec.k();
        let w = generate(&spec, 200).expect("valid spec");
        let coeffs = spec.decompose();
        let mut errs = Vec::new();
        for n in 0..=200u64 {
            if &recompose(k, &coeffs, n).expect("coeff length == k")
                != w.get(n as i64).expect("window covers n")
            {
                errs.push(format!(
                    "(k={k}, n={n}): recomposition disagrees with engine"
                ));
            }
        }
        errs
    });
    rep.absorb(100 * 201, fails.into_iter().flatten().collect());

    // Per-order linear algebra: T/S sums, quotient identity, backward
    // extension, doubling and telescoped forms.
    let n_la = opts.n_max.min(300);
    let ks: Vec<usize> = (2..=opts.k_max).collect();
    let fails = map_items(ks, opts.parallel, |k| {
        let mut errs = Vec::new();
        let mut checked = 0u64;
        let s = generate(&SequenceSpec::ones(k).expect("k >= 2"), n_la).expect("valid");
        let t = generate(&SequenceSpec::k_step(k).expect("k >= 2"), n_la).expect("valid");
        let basis: Vec<_> = (0..k)
            .map(|j| generate(&SequenceSpec::basis(k, j).expect("j < k"), n_la).expect("valid"))
            .collect();

        for n in 0..=n_la as i64 {
            let full: BigInt = basis.iter().map(|w| w.get(n).expect("covered")).sum();
            let tail: BigInt = basis[1..].iter().map(|w| w.get(n).expect("covered")).sum();
            if &full != s.get(n).expect("covered") {
                errs.push(format!("(k={k}, n={n}): sum of basis terms is not S_n"));
            }
            if &tail != t.get(n).expect("covered") {
                errs.push(format!(
                    "(k={k}, n={n}): tail sum of basis terms is not T_n"
                ));
            }
            checked += 2;
        }

        for (j, w) in basis.iter().enumerate() {
            for n in j as i64 + 1..=n_la as i64 {
                if &b_via_s(k, j, n).expect("n >= j+1") != w.get(n).expect("covered") {
                    errs.push(format!(
                        "(k={k}, j={j}, n={n}): b_via_s disagrees with engine"
                    ));
                }
                checked += 1;
            }
        }

        let back =
            extend_backward(&SequenceSpec::ones(k).expect("k >= 2"), k as u64).expect("depth >= 1");
        if back.get(-1) != Some(&BigInt::from(-(k as i64 - 2))) {
            errs.push(format!("(k={k}): S_-1 != -(k-2)"));
        }
        for m in 2..=k as i64 {
            if back.get(-m) != Some(&BigInt::from(1)) {
                errs.push(format!("(k={k}): S_-{m} != 1"));
            }
        }
        checked += k as u64;

        let mut rng = SplitMix64(0xD0B1 ^ k as u64);
        let random = random_specs(opts.seed ^ 0xD0B1 ^ k as u64, 1, k, k)
            .pop()
            .expect("one spec requested");
        for spec in [SequenceSpec::ones(k).expect("k >= 2"), random] {
            let w = generate(&spec, opts.n_max.min(400)).expect("valid");
            for n in k as i64 + 1..=w.end() {
                if &doubling_term(&w, n).expect("in range") != w.get(n).expect("covered") {
                    errs.push(format!(
                        "(k={k}, n={n}): doubling form disagrees with engine"
                    ));
                }
                let m = rng.in_range(k as i64 + 1, n);
                if &telescoped_term(&w, n, m).expect("in range") != w.get(n).expect("covered") {
                    errs.push(format!(
                        "(k={k}, n={n}, m={m}): telescoped form disagrees with engine"
                    ));
                }
                checked += 2;
            }
        }

        (checked, errs)
    });
    for (checked, errs) in fails {
        rep.absorb(checked, errs);
    }

    Ok(rep)
}

/// Valuation predictions against the engine: the generic rule chain and the
/// fixed k = 3 / k = 4 tables over every basis sequence, then the
/// general-sequence rules over random specs.
pub fn valuation_suite(opts: &VerifyOptions) -> Result<(SuiteReport, Vec<CoverageReport>)> {
    let mut rep = SuiteReport::new("valuation");

    let pairs: Vec<(usize, usize)> = (2..=opts.k_max)
        .flat_map(|k| (0..k).map(move |j| (k, j)))
        .collect();
    let reports = map_items(pairs, opts.parallel, |(k, j)| {
        verify_range_opts(k, j, opts.n_max, false)
    });
    let mut coverage = Vec::new();
    for report in reports {
        let report = report?;
        rep.checks += report.n_max + 1;
        for (n, detail) in &report.general.wrong {
            rep.failures
                .push(format!("(k={}, j={}, n={n}): {detail}", report.k, report.j));
        }
        if let Some(table) = &report.table {
            for (n, detail) in &table.wrong {
                rep.failures
                    .push(format!("(k={}, j={}, n={n}): {detail}", report.k, report.j));
            }
            rep.notes.push(format!(
                "(k={}, j={}): table coverage {:.4}, general coverage {:.4}",
                report.k,
                report.j,
                table.coverage(report.n_max + 1),
                report.general.coverage(report.n_max + 1),
            ));
            for n in &report.table_uncovered_unexpected {
                rep.failures.push(format!(
                    "(k={}, j={}, n={n}): table refusal outside the printed complement",
                    report.k, report.j
                ));
            }
        } else {
            rep.notes.push(format!(
                "(k={}, j={}): general coverage {:.4}",
                report.k,
                report.j,
                report.general.coverage(report.n_max + 1),
            ));
        }
        coverage.push(report);
    }

    // General sequences: every applicable rule must match the engine.
    let f_max = opts.n_max.min(2000);
    let specs = random_specs(opts.seed ^ 0xF00D, 50, 2, opts.k_max.min(6));
    let outcomes = map_items(specs, opts.parallel, |spec| {
        let k = spec.k();
        let mut errs = Vec::new();
        let mut covered = 0u64;
        for (n, term) in spec.terms().take(f_max as usize + 1).enumerate().skip(k) {
            let truth = v2_or_infinite(&term);
            let rules = applicable_f_rules(&spec, n as u64).expect("n >= k");
            if !rules.is_empty() {
                covered += 1;
            }
            for (rule, value) in rules {
                if value != truth {
                    errs.push(format!(
                        "(k={k}, n={n}, init={:?}): rule {rule} predicted {value}, engine has {truth}",
                        spec.init()
                    ));
                }
            }
        }
        (f_max + 1 - k as u64, covered, errs)
    });
    let mut f_checked = 0u64;
    let mut f_covered = 0u64;
    for (checked, covered, errs) in outcomes {
        f_checked += checked;
        f_covered += covered;
        rep.absorb(checked, errs);
    }
    rep.notes.push(format!(
        "general-sequence coverage {:.4} over {} indices",
        f_covered as f64 / f_checked as f64,
        f_checked
    ));

    Ok((rep, coverage))
}

/// Structural congruences: the basis residual on every index where its
/// hypotheses hold, and the general residual on random specs.
pub fn residuals_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("residuals");
    let n_max = opts.n_max.min(300);
    let k_max = opts.k_max.min(6);

    let pairs: Vec<(usize, usize)> = (2..=k_max)
        .flat_map(|k| (0..k).map(move |j| (k, j)))
        .collect();
    let outcomes = map_items(pairs, opts.parallel, |(k, j)| {
        let mut errs = Vec::new();
        let mut checked = 0u64;
        for n in 0..=n_max {
            // skips indices where the hypotheses are not met
            if let Ok(check) = b_residual(k, j, n) {
                checked += 1;
                if !check.holds() {
                    errs.push(format!(
                        "(k={k}, j={j}, n={n}): residual {} not divisible by 2^{}",
                        check.residual, check.modulus_exp
                    ));
                }
            }
        }
        (checked, errs)
    });
    for (checked, errs) in outcomes {
        rep.absorb(checked, errs);
    }

    let mut specs = random_specs(opts.seed ^ 0x0DD5, 20, 2, k_max);
    specs.push(SequenceSpec::ones(3)?);
    specs.push(SequenceSpec::basis(3, 0)?);
    let outcomes = map_items(specs, opts.parallel, |spec| {
        let k = spec.k();
        let mut errs = Vec::new();
        let mut checked = 0u64;
        for n in k as u64..=n_max {
            // skips indices with a < 2
            if let Ok(check) = f_residual(&spec, n) {
                checked += 1;
                if !check.holds() {
                    errs.push(format!(
                        "(k={k}, n={n}, init={:?}): residual not divisible by 2^{}",
                        spec.init(),
                        check.modulus_exp
                    ));
                }
            }
        }
        (checked, errs)
    });
    for (checked, errs) in outcomes {
        rep.absorb(checked, errs);
    }

    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_opts() -> VerifyOptions {
        VerifyOptions {
            k_max: 4,
            n_max: 120,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn closedform_suite_passes() {
        let rep = closedform_suite(&quick_opts()).unwrap();
        assert!(rep.passed(), "failures: {:?}", rep.failures);
        assert!(rep.checks > 0);
    }

    #[test]
    fn valuation_suite_passes() {
        let (rep, coverage) = valuation_suite(&quick_opts()).unwrap();
        assert!(rep.passed(), "failures: {:?}", rep.failures);
        assert_eq!(coverage.len(), 2 + 3 + 4);
        for c in &coverage {
            assert!(c.general.wrong.is_empty());
        }
    }

    #[test]
    fn residuals_suite_passes() {
        let rep = residuals_suite(&quick_opts()).unwrap();
        assert!(rep.passed(), "failures: {:?}", rep.failures);
    }

    #[test]
    fn verify_range_reports_uncovered() {
        let report = verify_range(3, 0, 100).unwrap();
        let table = report.table.as_ref().expect("k = 3 has a table");
        assert!(table.wrong.is_empty());
        assert!(report.general.wrong.is_empty());
        // n = 17 (1 mod 16) is a known refusal
        assert!(table.uncovered.contains(&17));
        assert!(report.table_uncovered_unexpected.is_empty());
    }

    #[test]
    fn k4_j1_table_covers_most_indices() {
        let report = verify_range(4, 1, 200).unwrap();
        let table = report.table.as_ref().expect("k = 4 has a table");
        assert!(table.wrong.is_empty());
        assert!(
            table.coverage(201) >= 0.9,
            "coverage {:.4} below 0.9",
            table.coverage(201)
        );
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a = verify_range_opts(3, 1, 200, false).unwrap();
        let b = verify_range_opts(3, 1, 200, true).unwrap();
        assert_eq!(a.general.predicted_correct, b.general.predicted_correct);
        assert_eq!(a.general.uncovered, b.general.uncovered);
        assert_eq!(
            a.table.as_ref().map(|t| t.uncovered.clone()),
            b.table.as_ref().map(|t| t.uncovered.clone())
        );
    }

    #[test]
    fn random_specs_deterministic() {
        let a = random_specs(42, 10, 2, 6);
        let b = random_specs(42, 10, 2, 6);
        assert_eq!(a, b);
        assert!(a.iter().all(|s| (2..=6).contains(&s.k())));
    }
}
