//! The four subcommands: term generation, closed-form evaluation, valuation
//! prediction/verification, and the verification suites.
//!
//! Exit codes: 0 on success (including honest `NotCovered` predictions),
//! 2 on usage or domain errors, 3 when a soundness check fails (a prediction
//! or closed form disagreeing with the engine, which signals a bug).

use std::fmt::Display;
use std::io::{self, BufWriter};

use clap::{ArgGroup, Args, Subcommand, ValueEnum};
use num_bigint::BigInt;

use gfib_core::closed_form::{b_closed, b_piecewise, f_closed, s_closed};
use gfib_core::engine::{generate, term_alloc_count, SequenceSpec, SequenceWindow};
use gfib_core::padic::v2_or_infinite;
use gfib_core::valuation::{predict_b, predict_b_table, predict_f, Prediction};
use gfib_core::verify::{
    closedform_suite, identities_suite, residuals_suite, valuation_suite, SuiteReport,
    VerifyOptions,
};

use crate::record::{Format, OutputRecord, RecordWriter};

/// Deepest backward extension `gen` will attempt.
const BACKWARD_DEPTH_LIMIT: i64 = 10_000;
/// Default cap on oracle term generation for `v2`.
const DEFAULT_ORACLE_LIMIT: u64 = 100_000;
pub const ORACLE_LIMIT_ENV: &str = "GFIB_ORACLE_LIMIT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOUNDNESS: i32 = 3;

#[derive(Subcommand)]
pub enum Command {
    /// Generate terms of a sequence with exact values and 2-adic orders
    Gen(GenArgs),
    /// Evaluate a closed form at one index, optionally checked against the engine
    Closed(ClosedArgs),
    /// Predict and/or compute the 2-adic order of one term
    V2(V2Args),
    /// Run verification suites against the recurrence engine
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("sequence").required(true)))]
pub struct GenArgs {
    /// Sequence order (at least 2)
    #[arg(long)]
    pub k: usize,
    /// Comma-separated initial values F_0,...,F_{k-1}
    #[arg(
        long,
        group = "sequence",
        value_name = "C0,C1,...",
        allow_hyphen_values = true
    )]
    pub init: Option<String>,
    /// Basis sequence: all initial values zero except a 1 at position J
    #[arg(long, group = "sequence", value_name = "J")]
    pub basis: Option<usize>,
    /// All-ones initial values
    #[arg(long, group = "sequence")]
    pub ones: bool,
    /// k-step initial values (0, 1, ..., 1)
    #[arg(long, group = "sequence")]
    pub t: bool,
    /// First index; negative indices extend the sequence backwards
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub from: i64,
    /// Last index (inclusive)
    #[arg(long, allow_negative_numbers = true)]
    pub to: i64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Omit the exact decimal value column
    #[arg(long)]
    pub no_value: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosedWhich {
    /// All-ones sequence closed form
    S,
    /// Basis-term closed form
    B,
    /// General-sequence closed form
    F,
    /// Piecewise basis-term values for small n
    BPiecewise,
}

#[derive(Args)]
pub struct ClosedArgs {
    #[arg(long, value_enum)]
    pub which: ClosedWhich,
    /// Sequence order (at least 2)
    #[arg(long)]
    pub k: usize,
    /// Basis position, required for --which b and b-piecewise
    #[arg(long)]
    pub j: Option<usize>,
    /// Comma-separated initial values, required for --which f
    #[arg(long, value_name = "C0,C1,...", allow_hyphen_values = true)]
    pub init: Option<String>,
    #[arg(long)]
    pub n: u64,
    /// Also compute the engine value and an agreement flag
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true)))]
pub struct V2Args {
    /// Sequence order (at least 2)
    #[arg(long)]
    pub k: usize,
    /// Basis position: query B_n(k, j)
    #[arg(long, group = "target")]
    pub j: Option<usize>,
    /// Comma-separated initial values: query F_n for that sequence
    #[arg(
        long,
        group = "target",
        value_name = "C0,C1,...",
        allow_hyphen_values = true
    )]
    pub init: Option<String>,
    #[arg(long)]
    pub n: u64,
    /// Skip the oracle entirely; required when n exceeds the oracle limit
    #[arg(long)]
    pub predict_only: bool,
    /// Oracle-term cap (default: GFIB_ORACLE_LIMIT or 100000)
    #[arg(long)]
    pub oracle_limit: Option<u64>,
    /// Omit the exact decimal value column
    #[arg(long)]
    pub no_value: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteSel {
    Closedform,
    Valuation,
    Identities,
    Residuals,
    All,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteSel::All)]
    pub suite: SuiteSel,
    /// Largest sequence order to sweep
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    /// Largest index to sweep
    #[arg(long, default_value_t = 400)]
    pub n_max: u64,
}

pub fn run(command: Command) -> Result<i32, String> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Closed(args) => cmd_closed(args),
        Command::V2(args) => cmd_v2(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn err(e: impl Display) -> String {
    e.to_string()
}

fn parse_init(raw: &str, k: usize) -> Result<Vec<BigInt>, String> {
    let values: Result<Vec<BigInt>, _> =
        raw.split(',').map(|s| s.trim().parse::<BigInt>()).collect();
    let values = values.map_err(|e| format!("bad initial value in {raw:?}: {e}"))?;
    if values.len() != k {
        return Err(format!(
            "expected exactly {k} initial values, got {}",
            values.len()
        ));
    }
    Ok(values)
}

fn stdout_writer(format: Format) -> RecordWriter<BufWriter<io::StdoutLock<'static>>> {
    RecordWriter::new(format, BufWriter::new(io::stdout().lock()))
}

fn cmd_gen(args: GenArgs) -> Result<i32, String> {
    let (spec, j) = if let Some(raw) = &args.init {
        (
            SequenceSpec::new(args.k, parse_init(raw, args.k)?).map_err(err)?,
            None,
        )
    } else if let Some(j) = args.basis {
        (SequenceSpec::basis(args.k, j).map_err(err)?, Some(j))
    } else if args.ones {
        (SequenceSpec::ones(args.k).map_err(err)?, None)
    } else {
        (SequenceSpec::k_step(args.k).map_err(err)?, None)
    };

    if args.from < -BACKWARD_DEPTH_LIMIT {
        return Err(format!(
            "--from {} is below the backward depth limit of -{BACKWARD_DEPTH_LIMIT}",
            args.from
        ));
    }
    let window = SequenceWindow::generate(&spec, args.from, args.to).map_err(err)?;

    let mut out = stdout_writer(args.format);
    for (n, term) in window.iter() {
        let record = OutputRecord {
            k: args.k,
            j,
            n,
            value: (!args.no_value).then(|| term.to_string()),
            v2: Some(v2_or_infinite(term)),
            predicted: None,
            rule: None,
            agree: None,
        };
        out.write(&record).map_err(err)?;
    }
    out.finish().map_err(err)?;
    Ok(EXIT_OK)
}

fn cmd_closed(args: ClosedArgs) -> Result<i32, String> {
    let need_j = || args.j.ok_or("--j is required for this closed form");
    let forbid_j = || {
        args.j
            .is_none()
            .then_some(())
            .ok_or("--j does not apply to this closed form")
    };
    let need_init = || {
        args.init
            .as_deref()
            .ok_or("--init is required for --which f")
    };
    let forbid_init = || {
        args.init
            .is_none()
            .then_some(())
            .ok_or("--init does not apply to this closed form")
    };

    let (closed, oracle_spec, j, tag) = match args.which {
        ClosedWhich::S => {
            forbid_j()?;
            forbid_init()?;
            let value = s_closed(args.k, args.n).map_err(err)?;
            (value, SequenceSpec::ones(args.k).map_err(err)?, None, "s")
        }
        ClosedWhich::B => {
            forbid_init()?;
            let j = need_j()?;
            let value = b_closed(args.k, j, args.n).map_err(err)?;
            (
                value,
                SequenceSpec::basis(args.k, j).map_err(err)?,
                Some(j),
                "b",
            )
        }
        ClosedWhich::BPiecewise => {
            forbid_init()?;
            let j = need_j()?;
            let value = b_piecewise(args.k, j, args.n).map_err(err)?;
            (
                value,
                SequenceSpec::basis(args.k, j).map_err(err)?,
                Some(j),
                "b-piecewise",
            )
        }
        ClosedWhich::F => {
            forbid_j()?;
            let spec = SequenceSpec::new(args.k, parse_init(need_init()?, args.k)?).map_err(err)?;
            let value = f_closed(&spec, args.n).map_err(err)?;
            (value, spec, None, "f")
        }
    };

    let mut out = stdout_writer(args.format);
    let mut exit = EXIT_OK;
    let mut record = OutputRecord {
        k: args.k,
        j,
        n: args.n as i64,
        value: Some(closed.to_string()),
        v2: Some(v2_or_infinite(&closed)),
        predicted: None,
        rule: Some(tag.to_string()),
        agree: None,
    };

    if args.check {
        let window = generate(&oracle_spec, args.n).map_err(err)?;
        let oracle = window.get(args.n as i64).expect("window covers n");
        let agree = oracle == &closed;
        record.agree = Some(agree);
        out.write(&record).map_err(err)?;
        let oracle_record = OutputRecord {
            value: Some(oracle.to_string()),
            v2: Some(v2_or_infinite(oracle)),
            rule: Some("oracle".to_string()),
            agree: Some(agree),
            ..record
        };
        out.write(&oracle_record).map_err(err)?;
        if !agree {
            exit = EXIT_SOUNDNESS;
        }
    } else {
        out.write(&record).map_err(err)?;
    }
    out.finish().map_err(err)?;
    Ok(exit)
}

fn oracle_limit(flag: Option<u64>) -> Result<u64, String> {
    if let Some(limit) = flag {
        return Ok(limit);
    }
    match std::env::var(ORACLE_LIMIT_ENV) {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|e| format!("bad {ORACLE_LIMIT_ENV} value {raw:?}: {e}")),
        Err(_) => Ok(DEFAULT_ORACLE_LIMIT),
    }
}

fn cmd_v2(args: V2Args) -> Result<i32, String> {
    let limit = oracle_limit(args.oracle_limit)?;
    if !args.predict_only && args.n > limit {
        return Err(format!(
            "n = {} exceeds the oracle limit {limit}; pass --predict-only or raise it \
             via --oracle-limit / {ORACLE_LIMIT_ENV}",
            args.n
        ));
    }

    // The prediction path must not materialize any sequence term.
    let allocs_before = term_alloc_count();
    let (spec, j, prediction) = match (args.j, &args.init) {
        (Some(j), None) => {
            let table = predict_b_table(args.k, j, args.n)
                .transpose()
                .map_err(err)?;
            let prediction = match table {
                Some(p) if p.is_covered() => p,
                _ => predict_b(args.k, j, args.n).map_err(err)?,
            };
            (
                SequenceSpec::basis(args.k, j).map_err(err)?,
                Some(j),
                prediction,
            )
        }
        (None, Some(raw)) => {
            let spec = SequenceSpec::new(args.k, parse_init(raw, args.k)?).map_err(err)?;
            let prediction = if args.n >= args.k as u64 {
                predict_f(&spec, args.n).map_err(err)?
            } else {
                Prediction::NotCovered
            };
            (spec, None, prediction)
        }
        _ => unreachable!("clap enforces exactly one of --j and --init"),
    };
    debug_assert_eq!(
        term_alloc_count(),
        allocs_before,
        "prediction materialized sequence terms"
    );

    let (value, v2) = if args.predict_only {
        (None, None)
    } else {
        let window = generate(&spec, args.n).map_err(err)?;
        let term = window.get(args.n as i64).expect("window covers n");
        (
            (!args.no_value).then(|| term.to_string()),
            Some(v2_or_infinite(term)),
        )
    };

    let record = OutputRecord {
        k: args.k,
        j,
        n: args.n as i64,
        value,
        v2,
        predicted: prediction.value(),
        rule: prediction.rule().map(|r| r.to_string()),
        agree: None,
    }
    .with_agreement();

    let disagreed = record.agree == Some(false);
    let mut out = stdout_writer(args.format);
    out.write(&record).map_err(err)?;
    out.finish().map_err(err)?;
    if disagreed {
        // A covered prediction differing from the engine is a bug, never an
        // expected outcome.
        eprintln!(
            "soundness violation at (k={}, j={:?}, n={}): predicted {:?} but engine disagrees",
            args.k, j, args.n, record.predicted
        );
        return Ok(EXIT_SOUNDNESS);
    }
    Ok(EXIT_OK)
}

fn print_report(report: &SuiteReport, failures_shown: usize) -> bool {
    println!(
        "suite {}: {} checks, {} failures",
        report.name,
        report.checks,
        report.failures.len()
    );
    for note in &report.notes {
        println!("  {note}");
    }
    for failure in report.failures.iter().take(failures_shown) {
        println!("  FAIL {failure}");
    }
    if report.failures.len() > failures_shown {
        println!(
            "  ... {} more failures",
            report.failures.len() - failures_shown
        );
    }
    report.passed()
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, String> {
    let opts = VerifyOptions {
        k_max: args.k_max,
        n_max: args.n_max,
        ..VerifyOptions::default()
    };
    let mut all_passed = true;
    let mut ran = |report: SuiteReport| {
        all_passed &= print_report(&report, 20);
    };

    match args.suite {
        SuiteSel::Closedform => ran(closedform_suite(&opts).map_err(err)?),
        SuiteSel::Identities => ran(identities_suite(&opts).map_err(err)?),
        SuiteSel::Residuals => ran(residuals_suite(&opts).map_err(err)?),
        SuiteSel::Valuation => ran(valuation_suite(&opts).map_err(err)?.0),
        SuiteSel::All => {
            ran(closedform_suite(&opts).map_err(err)?);
            ran(identities_suite(&opts).map_err(err)?);
            ran(valuation_suite(&opts).map_err(err)?.0);
            ran(residuals_suite(&opts).map_err(err)?);
        }
    }

    Ok(if all_passed { EXIT_OK } else { EXIT_SOUNDNESS })
}
