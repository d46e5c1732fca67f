//! The three subcommands. Each returns the JSON document and an exit code.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use thetavoa::lattice::{theta_series, CosetLabel, EvenLattice};
use thetavoa::modular::{fit_and_verify, seeded_rng, UnimodularMatrix};
use thetavoa::qseries::{dedekind_eta, eisenstein_g2, TruncatedSeries};

use crate::config::{NamedLattice, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{
    complex_pair, number, to_json, ExpansionReport, FitReport, Status, VerificationReport, SCHEMA_VERSION,
};
use crate::runner::{run_checks, Check};
use crate::suites::{self, Context};
use crate::{Expansion, Suite};

/// Largest `--order` accepted by `expand` for eta and G2.
pub const MAX_EXPAND_ORDER: u32 = 500;

#[derive(Clone, Debug)]
pub struct Options {
    pub config: RunConfig,
    pub lattice: NamedLattice,
    pub seed: u64,
    pub jobs: usize,
    pub timings: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            config: RunConfig::default(),
            lattice: NamedLattice::default_rank_one(),
            seed: 0,
            jobs: 1,
            timings: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Output {
    pub json: String,
    pub exit_code: i32,
    /// Short human-readable summary, printed to stderr under `--human`.
    pub summary: String,
}

fn suite_checks(suite: Suite, ctx: &Arc<Context>) -> Vec<Check> {
    match suite {
        Suite::SpecialFunctions => suites::special_functions(ctx),
        Suite::ThetaClassical => suites::theta_classical(ctx),
        Suite::Combinatorics => suites::combinatorics(ctx),
        Suite::Npoint => suites::npoint(ctx),
        Suite::MainTheorem => suites::main_theorem(ctx),
        Suite::All => [
            Suite::SpecialFunctions,
            Suite::ThetaClassical,
            Suite::Combinatorics,
            Suite::Npoint,
            Suite::MainTheorem,
        ]
        .into_iter()
        .flat_map(|s| suite_checks(s, ctx))
        .collect(),
    }
}

pub fn verify(suite: Suite, opts: &Options) -> Result<Output> {
    let ctx = Arc::new(Context {
        lattice: opts.lattice.lattice.clone(),
        config: opts.config.clone(),
        seed: opts.seed,
    });
    let checks = suite_checks(suite, &ctx);
    let results = run_checks(&checks, opts.jobs, opts.timings)?;
    let report = VerificationReport::new(suite.name(), &opts.lattice.name, opts.seed, results);
    let mut summary = String::new();
    for c in &report.checks {
        let err = c.max_error.map_or("error".to_string(), |e| format!("{e:.2e}"));
        summary.push_str(&format!("{:<4} {:<52} {err} (tol {:.0e})\n", status_word(c.status), c.name, c.tolerance));
    }
    summary.push_str(&format!("{}: {}\n", report.suite, status_word(report.overall)));
    Ok(Output {
        json: to_json(&report),
        exit_code: if report.overall == Status::Pass { 0 } else { 1 },
        summary,
    })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
    }
}

/// Parses `"a,b,f,d"`.
pub fn parse_alpha(s: &str) -> Result<UnimodularMatrix> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::Config(format!("--alpha {s:?}: {e}")))?;
    let [a, b, f, d] = parts[..] else {
        return Err(CliError::Config(format!("--alpha expects four integers a,b,f,d, got {s:?}")));
    };
    UnimodularMatrix::new(a, b, f, d).map_err(CliError::Input)
}

pub fn fit(alpha: &UnimodularMatrix, opts: &Options) -> Result<Output> {
    let mut rng = seeded_rng(opts.seed);
    let fit_count = opts.config.fit_samples(&opts.lattice.lattice);
    let holdout = opts.config.cutoff("holdout");
    let (a, report) = fit_and_verify(
        &opts.lattice.lattice,
        alpha,
        &mut rng,
        fit_count,
        holdout,
        opts.config.im_tau_floor,
    )?;
    let tolerance = opts.config.tolerance("main-theorem");
    let status = Status::from_bool(report.max_residual < tolerance);
    let (ea, eb, ef, ed) = alpha.entries();
    let out = FitReport {
        schema: SCHEMA_VERSION,
        lattice: opts.lattice.name.clone(),
        seed: opts.seed,
        alpha: [ea, eb, ef, ed],
        labels: a.labels.iter().map(|l| l.to_string()).collect(),
        entries: a.entries.iter().map(|row| row.iter().map(|z| complex_pair(*z)).collect()).collect(),
        fit_residual: a.fit_residual,
        holdout_residual: report.max_residual,
        condition: a.condition,
        tolerance,
        status,
    };
    let summary = format!(
        "A for {alpha} on {}: {n}x{n}, holdout residual {:.2e}, condition {:.2e}: {}\n",
        opts.lattice.name,
        report.max_residual,
        a.condition,
        status_word(status),
        n = a.size(),
    );
    Ok(Output {
        json: to_json(&out),
        exit_code: if status == Status::Pass { 0 } else { 1 },
        summary,
    })
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Parses comma-separated rational coordinates of `β` in the lattice basis.
/// A lone `0` stands for the zero coset in any rank.
pub fn parse_coset(lattice: &EvenLattice, s: &str) -> Result<CosetLabel> {
    let coords: Vec<BigRational> = s
        .split(',')
        .map(|p| parse_rational(p).ok_or_else(|| CliError::Config(format!("--coset: cannot parse {p:?}"))))
        .collect::<Result<_>>()?;
    if coords.len() == 1 && coords[0].is_zero() {
        return Ok(CosetLabel::zero(lattice.rank()));
    }
    CosetLabel::new(lattice, coords).map_err(CliError::Input)
}

pub fn expand(what: Expansion, order: u32, coset: Option<&str>, opts: &Options) -> Result<Output> {
    if what != Expansion::ThetaSeries && order > MAX_EXPAND_ORDER {
        return Err(CliError::Config(format!("--order {order} above the limit {MAX_EXPAND_ORDER}")));
    }
    let series: TruncatedSeries = match what {
        Expansion::Eta => dedekind_eta(order),
        Expansion::G2 => eisenstein_g2(order),
        Expansion::ThetaSeries => {
            let l = &opts.lattice.lattice;
            let beta = match coset {
                Some(s) => parse_coset(l, s)?,
                None => CosetLabel::zero(l.rank()),
            };
            theta_series(l, &beta, order)?
        }
    };
    let denom = series.denom();
    let limit = order as i64 * denom as i64 + if what == Expansion::Eta { 1 } else { 0 };
    let terms: Vec<[serde_json::Value; 3]> = series
        .terms()
        .filter(|(k, z)| *k <= limit && (z.re != 0.0 || z.im != 0.0))
        .map(|(k, z)| [serde_json::Value::from(k), number(z.re), number(z.im)])
        .collect();
    let summary = format!("{} through q^{order}: {} nonzero terms, exponents over {denom}\n", what.name(), terms.len());
    let out = ExpansionReport {
        schema: SCHEMA_VERSION,
        what: what.name().to_string(),
        order,
        denom,
        terms,
    };
    Ok(Output {
        json: to_json(&out),
        exit_code: 0,
        summary,
    })
}
