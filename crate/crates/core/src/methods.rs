//! Confidence intervals for `n·tau`.
//!
//! Every method returns an integer interval for `n·tau`; the interval for
//! `tau` is that divided by `n`. Methods that invert randomization tests
//! report how many p-values they evaluated.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergeom::ci_count_with;
use crate::level::ConfidenceLevel;
use crate::randtest::{PValueMode, Statistic, Tester, DEFAULT_MAX_EXACT_N};
use crate::tables::{
    compatible_unchecked, enumerate_compatible, enumerate_completions, LabelSwitch, ObservedTable,
    PotentialTable, Rational,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Bonferroni combination of hypergeometric intervals for both margins.
    Bonferroni,
    /// Inversion of the treated-effect statistic, which depends only on `N+1`.
    MarginInversion,
    /// Two-sided test inversion using the monotone `N10` frontier.
    #[serde(rename = "two_sided_frontier")]
    TwoSided,
    OneSidedLower,
    OneSidedUpper,
    /// Two-sided test inversion over every compatible table.
    #[serde(rename = "brute_force_ii")]
    BruteForce,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Bonferroni,
        Method::MarginInversion,
        Method::TwoSided,
        Method::OneSidedLower,
        Method::OneSidedUpper,
        Method::BruteForce,
    ];

    /// Command-line spelling.
    pub fn cli_name(self) -> &'static str {
        match self {
            Method::Bonferroni => "bonferroni",
            Method::MarginInversion => "margin-inversion",
            Method::TwoSided => "two-sided",
            Method::OneSidedLower => "one-sided-lower",
            Method::OneSidedUpper => "one-sided-upper",
            Method::BruteForce => "brute-force",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Method::Bonferroni => "bonferroni",
            Method::MarginInversion => "margin_inversion",
            Method::TwoSided => "two_sided_frontier",
            Method::OneSidedLower => "one_sided_lower",
            Method::OneSidedUpper => "one_sided_upper",
            Method::BruteForce => "brute_force_ii",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .into_iter()
            .find(|m| m.cli_name() == s || m.id() == s)
            .ok_or_else(|| Error::Parse {
                what: "method",
                input: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub mode: PValueMode,
    /// Largest `n` allowed for exact p-values.
    pub max_exact_n: u64,
    /// Shrink hypergeometric intervals while keeping their coverage.
    pub refine_hypergeom: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            mode: PValueMode::Exact,
            max_exact_n: DEFAULT_MAX_EXACT_N,
            refine_hypergeom: false,
        }
    }
}

impl Options {
    fn tester(&self) -> Tester {
        Tester::new(self.mode, self.max_exact_n)
    }
}

/// Inclusive interval of integers `n·tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NTauInterval {
    pub lo: i64,
    pub hi: i64,
}

impl NTauInterval {
    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn contains_interval(&self, other: &NTauInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn from_set(set: &BTreeSet<i64>) -> Result<Self> {
        match (set.first(), set.last()) {
            (Some(&lo), Some(&hi)) => Ok(Self { lo, hi }),
            _ => Err(Error::EmptyAcceptance),
        }
    }
}

impl fmt::Display for NTauInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub table: ObservedTable,
    pub alpha: ConfidenceLevel,
    pub ci_ntau: NTauInterval,
    /// Randomization tests performed.
    pub tests: u64,
    pub mode: PValueMode,
    pub elapsed: Duration,
}

impl MethodResult {
    pub fn ci_tau(&self) -> (Rational, Rational) {
        let n = self.table.n() as i64;
        (
            Rational::new(self.ci_ntau.lo, n),
            Rational::new(self.ci_ntau.hi, n),
        )
    }
}

/// Runs `method` on `nobs`.
pub fn compute(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    method: Method,
    opts: &Options,
) -> Result<MethodResult> {
    nobs.validate()?;
    let start = Instant::now();
    let (ci_ntau, tests) = match method {
        Method::Bonferroni => (bonferroni_interval(nobs, alpha, opts)?, 0),
        Method::MarginInversion => (margin_inversion_interval(nobs, alpha, opts)?, 0),
        Method::TwoSided => {
            let (set, tests) = two_sided_accepted(nobs, alpha, opts)?;
            (NTauInterval::from_set(&set)?, tests)
        }
        Method::OneSidedLower => {
            let (set, tests) = one_sided_lower_accepted(nobs, alpha, opts)?;
            let lo = NTauInterval::from_set(&set)?.lo;
            let hi = nobs.attainable_tau_range().1;
            (NTauInterval { lo, hi }, tests)
        }
        Method::OneSidedUpper => {
            let (set, tests) = one_sided_lower_accepted(&nobs.switch_y(), alpha, opts)?;
            let hi = -NTauInterval::from_set(&set)?.lo;
            let lo = nobs.attainable_tau_range().0;
            (NTauInterval { lo, hi }, tests)
        }
        Method::BruteForce => {
            let (set, tests) = brute_force_accepted(nobs, alpha, opts)?;
            (NTauInterval::from_set(&set)?, tests)
        }
    };
    Ok(MethodResult {
        method,
        table: *nobs,
        alpha,
        ci_ntau,
        tests,
        mode: opts.mode,
        elapsed: start.elapsed(),
    })
}

pub fn ci_bonferroni(nobs: &ObservedTable, alpha: ConfidenceLevel) -> Result<MethodResult> {
    compute(nobs, alpha, Method::Bonferroni, &Options::default())
}

pub fn ci_margin_inversion(nobs: &ObservedTable, alpha: ConfidenceLevel) -> Result<MethodResult> {
    compute(nobs, alpha, Method::MarginInversion, &Options::default())
}

pub fn ci_two_sided_frontier(nobs: &ObservedTable, alpha: ConfidenceLevel) -> Result<MethodResult> {
    compute(nobs, alpha, Method::TwoSided, &Options::default())
}

/// One-sided interval; `upper = false` bounds `tau` from below.
pub fn ci_one_sided(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    upper: bool,
) -> Result<MethodResult> {
    let method = if upper {
        Method::OneSidedUpper
    } else {
        Method::OneSidedLower
    };
    compute(nobs, alpha, method, &Options::default())
}

pub fn ci_brute_force(nobs: &ObservedTable, alpha: ConfidenceLevel) -> Result<MethodResult> {
    compute(nobs, alpha, Method::BruteForce, &Options::default())
}

fn bonferroni_interval(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    opts: &Options,
) -> Result<NTauInterval> {
    let (n, m) = (nobs.n(), nobs.m());
    let half = alpha.halved();
    let treated = ci_count_with(n, m, nobs.n11, half, opts.refine_hypergeom)?;
    let control = ci_count_with(n, n - m, nobs.n01, half, opts.refine_hypergeom)?;
    let (lo_range, hi_range) = nobs.attainable_tau_range();
    let lo = (treated.lo as i64 - control.hi as i64).max(lo_range);
    let hi = (treated.hi as i64 - control.lo as i64).min(hi_range);
    if lo > hi {
        return Err(Error::EmptyAcceptance);
    }
    Ok(NTauInterval { lo, hi })
}

fn margin_inversion_interval(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    opts: &Options,
) -> Result<NTauInterval> {
    let (n, m) = (nobs.n(), nobs.m());
    let ci = ci_count_with(n, n - m, nobs.n01, alpha, opts.refine_hypergeom)?;
    let lo = ci.lo.max(nobs.n01);
    let hi = ci.hi.min(n - nobs.n00);
    let set: BTreeSet<i64> = enumerate_compatible(nobs)
        .into_iter()
        .filter(|t| (lo..=hi).contains(&t.nplus1()))
        .map(|t| t.n_tau())
        .collect();
    NTauInterval::from_set(&set)
}

/// For one `N11`, the frontier `N01 -> N10_min(N11, N01)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frontier {
    pub n11: u64,
    /// Indexed by `N01 = 0..=n - N11`.
    pub bounds: Vec<i64>,
}

/// Output of a frontier scan over `N11 = 0..=n11 + n01`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierScan {
    pub statistic: Statistic,
    pub frontiers: Vec<Frontier>,
    /// Accepted values of `n·tau` among compatible tables.
    pub accepted: BTreeSet<i64>,
    pub tests: u64,
}

/// Finds, for each `(N11, N01)`, the smallest `N10` whose table is accepted.
///
/// With `TwoSided`, only tables with `tau <= tau_hat_obs` are considered and
/// the fallback is `floor(N01 + n·tau_hat_obs) + 1`; this requires
/// `m <= n/2`. With `OneSided` the fallback is `n + 1`. Each scan for `N01`
/// starts at the bound found for `N01 - 1`.
pub fn frontier_scan(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    statistic: Statistic,
    opts: &Options,
) -> Result<FrontierScan> {
    nobs.validate()?;
    if statistic == Statistic::TwoSided && 2 * nobs.m() > nobs.n() {
        return Err(Error::Precondition(format!(
            "two-sided frontier scan needs m <= n/2, got m = {} with n = {}",
            nobs.m(),
            nobs.n()
        )));
    }
    let mut tester = opts.tester();
    tester.check_scale(nobs.n())?;
    let n = nobs.n() as i64;
    let n11_max = (nobs.n11 + nobs.n01) as i64;
    // below this N01 every table has tau > tau_hat_obs
    let first_tested = match statistic {
        Statistic::TwoSided => nobs.ceil_neg_n_tau_hat().max(0),
        Statistic::OneSided => 0,
    };
    let limits = |b11: i64, b01: i64| -> (i64, i64) {
        let cap = n - b11 - b01;
        match statistic {
            Statistic::TwoSided => {
                let f = nobs.floor_shifted_n_tau_hat(b01);
                (cap.min(f), f + 1)
            }
            Statistic::OneSided => (cap, n + 1),
        }
    };

    let mut frontiers = Vec::with_capacity(n11_max as usize + 1);
    let mut accepted = BTreeSet::new();
    for b11 in 0..=n11_max {
        let mut bounds = Vec::with_capacity((n - b11 + 1) as usize);
        let mut carry = 0i64;
        for b01 in 0..=n - b11 {
            let (limit, fallback) = limits(b11, b01);
            let mut bound = fallback;
            if b01 >= first_tested {
                let mut b10 = carry.max(0);
                while b10 <= limit {
                    let t = table(n, b11, b10, b01);
                    if tester.accepts(&t, nobs, statistic, alpha)? {
                        bound = b10;
                        break;
                    }
                    b10 += 1;
                }
            }
            carry = bound;
            bounds.push(bound);
            for b10 in bound.max(0)..=limit {
                let t = table(n, b11, b10, b01);
                if compatible_unchecked(&t, nobs) {
                    accepted.insert(t.n_tau());
                }
            }
        }
        frontiers.push(Frontier {
            n11: b11 as u64,
            bounds,
        });
    }
    Ok(FrontierScan {
        statistic,
        frontiers,
        accepted,
        tests: tester.tests(),
    })
}

fn table(n: i64, b11: i64, b10: i64, b01: i64) -> PotentialTable {
    PotentialTable::new(
        b11 as u64,
        b10 as u64,
        b01 as u64,
        (n - b11 - b10 - b01) as u64,
    )
}

fn negate(set: BTreeSet<i64>) -> BTreeSet<i64> {
    set.into_iter().map(|k| -k).collect()
}

/// Accepted `n·tau` values of the two-sided frontier method and the number
/// of tests used. Designs with `m > n/2` are handled by swapping arms.
pub fn two_sided_accepted(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    opts: &Options,
) -> Result<(BTreeSet<i64>, u64)> {
    nobs.validate()?;
    if 2 * nobs.m() > nobs.n() {
        let (set, tests) = two_sided_accepted(&nobs.switch_z(), alpha, opts)?;
        return Ok((negate(set), tests));
    }
    let below = frontier_scan(nobs, alpha, Statistic::TwoSided, opts)?;
    let above = frontier_scan(&nobs.switch_y(), alpha, Statistic::TwoSided, opts)?;
    let mut set = below.accepted;
    set.extend(above.accepted.into_iter().map(|k| -k));
    Ok((set, below.tests + above.tests))
}

/// Accepted `n·tau` values of the one-sided (lower bound) method.
pub fn one_sided_lower_accepted(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    opts: &Options,
) -> Result<(BTreeSet<i64>, u64)> {
    let scan = frontier_scan(nobs, alpha, Statistic::OneSided, opts)?;
    Ok((scan.accepted, scan.tests))
}

/// Accepted `n·tau` values when the table of every completion of the
/// missing outcomes is tested, one test per completion.
pub fn brute_force_accepted(
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    opts: &Options,
) -> Result<(BTreeSet<i64>, u64)> {
    nobs.validate()?;
    let mut tester = opts.tester();
    tester.check_scale(nobs.n())?;
    let mut set = BTreeSet::new();
    for (_, t) in enumerate_completions(nobs) {
        if tester.accepts(&t, nobs, Statistic::TwoSided, alpha)? {
            set.insert(t.n_tau());
        }
    }
    Ok((set, tester.tests()))
}
