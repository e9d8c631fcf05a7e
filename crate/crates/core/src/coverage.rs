//! Exact coverage of interval methods over every potential table of a given
//! size, by summing over all treatment assignments.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::level::ConfidenceLevel;
use crate::methods::{compute, Method, NTauInterval, Options};
use crate::randtest::OutcomeGrid;
use crate::tables::{all_observed_tables, all_potential_tables, ObservedTable, PotentialTable};

/// Largest `n` accepted by [`exact_coverage`].
pub const MAX_COVERAGE_N: u64 = 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageRow {
    pub table: PotentialTable,
    /// Assignments whose interval covers `tau(table)`.
    pub covered: u128,
    pub total: u128,
}

impl CoverageRow {
    pub fn coverage(&self) -> BigRational {
        BigRational::new(BigInt::from(self.covered), BigInt::from(self.total))
    }

    pub fn coverage_f64(&self) -> f64 {
        self.covered as f64 / self.total as f64
    }

    /// Whether coverage is at least `1 - alpha`.
    pub fn meets(&self, alpha: ConfidenceLevel) -> bool {
        self.covered * alpha.denom() as u128 >= (alpha.denom() - alpha.numer()) as u128 * self.total
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub n: u64,
    pub m: u64,
    pub alpha: ConfidenceLevel,
    pub method: Method,
    pub rows: Vec<CoverageRow>,
    /// Observed tables for which the method accepted nothing.
    pub empty_intervals: Vec<ObservedTable>,
}

impl CoverageReport {
    pub fn min_row(&self) -> &CoverageRow {
        self.rows
            .iter()
            .min_by(|a, b| a.coverage().cmp(&b.coverage()))
            .expect("at least one potential table")
    }

    pub fn mean_coverage(&self) -> f64 {
        self.rows.iter().map(CoverageRow::coverage_f64).sum::<f64>() / self.rows.len() as f64
    }

    pub fn failures(&self) -> Vec<&CoverageRow> {
        self.rows.iter().filter(|r| !r.meets(self.alpha)).collect()
    }
}

/// Coverage of `method` for every potential table with `n` units and `m`
/// treated. Each observed table's interval is computed once.
pub fn exact_coverage(
    n: u64,
    m: u64,
    alpha: ConfidenceLevel,
    method: Method,
    opts: &Options,
) -> Result<CoverageReport> {
    if n > MAX_COVERAGE_N {
        return Err(Error::ScaleGuard {
            n,
            limit: MAX_COVERAGE_N,
        });
    }
    if m == 0 || m >= n {
        return Err(Error::DegenerateArm {
            treated: m,
            control: n.saturating_sub(m),
        });
    }
    let observed: Vec<ObservedTable> = all_observed_tables(n, m).collect();
    let intervals: Vec<(ObservedTable, Option<NTauInterval>)> = observed
        .par_iter()
        .map(|t| match compute(t, alpha, method, opts) {
            Ok(r) => Ok((*t, Some(r.ci_ntau))),
            Err(Error::EmptyAcceptance) => Ok((*t, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let empty_intervals = intervals
        .iter()
        .filter(|(_, ci)| ci.is_none())
        .map(|(t, _)| *t)
        .collect();
    let lookup: HashMap<ObservedTable, Option<NTauInterval>> = intervals.into_iter().collect();

    let tables: Vec<PotentialTable> = all_potential_tables(n).collect();
    let rows = tables
        .par_iter()
        .map(|table| {
            let grid = OutcomeGrid::<u128>::new(table, m);
            let k = table.n_tau();
            let covered = grid
                .iter()
                .filter(|(obs, _)| lookup[obs].is_some_and(|ci| ci.contains(k)))
                .map(|(_, w)| *w)
                .sum();
            CoverageRow {
                table: *table,
                covered,
                total: grid.total,
            }
        })
        .collect();
    Ok(CoverageReport {
        n,
        m,
        alpha,
        method,
        rows,
        empty_intervals,
    })
}
