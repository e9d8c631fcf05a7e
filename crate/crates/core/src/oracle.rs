//! Slow reference implementations for validation.
//!
//! Nothing here shares code with the fast paths beyond the table types:
//! assignments are enumerated unit by unit over explicit subsets, and
//! probabilities are subset counts.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::level::ConfidenceLevel;
use crate::randtest::Statistic;
use crate::tables::{ObservedTable, PotentialTable, Rational};

/// Largest population enumerated subset by subset.
pub const MAX_ORACLE_N: u64 = 14;

/// Unit-level potential outcomes `(y(1), y(0))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitPotentials {
    pub units: Vec<(u8, u8)>,
}

impl UnitPotentials {
    /// Canonical unit list: `(1,1)` units first, then `(1,0)`, `(0,1)`, `(0,0)`.
    pub fn from_table(table: &PotentialTable) -> Self {
        let mut units = Vec::with_capacity(table.n() as usize);
        for (kind, count) in [(1, 1), (1, 0), (0, 1), (0, 0)]
            .into_iter()
            .zip(table.counts())
        {
            units.extend(std::iter::repeat_n(kind, count as usize));
        }
        Self { units }
    }

    pub fn summarize(&self) -> PotentialTable {
        let mut c = [0u64; 4];
        for &(y1, y0) in &self.units {
            c[(1 - y1 as usize) * 2 + (1 - y0 as usize)] += 1;
        }
        PotentialTable::from_counts(c)
    }

    /// Unit effects `y(1) - y(0)`.
    pub fn effects(&self) -> Vec<i64> {
        self.units
            .iter()
            .map(|&(a, b)| a as i64 - b as i64)
            .collect()
    }
}

/// Exact distribution of `tau_hat` over all size-`m` treated subsets, as
/// `(value, probability)` pairs sorted by value.
pub fn enumerate_assignments(
    units: &UnitPotentials,
    m: u64,
) -> Result<Vec<(Rational, BigRational)>> {
    let n = units.units.len() as u64;
    if n > MAX_ORACLE_N {
        return Err(Error::ScaleGuard {
            n,
            limit: MAX_ORACLE_N,
        });
    }
    if m == 0 || m >= n {
        return Err(Error::DegenerateArm {
            treated: m,
            control: n.saturating_sub(m),
        });
    }
    let mut counts: BTreeMap<Rational, u64> = BTreeMap::new();
    let mut subsets = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as u64 != m {
            continue;
        }
        subsets += 1;
        let (mut treated_sum, mut control_sum) = (0i64, 0i64);
        for (j, &(y1, y0)) in units.units.iter().enumerate() {
            if mask >> j & 1 == 1 {
                treated_sum += y1 as i64;
            } else {
                control_sum += y0 as i64;
            }
        }
        let tau_hat =
            Rational::new(treated_sum, m as i64) - Rational::new(control_sum, (n - m) as i64);
        *counts.entry(tau_hat).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(v, c)| (v, BigRational::new(BigInt::from(c), BigInt::from(subsets))))
        .collect())
}

/// Compatibility by searching for a feasible number `x11` of treated
/// `(1,1)` units, with the other treated counts forced by the observed table.
pub fn brute_compatibility(table: &PotentialTable, nobs: &ObservedTable) -> bool {
    if table.n() != nobs.n() {
        return false;
    }
    let [b11, b10, b01, b00] = table.counts().map(|c| c as i64);
    let [n11, n10, n01, _] = nobs.counts().map(|c| c as i64);
    (0..=b11).any(|x11| {
        let x10 = n11 - x11;
        let x01 = b11 + b01 - n01 - x11;
        let x00 = x11 + n01 + n10 - b11 - b01;
        (0..=b10).contains(&x10) && (0..=b01).contains(&x01) && (0..=b00).contains(&x00)
    })
}

/// Memoizes enumerated null distributions per `(table, m)`.
#[derive(Debug, Default)]
pub struct Oracle {
    cache: HashMap<(PotentialTable, u64), Vec<(Rational, BigRational)>>,
}

impl Oracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn distribution(
        &mut self,
        table: &PotentialTable,
        m: u64,
    ) -> Result<&[(Rational, BigRational)]> {
        let key = (*table, m);
        if let Entry::Vacant(slot) = self.cache.entry(key) {
            slot.insert(enumerate_assignments(
                &UnitPotentials::from_table(table),
                m,
            )?);
        }
        Ok(&self.cache[&key])
    }

    /// p-value from the enumerated distribution.
    pub fn p_value(
        &mut self,
        table: &PotentialTable,
        nobs: &ObservedTable,
        statistic: Statistic,
    ) -> Result<BigRational> {
        let obs = nobs.tau_hat()?;
        let tau = table.tau();
        let dist = self.distribution(table, nobs.m())?;
        Ok(dist
            .iter()
            .filter(|(v, _)| match statistic {
                Statistic::OneSided => *v >= obs,
                Statistic::TwoSided => (*v - tau).abs() >= (obs - tau).abs(),
            })
            .map(|(_, p)| p.clone())
            .sum())
    }

    /// The frontier value `N10_min(N11, N01)` straight from its definition:
    /// the smallest `N10` meeting the acceptance condition, or the fallback.
    pub fn brute_frontier(
        &mut self,
        n11: u64,
        n01: u64,
        nobs: &ObservedTable,
        alpha: ConfidenceLevel,
        statistic: Statistic,
    ) -> Result<i64> {
        let n = nobs.n();
        if n11 + n01 > n {
            return Err(Error::Precondition(format!(
                "N11 + N01 = {} exceeds n = {n}",
                n11 + n01
            )));
        }
        let level = BigRational::new(BigInt::from(alpha.numer()), BigInt::from(alpha.denom()));
        let obs = nobs.tau_hat()?;
        for n10 in 0..=n - n11 - n01 {
            let t = PotentialTable::new(n11, n10, n01, n - n11 - n10 - n01);
            if statistic == Statistic::TwoSided && t.tau() > obs {
                continue;
            }
            if self.p_value(&t, nobs, statistic)? >= level {
                return Ok(n10 as i64);
            }
        }
        Ok(match statistic {
            Statistic::OneSided => n as i64 + 1,
            Statistic::TwoSided => {
                // floor(N01 + n·tau_hat_obs) + 1
                (Rational::from(n01 as i64) + obs * Rational::from(n as i64))
                    .floor()
                    .to_integer()
                    + 1
            }
        })
    }
}

/// One-off version of [`Oracle::brute_frontier`].
pub fn brute_frontier(
    n11: u64,
    n01: u64,
    nobs: &ObservedTable,
    alpha: ConfidenceLevel,
    statistic: Statistic,
) -> Result<i64> {
    Oracle::new().brute_frontier(n11, n01, nobs, alpha, statistic)
}
