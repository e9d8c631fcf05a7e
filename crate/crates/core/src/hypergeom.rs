//! Hypergeometric distribution with exact tails, and confidence intervals for
//! the number of marked units in a finite population.
//!
//! `X ~ HyperGeo(A, T, S)` counts marked units in a simple random sample of
//! size `S` drawn from `T` units, `A` of which are marked.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::binom::{binomial, Weight, U128_MAX_N};
use crate::error::{Error, Result};
use crate::level::ConfidenceLevel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HyperGeomSpec {
    pub marked: u64,
    pub population: u64,
    pub sample: u64,
}

impl HyperGeomSpec {
    pub fn new(marked: u64, population: u64, sample: u64) -> Result<Self> {
        if marked > population || sample > population {
            return Err(Error::Precondition(format!(
                "HyperGeo(A={marked}, T={population}, S={sample}) needs A <= T and S <= T"
            )));
        }
        Ok(Self {
            marked,
            population,
            sample,
        })
    }

    /// Inclusive support `[max(0, S - (T - A)), min(S, A)]`.
    pub fn support(&self) -> (u64, u64) {
        let unmarked = self.population - self.marked;
        (
            self.sample.saturating_sub(unmarked),
            self.sample.min(self.marked),
        )
    }

    fn count(&self, x: u64) -> BigUint {
        if x > self.sample {
            return BigUint::default();
        }
        binomial(self.marked, x) * binomial(self.population - self.marked, self.sample - x)
    }

    fn ratio(&self, numer: BigUint) -> BigRational {
        BigRational::new(
            BigInt::from(numer),
            BigInt::from(binomial(self.population, self.sample)),
        )
    }

    pub fn pmf(&self, x: u64) -> BigRational {
        self.ratio(self.count(x))
    }

    /// `P(X >= x)`
    pub fn tail_ge(&self, x: u64) -> BigRational {
        let (lo, hi) = self.support();
        let numer = (x.max(lo)..=hi).map(|k| self.count(k)).sum();
        self.ratio(numer)
    }

    /// `P(X <= x)`
    pub fn tail_le(&self, x: u64) -> BigRational {
        let (lo, hi) = self.support();
        let numer = (lo..=x.min(hi)).map(|k| self.count(k)).sum();
        self.ratio(numer)
    }
}

/// Inclusive integer interval `{lo, ..., hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountInterval {
    pub lo: u64,
    pub hi: u64,
}

impl CountInterval {
    pub fn contains(&self, a: u64) -> bool {
        self.lo <= a && a <= self.hi
    }

    pub fn contains_interval(&self, other: &CountInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Equal-tail exact interval for `A` given `X = x`:
/// `lo = min{A : P_A(X >= x) > alpha/2}`, `hi = max{A : P_A(X <= x) > alpha/2}`.
pub fn ci_count(
    population: u64,
    sample: u64,
    x: u64,
    level: ConfidenceLevel,
) -> Result<CountInterval> {
    check_observation(population, sample, x)?;
    Ok(ci_count_table(population, sample, level)?[x as usize])
}

/// As [`ci_count`], optionally followed by [`refine_intervals`].
pub fn ci_count_with(
    population: u64,
    sample: u64,
    x: u64,
    level: ConfidenceLevel,
    refine: bool,
) -> Result<CountInterval> {
    check_observation(population, sample, x)?;
    let mut table = ci_count_table(population, sample, level)?;
    if refine {
        refine_intervals(population, sample, level, &mut table)?;
    }
    Ok(table[x as usize])
}

fn check_observation(population: u64, sample: u64, x: u64) -> Result<()> {
    if x > sample || sample > population {
        return Err(Error::Precondition(format!(
            "need 0 <= x <= S <= T, got x={x}, S={sample}, T={population}"
        )));
    }
    Ok(())
}

/// Equal-tail intervals for every possible observation `x = 0..=S`.
pub fn ci_count_table(
    population: u64,
    sample: u64,
    level: ConfidenceLevel,
) -> Result<Vec<CountInterval>> {
    check_observation(population, sample, 0)?;
    if population <= U128_MAX_N {
        Ok(equal_tail::<u128>(population, sample, level))
    } else {
        Ok(equal_tail::<BigUint>(population, sample, level))
    }
}

/// `counts[A][x] = C(A, x) C(T - A, S - x)`; each row sums to `C(T, S)`.
fn count_matrix<W: Weight>(population: u64, sample: u64) -> Vec<Vec<W>> {
    (0..=population)
        .map(|a| {
            (0..=sample)
                .map(|x| {
                    if x > a || sample - x > population - a {
                        W::zero()
                    } else {
                        W::binom(a, x).mul(&W::binom(population - a, sample - x))
                    }
                })
                .collect()
        })
        .collect()
}

fn equal_tail<W: Weight>(
    population: u64,
    sample: u64,
    level: ConfidenceLevel,
) -> Vec<CountInterval> {
    let counts = count_matrix::<W>(population, sample);
    let total = W::binom(population, sample);
    let (num, den2) = (level.numer(), 2 * level.denom());
    let s = sample as usize;

    // ge[a][x] = #{P_a(X >= x)}, le[a][x] = #{P_a(X <= x)}
    let mut lo = vec![None; s + 1];
    let mut hi = vec![0u64; s + 1];
    for (a, row) in counts.iter().enumerate() {
        let mut acc = W::zero();
        for x in (0..=s).rev() {
            acc.add_assign(&row[x]);
            if lo[x].is_none() && acc.scaled_gt(den2, &total, num) {
                lo[x] = Some(a as u64);
            }
        }
        let mut acc = W::zero();
        for (x, h) in hi.iter_mut().enumerate() {
            acc.add_assign(&row[x]);
            if acc.scaled_gt(den2, &total, num) {
                *h = a as u64;
            }
        }
    }
    lo.into_iter()
        .zip(hi)
        .map(|(lo, hi)| CountInterval {
            lo: lo.expect("P_T(X >= x) = 1 for every x <= S"),
            hi,
        })
        .collect()
}

/// Exact coverage `P_A(lo(X) <= A <= hi(X))` of a family of intervals, for
/// every `A = 0..=T`.
pub fn coverage(
    population: u64,
    sample: u64,
    intervals: &[CountInterval],
) -> Result<Vec<BigRational>> {
    if intervals.len() as u64 != sample + 1 {
        return Err(Error::Precondition(format!(
            "expected {} intervals, got {}",
            sample + 1,
            intervals.len()
        )));
    }
    let total = BigInt::from(binomial(population, sample));
    Ok((0..=population)
        .map(|a| {
            let spec = HyperGeomSpec::new(a, population, sample).expect("a <= T");
            let numer: BigUint = intervals
                .iter()
                .enumerate()
                .filter(|(_, ci)| ci.contains(a))
                .map(|(x, _)| spec.count(x as u64))
                .sum();
            BigRational::new(BigInt::from(numer), total.clone())
        })
        .collect())
}

/// Shrinks endpoints of an interval family one count at a time, keeping
/// `lo` and `hi` nondecreasing in `x` and exact coverage `>= 1 - alpha` for
/// every `A`. Stops when no endpoint can move.
pub fn refine_intervals(
    population: u64,
    sample: u64,
    level: ConfidenceLevel,
    intervals: &mut [CountInterval],
) -> Result<()> {
    if intervals.len() as u64 != sample + 1 {
        return Err(Error::Precondition(format!(
            "expected {} intervals, got {}",
            sample + 1,
            intervals.len()
        )));
    }
    if population <= U128_MAX_N {
        shrink::<u128>(population, sample, level, intervals);
    } else {
        shrink::<BigUint>(population, sample, level, intervals);
    }
    Ok(())
}

fn shrink<W: Weight>(
    population: u64,
    sample: u64,
    level: ConfidenceLevel,
    ci: &mut [CountInterval],
) {
    let counts = count_matrix::<W>(population, sample);
    let total = W::binom(population, sample);
    let (num, den) = (level.numer(), level.denom());
    let mut cov: Vec<W> = counts
        .iter()
        .enumerate()
        .map(|(a, row)| {
            let mut acc = W::zero();
            for (x, c) in row.iter().enumerate() {
                if ci[x].contains(a as u64) {
                    acc.add_assign(c);
                }
            }
            acc
        })
        .collect();
    let keeps_level = |c: &W| c.scaled_ge(den, &total, den - num);
    let s = sample as usize;

    loop {
        let mut changed = false;
        for i in 0..=s {
            // lower endpoint of x = i
            let a = ci[i].lo as usize;
            if ci[i].lo < ci[i].hi && (i == s || ci[i].lo < ci[i + 1].lo) {
                let reduced = cov[a].sub(&counts[a][i]);
                if keeps_level(&reduced) {
                    cov[a] = reduced;
                    ci[i].lo += 1;
                    changed = true;
                }
            }
            // upper endpoint of the mirrored observation x = S - i
            let j = s - i;
            let a = ci[j].hi as usize;
            if ci[j].lo < ci[j].hi && (j == 0 || ci[j - 1].hi < ci[j].hi) {
                let reduced = cov[a].sub(&counts[a][j]);
                if keeps_level(&reduced) {
                    cov[a] = reduced;
                    ci[j].hi -= 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}
