//! Exact randomization tests for a fixed potential table.
//!
//! Under complete randomization the treated group is a simple random sample
//! of size `m`. Given a potential table, an assignment is summarized by how
//! many units of each kind are treated (an [`AssignmentSplit`]); the split
//! determines the observed table and therefore `tau_hat`. All p-values are
//! counts of assignments over `C(n, m)` and every comparison is made on
//! integers.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};

use crate::binom::{binomial, Weight, U128_MAX_N};
use crate::error::{Error, Result};
use crate::level::ConfidenceLevel;
use crate::tables::{ObservedTable, PotentialTable, Rational};

/// Default largest `n` for which exact p-values are computed.
pub const DEFAULT_MAX_EXACT_N: u64 = 300;

/// Numbers of treated units of each potential-outcome kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AssignmentSplit {
    pub x11: u64,
    pub x10: u64,
    pub x01: u64,
    pub x00: u64,
}

impl AssignmentSplit {
    /// The observed table this split produces under `table`.
    pub fn observed(&self, table: &PotentialTable) -> ObservedTable {
        let treated_ones = self.x11 + self.x10;
        let m = treated_ones + self.x01 + self.x00;
        let control_ones = (table.n11 - self.x11) + (table.n01 - self.x01);
        let control = table.n() - m;
        ObservedTable::new(
            treated_ones,
            m - treated_ones,
            control_ones,
            control - control_ones,
        )
    }
}

/// Visits every split of `table` with treated size `m`, with its weight
/// `prod C(N_ik, x_ik)`.
pub(crate) fn for_each_split<W: Weight>(
    table: &PotentialTable,
    m: u64,
    mut visit: impl FnMut(AssignmentSplit, &W),
) {
    let [b11, b10, b01, b00] = table.counts();
    for x11 in 0..=b11.min(m) {
        let w11 = W::binom(b11, x11);
        for x10 in 0..=b10.min(m - x11) {
            let w = w11.mul(&W::binom(b10, x10));
            let rem = m - x11 - x10;
            for x01 in rem.saturating_sub(b00)..=b01.min(rem) {
                let x00 = rem - x01;
                let weight = w.mul(&W::binom(b01, x01)).mul(&W::binom(b00, x00));
                visit(AssignmentSplit { x11, x10, x01, x00 }, &weight);
            }
        }
    }
}

/// Distribution of the induced observed table: cell `(a, c)` holds the
/// number of assignments with `a` treated ones and `c` control ones.
#[derive(Debug, Clone)]
pub(crate) struct OutcomeGrid<W> {
    pub n: u64,
    pub m: u64,
    pub cells: Vec<W>,
    pub total: W,
}

impl<W: Weight> OutcomeGrid<W> {
    pub fn new(table: &PotentialTable, m: u64) -> Self {
        let n = table.n();
        let width = (n - m + 1) as usize;
        let mut cells = vec![W::zero(); (m as usize + 1) * width];
        for_each_split::<W>(table, m, |s, w| {
            let a = s.x11 + s.x10;
            let c = (table.n11 - s.x11) + (table.n01 - s.x01);
            cells[a as usize * width + c as usize].add_assign(w);
        });
        Self {
            n,
            m,
            cells,
            total: W::binom(n, m),
        }
    }

    pub fn width(&self) -> usize {
        (self.n - self.m + 1) as usize
    }

    /// Observed tables with non-zero weight.
    pub fn iter(&self) -> impl Iterator<Item = (ObservedTable, &W)> + '_ {
        let width = self.width();
        let (n, m) = (self.n, self.m);
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(move |(i, w)| {
                let (a, c) = ((i / width) as u64, (i % width) as u64);
                (ObservedTable::new(a, m - a, c, n - m - c), w)
            })
    }

    /// Assignment count of the rejection-side event for `statistic`.
    pub fn tail_count(&self, nobs: &ObservedTable, tau_n: i64, statistic: Statistic) -> W {
        let (n, m) = (self.n as i64, self.m as i64);
        let control = n - m;
        let width = self.width();
        // keys are n·m(n-m)·tau_hat; tau is scaled to match
        let obs_key = n * nobs.scaled_tau_hat();
        let tau_key = tau_n * m * control;
        let mut acc = W::zero();
        for (i, w) in self.cells.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let (a, c) = ((i / width) as i64, (i % width) as i64);
            let key = n * (a * control - c * m);
            let hit = match statistic {
                Statistic::OneSided => key >= obs_key,
                Statistic::TwoSided => (key - tau_key).abs() >= (obs_key - tau_key).abs(),
            };
            if hit {
                acc.add_assign(w);
            }
        }
        acc
    }
}

/// Test statistic: `tau_hat` (one-sided, upper tail) or `|tau_hat - tau|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PValueMode {
    #[default]
    Exact,
    MonteCarlo {
        reps: u64,
        seed: u64,
    },
}

impl PValueMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, PValueMode::Exact)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub tau_hat: Rational,
    pub prob: BigRational,
}

/// Exact distribution of `tau_hat` under a fixed potential table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullDistribution {
    pub table: PotentialTable,
    pub m: u64,
    /// Sorted by `tau_hat`, one atom per distinct value.
    pub atoms: Vec<Atom>,
}

impl NullDistribution {
    pub fn total_prob(&self) -> BigRational {
        self.atoms.iter().map(|a| a.prob.clone()).sum()
    }

    pub fn mean(&self) -> BigRational {
        self.atoms
            .iter()
            .map(|a| {
                let v = BigRational::new(
                    BigInt::from(*a.tau_hat.numer()),
                    BigInt::from(*a.tau_hat.denom()),
                );
                v * &a.prob
            })
            .sum()
    }

    /// `P(tau_hat >= value)`
    pub fn prob_ge(&self, value: Rational) -> BigRational {
        self.atoms
            .iter()
            .filter(|a| a.tau_hat >= value)
            .map(|a| a.prob.clone())
            .sum()
    }

    /// `P(tau_hat <= value)`
    pub fn prob_le(&self, value: Rational) -> BigRational {
        self.atoms
            .iter()
            .filter(|a| a.tau_hat <= value)
            .map(|a| a.prob.clone())
            .sum()
    }
}

fn check_arms(n: u64, m: u64) -> Result<()> {
    if m == 0 || m >= n {
        return Err(Error::DegenerateArm {
            treated: m,
            control: n.saturating_sub(m),
        });
    }
    Ok(())
}

/// Exact null distribution of `tau_hat` under `table` with `m` treated.
pub fn null_dist(table: &PotentialTable, m: u64) -> Result<NullDistribution> {
    let n = table.n();
    check_arms(n, m)?;
    let control = n - m;
    let mut merged: BTreeMap<i64, BigUint> = BTreeMap::new();
    for_each_split::<BigUint>(table, m, |s, w| {
        let key = s.observed(table).scaled_tau_hat();
        *merged.entry(key).or_default() += w;
    });
    let total = BigInt::from(binomial(n, m));
    let atoms = merged
        .into_iter()
        .map(|(key, w)| Atom {
            tau_hat: Rational::new(key, (m * control) as i64),
            prob: BigRational::new(BigInt::from(w), total.clone()),
        })
        .collect();
    Ok(NullDistribution {
        table: *table,
        m,
        atoms,
    })
}

/// Runs randomization tests and counts them.
#[derive(Debug, Clone)]
pub struct Tester {
    mode: PValueMode,
    max_exact_n: u64,
    tests: u64,
}

impl Default for Tester {
    fn default() -> Self {
        Self::new(PValueMode::Exact, DEFAULT_MAX_EXACT_N)
    }
}

impl Tester {
    pub fn new(mode: PValueMode, max_exact_n: u64) -> Self {
        Self {
            mode,
            max_exact_n,
            tests: 0,
        }
    }

    pub fn mode(&self) -> PValueMode {
        self.mode
    }

    /// Number of p-value evaluations so far.
    pub fn tests(&self) -> u64 {
        self.tests
    }

    /// Fails early if this tester cannot run tests at size `n`.
    pub fn check_scale(&self, n: u64) -> Result<()> {
        if self.mode.is_exact() && n > self.max_exact_n {
            return Err(Error::ScaleGuard {
                n,
                limit: self.max_exact_n,
            });
        }
        Ok(())
    }

    fn check(&self, table: &PotentialTable, nobs: &ObservedTable) -> Result<()> {
        if table.n() != nobs.n() {
            return Err(Error::SizeMismatch {
                left: table.n(),
                right: nobs.n(),
            });
        }
        nobs.validate()?;
        self.check_scale(nobs.n())
    }

    /// Whether the test of `table` has p-value `>= alpha`.
    pub fn accepts(
        &mut self,
        table: &PotentialTable,
        nobs: &ObservedTable,
        statistic: Statistic,
        alpha: ConfidenceLevel,
    ) -> Result<bool> {
        self.check(table, nobs)?;
        self.tests += 1;
        let (num, den) = (alpha.numer(), alpha.denom());
        Ok(match self.mode {
            PValueMode::Exact if nobs.n() <= U128_MAX_N => {
                let (hits, total) = exact_tail::<u128>(table, nobs, statistic);
                hits.scaled_ge(den, &total, num)
            }
            PValueMode::Exact => {
                let (hits, total) = exact_tail::<BigUint>(table, nobs, statistic);
                hits.scaled_ge(den, &total, num)
            }
            PValueMode::MonteCarlo { reps, seed } => {
                let hits = mc_hits(table, nobs, statistic, reps, table_seed(seed, table))?;
                (hits as u128).scaled_ge(den, &(reps as u128), num)
            }
        })
    }

    /// The p-value itself; for Monte Carlo mode, `hits / reps`.
    pub fn p_value(
        &mut self,
        table: &PotentialTable,
        nobs: &ObservedTable,
        statistic: Statistic,
    ) -> Result<BigRational> {
        self.check(table, nobs)?;
        self.tests += 1;
        let (hits, total) = match self.mode {
            PValueMode::Exact if nobs.n() <= U128_MAX_N => {
                let (h, t) = exact_tail::<u128>(table, nobs, statistic);
                (h.to_biguint(), t.to_biguint())
            }
            PValueMode::Exact => exact_tail::<BigUint>(table, nobs, statistic),
            PValueMode::MonteCarlo { reps, seed } => {
                let hits = mc_hits(table, nobs, statistic, reps, table_seed(seed, table))?;
                (BigUint::from(hits), BigUint::from(reps))
            }
        };
        Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
    }
}

fn exact_tail<W: Weight>(
    table: &PotentialTable,
    nobs: &ObservedTable,
    statistic: Statistic,
) -> (W, W) {
    let grid = OutcomeGrid::<W>::new(table, nobs.m());
    let hits = grid.tail_count(nobs, table.n_tau(), statistic);
    (hits, grid.total)
}

/// `p2(N) = P_N(|tau_hat - tau| >= |tau_hat_obs - tau|)`
pub fn p_two_sided(
    table: &PotentialTable,
    nobs: &ObservedTable,
    mode: PValueMode,
) -> Result<BigRational> {
    Tester::new(mode, DEFAULT_MAX_EXACT_N).p_value(table, nobs, Statistic::TwoSided)
}

/// `p1(N) = P_N(tau_hat >= tau_hat_obs)`
pub fn p_one_sided(
    table: &PotentialTable,
    nobs: &ObservedTable,
    mode: PValueMode,
) -> Result<BigRational> {
    Tester::new(mode, DEFAULT_MAX_EXACT_N).p_value(table, nobs, Statistic::OneSided)
}

/// Monte Carlo p-value estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub reps: u64,
}

pub fn mc_p(
    table: &PotentialTable,
    nobs: &ObservedTable,
    statistic: Statistic,
    reps: u64,
    seed: u64,
) -> Result<McEstimate> {
    if table.n() != nobs.n() {
        return Err(Error::SizeMismatch {
            left: table.n(),
            right: nobs.n(),
        });
    }
    nobs.validate()?;
    let hits = mc_hits(table, nobs, statistic, reps, seed)?;
    let p = hits as f64 / reps as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / reps as f64).sqrt(),
        hits,
        reps,
    })
}

/// Draws one split by sequential hypergeometric conditionals.
pub fn sample_split<R: Rng + ?Sized>(
    table: &PotentialTable,
    m: u64,
    rng: &mut R,
) -> AssignmentSplit {
    let [b11, b10, b01, _] = table.counts();
    let mut pool = table.n();
    let mut left = m;
    let draw = |kind: u64, pool: &mut u64, left: &mut u64, rng: &mut R| {
        let x = Hypergeometric::new(*pool, kind, *left)
            .expect("kind <= pool and draws <= pool")
            .sample(rng);
        *pool -= kind;
        *left -= x;
        x
    };
    let x11 = draw(b11, &mut pool, &mut left, rng);
    let x10 = draw(b10, &mut pool, &mut left, rng);
    let x01 = draw(b01, &mut pool, &mut left, rng);
    AssignmentSplit {
        x11,
        x10,
        x01,
        x00: left,
    }
}

fn mc_hits(
    table: &PotentialTable,
    nobs: &ObservedTable,
    statistic: Statistic,
    reps: u64,
    seed: u64,
) -> Result<u64> {
    if reps == 0 {
        return Err(Error::Precondition("Monte Carlo needs reps >= 1".into()));
    }
    let (n, m) = (nobs.n() as i64, nobs.m() as i64);
    let obs_key = n * nobs.scaled_tau_hat();
    let tau_key = table.n_tau() * m * (n - m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..reps {
        let key = n * sample_split(table, nobs.m(), &mut rng)
            .observed(table)
            .scaled_tau_hat();
        let hit = match statistic {
            Statistic::OneSided => key >= obs_key,
            Statistic::TwoSided => (key - tau_key).abs() >= (obs_key - tau_key).abs(),
        };
        hits += hit as u64;
    }
    Ok(hits)
}

/// Per-table stream seed, so results do not depend on evaluation order.
fn table_seed(seed: u64, table: &PotentialTable) -> u64 {
    let mut z = seed;
    for c in table.counts() {
        z = splitmix(z ^ c);
    }
    z
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn point_masses() {
        let d = null_dist(&PotentialTable::new(0, 8, 0, 0), 3).unwrap();
        assert_eq!(d.atoms.len(), 1);
        assert_eq!(d.atoms[0].tau_hat, Rational::from(1));
        assert_eq!(d.atoms[0].prob, BigRational::one());

        let d = null_dist(&PotentialTable::new(8, 0, 0, 0), 3).unwrap();
        assert_eq!(d.atoms.len(), 1);
        assert_eq!(d.atoms[0].tau_hat, Rational::from(0));
    }

    #[test]
    fn degenerate_design() {
        assert!(matches!(
            null_dist(&PotentialTable::new(1, 1, 1, 1), 0),
            Err(Error::DegenerateArm { .. })
        ));
        assert!(null_dist(&PotentialTable::new(1, 1, 1, 1), 4).is_err());
    }

    #[test]
    fn hand_counted_distribution() {
        // n=6, m=3, N=(1,2,1,2): units A=(1,1), H1,H2=(1,0), U=(0,1),
        // V1,V2=(0,0). tau_hat = (a - c)/3 with a = treated among {A,H1,H2}
        // and c = controls among {A,U}. tau_hat = 1 is impossible; 2/3 comes
        // from {A,H1,H2} (1 way) or {A,U,H} (2 ways).
        let d = null_dist(&PotentialTable::new(1, 2, 1, 2), 3).unwrap();
        assert_eq!(d.total_prob(), BigRational::one());
        assert_eq!(d.mean(), q(1, 6));
        assert_eq!(d.atoms.last().unwrap().tau_hat, Rational::new(2, 3));
        assert_eq!(d.prob_ge(Rational::new(2, 3)), q(3, 20));
    }

    #[test]
    fn p_values_trivial_cases() {
        let b = PotentialTable::new(0, 6, 0, 0);
        let nobs = ObservedTable::new(3, 0, 0, 3);
        assert_eq!(
            p_two_sided(&b, &nobs, PValueMode::Exact).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            p_one_sided(&b, &nobs, PValueMode::Exact).unwrap(),
            BigRational::one()
        );
        let est = mc_p(&b, &nobs, Statistic::TwoSided, 50, 9).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn observed_atom_is_in_two_sided_region() {
        let b = PotentialTable::new(2, 1, 1, 2);
        let nobs = ObservedTable::new(2, 1, 2, 1);
        assert_eq!(nobs.tau_hat().unwrap(), Rational::from(0));
        assert_eq!(b.tau(), Rational::from(0));
        let p = p_two_sided(&b, &nobs, PValueMode::Exact).unwrap();
        let d = null_dist(&b, 3).unwrap();
        let at_obs = d
            .atoms
            .iter()
            .find(|a| a.tau_hat == Rational::from(0))
            .map(|a| a.prob.clone())
            .unwrap();
        assert!(at_obs > BigRational::zero());
        assert!(p >= at_obs);
    }

    #[test]
    fn one_sided_complement() {
        let b = PotentialTable::new(1, 2, 1, 2);
        let nobs = ObservedTable::new(2, 1, 1, 2);
        let tau_obs = nobs.tau_hat().unwrap();
        let p1 = p_one_sided(&b, &nobs, PValueMode::Exact).unwrap();
        let d = null_dist(&b, 3).unwrap();
        let below: BigRational = d
            .atoms
            .iter()
            .filter(|a| a.tau_hat < tau_obs)
            .map(|a| a.prob.clone())
            .sum();
        assert_eq!(p1 + below, BigRational::one());
    }

    #[test]
    fn tester_counts_and_guards() {
        let mut t = Tester::new(PValueMode::Exact, 10);
        let b = PotentialTable::new(1, 2, 1, 2);
        let nobs = ObservedTable::new(2, 1, 1, 2);
        let alpha: ConfidenceLevel = "0.05".parse().unwrap();
        t.accepts(&b, &nobs, Statistic::TwoSided, alpha).unwrap();
        t.p_value(&b, &nobs, Statistic::OneSided).unwrap();
        assert_eq!(t.tests(), 2);
        let big = PotentialTable::new(3, 3, 3, 3);
        let big_obs = ObservedTable::new(3, 3, 3, 3);
        assert_eq!(
            t.accepts(&big, &big_obs, Statistic::TwoSided, alpha),
            Err(Error::ScaleGuard { n: 12, limit: 10 })
        );
        assert_eq!(t.tests(), 2);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let b = PotentialTable::new(3, 5, 4, 8);
        let nobs = ObservedTable::new(4, 6, 3, 7);
        let a = mc_p(&b, &nobs, Statistic::TwoSided, 500, 42).unwrap();
        let c = mc_p(&b, &nobs, Statistic::TwoSided, 500, 42).unwrap();
        assert_eq!(a, c);
        assert!(mc_p(&b, &nobs, Statistic::TwoSided, 0, 42).is_err());
    }

    #[test]
    fn wide_arithmetic_agrees_with_u128() {
        let b = PotentialTable::new(10, 20, 5, 25);
        let nobs = ObservedTable::new(12, 18, 6, 24);
        for st in [Statistic::OneSided, Statistic::TwoSided] {
            let (h1, t1) = exact_tail::<u128>(&b, &nobs, st);
            let (h2, t2) = exact_tail::<BigUint>(&b, &nobs, st);
            assert_eq!((h1.to_biguint(), t1.to_biguint()), (h2, t2));
        }
    }

    #[test]
    fn large_n_runs_in_big_arithmetic() {
        let b = PotentialTable::new(40, 40, 40, 40);
        let nobs = ObservedTable::new(40, 40, 40, 40);
        let p = p_two_sided(&b, &nobs, PValueMode::Exact).unwrap();
        assert_eq!(p, BigRational::one());
    }
}
