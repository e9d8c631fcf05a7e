//! Observed and potential 2×2 tables.
//!
//! An [`ObservedTable`] counts units by (treatment, observed outcome); a
//! [`PotentialTable`] counts units by their pair of potential outcomes
//! `(y(1), y(0))`. All effect quantities are exact rationals.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Counts `(n11, n10, n01, n00)` of units with `(Z, Y)` equal to
/// `(1,1), (1,0), (0,1), (0,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObservedTable {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl ObservedTable {
    pub const fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Self {
        Self { n11, n10, n01, n00 }
    }

    pub fn n(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    /// Size of the treated arm.
    pub fn m(&self) -> u64 {
        self.n11 + self.n10
    }

    /// Size of the control arm.
    pub fn control(&self) -> u64 {
        self.n01 + self.n00
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.n11, self.n10, self.n01, self.n00]
    }

    /// Fails with [`Error::DegenerateArm`] unless both arms are non-empty.
    pub fn validate(&self) -> Result<()> {
        if self.m() == 0 || self.control() == 0 {
            return Err(Error::DegenerateArm {
                treated: self.m(),
                control: self.control(),
            });
        }
        Ok(())
    }

    /// Difference in observed means, `n11/m - n01/(n-m)`.
    pub fn tau_hat(&self) -> Result<Rational> {
        self.validate()?;
        let m = self.m() as i64;
        let c = self.control() as i64;
        Ok(Rational::new(self.scaled_tau_hat(), m * c))
    }

    /// `m(n-m)·tau_hat`, always an integer.
    pub fn scaled_tau_hat(&self) -> i64 {
        self.n11 as i64 * self.control() as i64 - self.n01 as i64 * self.m() as i64
    }

    /// Inclusive range of `n·tau` over potential tables compatible with
    /// this table: `[-(n10 + n01), n11 + n00]`.
    pub fn attainable_tau_range(&self) -> (i64, i64) {
        (
            -((self.n10 + self.n01) as i64),
            (self.n11 + self.n00) as i64,
        )
    }

    /// `floor(k + n·tau_hat)` computed without rounding error.
    pub fn floor_shifted_n_tau_hat(&self, k: i64) -> i64 {
        let den = (self.m() * self.control()) as i64;
        let num = self.n() as i64 * self.scaled_tau_hat();
        k + num.div_euclid(den)
    }

    /// `ceil(-n·tau_hat)`.
    pub fn ceil_neg_n_tau_hat(&self) -> i64 {
        let den = (self.m() * self.control()) as i64;
        let num = -(self.n() as i64) * self.scaled_tau_hat();
        -((-num).div_euclid(den))
    }
}

impl fmt::Display for ObservedTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n11, self.n10, self.n01, self.n00)
    }
}

impl FromStr for ObservedTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let [a, b, c, d] = parse_four(s)?;
        Ok(Self::new(a, b, c, d))
    }
}

pub(crate) fn parse_four(s: &str) -> Result<[u64; 4]> {
    let err = || Error::Parse {
        what: "table",
        input: s.to_string(),
    };
    let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<u64> = trimmed
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| err()))
        .collect::<Result<_>>()?;
    parts.try_into().map_err(|_| err())
}

/// Counts `(N11, N10, N01, N00)` of units whose potential outcomes
/// `(y(1), y(0))` are `(1,1), (1,0), (0,1), (0,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PotentialTable {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl PotentialTable {
    pub const fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Self {
        Self { n11, n10, n01, n00 }
    }

    pub fn n(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    /// Number of units with `y(1) = 1`.
    pub fn n1plus(&self) -> u64 {
        self.n11 + self.n10
    }

    /// Number of units with `y(0) = 1`.
    pub fn nplus1(&self) -> u64 {
        self.n11 + self.n01
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.n11, self.n10, self.n01, self.n00]
    }

    pub fn from_counts(c: [u64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// `n·tau = N10 - N01`.
    pub fn n_tau(&self) -> i64 {
        self.n10 as i64 - self.n01 as i64
    }

    /// Average causal effect `(N10 - N01)/n`.
    ///
    /// Panics on the empty table.
    pub fn tau(&self) -> Rational {
        Rational::new(self.n_tau(), self.n() as i64)
    }

    /// Applies a move, returning `None` if a count would go negative.
    pub fn apply(&self, mv: TableMove) -> Option<Self> {
        let d = mv.delta();
        let mut out = [0u64; 4];
        for (i, (c, dc)) in self.counts().into_iter().zip(d).enumerate() {
            out[i] = c.checked_add_signed(dc)?;
        }
        Some(Self::from_counts(out))
    }

    /// Whether some unit-level assignment of potential outcomes summarized by
    /// this table reproduces `nobs` under the realized treatment assignment.
    pub fn is_compatible(&self, nobs: &ObservedTable) -> Result<bool> {
        if self.n() != nobs.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: nobs.n(),
            });
        }
        Ok(compatible_unchecked(self, nobs))
    }
}

pub(crate) fn compatible_unchecked(big: &PotentialTable, nobs: &ObservedTable) -> bool {
    let n = nobs.n() as i64;
    let (n11, n10, n01) = (nobs.n11 as i64, nobs.n10 as i64, nobs.n01 as i64);
    let (b11, b10) = (big.n11 as i64, big.n10 as i64);
    let bp1 = big.nplus1() as i64;
    let lo = 0.max(n11 - b10).max(b11 - n01).max(bp1 - n10 - n01);
    let hi = b11.min(n11).min(bp1 - n01).min(n - b10 - n01 - n10);
    lo <= hi
}

impl fmt::Display for PotentialTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n11, self.n10, self.n01, self.n00)
    }
}

impl FromStr for PotentialTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(Self::from_counts(parse_four(s)?))
    }
}

/// Single-unit changes of a potential table that raise `n·tau` by one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableMove {
    /// A `(0,0)` unit becomes `(1,0)`.
    NeverToHelped,
    /// An `(1,1)` unit becomes `(1,0)`.
    AlwaysToHelped,
    /// A `(0,1)` unit becomes `(1,1)`.
    HurtToAlways,
    /// A `(0,1)` unit becomes `(0,0)`.
    HurtToNever,
}

impl TableMove {
    pub const ALL: [TableMove; 4] = [
        TableMove::NeverToHelped,
        TableMove::AlwaysToHelped,
        TableMove::HurtToAlways,
        TableMove::HurtToNever,
    ];

    pub fn delta(self) -> [i64; 4] {
        match self {
            TableMove::NeverToHelped => [0, 1, 0, -1],
            TableMove::AlwaysToHelped => [-1, 1, 0, 0],
            TableMove::HurtToAlways => [1, 0, -1, 0],
            TableMove::HurtToNever => [0, 0, -1, 1],
        }
    }

    /// Moves that only touch the control-side outcome `y(0)`.
    pub fn in_t0(self) -> bool {
        matches!(self, TableMove::AlwaysToHelped | TableMove::HurtToNever)
    }
}

/// Relabelling of outcomes or arms.
pub trait LabelSwitch: Sized {
    /// Swap the outcome labels 0 and 1.
    fn switch_y(&self) -> Self;
    /// Swap treatment and control.
    fn switch_z(&self) -> Self;
}

impl LabelSwitch for ObservedTable {
    fn switch_y(&self) -> Self {
        Self::new(self.n10, self.n11, self.n00, self.n01)
    }

    fn switch_z(&self) -> Self {
        Self::new(self.n01, self.n00, self.n11, self.n10)
    }
}

impl LabelSwitch for PotentialTable {
    fn switch_y(&self) -> Self {
        Self::new(self.n00, self.n01, self.n10, self.n11)
    }

    fn switch_z(&self) -> Self {
        Self::new(self.n11, self.n01, self.n10, self.n00)
    }
}

/// All potential tables compatible with `nobs`, ordered lexicographically on
/// `(N11, N10, N01)`.
pub fn enumerate_compatible(nobs: &ObservedTable) -> Vec<PotentialTable> {
    let n = nobs.n();
    let mut out = Vec::new();
    for b11 in 0..=(nobs.n11 + nobs.n01).min(n) {
        for b10 in 0..=(n - b11) {
            for b01 in 0..=(n - b11 - b10) {
                let t = PotentialTable::new(b11, b10, b01, n - b11 - b10 - b01);
                if compatible_unchecked(&t, nobs) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// How the unobserved outcome is filled in for each observed cell: `a` of
/// the treated ones, `b` of the treated zeros, `c` of the control ones and
/// `d` of the control zeros have the other potential outcome equal to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Completion {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Completion {
    pub fn table(&self, nobs: &ObservedTable) -> PotentialTable {
        PotentialTable::new(
            self.a + self.c,
            nobs.n11 - self.a + self.d,
            self.b + nobs.n01 - self.c,
            nobs.n10 - self.b + nobs.n00 - self.d,
        )
    }
}

/// Every completion of the missing potential outcomes, of which there are
/// `(n11+1)(n10+1)(n01+1)(n00+1)`. Distinct completions can give the same
/// potential table; the set of tables reached is exactly the compatible set.
pub fn enumerate_completions(nobs: &ObservedTable) -> Vec<(Completion, PotentialTable)> {
    let mut out = Vec::new();
    for a in 0..=nobs.n11 {
        for b in 0..=nobs.n10 {
            for c in 0..=nobs.n01 {
                for d in 0..=nobs.n00 {
                    let k = Completion { a, b, c, d };
                    out.push((k, k.table(nobs)));
                }
            }
        }
    }
    out
}

/// Every potential table with total `n`, in lexicographic order.
pub fn all_potential_tables(n: u64) -> impl Iterator<Item = PotentialTable> {
    (0..=n).flat_map(move |a| {
        (0..=n - a).flat_map(move |b| {
            (0..=n - a - b).map(move |c| PotentialTable::new(a, b, c, n - a - b - c))
        })
    })
}

/// Every observed table with total `n` and treated arm size `m`.
pub fn all_observed_tables(n: u64, m: u64) -> impl Iterator<Item = ObservedTable> {
    (0..=m).flat_map(move |a| (0..=n - m).map(move |c| ObservedTable::new(a, m - a, c, n - m - c)))
}
