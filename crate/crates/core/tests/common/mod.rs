//! Exhaustive property checks shared by the property tests and the
//! acceptance suite. Each check returns how many cases it looked at and a
//! description of every violation.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use ate_exact::level::ConfidenceLevel;
use ate_exact::methods::{frontier_scan, one_sided_lower_accepted, two_sided_accepted, Options};
use ate_exact::oracle::{brute_compatibility, enumerate_assignments, Oracle, UnitPotentials};
use ate_exact::randtest::{null_dist, NullDistribution, Statistic};
use ate_exact::tables::{all_observed_tables, all_potential_tables, enumerate_compatible};
use ate_exact::{LabelSwitch, ObservedTable, PotentialTable, Rational, TableMove};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Default)]
pub struct Outcome {
    pub checked: u64,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(msg());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    pub fn ok(&self) -> bool {
        self.checked > 0 && self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let shown: Vec<&str> = self
            .failures
            .iter()
            .filter(|f| !f.is_empty())
            .map(String::as_str)
            .collect();
        format!(
            "{} cases, {} violations {:?}",
            self.checked,
            self.failures.len(),
            shown
        )
    }

    pub fn assert_ok(&self, what: &str) {
        assert!(self.ok(), "{what}: {}", self.summary());
    }
}

pub fn level(s: &str) -> ConfidenceLevel {
    s.parse().unwrap()
}

/// Observed tables of size `n` with both arms non-empty.
pub fn observed_tables(n: u64) -> Vec<ObservedTable> {
    (1..n).flat_map(|m| all_observed_tables(n, m)).collect()
}

/// A null distribution as integer assignment counts over `total = C(n, m)`.
pub struct Counts {
    pub atoms: Vec<(Rational, u128)>,
    pub total: u128,
}

impl Counts {
    pub fn from_dist(d: &NullDistribution) -> Self {
        let total = (1..=d.m).fold(1u128, |acc, i| {
            acc * (d.table.n() - d.m + i) as u128 / i as u128
        });
        let scale = BigRational::from_integer(BigInt::from(total));
        let atoms = d
            .atoms
            .iter()
            .map(|a| {
                let c = &a.prob * &scale;
                assert!(c.is_integer());
                (a.tau_hat, c.to_integer().to_u128().unwrap())
            })
            .collect();
        Self { atoms, total }
    }

    pub fn ge(&self, v: Rational) -> u128 {
        self.atoms.iter().filter(|a| a.0 >= v).map(|a| a.1).sum()
    }

    /// Count of `|tau_hat - tau| >= |obs - tau|`.
    pub fn two_sided(&self, tau: Rational, obs: Rational) -> u128 {
        let d = (obs - tau).abs();
        self.atoms
            .iter()
            .filter(|a| (a.0 - tau).abs() >= d)
            .map(|a| a.1)
            .sum()
    }

    pub fn accepts(&self, hits: u128, alpha: ConfidenceLevel) -> bool {
        hits * alpha.denom() as u128 >= alpha.numer() as u128 * self.total
    }
}

/// Null distributions for every potential table of size `n` and every `m`.
pub struct NullCache {
    map: HashMap<(PotentialTable, u64), Counts>,
}

impl NullCache {
    pub fn new(n: u64) -> Self {
        let mut map = HashMap::new();
        for t in all_potential_tables(n) {
            for m in 1..n {
                map.insert((t, m), Counts::from_dist(&null_dist(&t, m).unwrap()));
            }
        }
        Self { map }
    }

    pub fn get(&self, t: &PotentialTable, m: u64) -> &Counts {
        &self.map[&(*t, m)]
    }
}

fn rational_big(r: Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// The compatibility criterion agrees with the search over treated counts.
pub fn compatibility_vs_oracle(max_n: u64) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        let potentials: Vec<_> = all_potential_tables(n).collect();
        for nobs in observed_tables(n) {
            for t in &potentials {
                let fast = t.is_compatible(&nobs).unwrap();
                out.check(fast == brute_compatibility(t, &nobs), || {
                    format!("{t} vs {nobs}: criterion says {fast}")
                });
            }
        }
    }
    out
}

/// Every integer in the attainable range is `n·tau` of some compatible table.
pub fn tau_grid_attained(max_n: u64) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        for nobs in observed_tables(n) {
            let got: BTreeSet<i64> = enumerate_compatible(&nobs)
                .iter()
                .map(|t| t.n_tau())
                .collect();
            let want: BTreeSet<i64> =
                (-((nobs.n10 + nobs.n01) as i64)..=(nobs.n11 + nobs.n00) as i64).collect();
            out.check(got == want, || format!("{nobs}: attained {got:?}"));
        }
    }
    out
}

/// `p1(N + D) >= p1(N)` for every move `D`, every `N`, `m` and threshold.
pub fn p1_move_monotone(max_n: u64) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        let cache = NullCache::new(n);
        for m in 1..n {
            let thresholds: BTreeSet<Rational> = all_observed_tables(n, m)
                .map(|o| o.tau_hat().unwrap())
                .collect();
            for t in all_potential_tables(n) {
                for mv in TableMove::ALL {
                    let Some(u) = t.apply(mv) else { continue };
                    let (a, b) = (cache.get(&t, m), cache.get(&u, m));
                    for &obs in &thresholds {
                        out.check(b.ge(obs) >= a.ge(obs), || {
                            format!("{t} -> {u}, m={m}, obs={obs}")
                        });
                    }
                }
            }
        }
    }
    out
}

/// `p2(N + D) >= p2(N)` whenever both tables have `tau <= tau_hat_obs`:
/// over `T0` moves for every `m <= n/2`, or with `balanced_only` over all
/// moves for `m = n/2`.
pub fn p2_move_monotone(max_n: u64, balanced_only: bool) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        let cache = NullCache::new(n);
        for m in 1..=n / 2 {
            let balanced = 2 * m == n;
            if balanced_only && !balanced {
                continue;
            }
            let observed: Vec<Rational> = all_observed_tables(n, m)
                .map(|o| o.tau_hat().unwrap())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for t in all_potential_tables(n) {
                for mv in TableMove::ALL {
                    if !balanced_only && !mv.in_t0() {
                        continue;
                    }
                    let Some(u) = t.apply(mv) else { continue };
                    let (a, b) = (cache.get(&t, m), cache.get(&u, m));
                    for &obs in &observed {
                        if t.tau() > obs || u.tau() > obs {
                            continue;
                        }
                        out.check(
                            b.two_sided(u.tau(), obs) >= a.two_sided(t.tau(), obs),
                            || format!("{t} -> {u}, m={m}, obs={obs}"),
                        );
                    }
                }
            }
        }
    }
    out
}

/// Lower-tail symmetry: `P_N(tau_hat >= v) = P_{switch_y N}(tau_hat <= -v)`.
pub fn switch_symmetry(max_n: u64) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        for m in 1..n {
            for t in all_potential_tables(n) {
                let d = null_dist(&t, m).unwrap();
                let s = null_dist(&t.switch_y(), m).unwrap();
                for a in &d.atoms {
                    out.check(d.prob_ge(a.tau_hat) == s.prob_le(-a.tau_hat), || {
                        format!("{t}, m={m}, v={}", a.tau_hat)
                    });
                }
            }
        }
    }
    out
}

/// With the one-sided statistic, `p1(N) >= alpha` exactly when `N10` is at
/// least the frontier value for `(N11, N01)`.
pub fn one_sided_frontier_iff(max_n: u64, alphas: &[ConfidenceLevel]) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        let cache = NullCache::new(n);
        for nobs in observed_tables(n) {
            let obs = nobs.tau_hat().unwrap();
            for &alpha in alphas {
                let scan =
                    frontier_scan(&nobs, alpha, Statistic::OneSided, &Options::default()).unwrap();
                for f in &scan.frontiers {
                    for (b01, &bound) in f.bounds.iter().enumerate() {
                        for b10 in 0..=n - f.n11 - b01 as u64 {
                            let t = PotentialTable::new(
                                f.n11,
                                b10,
                                b01 as u64,
                                n - f.n11 - b10 - b01 as u64,
                            );
                            let c = cache.get(&t, nobs.m());
                            let accepted = c.accepts(c.ge(obs), alpha);
                            out.check(accepted == (b10 as i64 >= bound), || {
                                format!("{nobs} alpha={alpha} {t}: p1 accepts {accepted}, bound {bound}")
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// For `m = n/2` and `tau(N) <= tau_hat_obs`, `p2(N) >= alpha` exactly when
/// `N10` is at least the frontier value.
pub fn two_sided_frontier_iff_balanced(max_n: u64, alphas: &[ConfidenceLevel]) -> Outcome {
    let mut out = Outcome::default();
    for n in (2..=max_n).step_by(2) {
        let cache = NullCache::new(n);
        for nobs in all_observed_tables(n, n / 2) {
            let obs = nobs.tau_hat().unwrap();
            for &alpha in alphas {
                let scan =
                    frontier_scan(&nobs, alpha, Statistic::TwoSided, &Options::default()).unwrap();
                for f in &scan.frontiers {
                    for (b01, &bound) in f.bounds.iter().enumerate() {
                        for b10 in 0..=n - f.n11 - b01 as u64 {
                            let t = PotentialTable::new(
                                f.n11,
                                b10,
                                b01 as u64,
                                n - f.n11 - b10 - b01 as u64,
                            );
                            if t.tau() > obs {
                                continue;
                            }
                            let c = cache.get(&t, nobs.m());
                            let accepted = c.accepts(c.two_sided(t.tau(), obs), alpha);
                            out.check(accepted == (b10 as i64 >= bound), || {
                                format!("{nobs} alpha={alpha} {t}: p2 accepts {accepted}, bound {bound}")
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn contiguous(set: &BTreeSet<i64>) -> bool {
    match (set.first(), set.last()) {
        (Some(lo), Some(hi)) => (hi - lo + 1) as usize == set.len(),
        _ => false,
    }
}

/// Accepted `n·tau` sets are integer ranges: one-sided for every design, and
/// two-sided for balanced designs. The one-sided set ends at `n11 + n00`.
pub fn accepted_sets_contiguous(max_n: u64, alphas: &[ConfidenceLevel]) -> Outcome {
    let mut out = Outcome::default();
    let opts = Options::default();
    for n in 2..=max_n {
        for nobs in observed_tables(n) {
            for &alpha in alphas {
                let (one, _) = one_sided_lower_accepted(&nobs, alpha, &opts).unwrap();
                out.check(
                    contiguous(&one) && one.last() == Some(&((nobs.n11 + nobs.n00) as i64)),
                    || format!("{nobs} alpha={alpha}: one-sided {one:?}"),
                );
                if 2 * nobs.m() == n {
                    let (two, _) = two_sided_accepted(&nobs, alpha, &opts).unwrap();
                    out.check(contiguous(&two), || {
                        format!("{nobs} alpha={alpha}: two-sided {two:?}")
                    });
                }
            }
        }
    }
    out
}

/// `E[tau_hat] = tau(N)` exactly.
pub fn unbiasedness(max_n: u64) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        for m in 1..n {
            for t in all_potential_tables(n) {
                let d = null_dist(&t, m).unwrap();
                let ok = d.mean() == rational_big(t.tau())
                    && d.total_prob() == BigRational::from_integer(1.into());
                out.check(ok, || format!("{t}, m={m}: mean {}", d.mean()));
            }
        }
    }
    out
}

/// The split-based distribution equals subset-by-subset enumeration.
pub fn null_dist_vs_enumeration(max_n: u64) -> Outcome {
    let mut out = Outcome::default();
    for n in 2..=max_n {
        for m in 1..n {
            for t in all_potential_tables(n) {
                let fast: Vec<(Rational, BigRational)> = null_dist(&t, m)
                    .unwrap()
                    .atoms
                    .into_iter()
                    .filter(|a| !a.prob.is_zero())
                    .map(|a| (a.tau_hat, a.prob))
                    .collect();
                let slow = enumerate_assignments(&UnitPotentials::from_table(&t), m).unwrap();
                out.check(fast == slow, || format!("{t}, m={m}"));
            }
        }
    }
    out
}

/// The scanned frontier equals the frontier computed from its definition
/// with enumerated p-values.
pub fn frontier_vs_oracle(max_n: u64, alphas: &[ConfidenceLevel]) -> Outcome {
    let mut out = Outcome::default();
    let mut oracle = Oracle::new();
    for n in 2..=max_n {
        for nobs in observed_tables(n) {
            for &alpha in alphas {
                let mut statistics = vec![Statistic::OneSided];
                if 2 * nobs.m() <= n {
                    statistics.push(Statistic::TwoSided);
                }
                for statistic in statistics {
                    let scan = frontier_scan(&nobs, alpha, statistic, &Options::default()).unwrap();
                    for f in &scan.frontiers {
                        for (b01, &bound) in f.bounds.iter().enumerate() {
                            let want = oracle
                                .brute_frontier(f.n11, b01 as u64, &nobs, alpha, statistic)
                                .unwrap();
                            out.check(bound == want, || {
                                format!(
                                    "{nobs} alpha={alpha} {statistic:?} N11={} N01={b01}: scan {bound}, oracle {want}",
                                    f.n11
                                )
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn choose(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (1..=k.min(n - k)).fold(1u128, |acc, i| acc * (n - i + 1) as u128 / i as u128)
}

/// Equal-tail interval for the number of marked units in a population of
/// `t`, from `x` marked in a sample of `s`, by summing the pmf directly.
pub fn equal_tail_oracle(t: u64, s: u64, x: u64, alpha: ConfidenceLevel) -> (u64, u64) {
    let total = choose(t, s);
    // tail > alpha/2  <=>  2·count·den > num·total
    let big = |tail: u128| tail * 2 * alpha.denom() as u128 > alpha.numer() as u128 * total;
    let upper = |a: u64| {
        (x..=s)
            .map(|k| choose(a, k) * choose(t - a, s - k))
            .sum::<u128>()
    };
    let lower = |a: u64| {
        (0..=x)
            .map(|k| choose(a, k) * choose(t - a, s - k))
            .sum::<u128>()
    };
    let lo = (0..=t).find(|&a| big(upper(a))).unwrap();
    let hi = (0..=t).rev().find(|&a| big(lower(a))).unwrap();
    (lo, hi)
}
