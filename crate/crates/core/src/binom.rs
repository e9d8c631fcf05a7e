//! Exact binomial coefficients and the integer weight types used to
//! accumulate assignment counts.
//!
//! Every probability in this crate is a count of treatment assignments
//! divided by `C(n, m)`. Counts are accumulated in `u128` whenever the
//! largest coefficient of the row fits, and in [`BigUint`] otherwise.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Largest `n` for which every `C(n, k)` fits in a `u128`.
pub const U128_MAX_N: u64 = 130;

fn u128_rows() -> &'static [Vec<u128>] {
    static ROWS: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(U128_MAX_N as usize + 1);
        rows.push(vec![1]);
        for n in 1..=U128_MAX_N as usize {
            let prev = &rows[n - 1];
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1] + prev[k];
            }
            rows.push(row);
        }
        rows
    })
}

static BIG_ROWS: RwLock<Vec<Vec<BigUint>>> = RwLock::new(Vec::new());

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return <BigUint as Zero>::zero();
    }
    if n <= U128_MAX_N {
        return BigUint::from(u128_rows()[n as usize][k as usize]);
    }
    {
        let rows = BIG_ROWS.read().expect("binomial cache poisoned");
        if let Some(row) = rows.get(n as usize) {
            return row[k as usize].clone();
        }
    }
    let mut rows = BIG_ROWS.write().expect("binomial cache poisoned");
    if rows.is_empty() {
        rows.push(vec![BigUint::one()]);
    }
    while rows.len() <= n as usize {
        let prev = rows.last().unwrap();
        let len = prev.len() + 1;
        let mut row = Vec::with_capacity(len);
        row.push(BigUint::one());
        for j in 1..len - 1 {
            row.push(&prev[j - 1] + &prev[j]);
        }
        row.push(BigUint::one());
        rows.push(row);
    }
    rows[n as usize][k as usize].clone()
}

pub(crate) fn binomial_u128(n: u64, k: u64) -> u128 {
    debug_assert!(n <= U128_MAX_N);
    if k > n {
        0
    } else {
        u128_rows()[n as usize][k as usize]
    }
}

/// Non-negative integer used to count weighted assignments.
pub(crate) trait Weight: Clone + Send + Sync {
    fn zero() -> Self;
    fn binom(n: u64, k: u64) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn add_assign(&mut self, rhs: &Self);
    /// Panics if `rhs > self`.
    fn sub(&self, rhs: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// `self · a >= rhs · b`
    fn scaled_ge(&self, a: u64, rhs: &Self, b: u64) -> bool;
    /// `self · a > rhs · b`
    fn scaled_gt(&self, a: u64, rhs: &Self, b: u64) -> bool;
    fn to_biguint(&self) -> BigUint;
}

impl Weight for u128 {
    fn zero() -> Self {
        0
    }

    fn binom(n: u64, k: u64) -> Self {
        binomial_u128(n, k)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn scaled_ge(&self, a: u64, rhs: &Self, b: u64) -> bool {
        match (self.checked_mul(a as u128), rhs.checked_mul(b as u128)) {
            (Some(l), Some(r)) => l >= r,
            _ => BigUint::from(*self) * a >= BigUint::from(*rhs) * b,
        }
    }

    fn scaled_gt(&self, a: u64, rhs: &Self, b: u64) -> bool {
        match (self.checked_mul(a as u128), rhs.checked_mul(b as u128)) {
            (Some(l), Some(r)) => l > r,
            _ => BigUint::from(*self) * a > BigUint::from(*rhs) * b,
        }
    }

    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }

    fn binom(n: u64, k: u64) -> Self {
        binomial(n, k)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn scaled_ge(&self, a: u64, rhs: &Self, b: u64) -> bool {
        self * a >= rhs * b
    }

    fn scaled_gt(&self, a: u64, rhs: &Self, b: u64) -> bool {
        self * a > rhs * b
    }

    fn to_biguint(&self) -> BigUint {
        self.clone()
    }
}
