use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Significance level `alpha` held as a reduced fraction, so that `p >= alpha`
/// is decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConfidenceLevel {
    numer: u64,
    denom: u64,
}

impl ConfidenceLevel {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer >= denom {
            return Err(Error::InvalidLevel(format!("{numer}/{denom}")));
        }
        let g = numer.gcd(&denom);
        Ok(Self {
            numer: numer / g,
            denom: denom / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.numer
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    /// `alpha / 2`, as used for each margin of a Bonferroni combination.
    pub fn halved(&self) -> Self {
        Self::new(self.numer, self.denom * 2).expect("alpha/2 is a valid level")
    }

    pub fn alpha_f64(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }

    /// Confidence `1 - alpha` as a float, for display.
    pub fn confidence_f64(&self) -> f64 {
        1.0 - self.alpha_f64()
    }
}

impl fmt::Display for ConfidenceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

/// Accepts a decimal literal (`0.05`, converted exactly to `1/20`) or a
/// fraction `a/b`.
impl FromStr for ConfidenceLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_err = || Error::Parse {
            what: "alpha",
            input: s.to_string(),
        };
        if let Some((a, b)) = s.split_once('/') {
            let a = a.trim().parse::<u64>().map_err(|_| parse_err())?;
            let b = b.trim().parse::<u64>().map_err(|_| parse_err())?;
            return Self::new(a, b);
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(parse_err());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(parse_err());
        }
        let denom = 10u64.pow(frac_part.len() as u32);
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| parse_err())?
        };
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| parse_err())?
        };
        let numer = int_val
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(|| Error::InvalidLevel(s.to_string()))?;
        Self::new(numer, denom).map_err(|_| Error::InvalidLevel(s.to_string()))
    }
}

impl Serialize for ConfidenceLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConfidenceLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
